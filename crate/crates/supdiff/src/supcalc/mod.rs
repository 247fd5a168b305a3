//! Finite supremum families: active sets, weighting parameters, the
//! normal-cone-to-domain characterizations and the normal-cone-free
//! subdifferential formulas, each computable at a fixed slack so the set
//! identities can be checked exactly.
//!
//! The index set is finite throughout. That makes it compact (discrete
//! topology) with the upper-semicontinuity requirements satisfied vacuously,
//! and the common domain of the supremum is exactly the intersection of the
//! member domains.

mod normal_cone;
mod subdiff;

use std::collections::BTreeSet;

use num::{One, Signed, Zero};

use crate::convexfn::{FnValue, PolyConvexFn};
use crate::error::{Error, Result};
use crate::kernel::{Scalar, Vector};

pub use normal_cone::PositivePartCones;
pub use subdiff::{
    EpsRun, EpsRunConfig, EpsStep, ProbeOutcome, RhoChoice, SubdiffFormula,
};

/// A finite indexed family of polyhedral convex functions sharing one
/// ambient dimension.
#[derive(Clone, Debug)]
pub struct SupFamily {
    members: Vec<FamilyMember>,
    dim: usize,
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub id: String,
    pub f: PolyConvexFn,
}

/// Exact index sets at a query point: the active indices, the indices active
/// within `eps`, and the latter widened by every index with a nonnegative
/// value.
#[derive(Clone, Debug)]
pub struct ActiveSets {
    pub sup_value: Scalar,
    pub values: Vec<Scalar>,
    pub active: BTreeSet<usize>,
    pub eps_active: BTreeSet<usize>,
    pub eps_active_plus: BTreeSet<usize>,
}

/// Multiplicative weights in (0, 1], one per family member.
#[derive(Clone, Debug)]
pub struct Weights {
    values: Vec<Scalar>,
}

impl Weights {
    pub fn new(values: Vec<Scalar>) -> Result<Self> {
        for w in &values {
            if !w.is_positive() || *w > Scalar::one() {
                return Err(Error::Domain(format!(
                    "weight {w} outside (0, 1]"
                )));
            }
        }
        Ok(Weights { values })
    }

    pub fn ones(len: usize) -> Self {
        Weights {
            values: vec![Scalar::one(); len],
        }
    }

    pub fn get(&self, t: usize) -> &Scalar {
        &self.values[t]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl SupFamily {
    pub fn new(members: Vec<FamilyMember>) -> Result<Self> {
        let dim = members
            .first()
            .map(|m| m.f.dim())
            .ok_or_else(|| Error::Domain("a supremum family needs at least one member".into()))?;
        for m in &members {
            if m.f.dim() != dim {
                return Err(Error::Dimension(format!(
                    "member '{}' has dimension {} but the family is {dim}-dim",
                    m.id,
                    m.f.dim()
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for m in &members {
            if !ids.insert(m.id.clone()) {
                return Err(Error::Domain(format!("duplicate member id '{}'", m.id)));
            }
        }
        Ok(SupFamily { members, dim })
    }

    pub fn from_functions(fs: Vec<PolyConvexFn>) -> Result<Self> {
        Self::new(
            fs.into_iter()
                .enumerate()
                .map(|(i, f)| FamilyMember {
                    id: format!("f{}", i + 1),
                    f,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn member(&self, t: usize) -> &PolyConvexFn {
        &self.members[t].f
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.members.iter().position(|m| m.id == id)
    }

    /// The supremum collapsed into normal form: the union of all pieces
    /// maximized over the intersection of all domains. Fails when the common
    /// domain is empty (the supremum would be improper).
    pub fn collapse(&self) -> Result<PolyConvexFn> {
        let mut pieces = Vec::new();
        for m in &self.members {
            for p in m.f.pieces() {
                if !pieces.contains(p) {
                    pieces.push(p.clone());
                }
            }
        }
        let mut domain = self.members[0].f.domain_poly().hrep()?.clone();
        for m in &self.members[1..] {
            domain = domain.stacked(m.f.domain_poly().hrep()?)?;
        }
        PolyConvexFn::new(pieces, domain)
    }

    /// Member values at `x`; an error when `x` misses any member's domain
    /// (the supremum is `+infinity` there).
    pub fn values_at(&self, x: &Vector) -> Result<Vec<Scalar>> {
        self.members
            .iter()
            .map(|m| match m.f.eval(x)? {
                FnValue::Finite(s) => Ok(s),
                FnValue::PlusInfinity => Err(Error::Domain(format!(
                    "query point lies outside the domain of member '{}'",
                    m.id
                ))),
            })
            .collect()
    }

    /// Exact active sets at `x` for a slack `eps >= 0`.
    pub fn active_sets(&self, x: &Vector, eps: &Scalar) -> Result<ActiveSets> {
        if eps.is_negative() {
            return Err(Error::Domain("active sets need a nonnegative slack".into()));
        }
        let values = self.values_at(x)?;
        let sup_value = values.iter().max().expect("nonempty family").clone();
        let threshold = &sup_value - eps;
        let mut active = BTreeSet::new();
        let mut eps_active = BTreeSet::new();
        let mut eps_active_plus = BTreeSet::new();
        for (t, v) in values.iter().enumerate() {
            if *v == sup_value {
                active.insert(t);
            }
            if *v >= threshold {
                eps_active.insert(t);
            }
            if *v >= threshold || !v.is_negative() {
                eps_active_plus.insert(t);
            }
        }
        Ok(ActiveSets {
            sup_value,
            values,
            active,
            eps_active,
            eps_active_plus,
        })
    }

    /// The worked weighting example: weight one on the eps-active indices
    /// and `-eps / (2 f_t(x) - 2 f(x) + eps)` elsewhere, which always lands
    /// in (0, 1) off the active set.
    pub fn biased_weights(&self, x: &Vector, eps: &Scalar) -> Result<Weights> {
        if !eps.is_positive() {
            return Err(Error::Domain("weights need a positive slack".into()));
        }
        let sets = self.active_sets(x, eps)?;
        let values = (0..self.len())
            .map(|t| {
                if sets.eps_active.contains(&t) {
                    Scalar::one()
                } else {
                    let denom = &(&sets.values[t] - &sets.sup_value) * &Scalar::from_integer(2.into()) + eps;
                    -eps / &denom
                }
            })
            .collect();
        Weights::new(values)
    }

    /// Slack-dependent inactive weights `eps / (2 f(x) - 2 f_t(x) + eps)`,
    /// one on the active set.
    pub fn rho_weights(&self, x: &Vector, eps: &Scalar) -> Result<Weights> {
        if !eps.is_positive() {
            return Err(Error::Domain("weights need a positive slack".into()));
        }
        let sets = self.active_sets(x, &Scalar::zero())?;
        let values = (0..self.len())
            .map(|t| {
                if sets.active.contains(&t) {
                    Scalar::one()
                } else {
                    let denom = &(&sets.sup_value - &sets.values[t]) * &Scalar::from_integer(2.into()) + eps;
                    eps / &denom
                }
            })
            .collect();
        Weights::new(values)
    }
}
