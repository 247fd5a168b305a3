//! Normal-cone-free right-hand sides for the subdifferential of the
//! supremum, evaluated at a fixed slack, plus the driver that realizes the
//! intersection over shrinking slacks at desk scale: exact per-slack
//! inclusion checks, a stabilization flag, and probe exclusion with
//! geometric refinement down to a configured floor.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::{Scalar, Vector};
use crate::polyhedra::{closed_conv_union, Polyhedron};

use super::{SupFamily, Weights};

/// Which right-hand side to evaluate per slack.
#[derive(Clone, Debug)]
pub enum SubdiffFormula {
    /// Hull of the active subdifferentials union the slack-scaled weighted
    /// inactive ones.
    ActiveUnion,
    /// Hull of the active subdifferentials Minkowski-added to `{0, eps}`
    /// times the weighted inactive ones.
    ActiveSum,
    /// Hull of the active subdifferentials shifted by the normal cone of a
    /// section of the domain (the classical form used as a cross-oracle).
    Section(Polyhedron),
}

/// How the inactive weights are chosen, per slack.
#[derive(Clone, Debug)]
pub enum RhoChoice {
    Ones,
    /// The slack-dependent choice `eps / (2 f(x) - 2 f_t(x) + eps)`.
    SlackScaled,
    Fixed(Weights),
}

impl RhoChoice {
    fn resolve(&self, family: &SupFamily, x: &Vector, eps: &Scalar) -> Result<Weights> {
        match self {
            RhoChoice::Ones => Ok(Weights::ones(family.len())),
            RhoChoice::SlackScaled => family.rho_weights(x, eps),
            RhoChoice::Fixed(w) => {
                if w.len() != family.len() {
                    return Err(Error::Dimension("one weight per family member".into()));
                }
                Ok(w.clone())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsRunConfig {
    /// Strictly decreasing positive slacks.
    pub grid: Vec<Scalar>,
    /// Geometric refinement continues below the grid while probes stay
    /// unexcluded, down to this floor.
    pub floor: Scalar,
    pub rho: RhoChoice,
    pub probes: Vec<Vector>,
}

impl EpsRunConfig {
    pub fn default_grid() -> Vec<Scalar> {
        vec![
            num::one(),
            Scalar::new(1.into(), 2.into()),
            Scalar::new(1.into(), 8.into()),
            Scalar::new(1.into(), 64.into()),
        ]
    }

    pub fn default_floor() -> Scalar {
        Scalar::new(1.into(), (1u64 << 20).into())
    }

    pub fn new(rho: RhoChoice) -> Self {
        EpsRunConfig {
            grid: Self::default_grid(),
            floor: Self::default_floor(),
            rho,
            probes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsStep {
    pub eps: Scalar,
    pub rhs: Polyhedron,
    /// The subdifferential of the supremum is contained in this right-hand
    /// side (exact; the identities force it at every slack).
    pub inner_inclusion: bool,
}

#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub probe: Vector,
    pub in_subdifferential: bool,
    /// Largest tested slack whose right-hand side excludes the probe.
    pub excluded_at: Option<Scalar>,
}

/// Result of one intersection-over-slacks run.
#[derive(Debug)]
pub struct EpsRun {
    pub subdifferential: Polyhedron,
    pub minimizer: bool,
    pub steps: Vec<EpsStep>,
    /// The last two evaluated right-hand sides agree as sets.
    pub stabilized: bool,
    /// The final right-hand side equals the subdifferential exactly.
    pub matches_subdifferential: bool,
    pub probes: Vec<ProbeOutcome>,
    /// Probes that were never excluded and are not subgradients; for the
    /// union-form right-hand side at a non-minimizer this is the expected
    /// strictness gap, not a failure.
    pub strictness_witnesses: Vec<Vector>,
}

impl SupFamily {
    /// Exact subdifferential of the supremum at `x` through the collapsed
    /// normal form (oracle for every slack-indexed formula).
    pub fn subdifferential(&self, x: &Vector) -> Result<Polyhedron> {
        self.collapse()?.subdifferential(x)
    }

    /// Union-form right-hand side at one slack: active member
    /// subdifferentials union the slack-scaled weighted inactive ones,
    /// hulled. Contains the subdifferential at every positive slack;
    /// the intersection over slacks reaches it when `x` minimizes the
    /// supremum.
    pub fn sup_rhs_active_union(
        &self,
        x: &Vector,
        eps: &Scalar,
        rho: &Weights,
    ) -> Result<Polyhedron> {
        if !eps.is_positive() {
            return Err(Error::Domain("the formula needs a positive slack".into()));
        }
        let sets = self.active_sets(x, &Scalar::zero())?;
        let mut parts = Vec::new();
        for (t, m) in self.members().iter().enumerate() {
            if sets.active.contains(&t) {
                parts.push(m.f.eps_subdifferential(x, eps)?);
            } else {
                let weighted = m.f.scale(rho.get(t))?;
                parts.push(weighted.eps_subdifferential(x, eps)?.scaled(eps)?);
            }
        }
        closed_conv_union(&parts)
    }

    /// Sum-form right-hand side at one slack, in the two-point `{0, eps}`
    /// scaling: hull over active s and inactive t of
    /// `active_s + {0, eps} * weighted_t`, with the empty inactive union
    /// read as `{0}`.
    pub fn sup_rhs_active_sum(&self, x: &Vector, eps: &Scalar, rho: &Weights) -> Result<Polyhedron> {
        self.sum_form(x, eps, rho, false)
    }

    /// Sum-form right-hand side with the full interval `[0, eps]` scaling;
    /// hulls make it coincide with the two-point variant.
    pub fn sup_rhs_active_sum_interval(
        &self,
        x: &Vector,
        eps: &Scalar,
        rho: &Weights,
    ) -> Result<Polyhedron> {
        self.sum_form(x, eps, rho, true)
    }

    fn sum_form(
        &self,
        x: &Vector,
        eps: &Scalar,
        rho: &Weights,
        interval: bool,
    ) -> Result<Polyhedron> {
        if !eps.is_positive() {
            return Err(Error::Domain("the formula needs a positive slack".into()));
        }
        let sets = self.active_sets(x, &Scalar::zero())?;
        let origin = Polyhedron::origin(self.dim());

        // Second summand members: {0} plus one scaled set per inactive index
        // (two-point form), or one hull of {0} with each scaled set
        // (interval form). An empty inactive set leaves just {0}.
        let mut second: Vec<Polyhedron> = Vec::new();
        if interval {
            for (t, m) in self.members().iter().enumerate() {
                if sets.active.contains(&t) {
                    continue;
                }
                let scaled = m.f.scale(rho.get(t))?.eps_subdifferential(x, eps)?.scaled(eps)?;
                second.push(closed_conv_union(&[origin.clone(), scaled])?);
            }
            if second.is_empty() {
                second.push(origin.clone());
            }
        } else {
            second.push(origin.clone());
            for (t, m) in self.members().iter().enumerate() {
                if sets.active.contains(&t) {
                    continue;
                }
                second.push(m.f.scale(rho.get(t))?.eps_subdifferential(x, eps)?.scaled(eps)?);
            }
        }

        let mut parts = Vec::new();
        for s in &sets.active {
            let active_part = self.member(*s).eps_subdifferential(x, eps)?;
            for b in &second {
                parts.push(active_part.minkowski_sum(b)?);
            }
        }
        closed_conv_union(&parts)
    }

    /// Section-form right-hand side (cross-oracle): hull of the active
    /// subdifferentials shifted by the normal cone to `section` intersected
    /// with the domain of the supremum. Requires `x` in the section.
    pub fn sup_rhs_section(
        &self,
        x: &Vector,
        eps: &Scalar,
        section: &Polyhedron,
    ) -> Result<Polyhedron> {
        if !eps.is_positive() {
            return Err(Error::Domain("the formula needs a positive slack".into()));
        }
        if !section.contains_point(x)? {
            return Err(Error::Domain(
                "the query point must lie in the section".into(),
            ));
        }
        let sets = self.active_sets(x, &Scalar::zero())?;
        let ncone = section.intersect(&self.common_domain()?)?.normal_cone_at(x)?;
        let mut parts = Vec::new();
        for s in &sets.active {
            parts.push(
                self.member(*s)
                    .eps_subdifferential(x, eps)?
                    .minkowski_sum(&ncone)?,
            );
        }
        closed_conv_union(&parts)
    }

    fn rhs_at(
        &self,
        formula: &SubdiffFormula,
        x: &Vector,
        eps: &Scalar,
        rho: &RhoChoice,
    ) -> Result<Polyhedron> {
        let weights = rho.resolve(self, x, eps)?;
        match formula {
            SubdiffFormula::ActiveUnion => self.sup_rhs_active_union(x, eps, &weights),
            SubdiffFormula::ActiveSum => {
                let braces = self.sup_rhs_active_sum(x, eps, &weights)?;
                debug_assert!(braces
                    .equals(&self.sup_rhs_active_sum_interval(x, eps, &weights)?)
                    .unwrap_or(false));
                Ok(braces)
            }
            SubdiffFormula::Section(l) => self.sup_rhs_section(x, eps, l),
        }
    }

    /// Runs a slack grid against one formula: exact inner inclusion per
    /// slack, stabilization of the last two right-hand sides, and probe
    /// exclusion with geometric refinement below the grid while probes
    /// remain unexcluded.
    pub fn eps_intersection_run(
        &self,
        formula: &SubdiffFormula,
        x: &Vector,
        config: &EpsRunConfig,
    ) -> Result<EpsRun> {
        if config.grid.is_empty() {
            return Err(Error::Domain("empty slack grid".into()));
        }
        for pair in config.grid.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::Domain("slack grid must strictly decrease".into()));
            }
        }
        if !config.grid[0].is_positive() || !config.floor.is_positive() {
            return Err(Error::Domain("slacks and floor must be positive".into()));
        }

        let sub = self.subdifferential(x)?;
        let minimizer = sub.contains_point(&Vector::zeros(self.dim()))?;

        // The widest right-hand side seeds the automatic probes: its
        // generator points that are not subgradients witness the gap, if any.
        let first_rhs = self.rhs_at(formula, x, &config.grid[0], &config.rho)?;
        let mut probes: Vec<(Vector, bool, Option<Scalar>)> = Vec::new();
        for p in &first_rhs.vrep()?.points {
            if !sub.contains_point(p)? {
                probes.push((p.clone(), false, None));
            }
        }
        for p in &config.probes {
            let member = sub.contains_point(p)?;
            probes.push((p.clone(), member, None));
        }

        let mut steps: Vec<EpsStep> = Vec::new();
        let record = |eps: &Scalar,
                      rhs: Polyhedron,
                      probes: &mut Vec<(Vector, bool, Option<Scalar>)>,
                      steps: &mut Vec<EpsStep>|
         -> Result<()> {
            let inner = sub.is_subset_of(&rhs)?;
            for (p, _, excluded) in probes.iter_mut() {
                if excluded.is_none() && !rhs.contains_point(p)? {
                    *excluded = Some(eps.clone());
                }
            }
            steps.push(EpsStep {
                eps: eps.clone(),
                rhs,
                inner_inclusion: inner,
            });
            Ok(())
        };

        record(&config.grid[0], first_rhs, &mut probes, &mut steps)?;
        for eps in &config.grid[1..] {
            let rhs = self.rhs_at(formula, x, eps, &config.rho)?;
            record(eps, rhs, &mut probes, &mut steps)?;
        }

        // geometric refinement while non-member probes remain unexcluded
        let mut eps = steps.last().expect("nonempty grid").eps.clone();
        let eighth = Scalar::new(1.into(), 8.into());
        while probes
            .iter()
            .any(|(_, member, excluded)| !member && excluded.is_none())
        {
            eps = &eps * &eighth;
            if eps < config.floor {
                break;
            }
            let rhs = self.rhs_at(formula, x, &eps, &config.rho)?;
            record(&eps, rhs, &mut probes, &mut steps)?;
        }

        let stabilized = match steps.len() {
            0 | 1 => false,
            n => steps[n - 1].rhs.equals(&steps[n - 2].rhs)?,
        };
        let matches_subdifferential = steps
            .last()
            .map(|s| s.rhs.equals(&sub))
            .transpose()?
            .unwrap_or(false);

        let strictness_witnesses = probes
            .iter()
            .filter(|(_, member, excluded)| !member && excluded.is_none())
            .map(|(p, _, _)| p.clone())
            .collect();
        let probes = probes
            .into_iter()
            .map(|(probe, in_subdifferential, excluded_at)| ProbeOutcome {
                probe,
                in_subdifferential,
                excluded_at,
            })
            .collect();

        Ok(EpsRun {
            subdifferential: sub,
            minimizer,
            steps,
            stabilized,
            matches_subdifferential,
            probes,
            strictness_witnesses,
        })
    }
}
