//! Characterizations of the normal cone to the domain of the supremum as
//! recession cones of hulls of member epsilon-subdifferentials, plus the two
//! independent oracles they are checked against (the direct polyhedral
//! normal cone and the conjugate-epigraph slice).

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::{Matrix, Scalar, Vector};
use crate::polyhedra::{closed_conv_union, HRep, Polyhedron};

use super::{SupFamily, Weights};

/// Both positive-part variants of the normal-cone formula, evaluated
/// together: the plain one that swaps inactive members for their positive
/// parts, and the strict variant that additionally keeps every member with a
/// nonnegative value and certifies the positive-part sets through the exact
/// lambda scan.
#[derive(Debug)]
pub struct PositivePartCones {
    pub plain: Polyhedron,
    pub strict: Polyhedron,
    /// Every generator point of every positive-part subdifferential admitted
    /// an exact lambda witness in [0, 1].
    pub lambda_certified: bool,
    /// First generator that failed certification, if any.
    pub uncertified_point: Option<Vector>,
}

impl SupFamily {
    /// Recession cone of the hull of weighted member subdifferentials at a
    /// single slack: `[hull of the union over t of the eps-subdifferential
    /// of (w_t f_t) at x]_infinity`. Under a finite family this equals the
    /// direct normal cone for every positive slack.
    pub fn normal_cone_weighted(
        &self,
        x: &Vector,
        eps: &Scalar,
        weights: &Weights,
    ) -> Result<Polyhedron> {
        let deltas = vec![eps.clone(); self.len()];
        self.normal_cone_weighted_per_index(x, &deltas, weights)
    }

    /// Same formula with an individual positive slack per member.
    pub fn normal_cone_weighted_per_index(
        &self,
        x: &Vector,
        deltas: &[Scalar],
        weights: &Weights,
    ) -> Result<Polyhedron> {
        if weights.len() != self.len() || deltas.len() != self.len() {
            return Err(Error::Dimension(
                "one weight and one slack per family member".into(),
            ));
        }
        if deltas.iter().any(|d| !d.is_positive()) {
            return Err(Error::Domain("per-member slacks must be positive".into()));
        }
        self.values_at(x)?; // query point must lie in the common domain
        let mut parts = Vec::with_capacity(self.len());
        for (t, m) in self.members().iter().enumerate() {
            let scaled = m.f.scale(weights.get(t))?;
            parts.push(scaled.eps_subdifferential(x, &deltas[t])?);
        }
        closed_conv_union(&parts)?.recession_cone()
    }

    /// Positive-part variants: inactive members enter through `max{f_t, 0}`.
    pub fn normal_cone_positive_part(&self, x: &Vector, eps: &Scalar) -> Result<PositivePartCones> {
        if !eps.is_positive() {
            return Err(Error::Domain("the formula needs a positive slack".into()));
        }
        let sets = self.active_sets(x, eps)?;

        let mut plain_parts = Vec::with_capacity(self.len());
        for (t, m) in self.members().iter().enumerate() {
            let part = if sets.eps_active.contains(&t) {
                m.f.eps_subdifferential(x, eps)?
            } else {
                m.f.positive_part().eps_subdifferential(x, eps)?
            };
            plain_parts.push(part);
        }
        let plain = closed_conv_union(&plain_parts)?.recession_cone()?;

        let mut certified = true;
        let mut uncertified_point = None;
        let mut strict_parts = Vec::with_capacity(self.len());
        let lambda_grid = [
            Scalar::zero(),
            Scalar::new(1.into(), 2.into()),
            num::one::<Scalar>(),
        ];
        for (t, m) in self.members().iter().enumerate() {
            let part = if sets.eps_active_plus.contains(&t) {
                m.f.eps_subdifferential(x, eps)?
            } else {
                // Inactive and negative here, so its positive part vanishes
                // at x and the lambda-union collapses to the positive-part
                // subdifferential; the scan certifies that exactly.
                let scan = m.f.positive_part_lambda_scan(x, eps, &lambda_grid)?;
                if !scan.certified {
                    certified = false;
                    uncertified_point = uncertified_point.or(scan.uncertified_point.clone());
                }
                for (_, lambda_set) in &scan.per_lambda {
                    if !lambda_set.is_subset_of(&scan.direct)? {
                        certified = false;
                    }
                }
                scan.direct
            };
            strict_parts.push(part);
        }
        let strict = closed_conv_union(&strict_parts)?.recession_cone()?;

        Ok(PositivePartCones {
            plain,
            strict,
            lambda_certified: certified,
            uncertified_point,
        })
    }

    /// Direct oracle: the polyhedral normal cone to the intersection of the
    /// member domains.
    pub fn normal_cone_direct(&self, x: &Vector) -> Result<Polyhedron> {
        self.common_domain()?.normal_cone_at(x)
    }

    /// Intersection of the member domains (the domain of the supremum).
    pub fn common_domain(&self) -> Result<Polyhedron> {
        let mut h = self.member(0).domain_poly().hrep()?.clone();
        for m in &self.members()[1..] {
            h = h.stacked(m.f.domain_poly().hrep()?)?;
        }
        Ok(Polyhedron::from_hrep(h))
    }

    /// Conjugate-epigraph oracle: the slice `{y : (y, <y, x>) in K}` of the
    /// recession cone K of the hull of the conjugates' epigraphs.
    pub fn normal_cone_via_conjugate_epigraphs(&self, x: &Vector) -> Result<Polyhedron> {
        self.values_at(x)?;
        let mut epis = Vec::with_capacity(self.len());
        for m in self.members() {
            epis.push(m.f.conjugate()?.epigraph()?);
        }
        let cone = closed_conv_union(&epis)?.recession_cone()?;
        let ch = cone.hrep()?;
        // row (g, gamma): g y + gamma <x, y> <= c becomes (g + gamma x) y <= c
        let mut rows = Vec::with_capacity(ch.rows());
        for r in 0..ch.rows() {
            let (g, gamma) = ch.a.row_vector(r).split_last();
            rows.push(g.add(&x.scaled(&gamma)));
        }
        Ok(Polyhedron::from_hrep(HRep::new(
            Matrix::from_rows(rows, self.dim())?,
            ch.b.clone(),
        )?))
    }
}
