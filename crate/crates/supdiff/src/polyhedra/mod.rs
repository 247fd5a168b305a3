//! Exact convex-polyhedron calculus: dual representations converted on
//! demand, set relations decided with witnesses, and the cone operations the
//! subdifferential layer needs (Minkowski sums, hulls of unions, recession
//! cones, duals, normal cones, support values).

pub mod dd;
pub mod fm;
mod rep;

use std::sync::OnceLock;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::{
    solve_lp, LinearProgram, LpOutcome, Matrix, RowSense, Scalar, VarBound, Vector,
};

pub use dd::{intermediate_cap, set_intermediate_cap};
pub use rep::{HRep, VRep};

/// A closed convex polyhedron in Q^n carrying whichever of the two dual
/// representations it was built from; the other is computed on first use and
/// cached. Instances are immutable afterwards and safe to share.
pub struct Polyhedron {
    dim: usize,
    hrep: OnceLock<Result<HRep>>,
    vrep: OnceLock<Result<VRep>>,
}

impl Clone for Polyhedron {
    fn clone(&self) -> Self {
        Polyhedron {
            dim: self.dim,
            hrep: clone_cell(&self.hrep),
            vrep: clone_cell(&self.vrep),
        }
    }
}

fn clone_cell<T: Clone>(cell: &OnceLock<T>) -> OnceLock<T> {
    let out = OnceLock::new();
    if let Some(v) = cell.get() {
        let _ = out.set(v.clone());
    }
    out
}

impl std::fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = f.debug_struct("Polyhedron");
        s.field("dim", &self.dim);
        if let Some(Ok(h)) = self.hrep.get() {
            s.field("hrep_rows", &h.rows());
        }
        if let Some(Ok(v)) = self.vrep.get() {
            s.field("points", &v.points).field("rays", &v.rays);
        }
        s.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetRelation {
    Equal,
    /// Self is a proper subset; the witness lies in the other set only.
    ProperSubset { witness: Vector },
    /// Self is a proper superset; the witness lies in self only.
    ProperSuperset { witness: Vector },
    Incomparable {
        only_in_self: Vector,
        only_in_other: Vector,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportValue {
    Finite(Scalar),
    PlusInfinity,
    /// Support of the empty set.
    MinusInfinity,
}

impl Polyhedron {
    pub fn from_hrep(h: HRep) -> Self {
        let dim = h.dim();
        let p = Polyhedron {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = p.hrep.set(Ok(h));
        p
    }

    pub fn from_vrep(v: VRep) -> Self {
        let dim = v.dim();
        let p = Polyhedron {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = p.vrep.set(Ok(v));
        p
    }

    pub fn from_generators(points: Vec<Vector>, rays: Vec<Vector>, dim: usize) -> Result<Self> {
        Ok(Self::from_vrep(VRep::new(points, rays, dim)?))
    }

    pub fn empty(dim: usize) -> Self {
        let p = Polyhedron {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = p.hrep.set(Ok(HRep::empty(dim)));
        let _ = p.vrep.set(Ok(VRep::empty(dim)));
        p
    }

    pub fn full_space(dim: usize) -> Self {
        let p = Polyhedron {
            dim,
            hrep: OnceLock::new(),
            vrep: OnceLock::new(),
        };
        let _ = p.hrep.set(Ok(HRep::full_space(dim)));
        let _ = p.vrep.set(Ok(VRep::full_space(dim)));
        p
    }

    /// The singleton `{0}`.
    pub fn origin(dim: usize) -> Self {
        Self::from_vrep(VRep::origin(dim))
    }

    pub fn singleton(point: Vector) -> Self {
        let dim = point.dim();
        Self::from_vrep(VRep::new(vec![point], vec![], dim).expect("singleton"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hrep(&self) -> Result<&HRep> {
        self.hrep
            .get_or_init(|| {
                let v = self.vrep.get().expect("at least one representation");
                v.as_ref()
                    .map_err(Clone::clone)
                    .and_then(dd::hrep_from_vrep)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn vrep(&self) -> Result<&VRep> {
        self.vrep
            .get_or_init(|| {
                let h = self.hrep.get().expect("at least one representation");
                h.as_ref()
                    .map_err(Clone::clone)
                    .and_then(dd::vrep_from_hrep)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Emptiness, decided by the generator side when present and by exact LP
    /// feasibility otherwise.
    pub fn is_empty(&self) -> Result<bool> {
        if let Some(Ok(v)) = self.vrep.get() {
            return Ok(v.is_empty());
        }
        let h = self.hrep()?;
        let lp = LinearProgram::feasibility(
            h.a.clone(),
            h.b.clone(),
            vec![RowSense::Le; h.rows()],
            vec![VarBound::Free; h.dim()],
        )?;
        match solve_lp(&lp)? {
            LpOutcome::Optimal { .. } => Ok(false),
            LpOutcome::Infeasible { .. } => {
                // reconcile the cached generator side
                let _ = self.vrep.set(Ok(VRep::empty(self.dim)));
                Ok(true)
            }
            LpOutcome::Unbounded => unreachable!("feasibility problems have no objective"),
        }
    }

    pub fn contains_point(&self, x: &Vector) -> Result<bool> {
        if x.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "point of dimension {} against {}-dim set",
                x.dim(),
                self.dim
            )));
        }
        Ok(self.hrep()?.contains_point(x))
    }

    pub fn contains_direction(&self, r: &Vector) -> Result<bool> {
        Ok(self.hrep()?.contains_direction(r))
    }

    /// Exact set relation with witnesses in the respective differences.
    pub fn relate(&self, other: &Polyhedron) -> Result<SetRelation> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "relating {}-dim with {}-dim sets",
                self.dim, other.dim
            )));
        }
        let self_in_other = inclusion_witness(self, other)?;
        let other_in_self = inclusion_witness(other, self)?;
        Ok(match (self_in_other, other_in_self) {
            (None, None) => SetRelation::Equal,
            (None, Some(w)) => SetRelation::ProperSubset { witness: w },
            (Some(w), None) => SetRelation::ProperSuperset { witness: w },
            (Some(a), Some(b)) => SetRelation::Incomparable {
                only_in_self: a,
                only_in_other: b,
            },
        })
    }

    pub fn equals(&self, other: &Polyhedron) -> Result<bool> {
        Ok(matches!(self.relate(other)?, SetRelation::Equal))
    }

    pub fn is_subset_of(&self, other: &Polyhedron) -> Result<bool> {
        Ok(inclusion_witness(self, other)?.is_none())
    }

    pub fn translated(&self, shift: &Vector) -> Result<Polyhedron> {
        if shift.dim() != self.dim {
            return Err(Error::Dimension("translation shift dimension".into()));
        }
        // Prefer whichever representation is already present.
        if let Some(Ok(v)) = self.vrep.get() {
            return Ok(Polyhedron::from_vrep(v.translated(shift)));
        }
        Ok(Polyhedron::from_hrep(self.hrep()?.translated(shift)))
    }

    pub fn negated(&self) -> Result<Polyhedron> {
        let v = self.vrep()?;
        Ok(Polyhedron::from_vrep(VRep::new(
            v.points.iter().map(Vector::neg).collect(),
            v.rays.iter().map(Vector::neg).collect(),
            self.dim,
        )?))
    }

    /// `{lambda x : x in self}` for lambda >= 0, with `0 * nonempty = {0}`
    /// and any scaling of the empty set empty.
    pub fn scaled(&self, lambda: &Scalar) -> Result<Polyhedron> {
        if lambda.is_negative() {
            return Err(Error::Domain("scaling factor must be nonnegative".into()));
        }
        if self.is_empty()? {
            return Ok(Polyhedron::empty(self.dim));
        }
        if lambda.is_zero() {
            return Ok(Polyhedron::origin(self.dim));
        }
        let v = self.vrep()?;
        Ok(Polyhedron::from_vrep(VRep::new(
            v.points.iter().map(|p| p.scaled(lambda)).collect(),
            v.rays.clone(),
            self.dim,
        )?))
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        Ok(Polyhedron::from_hrep(self.hrep()?.stacked(other.hrep()?)?))
    }

    /// Minkowski sum; the empty set absorbs (`A + empty = empty`).
    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        if self.dim != other.dim {
            return Err(Error::Dimension("Minkowski sum dimension mismatch".into()));
        }
        if self.is_empty()? || other.is_empty()? {
            return Ok(Polyhedron::empty(self.dim));
        }
        let a = self.vrep()?;
        let b = other.vrep()?;
        let mut points = Vec::with_capacity(a.points.len() * b.points.len());
        for p in &a.points {
            for q in &b.points {
                points.push(p.add(q));
            }
        }
        let mut rays = a.rays.clone();
        rays.extend(b.rays.iter().cloned());
        Ok(Polyhedron::from_vrep(VRep::new(points, rays, self.dim)?))
    }

    /// Recession cone of a nonempty polyhedron. The constraint path (drop
    /// right sides) is used when an H-representation is cached, otherwise
    /// the generator path (cone of the rays); the two agree exactly.
    pub fn recession_cone(&self) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Err(Error::Domain(
                "recession cone of the empty set is undefined".into(),
            ));
        }
        if let Some(Ok(h)) = self.hrep.get() {
            return Ok(Polyhedron::from_hrep(h.homogeneous()));
        }
        self.recession_cone_generator_path()
    }

    /// Recession cone from the generator side regardless of which
    /// representation is cached (cross-check path).
    pub fn recession_cone_generator_path(&self) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Err(Error::Domain(
                "recession cone of the empty set is undefined".into(),
            ));
        }
        let v = self.vrep()?;
        Ok(Polyhedron::from_vrep(VRep::new(
            vec![Vector::zeros(self.dim)],
            v.rays.clone(),
            self.dim,
        )?))
    }

    /// Negative dual cone `{y : <y, x> <= 0 for all x in self}`. The empty
    /// set dualizes to the whole space (vacuous condition).
    pub fn negative_dual_cone(&self) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Ok(Polyhedron::full_space(self.dim));
        }
        let v = self.vrep()?;
        let mut rows: Vec<Vector> = Vec::new();
        for g in v.points.iter().chain(&v.rays) {
            if !g.is_zero() {
                rows.push(g.clone());
            }
        }
        if rows.is_empty() {
            return Ok(Polyhedron::full_space(self.dim));
        }
        let count = rows.len();
        let m = Matrix::from_rows(rows, self.dim)?;
        Ok(Polyhedron::from_hrep(HRep::new(m, Vector::zeros(count))?))
    }

    /// Orthogonal complement of a linear subspace (given as a polyhedron).
    pub fn orthogonal_complement(&self) -> Result<Polyhedron> {
        if !self.is_linear_subspace()? {
            return Err(Error::Domain(
                "orthogonal complement requires a linear subspace".into(),
            ));
        }
        let v = self.vrep()?;
        let mut rows = Vec::new();
        for g in v.points.iter().chain(&v.rays) {
            if g.is_zero() {
                continue;
            }
            rows.push(g.clone());
            rows.push(g.neg());
        }
        if rows.is_empty() {
            return Ok(Polyhedron::full_space(self.dim));
        }
        let count = rows.len();
        Ok(Polyhedron::from_hrep(HRep::new(
            Matrix::from_rows(rows, self.dim)?,
            Vector::zeros(count),
        )?))
    }

    /// A set is a linear subspace iff it contains the origin, equals its
    /// recession cone, and equals its own negation.
    pub fn is_linear_subspace(&self) -> Result<bool> {
        if self.is_empty()? {
            return Ok(false);
        }
        if !self.contains_point(&Vector::zeros(self.dim))? {
            return Ok(false);
        }
        if !self.equals(&self.recession_cone()?)? {
            return Ok(false);
        }
        self.equals(&self.negated()?)
    }

    /// Normal cone at a point: the negative dual of `self - x` when the
    /// point belongs to the set, and the empty set otherwise.
    pub fn normal_cone_at(&self, x: &Vector) -> Result<Polyhedron> {
        if !self.contains_point(x)? {
            return Ok(Polyhedron::empty(self.dim));
        }
        self.translated(&x.neg())?.negative_dual_cone()
    }

    /// Exact support value `sup {<d, x> : x in self}`.
    pub fn support(&self, d: &Vector) -> Result<SupportValue> {
        if self.is_empty()? {
            return Ok(SupportValue::MinusInfinity);
        }
        let v = self.vrep()?;
        if v.rays.iter().any(|r| d.dot(r).is_positive()) {
            return Ok(SupportValue::PlusInfinity);
        }
        Ok(SupportValue::Finite(
            v.points
                .iter()
                .map(|p| d.dot(p))
                .max()
                .expect("nonempty set has points"),
        ))
    }
}

/// Closure of the convex hull of a finite union; empty members are dropped,
/// and a union of empty sets is empty. Exact for polyhedra: the hull closure
/// is generated by all points and all rays together.
pub fn closed_conv_union(members: &[Polyhedron]) -> Result<Polyhedron> {
    let dim = members
        .first()
        .map(Polyhedron::dim)
        .ok_or_else(|| Error::Domain("hull of an empty list of sets".into()))?;
    let mut points = Vec::new();
    let mut rays = Vec::new();
    for p in members {
        if p.dim() != dim {
            return Err(Error::Dimension(
                "hull members must share a dimension".into(),
            ));
        }
        if p.is_empty()? {
            continue;
        }
        let v = p.vrep()?;
        points.extend(v.points.iter().cloned());
        rays.extend(v.rays.iter().cloned());
    }
    if points.is_empty() {
        return Ok(Polyhedron::empty(dim));
    }
    Ok(Polyhedron::from_vrep(VRep::new(points, rays, dim)?))
}

/// First generator of `inner` outside `outer`, mapped to an actual point of
/// the difference; `None` means inclusion holds.
fn inclusion_witness(inner: &Polyhedron, outer: &Polyhedron) -> Result<Option<Vector>> {
    if inner.is_empty()? {
        return Ok(None);
    }
    if outer.is_empty()? {
        return Ok(Some(inner.vrep()?.points[0].clone()));
    }
    let iv = inner.vrep()?;
    let oh = outer.hrep()?;
    for p in &iv.points {
        if !oh.contains_point(p) {
            return Ok(Some(p.clone()));
        }
    }
    for r in &iv.rays {
        if !oh.contains_direction(r) {
            // Walk from a point of the inner set along the escaping ray far
            // enough to exit the outer set.
            let base = &iv.points[0];
            let mut step = Scalar::from_integer(1.into());
            for i in 0..oh.rows() {
                let slope = oh.a.row_vector(i).dot(r);
                if slope.is_positive() {
                    let margin = oh.b.get(i) - oh.a.row_vector(i).dot(base);
                    let needed = &margin / &slope + Scalar::from_integer(1.into());
                    if needed > step {
                        step = needed;
                    }
                }
            }
            return Ok(Some(base.add(&r.scaled(&step))));
        }
    }
    Ok(None)
}
