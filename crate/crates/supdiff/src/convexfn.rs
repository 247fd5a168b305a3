//! Polyhedral convex functions in normal form: finitely many affine pieces
//! maximized over a polyhedral domain, `+infinity` outside. The class is
//! proper, convex and lower semicontinuous by construction and is closed
//! under conjugation, nonnegative scaling, positive parts and finite
//! suprema, so every function-level operation stays inside it.

use std::sync::OnceLock;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::{Matrix, Scalar, Vector};
use crate::polyhedra::{HRep, Polyhedron, SupportValue, VRep};

/// An affine map `x -> <gradient, x> + offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePiece {
    pub gradient: Vector,
    pub offset: Scalar,
}

impl AffinePiece {
    pub fn new(gradient: Vector, offset: Scalar) -> Self {
        AffinePiece { gradient, offset }
    }

    pub fn eval(&self, x: &Vector) -> Scalar {
        self.gradient.dot(x) + &self.offset
    }
}

/// Value of a proper function: finite on the domain, `+infinity` outside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FnValue {
    Finite(Scalar),
    PlusInfinity,
}

impl FnValue {
    pub fn finite(self) -> Option<Scalar> {
        match self {
            FnValue::Finite(s) => Some(s),
            FnValue::PlusInfinity => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FnValue::Finite(_))
    }
}

/// A proper lsc polyhedral convex function: `max` of `pieces` on `domain`.
pub struct PolyConvexFn {
    dim: usize,
    pieces: Vec<AffinePiece>,
    domain: Polyhedron,
    conjugate: OnceLock<Result<Box<PolyConvexFn>>>,
}

impl Clone for PolyConvexFn {
    fn clone(&self) -> Self {
        let out = PolyConvexFn {
            dim: self.dim,
            pieces: self.pieces.clone(),
            domain: self.domain.clone(),
            conjugate: OnceLock::new(),
        };
        if let Some(c) = self.conjugate.get() {
            let _ = out.conjugate.set(c.clone());
        }
        out
    }
}

impl std::fmt::Debug for PolyConvexFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolyConvexFn")
            .field("dim", &self.dim)
            .field("pieces", &self.pieces)
            .field("domain_rows", &self.domain.hrep().map(HRep::rows))
            .finish()
    }
}

impl PolyConvexFn {
    /// Builds the normal form; rejects improper data (no pieces, or an empty
    /// domain) and dimension mismatches.
    pub fn new(pieces: Vec<AffinePiece>, domain: HRep) -> Result<Self> {
        let dim = domain.dim();
        if pieces.is_empty() {
            return Err(Error::Domain(
                "a proper function needs at least one affine piece".into(),
            ));
        }
        for p in &pieces {
            if p.gradient.dim() != dim {
                return Err(Error::Dimension(format!(
                    "piece gradient has dimension {} but domain is {dim}-dim",
                    p.gradient.dim()
                )));
            }
        }
        let domain = Polyhedron::from_hrep(domain);
        if domain.is_empty()? {
            return Err(Error::Domain(
                "empty domain makes the function improper".into(),
            ));
        }
        Ok(PolyConvexFn {
            dim,
            pieces,
            domain,
            conjugate: OnceLock::new(),
        })
    }

    /// Affine function on all of Q^n.
    pub fn affine(gradient: Vector, offset: Scalar) -> Result<Self> {
        let dim = gradient.dim();
        Self::new(
            vec![AffinePiece::new(gradient, offset)],
            HRep::full_space(dim),
        )
    }

    /// Indicator of a nonempty polyhedral set given by inequalities.
    pub fn indicator(domain: HRep) -> Result<Self> {
        let dim = domain.dim();
        Self::new(
            vec![AffinePiece::new(Vector::zeros(dim), Scalar::zero())],
            domain,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain_poly(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn eval(&self, x: &Vector) -> Result<FnValue> {
        if x.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "evaluating a {}-dim function at a {}-dim point",
                self.dim,
                x.dim()
            )));
        }
        if !self.domain.contains_point(x)? {
            return Ok(FnValue::PlusInfinity);
        }
        Ok(FnValue::Finite(
            self.pieces
                .iter()
                .map(|p| p.eval(x))
                .max()
                .expect("nonempty pieces"),
        ))
    }

    /// `{(x, r) : x in domain, piece_i(x) <= r}` in dimension n+1.
    pub fn epigraph(&self) -> Result<Polyhedron> {
        let h = self.domain.hrep()?;
        let mut rows: Vec<Vector> = Vec::with_capacity(h.rows() + self.pieces.len());
        let mut rhs: Vec<Scalar> = Vec::with_capacity(h.rows() + self.pieces.len());
        for r in 0..h.rows() {
            rows.push(h.a.row_vector(r).with_appended(Scalar::zero()));
            rhs.push(h.b.get(r).clone());
        }
        for p in &self.pieces {
            rows.push(p.gradient.with_appended(-num::one::<Scalar>()));
            rhs.push(-p.offset.clone());
        }
        Ok(Polyhedron::from_hrep(HRep::new(
            Matrix::from_rows(rows, self.dim + 1)?,
            Vector::new(rhs),
        )?))
    }

    /// Fenchel conjugate, again in normal form: with epigraph generators
    /// `(v_j, t_j)` and `(r_k, rho_k)` (the vertical ray dropped), the
    /// conjugate is `max_j <., v_j> - t_j` on `{y : <r_k, y> <= rho_k}`.
    /// Cached; an involution on this class.
    pub fn conjugate(&self) -> Result<&PolyConvexFn> {
        self.conjugate
            .get_or_init(|| self.compute_conjugate().map(Box::new))
            .as_ref()
            .map(|b| b.as_ref())
            .map_err(Clone::clone)
    }

    fn compute_conjugate(&self) -> Result<PolyConvexFn> {
        let epi = self.epigraph()?;
        let v = epi.vrep()?;
        conjugate_from_epigraph_generators(v, self.dim)
    }

    /// Epsilon-subdifferential at `x`, via the conjugate characterization
    /// `{y : f*(y) <= <y, x> - f(x) + eps}`. Follows the empty-set
    /// conventions: empty for `eps < 0` or `x` outside the domain.
    pub fn eps_subdifferential(&self, x: &Vector, eps: &Scalar) -> Result<Polyhedron> {
        if eps.is_negative() {
            return Ok(Polyhedron::empty(self.dim));
        }
        let fx = match self.eval(x)? {
            FnValue::Finite(s) => s,
            FnValue::PlusInfinity => return Ok(Polyhedron::empty(self.dim)),
        };
        let conj = self.conjugate()?;
        let ch = conj.domain.hrep()?;
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vec<Scalar> = Vec::new();
        for p in &conj.pieces {
            // <y, u_j> + c_j <= <y, x> - f(x) + eps
            rows.push(p.gradient.sub(x));
            rhs.push(eps - &fx - &p.offset);
        }
        for r in 0..ch.rows() {
            rows.push(ch.a.row_vector(r));
            rhs.push(ch.b.get(r).clone());
        }
        Ok(Polyhedron::from_hrep(HRep::new(
            Matrix::from_rows(rows, self.dim)?,
            Vector::new(rhs),
        )?))
    }

    pub fn subdifferential(&self, x: &Vector) -> Result<Polyhedron> {
        self.eps_subdifferential(x, &Scalar::zero())
    }

    /// `lambda * f` for `lambda > 0`; `lambda = 0` yields the indicator of
    /// the domain (the `0 * (+inf) = +inf` convention).
    pub fn scale(&self, lambda: &Scalar) -> Result<PolyConvexFn> {
        if lambda.is_negative() {
            return Err(Error::Domain(
                "scaling a convex function by a negative factor".into(),
            ));
        }
        if lambda.is_zero() {
            return PolyConvexFn::new(
                vec![AffinePiece::new(Vector::zeros(self.dim), Scalar::zero())],
                self.domain.hrep()?.clone(),
            );
        }
        let scaled = PolyConvexFn {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece::new(p.gradient.scaled(lambda), &p.offset * lambda))
                .collect(),
            domain: self.domain.clone(),
            conjugate: OnceLock::new(),
        };
        // (lambda f)*(y) = lambda f*(y / lambda), reshaped algebraically so
        // the cached conjugate carries over without a fresh conversion.
        if let Some(Ok(conj)) = self.conjugate.get() {
            if let Ok(ch) = conj.domain.hrep() {
                let seeded = PolyConvexFn {
                    dim: self.dim,
                    pieces: conj
                        .pieces
                        .iter()
                        .map(|p| AffinePiece::new(p.gradient.clone(), &p.offset * lambda))
                        .collect(),
                    domain: scale_hrep_rhs(ch, lambda),
                    conjugate: OnceLock::new(),
                };
                let _ = scaled.conjugate.set(Ok(Box::new(seeded)));
            }
        }
        Ok(scaled)
    }

    /// `max{f, 0}`: the zero piece joins the max, domain unchanged.
    pub fn positive_part(&self) -> PolyConvexFn {
        let mut pieces = self.pieces.clone();
        let zero = AffinePiece::new(Vector::zeros(self.dim), Scalar::zero());
        if !pieces.contains(&zero) {
            pieces.push(zero);
        }
        PolyConvexFn {
            dim: self.dim,
            pieces,
            domain: self.domain.clone(),
            conjugate: OnceLock::new(),
        }
    }

    /// Support of the epsilon-subdifferential in direction `d` (the
    /// epsilon-directional derivative). Requires `x` in the domain and a
    /// positive `eps`.
    pub fn eps_directional_derivative(
        &self,
        x: &Vector,
        eps: &Scalar,
        d: &Vector,
    ) -> Result<SupportValue> {
        if !eps.is_positive() {
            return Err(Error::Domain(
                "directional derivative needs a positive slack".into(),
            ));
        }
        if !self.domain.contains_point(x)? {
            return Err(Error::Domain(
                "directional derivative taken outside the domain".into(),
            ));
        }
        self.eps_subdifferential(x, eps)?.support(d)
    }

    /// Membership `y in eps_subdifferential(x)` decided through the
    /// Fenchel-Young gap `f(x) + f*(y) <= <y, x> + eps`, without building
    /// the subdifferential polyhedron.
    pub fn fenchel_young_member(&self, x: &Vector, y: &Vector, eps: &Scalar) -> Result<bool> {
        if eps.is_negative() {
            return Ok(false);
        }
        let fx = match self.eval(x)? {
            FnValue::Finite(s) => s,
            FnValue::PlusInfinity => return Ok(false),
        };
        let fy = match self.conjugate()?.eval(y)? {
            FnValue::Finite(s) => s,
            FnValue::PlusInfinity => return Ok(false),
        };
        Ok(fx + fy <= y.dot(x) + eps)
    }

    /// The scan behind the positive-part identity: the sets
    /// `D(lambda) = (lambda f) eps-subdifferential at x with slack
    /// eps + lambda f(x) - max{f,0}(x)` for each grid lambda, together with
    /// an exact certificate that every generator point of the directly
    /// computed subdifferential of `max{f, 0}` belongs to `D(lambda)` for
    /// some `lambda in [0, 1]` (decided by one-dimensional feasibility in
    /// lambda, not by grid refinement).
    pub fn positive_part_lambda_scan(
        &self,
        x: &Vector,
        eps: &Scalar,
        lambda_grid: &[Scalar],
    ) -> Result<PositivePartScan> {
        if eps.is_negative() {
            return Err(Error::Domain("negative slack in positive-part scan".into()));
        }
        let fx = self
            .eval(x)?
            .finite()
            .ok_or_else(|| Error::Domain("positive-part scan outside the domain".into()))?;
        let fplus = if fx.is_negative() {
            Scalar::zero()
        } else {
            fx.clone()
        };
        for l in lambda_grid {
            if l.is_negative() || *l > Scalar::from_integer(1.into()) {
                return Err(Error::Domain("lambda grid must lie in [0, 1]".into()));
            }
        }

        let direct = self.positive_part().eps_subdifferential(x, eps)?;
        let mut per_lambda = Vec::with_capacity(lambda_grid.len());
        for l in lambda_grid {
            let shifted = eps + &(l * &fx) - &fplus;
            let set = if shifted.is_negative() {
                Polyhedron::empty(self.dim)
            } else {
                self.scale(l)?.eps_subdifferential(x, &shifted)?
            };
            per_lambda.push((l.clone(), set));
        }

        let mut certified = true;
        let mut uncertified_point = None;
        for v in &direct.vrep()?.points {
            if self
                .lambda_membership_witness(x, eps, &fx, &fplus, v)?
                .is_none()
            {
                certified = false;
                uncertified_point = Some(v.clone());
                break;
            }
        }
        Ok(PositivePartScan {
            direct,
            per_lambda,
            certified,
            uncertified_point,
        })
    }

    /// Exact one-dimensional feasibility: is there `lambda in [0, 1]` with
    /// `y` in `D(lambda)`? The membership condition is a finite conjunction
    /// of constraints affine in lambda once written through the conjugate
    /// normal form, with `lambda = 0` handled through the domain support.
    pub fn lambda_membership_witness(
        &self,
        x: &Vector,
        eps: &Scalar,
        fx: &Scalar,
        fplus: &Scalar,
        y: &Vector,
    ) -> Result<Option<Scalar>> {
        // lambda = 0: y in the shifted subdifferential of the domain indicator.
        let delta0 = eps - fplus;
        if !delta0.is_negative() {
            let in_zero = match self.domain.support(y)? {
                SupportValue::Finite(s) => s <= y.dot(x) + &delta0,
                SupportValue::PlusInfinity => false,
                SupportValue::MinusInfinity => unreachable!("domain is nonempty"),
            };
            if in_zero {
                return Ok(Some(Scalar::zero()));
            }
        }

        // lambda > 0: constraints of the form coef * lambda <= bound.
        let conj = self.conjugate()?;
        let rhs_base = y.dot(x) + eps - fplus;
        let mut lower = Scalar::zero();
        let mut upper = Scalar::from_integer(1.into());
        let mut constraints: Vec<(Scalar, Scalar)> = Vec::new();
        for p in &conj.pieces {
            // <y, u_j> + lambda c_j <= rhs_base
            constraints.push((p.offset.clone(), &rhs_base - &y.dot(&p.gradient)));
        }
        let ch = conj.domain.hrep()?;
        for r in 0..ch.rows() {
            // <y, r_k> <= lambda rho_k
            constraints.push((-ch.b.get(r).clone(), -ch.a.row_vector(r).dot(y)));
        }
        // slack stays nonnegative: -(lambda f(x)) <= eps - f_plus(x)
        constraints.push((-fx.clone(), eps - fplus));

        for (coef, bound) in constraints {
            if coef.is_positive() {
                let cap = &bound / &coef;
                if cap < upper {
                    upper = cap;
                }
            } else if coef.is_negative() {
                let floor = &bound / &coef;
                if floor > lower {
                    lower = floor;
                }
            } else if bound.is_negative() {
                return Ok(None);
            }
        }
        if lower <= upper && upper.is_positive() {
            Ok(Some(upper))
        } else {
            Ok(None)
        }
    }
}

fn scale_hrep_rhs(h: &HRep, lambda: &Scalar) -> Polyhedron {
    Polyhedron::from_hrep(
        HRep::new(
            h.a.clone(),
            Vector::new(h.b.iter().map(|b| b * lambda).collect()),
        )
        .expect("shape preserved"),
    )
}

fn conjugate_from_epigraph_generators(v: &VRep, dim: usize) -> Result<PolyConvexFn> {
    let vertical = Vector::unit(dim + 1, dim);
    let mut pieces = Vec::new();
    for p in &v.points {
        let (grad, level) = p.split_last();
        let piece = AffinePiece::new(grad, -level);
        if !pieces.contains(&piece) {
            pieces.push(piece);
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for r in &v.rays {
        if *r == vertical {
            continue;
        }
        let (dir, level) = r.split_last();
        rows.push(dir);
        rhs.push(level);
    }
    PolyConvexFn::new(
        pieces,
        HRep::new(Matrix::from_rows(rows, dim)?, Vector::new(rhs))?,
    )
}

#[derive(Debug)]
pub struct PositivePartScan {
    /// Directly computed subdifferential of `max{f, 0}` at the query point.
    pub direct: Polyhedron,
    /// The lambda-indexed sets of the union identity (empty when the shifted
    /// slack goes negative).
    pub per_lambda: Vec<(Scalar, Polyhedron)>,
    /// True iff every generator point of `direct` is certified to lie in
    /// some lambda-set with lambda in [0, 1].
    pub certified: bool,
    /// First generator that failed certification, if any.
    pub uncertified_point: Option<Vector>,
}
