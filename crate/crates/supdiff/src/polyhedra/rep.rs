use num::Signed;

use crate::error::{Error, Result};
use crate::kernel::{Matrix, Scalar, Vector};

/// Half-space representation `{x : a x <= b}`. Zero rows mean all of Q^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep {
    pub a: Matrix,
    pub b: Vector,
}

impl HRep {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.rows() != b.dim() {
            return Err(Error::Dimension(format!(
                "{} rows vs {} right sides",
                a.rows(),
                b.dim()
            )));
        }
        Ok(HRep { a, b })
    }

    pub fn full_space(dim: usize) -> Self {
        HRep {
            a: Matrix::zeros(0, dim),
            b: Vector::zeros(0),
        }
    }

    /// Canonical unsatisfiable system `0 x <= -1`.
    pub fn empty(dim: usize) -> Self {
        HRep {
            a: Matrix::zeros(1, dim),
            b: Vector::new(vec![-Scalar::from_integer(1.into())]),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn contains_point(&self, x: &Vector) -> bool {
        (0..self.rows()).all(|r| self.a.row_vector(r).dot(x) <= *self.b.get(r))
    }

    /// Recession-cone membership: `a r <= 0` for every row.
    pub fn contains_direction(&self, r: &Vector) -> bool {
        (0..self.rows()).all(|i| !self.a.row_vector(i).dot(r).is_positive())
    }

    /// Concatenation of constraint rows (set intersection).
    pub fn stacked(&self, other: &HRep) -> Result<HRep> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "stacking {}-dim with {}-dim system",
                self.dim(),
                other.dim()
            )));
        }
        let mut rows: Vec<Vector> = (0..self.rows()).map(|r| self.a.row_vector(r)).collect();
        rows.extend((0..other.rows()).map(|r| other.a.row_vector(r)));
        let mut b = self.b.as_slice().to_vec();
        b.extend(other.b.iter().cloned());
        HRep::new(Matrix::from_rows(rows, self.dim())?, Vector::new(b))
    }

    /// `{x : a(x + shift) <= b}` rewritten over x, i.e. translation by -shift
    /// becomes translation of the set by +shift via `b + a*shift`.
    pub fn translated(&self, shift: &Vector) -> HRep {
        let delta = self.a.mul_vec(shift);
        HRep {
            a: self.a.clone(),
            b: self.b.add(&delta),
        }
    }

    /// Homogeneous part `{x : a x <= 0}`.
    pub fn homogeneous(&self) -> HRep {
        HRep {
            a: self.a.clone(),
            b: Vector::zeros(self.rows()),
        }
    }
}

/// Generator representation `conv(points) + cone(rays)`; empty iff `points`
/// is empty. Lines are encoded as +/- ray pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VRep {
    pub points: Vec<Vector>,
    pub rays: Vec<Vector>,
    dim: usize,
}

impl VRep {
    pub fn new(points: Vec<Vector>, rays: Vec<Vector>, dim: usize) -> Result<Self> {
        for p in &points {
            if p.dim() != dim {
                return Err(Error::Dimension(format!(
                    "point of dimension {} in {dim}-dim generator set",
                    p.dim()
                )));
            }
        }
        for r in &rays {
            if r.dim() != dim {
                return Err(Error::Dimension(format!(
                    "ray of dimension {} in {dim}-dim generator set",
                    r.dim()
                )));
            }
            if r.is_zero() {
                return Err(Error::Domain("zero vector offered as a ray".into()));
            }
        }
        if points.is_empty() && !rays.is_empty() {
            // conv(empty) + cone(anything) is empty; normalize.
            return Ok(VRep {
                points,
                rays: Vec::new(),
                dim,
            });
        }
        Ok(VRep { points, rays, dim })
    }

    pub fn empty(dim: usize) -> Self {
        VRep {
            points: Vec::new(),
            rays: Vec::new(),
            dim,
        }
    }

    /// The singleton `{0}`.
    pub fn origin(dim: usize) -> Self {
        VRep {
            points: vec![Vector::zeros(dim)],
            rays: Vec::new(),
            dim,
        }
    }

    pub fn full_space(dim: usize) -> Self {
        let mut rays = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            rays.push(Vector::unit(dim, i));
            rays.push(Vector::unit(dim, i).neg());
        }
        VRep {
            points: vec![Vector::zeros(dim)],
            rays,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, shift: &Vector) -> VRep {
        VRep {
            points: self.points.iter().map(|p| p.add(shift)).collect(),
            rays: self.rays.clone(),
            dim: self.dim,
        }
    }
}
