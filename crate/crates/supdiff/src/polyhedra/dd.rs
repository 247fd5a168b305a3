//! Double description method: exact enumeration of the generators of a cone
//! `{z : M z <= 0}`, and the two polyhedron representation conversions built
//! on it (both directions reduce to the cone problem via homogenization and
//! duality).
//!
//! The lineality space is split off first so the incremental step only ever
//! sees a pointed cone, where the combinatorial adjacency test is valid.
//! Lines are reported as +/- ray pairs.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::{independent_rows, invert, null_space, row_space_basis, Matrix, Scalar, Vector};

use super::rep::{HRep, VRep};

static INTERMEDIATE_CAP: AtomicUsize = AtomicUsize::new(100_000);

/// Generator cap for intermediate double-description steps; conversions fail
/// with a resource error instead of truncating when it is exceeded.
pub fn intermediate_cap() -> usize {
    INTERMEDIATE_CAP.load(Ordering::Relaxed)
}

pub fn set_intermediate_cap(cap: usize) {
    INTERMEDIATE_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Zero set of a ray over constraint rows, as a small bitset.
#[derive(Clone, PartialEq, Eq)]
struct RowSet {
    bits: Vec<u64>,
}

impl RowSet {
    fn new(rows: usize) -> Self {
        RowSet {
            bits: vec![0; rows.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    fn intersection(&self, other: &RowSet) -> RowSet {
        RowSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn is_subset_of(&self, other: &RowSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    v: Vector,
    zero: RowSet,
}

/// Generators of the pointed cone `{u : m u <= 0}` where `m` has full column
/// rank. Rays are primitive integer vectors.
fn pointed_cone_rays(m: &Matrix) -> Result<Vec<Vector>> {
    let d = m.cols();
    let rows = m.rows();
    let cap = intermediate_cap();

    let seed = independent_rows(m);
    debug_assert_eq!(seed.len(), d, "pointed cone needs full row rank");
    let seed_mat = Matrix::from_rows(seed.iter().map(|&r| m.row_vector(r)).collect(), d)?;
    let seed_inv = invert(&seed_mat).expect("seed rows are independent");

    // Initial simplicial cone: columns of -(M_S)^-1.
    let mut rays: Vec<Ray> = (0..d)
        .map(|c| {
            let v = seed_inv.column(c).neg().primitive();
            Ray {
                v,
                zero: RowSet::new(rows),
            }
        })
        .collect();
    let mut processed: Vec<usize> = seed.clone();
    for ray in rays.iter_mut() {
        for &r in &processed {
            if m.row_vector(r).dot(&ray.v).is_zero() {
                ray.zero.insert(r);
            }
        }
    }

    let mut remaining: Vec<usize> = (0..rows).filter(|r| !seed.contains(r)).collect();
    remaining.sort_unstable();

    for k in remaining {
        let row = m.row_vector(k);
        let sigma: Vec<Scalar> = rays.iter().map(|ray| row.dot(&ray.v)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| sigma[i].is_positive()).collect();
        if plus.is_empty() {
            for (i, ray) in rays.iter_mut().enumerate() {
                if sigma[i].is_zero() {
                    ray.zero.insert(k);
                }
            }
            processed.push(k);
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| sigma[i].is_negative()).collect();

        let mut fresh: Vec<Vector> = Vec::new();
        let mut seen: HashSet<Vector> = HashSet::new();
        for &p in &plus {
            for &q in &minus {
                let common = rays[p].zero.intersection(&rays[q].zero);
                let adjacent = rays.iter().enumerate().all(|(i, other)| {
                    i == p || i == q || !common.is_subset_of(&other.zero)
                });
                if !adjacent {
                    continue;
                }
                // sigma_p * r_q - sigma_q * r_p kills row k and is a positive
                // combination, so it stays feasible for all processed rows.
                let combo = rays[q]
                    .v
                    .scaled(&sigma[p])
                    .sub(&rays[p].v.scaled(&sigma[q]))
                    .primitive();
                if seen.insert(combo.clone()) {
                    fresh.push(combo);
                }
            }
        }

        processed.push(k);
        let mut next: Vec<Ray> = Vec::new();
        for (i, ray) in rays.into_iter().enumerate() {
            if sigma[i].is_positive() {
                continue;
            }
            let mut ray = ray;
            if sigma[i].is_zero() {
                ray.zero.insert(k);
            }
            next.push(ray);
        }
        for v in fresh {
            let mut zero = RowSet::new(rows);
            for &r in &processed {
                if m.row_vector(r).dot(&v).is_zero() {
                    zero.insert(r);
                }
            }
            next.push(Ray { v, zero });
        }
        if next.len() > cap {
            return Err(Error::Resource(format!(
                "double description exceeded {cap} intermediate generators"
            )));
        }
        rays = next;
    }

    Ok(rays.into_iter().map(|r| r.v).collect())
}

/// Generators of `{z : m z <= 0}`: lineality basis as +/- pairs plus the
/// extreme rays of the pointed quotient.
pub fn cone_generators(m: &Matrix) -> Result<Vec<Vector>> {
    let d = m.cols();
    if m.rows() == 0 {
        let mut gens = Vec::with_capacity(2 * d);
        for i in 0..d {
            gens.push(Vector::unit(d, i));
            gens.push(Vector::unit(d, i).neg());
        }
        return Ok(gens);
    }
    let lineality = null_space(m);
    let mut gens: Vec<Vector> = Vec::new();
    for l in &lineality {
        let l = l.primitive();
        gens.push(l.neg());
        gens.push(l);
    }
    if lineality.len() == d {
        return Ok(gens);
    }
    // Work in the orthogonal complement of the lineality space; the row
    // space of m is exactly that complement over Q.
    let basis = row_space_basis(m);
    let bmat = Matrix::from_columns(basis, d)?;
    let reduced = m.mul_mat(&bmat);
    let quotient_rays = pointed_cone_rays(&reduced)?;
    for u in quotient_rays {
        gens.push(bmat.mul_vec(&u).primitive());
    }
    Ok(gens)
}

/// H-to-V conversion through the homogenization cone
/// `{(x, w) : a x - b w <= 0, w >= 0}`.
pub fn vrep_from_hrep(h: &HRep) -> Result<VRep> {
    let n = h.dim();
    let mut rows: Vec<Vector> = Vec::with_capacity(h.rows() + 1);
    for r in 0..h.rows() {
        rows.push(h.a.row_vector(r).with_appended(-h.b.get(r).clone()));
    }
    let mut nonneg = Vector::zeros(n + 1);
    nonneg.set(n, -num::one::<Scalar>());
    rows.push(nonneg);
    let m = Matrix::from_rows(rows, n + 1)?;

    let mut points = Vec::new();
    let mut rays = Vec::new();
    for g in cone_generators(&m)? {
        let (x, w) = g.split_last();
        if w.is_positive() {
            points.push(x.scaled(&w.recip()));
        } else {
            debug_assert!(w.is_zero());
            if !x.is_zero() {
                rays.push(x.primitive());
            }
        }
    }
    if points.is_empty() {
        return Ok(VRep::empty(n));
    }
    VRep::new(points, rays, n)
}

/// V-to-H conversion: generators of the dual of the homogenization cone are
/// exactly the valid inequalities.
pub fn hrep_from_vrep(v: &VRep) -> Result<HRep> {
    let n = v.dim();
    if v.is_empty() {
        return Ok(HRep::empty(n));
    }
    let mut rows: Vec<Vector> = Vec::with_capacity(v.points.len() + v.rays.len());
    for p in &v.points {
        rows.push(p.with_appended(num::one()));
    }
    for r in &v.rays {
        rows.push(r.with_appended(Scalar::zero()));
    }
    let g = Matrix::from_rows(rows, n + 1)?;

    let mut a_rows = Vec::new();
    let mut b = Vec::new();
    for gen in cone_generators(&g)? {
        let (y, eta) = gen.split_last();
        if y.is_zero() {
            // 0 x <= -eta; nonempty input makes eta <= 0, so the row is vacuous.
            debug_assert!(!eta.is_positive());
            continue;
        }
        a_rows.push(y);
        b.push(-eta);
    }
    if a_rows.is_empty() {
        return Ok(HRep::full_space(n));
    }
    HRep::new(Matrix::from_rows(a_rows, n)?, Vector::new(b))
}
