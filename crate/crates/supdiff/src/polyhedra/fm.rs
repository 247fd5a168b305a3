//! Fourier-Motzkin elimination. Independent of the double description
//! pipeline; used to cross-check generator-to-inequality conversions on
//! small inputs (exponential blowup makes it a testing tool, not the
//! production path).

use num::{Signed, Zero};

use crate::error::Result;
use crate::kernel::{Matrix, Scalar, Vector};

use super::rep::{HRep, VRep};

/// Eliminates the last variable from `{z : rows z <= rhs}` by combining every
/// positive-coefficient row with every negative-coefficient row.
pub fn eliminate_last(rows: &[(Vector, Scalar)]) -> Vec<(Vector, Scalar)> {
    let mut keep: Vec<(Vector, Scalar)> = Vec::new();
    let mut pos: Vec<(Vector, Scalar)> = Vec::new();
    let mut neg: Vec<(Vector, Scalar)> = Vec::new();
    for (a, b) in rows {
        let (head, last) = a.split_last();
        if last.is_zero() {
            keep.push((head, b.clone()));
        } else if last.is_positive() {
            // normalize to coefficient +1
            pos.push((head.scaled(&last.clone().recip()), b / &last));
        } else {
            let scale = (-last.clone()).recip();
            neg.push((head.scaled(&scale), -(b * &scale)));
        }
    }
    // pos: z <= b - head x ; neg: z >= head x - b. Feasible z exists iff each
    // lower bound stays below each upper bound.
    for (pa, pb) in &pos {
        for (na, nb) in &neg {
            keep.push((na.add(pa), nb + pb));
        }
    }
    keep
}

/// Projects out the trailing `count` variables one at a time.
pub fn eliminate_trailing(mut rows: Vec<(Vector, Scalar)>, count: usize) -> Vec<(Vector, Scalar)> {
    for _ in 0..count {
        rows = eliminate_last(&rows);
    }
    rows
}

/// Inequality description of `conv(points) + cone(rays)` via the lifted
/// system `x = sum l_j p_j + sum m_k r_k`, `sum l_j = 1`, `l, m >= 0`,
/// eliminating the multipliers.
pub fn hrep_from_generators_fm(v: &VRep) -> Result<HRep> {
    let n = v.dim();
    if v.is_empty() {
        return Ok(HRep::empty(n));
    }
    let np = v.points.len();
    let nr = v.rays.len();
    let total = n + np + nr;

    let mut rows: Vec<(Vector, Scalar)> = Vec::new();
    let lifted = |x_part: &Vector, l_part: Vec<Scalar>| -> Vector {
        let mut entries = x_part.as_slice().to_vec();
        entries.extend(l_part);
        Vector::new(entries)
    };
    // x - sum l_j p_j - sum m_k r_k = 0 as two inequality families
    for coord in 0..n {
        let mut l = Vec::with_capacity(np + nr);
        for p in &v.points {
            l.push(-p.get(coord).clone());
        }
        for r in &v.rays {
            l.push(-r.get(coord).clone());
        }
        let row = lifted(&Vector::unit(n, coord), l);
        rows.push((row.clone(), Scalar::zero()));
        rows.push((row.neg(), Scalar::zero()));
    }
    // sum l_j = 1
    let mut ones = vec![Scalar::zero(); np + nr];
    for v_ in ones.iter_mut().take(np) {
        *v_ = num::one();
    }
    let sum_row = lifted(&Vector::zeros(n), ones);
    rows.push((sum_row.clone(), num::one()));
    rows.push((sum_row.neg(), -num::one::<Scalar>()));
    // multipliers nonnegative
    for j in 0..(np + nr) {
        rows.push((Vector::unit(total, n + j).neg(), Scalar::zero()));
    }

    let projected = eliminate_trailing(rows, np + nr);
    let mut a_rows = Vec::new();
    let mut b = Vec::new();
    for (a, c) in projected {
        if a.is_zero() {
            debug_assert!(!c.is_negative(), "generators produced an infeasible lift");
            continue;
        }
        let p = a.primitive();
        // rescale the right side consistently with the primitive row
        let k = a
            .iter()
            .zip(p.iter())
            .find(|(orig, _)| !orig.is_zero())
            .map(|(orig, prim)| prim / orig)
            .expect("nonzero row");
        a_rows.push(p);
        b.push(c * k);
    }
    if a_rows.is_empty() {
        return Ok(HRep::full_space(n));
    }
    // drop exact duplicate rows to keep the oracle output small
    let mut uniq_rows: Vec<Vector> = Vec::new();
    let mut uniq_b: Vec<Scalar> = Vec::new();
    for (row, rhs) in a_rows.into_iter().zip(b) {
        let dup = uniq_rows
            .iter()
            .zip(&uniq_b)
            .any(|(r, c)| *r == row && *c == rhs);
        if !dup {
            uniq_rows.push(row);
            uniq_b.push(rhs);
        }
    }
    HRep::new(
        Matrix::from_rows(uniq_rows, n)?,
        Vector::new(uniq_b),
    )
}
