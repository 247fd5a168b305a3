//! Exact Gaussian elimination: linear solves, null spaces, rank and row
//! bases. Everything works on copies; inputs are never mutated.

use num::Zero;

use crate::error::{Error, Result};

use super::linalg::{Matrix, Vector};
use super::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    /// A particular solution plus a basis of the homogeneous solution space.
    Solution {
        particular: Vector,
        null_basis: Vec<Vector>,
    },
    Inconsistent,
}

/// Reduced row echelon form of `[a | rhs...]` style data, operating on raw
/// rows. Returns the reduced rows and, per pivot, `(pivot_col, original_row)`.
fn rref(mut rows: Vec<Vec<Scalar>>, cols: usize) -> (Vec<Vec<Scalar>>, Vec<(usize, usize)>) {
    let mut origin: Vec<usize> = (0..rows.len()).collect();
    let mut pivots = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, src);
        origin.swap(pivot_row, src);
        let inv = rows[pivot_row][col].clone().recip();
        for v in rows[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..rows[r].len() {
                    let delta = &rows[pivot_row][c] * &factor;
                    rows[r][c] = &rows[r][c] - &delta;
                }
            }
        }
        pivots.push((col, origin[pivot_row]));
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    (rows, pivots)
}

/// Solves `a x = b` exactly.
pub fn solve_linear(a: &Matrix, b: &Vector) -> Result<LinearSolution> {
    if a.rows() != b.dim() {
        return Err(Error::Dimension(format!(
            "system has {} rows but right side has {}",
            a.rows(),
            b.dim()
        )));
    }
    let n = a.cols();
    let rows: Vec<Vec<Scalar>> = (0..a.rows())
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.push(b.get(r).clone());
            row
        })
        .collect();
    let (reduced, pivots) = rref(rows, n);
    // Any row reduced to 0 = nonzero is a contradiction.
    for row in &reduced {
        if row[..n].iter().all(Zero::is_zero) && !row[n].is_zero() {
            return Ok(LinearSolution::Inconsistent);
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(c, _)| c).collect();
    let mut particular = Vector::zeros(n);
    for (rank_row, &(col, _)) in pivots.iter().enumerate() {
        particular.set(col, reduced[rank_row][n].clone());
    }
    let null_basis = null_basis_from_rref(&reduced, &pivot_cols, n);
    Ok(LinearSolution::Solution {
        particular,
        null_basis,
    })
}

fn null_basis_from_rref(
    reduced: &[Vec<Scalar>],
    pivot_cols: &[usize],
    n: usize,
) -> Vec<Vector> {
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = Vector::zeros(n);
        v.set(free, num::One::one());
        for (rank_row, &pc) in pivot_cols.iter().enumerate() {
            v.set(pc, -reduced[rank_row][free].clone());
        }
        basis.push(v);
    }
    basis
}

/// Basis of `{x : a x = 0}`.
pub fn null_space(a: &Matrix) -> Vec<Vector> {
    let n = a.cols();
    let rows: Vec<Vec<Scalar>> = a.row_iter().map(|r| r.to_vec()).collect();
    let (reduced, pivots) = rref(rows, n);
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(c, _)| c).collect();
    null_basis_from_rref(&reduced, &pivot_cols, n)
}

pub fn rank(a: &Matrix) -> usize {
    let rows: Vec<Vec<Scalar>> = a.row_iter().map(|r| r.to_vec()).collect();
    rref(rows, a.cols()).1.len()
}

/// Indices of a maximal linearly independent subset of rows.
pub fn independent_rows(a: &Matrix) -> Vec<usize> {
    // Eliminate column-wise over the transpose so pivots land on rows of `a`.
    let t = a.transpose();
    let rows: Vec<Vec<Scalar>> = t.row_iter().map(|r| r.to_vec()).collect();
    let (_, pivots) = rref(rows, t.cols());
    let mut idx: Vec<usize> = pivots.iter().map(|&(c, _)| c).collect();
    idx.sort_unstable();
    idx
}

/// Basis of the row space, read off the nonzero rows of the RREF.
pub fn row_space_basis(a: &Matrix) -> Vec<Vector> {
    let rows: Vec<Vec<Scalar>> = a.row_iter().map(|r| r.to_vec()).collect();
    let (reduced, pivots) = rref(rows, a.cols());
    (0..pivots.len())
        .map(|r| Vector::new(reduced[r].clone()))
        .collect()
}

/// Exact inverse of a square matrix, if it exists.
pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    if n != a.cols() {
        return None;
    }
    let rows: Vec<Vec<Scalar>> = (0..n)
        .map(|r| {
            let mut row = a.row(r).to_vec();
            for c in 0..n {
                row.push(if c == r {
                    num::One::one()
                } else {
                    Scalar::zero()
                });
            }
            row
        })
        .collect();
    let (reduced, pivots) = rref(rows, n);
    if pivots.len() != n {
        return None;
    }
    let mut inv = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            inv.set(r, c, reduced[r][n + c].clone());
        }
    }
    Some(inv)
}
