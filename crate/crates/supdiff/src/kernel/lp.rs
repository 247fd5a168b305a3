//! Exact two-phase simplex over the rationals with Bland's anti-cycling
//! rule. Small and dense on purpose: every pivot is exact, solutions satisfy
//! their constraints with zero tolerance, and infeasibility comes with a
//! Farkas certificate.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};

use super::linalg::{Matrix, Vector};
use super::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNeg,
    Free,
}

#[derive(Clone, Debug)]
pub enum LpObjective {
    Feasibility,
    Maximize(Vector),
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub a: Matrix,
    pub b: Vector,
    pub senses: Vec<RowSense>,
    pub objective: LpObjective,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    pub fn new(
        a: Matrix,
        b: Vector,
        senses: Vec<RowSense>,
        objective: LpObjective,
        bounds: Vec<VarBound>,
    ) -> Result<Self> {
        if a.rows() != b.dim() || a.rows() != senses.len() {
            return Err(Error::Dimension(format!(
                "{} rows vs {} right sides vs {} senses",
                a.rows(),
                b.dim(),
                senses.len()
            )));
        }
        if a.cols() != bounds.len() {
            return Err(Error::Dimension(format!(
                "{} columns vs {} bounds",
                a.cols(),
                bounds.len()
            )));
        }
        if let LpObjective::Maximize(c) = &objective {
            if c.dim() != a.cols() {
                return Err(Error::Dimension(format!(
                    "objective has {} entries for {} columns",
                    c.dim(),
                    a.cols()
                )));
            }
        }
        Ok(LinearProgram {
            a,
            b,
            senses,
            objective,
            bounds,
        })
    }

    /// Feasibility problem over `{x : a x (<=|=) b}` with the given bounds.
    pub fn feasibility(a: Matrix, b: Vector, senses: Vec<RowSense>, bounds: Vec<VarBound>) -> Result<Self> {
        Self::new(a, b, senses, LpObjective::Feasibility, bounds)
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { point: Vector, value: Scalar },
    /// `farkas` is a row multiplier vector for the original rows: it is
    /// nonnegative on `<=` rows, combines the columns of free variables to
    /// zero, combines nonnegative-variable columns to a nonnegative row, and
    /// has a strictly negative product with the right side.
    Infeasible { farkas: Vector },
    Unbounded,
}

struct Tableau {
    /// Constraint rows, each `ncols` wide, plus the basic value at the end.
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B^T B^-1 A_j`; optimal (max) when all <= 0.
    obj: Vec<Scalar>,
    obj_value: Scalar,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].clone().recip();
        for v in self.rows[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for c in 0..=self.ncols {
                let delta = &self.rows[row][c] * &factor;
                self.rows[r][c] = &self.rows[r][c] - &delta;
            }
        }
        if !self.obj[col].is_zero() {
            let factor = self.obj[col].clone();
            for c in 0..self.ncols {
                let delta = &self.rows[row][c] * &factor;
                self.obj[c] = &self.obj[c] - &delta;
            }
            let delta = &self.rows[row][self.ncols] * &factor;
            self.obj_value = &self.obj_value + &delta;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the lowest index with positive
    /// reduced cost; leaving row breaks ratio ties by lowest basic index.
    fn run(&mut self, allowed: &[bool]) -> SimplexEnd {
        loop {
            let Some(enter) = (0..self.ncols)
                .find(|&j| allowed[j] && self.obj[j].is_positive())
            else {
                return SimplexEnd::Optimal;
            };
            let mut leave: Option<(usize, Scalar)> = None;
            for r in 0..self.rows.len() {
                let coeff = &self.rows[r][enter];
                if !coeff.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][self.ncols] / coeff;
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return SimplexEnd::Unbounded,
            }
        }
    }
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

/// Internal column layout: structural columns first (free variables split
/// into +/- parts), then slacks for `<=` rows, then one artificial per row.
struct Layout {
    /// Per original variable, (plus column, optional minus column).
    var_cols: Vec<(usize, Option<usize>)>,
    slack_cols: Vec<Option<usize>>,
    art_start: usize,
    ncols: usize,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let m = lp.a.rows();
    let n = lp.a.cols();

    let mut ncols = 0usize;
    let var_cols: Vec<(usize, Option<usize>)> = lp
        .bounds
        .iter()
        .map(|bound| {
            let plus = ncols;
            ncols += 1;
            let minus = match bound {
                VarBound::Free => {
                    ncols += 1;
                    Some(ncols - 1)
                }
                VarBound::NonNeg => None,
            };
            (plus, minus)
        })
        .collect();
    let slack_cols: Vec<Option<usize>> = lp
        .senses
        .iter()
        .map(|s| match s {
            RowSense::Le => {
                ncols += 1;
                Some(ncols - 1)
            }
            RowSense::Eq => None,
        })
        .collect();
    let art_start = ncols;
    ncols += m;
    let layout = Layout {
        var_cols,
        slack_cols,
        art_start,
        ncols,
    };

    // Row sign normalization so every right side is nonnegative; artificial
    // columns then form an initial identity basis.
    let mut rows: Vec<Vec<Scalar>> = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for r in 0..m {
        let mut row = vec![Scalar::zero(); layout.ncols + 1];
        for (j, &(plus, minus)) in layout.var_cols.iter().enumerate() {
            let coeff = lp.a.get(r, j).clone();
            if let Some(mc) = minus {
                row[mc] = -coeff.clone();
            }
            row[plus] = coeff;
        }
        if let Some(sc) = layout.slack_cols[r] {
            row[sc] = Scalar::one();
        }
        row[layout.ncols] = lp.b.get(r).clone();
        if row[layout.ncols].is_negative() {
            flipped[r] = true;
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        row[layout.art_start + r] = Scalar::one();
        rows.push(row);
    }

    // Phase 1: maximize -(sum of artificials).
    let mut obj = vec![Scalar::zero(); layout.ncols];
    let mut obj_value = Scalar::zero();
    for r in 0..m {
        // Reduced costs for c_art = -1 basis: c_j - sum of column entries.
        for c in 0..layout.ncols {
            let delta = rows[r][c].clone();
            obj[c] = &obj[c] + &delta;
        }
        let delta = rows[r][layout.ncols].clone();
        obj_value = &obj_value - &delta;
    }
    for c in layout.art_start..layout.ncols {
        obj[c] = &obj[c] - &Scalar::one();
    }
    let mut tab = Tableau {
        rows,
        basis: (layout.art_start..layout.ncols).collect(),
        obj,
        obj_value,
        ncols: layout.ncols,
    };
    let allowed_all = vec![true; layout.ncols];
    match tab.run(&allowed_all) {
        SimplexEnd::Unbounded => unreachable!("phase-1 objective is bounded above by zero"),
        SimplexEnd::Optimal => {}
    }

    if tab.obj_value.is_negative() {
        // Infeasible. Simplex multipliers y_i = c_B^T B^-1 e_i live in the
        // artificial columns; undo the row flips and negate.
        let farkas = Vector::new(
            (0..m)
                .map(|r| {
                    let mut y = Scalar::zero();
                    for (i, &bcol) in tab.basis.iter().enumerate() {
                        if bcol >= layout.art_start {
                            // phase-1 cost of a basic artificial is -1
                            y -= &tab.rows[i][layout.art_start + r];
                        }
                    }
                    if flipped[r] {
                        -y
                    } else {
                        y
                    }
                })
                .collect(),
        );
        debug_assert!(verify_farkas(lp, &farkas));
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive artificials out of the basis; rows that cannot pivot are
    // redundant and dropped.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= layout.art_start {
            let pivot_col = (0..layout.art_start).find(|&c| !tab.rows[r][c].is_zero());
            match pivot_col {
                Some(c) => tab.pivot(r, c),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut allowed = vec![true; layout.ncols];
    for c in layout.art_start..layout.ncols {
        allowed[c] = false;
    }

    // Phase 2 with the real objective, artificial columns banned.
    if let LpObjective::Maximize(c) = &lp.objective {
        let mut cost = vec![Scalar::zero(); layout.ncols];
        for (j, &(plus, minus)) in layout.var_cols.iter().enumerate() {
            cost[plus] = c.get(j).clone();
            if let Some(mc) = minus {
                cost[mc] = -c.get(j).clone();
            }
        }
        let mut obj = cost.clone();
        let mut obj_value = Scalar::zero();
        for (i, &bcol) in tab.basis.iter().enumerate() {
            if cost[bcol].is_zero() {
                continue;
            }
            let cb = cost[bcol].clone();
            for j in 0..layout.ncols {
                let delta = &tab.rows[i][j] * &cb;
                obj[j] = &obj[j] - &delta;
            }
            let delta = &tab.rows[i][layout.ncols] * &cb;
            obj_value = &obj_value + &delta;
        }
        tab.obj = obj;
        tab.obj_value = obj_value;
        if let SimplexEnd::Unbounded = tab.run(&allowed) {
            return Ok(LpOutcome::Unbounded);
        }
    }

    // Map the basic solution back to the original variables.
    let mut col_values = vec![Scalar::zero(); layout.ncols];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        col_values[bcol] = tab.rows[i][layout.ncols].clone();
    }
    let point = Vector::new(
        layout
            .var_cols
            .iter()
            .map(|&(plus, minus)| match minus {
                Some(mc) => &col_values[plus] - &col_values[mc],
                None => col_values[plus].clone(),
            })
            .collect(),
    );
    let value = match &lp.objective {
        LpObjective::Feasibility => Scalar::zero(),
        LpObjective::Maximize(c) => c.dot(&point),
    };
    debug_assert!(satisfies(lp, &point));
    let _ = n;
    Ok(LpOutcome::Optimal { point, value })
}

/// Exact constraint check for a candidate point.
pub fn satisfies(lp: &LinearProgram, x: &Vector) -> bool {
    if x.dim() != lp.a.cols() {
        return false;
    }
    for r in 0..lp.a.rows() {
        let lhs = lp.a.row_vector(r).dot(x);
        let ok = match lp.senses[r] {
            RowSense::Le => lhs <= *lp.b.get(r),
            RowSense::Eq => lhs == *lp.b.get(r),
        };
        if !ok {
            return false;
        }
    }
    lp.bounds
        .iter()
        .enumerate()
        .all(|(j, bound)| match bound {
            VarBound::NonNeg => !x.get(j).is_negative(),
            VarBound::Free => true,
        })
}

/// Exact Farkas-certificate check: `y >= 0` on `<=` rows, `y^T A = 0` on free
/// variables, `y^T A >= 0` on nonnegative variables, and `y^T b < 0`.
pub fn verify_farkas(lp: &LinearProgram, y: &Vector) -> bool {
    if y.dim() != lp.a.rows() {
        return false;
    }
    for (i, sense) in lp.senses.iter().enumerate() {
        if matches!(sense, RowSense::Le) && y.get(i).is_negative() {
            return false;
        }
    }
    for (j, bound) in lp.bounds.iter().enumerate() {
        let combo: Scalar = (0..lp.a.rows()).map(|r| y.get(r) * lp.a.get(r, j)).sum();
        let ok = match bound {
            VarBound::Free => combo.is_zero(),
            VarBound::NonNeg => !combo.is_negative(),
        };
        if !ok {
            return false;
        }
    }
    y.dot(&lp.b).is_negative()
}

#[cfg(test)]
mod tests {
    use super::super::scalar::{int, rat};
    use super::*;

    fn mat(rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(
            rows.iter()
                .map(|r| Vector::new(r.iter().map(|&v| int(v)).collect()))
                .collect(),
            cols,
        )
        .unwrap()
    }

    fn vec_i(entries: &[i64]) -> Vector {
        Vector::new(entries.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn single_binding_constraint() {
        // max x s.t. x <= 3, x >= 0
        let lp = LinearProgram::new(
            mat(&[&[1]]),
            vec_i(&[3]),
            vec![RowSense::Le],
            LpObjective::Maximize(vec_i(&[1])),
            vec![VarBound::NonNeg],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point.as_slice(), &[int(3)]);
                assert_eq!(value, int(3));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_certified() {
        // x <= 0 and x >= 1 (as -x <= -1), x free
        let lp = LinearProgram::feasibility(
            mat(&[&[1], &[-1]]),
            vec_i(&[0, -1]),
            vec![RowSense::Le, RowSense::Le],
            vec![VarBound::Free],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(verify_farkas(&lp, &farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn open_ray_unbounded() {
        // max x s.t. x >= 0
        let lp = LinearProgram::new(
            Matrix::zeros(0, 1),
            Vector::zeros(0),
            vec![],
            LpObjective::Maximize(vec_i(&[1])),
            vec![VarBound::NonNeg],
        )
        .unwrap();
        assert!(matches!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn empty_constraint_set_feasible_at_origin() {
        let lp = LinearProgram::feasibility(
            Matrix::zeros(0, 2),
            Vector::zeros(0),
            vec![],
            vec![VarBound::Free, VarBound::Free],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert!(point.is_zero());
                assert!(value.is_zero());
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn equality_rows_and_free_vars() {
        // max x1 + x2 s.t. x1 + x2 = 1, x1 - x2 <= 3, free vars
        let lp = LinearProgram::new(
            mat(&[&[1, 1], &[1, -1]]),
            vec_i(&[1, 3]),
            vec![RowSense::Eq, RowSense::Le],
            LpObjective::Maximize(vec_i(&[1, 1])),
            vec![VarBound::Free, VarBound::Free],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(value, int(1));
                assert!(satisfies(&lp, &point));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // max 3x + 2y s.t. 2x + y <= 1, x + 3y <= 1, x,y >= 0.
        // Vertex at intersection: x = 2/5, y = 1/5, value 8/5.
        let lp = LinearProgram::new(
            mat(&[&[2, 1], &[1, 3]]),
            vec_i(&[1, 1]),
            vec![RowSense::Le, RowSense::Le],
            LpObjective::Maximize(vec_i(&[3, 2])),
            vec![VarBound::NonNeg, VarBound::NonNeg],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point.as_slice(), &[rat(2, 5), rat(1, 5)]);
                assert_eq!(value, rat(8, 5));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_guard() {
        // Degenerate vertex at the origin; Bland's rule must terminate.
        let lp = LinearProgram::new(
            mat(&[&[1, -1, 0], &[1, 0, -1], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
            vec_i(&[0, 0, 1, 1, 1]),
            vec![
                RowSense::Le,
                RowSense::Le,
                RowSense::Le,
                RowSense::Le,
                RowSense::Le,
            ],
            LpObjective::Maximize(vec_i(&[1, 1, 1])),
            vec![VarBound::NonNeg, VarBound::NonNeg, VarBound::NonNeg],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert!(satisfies(&lp, &point));
                assert_eq!(value, int(3));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_equality_mix() {
        // x + y = 2, x + y <= 1, x,y >= 0
        let lp = LinearProgram::feasibility(
            mat(&[&[1, 1], &[1, 1]]),
            vec_i(&[2, 1]),
            vec![RowSense::Eq, RowSense::Le],
            vec![VarBound::NonNeg, VarBound::NonNeg],
        )
        .unwrap();
        match solve_lp(&lp).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(verify_farkas(&lp, &farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
