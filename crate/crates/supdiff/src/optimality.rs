//! Multiplier certificates for the convex program `min g` subject to
//! `f_t <= 0` over a finite constraint family: the origin must decompose as
//! a simplex combination drawn from the epsilon-subdifferentials of the
//! objective, the active constraints, and the slack-scaled weighted inactive
//! constraints, up to a box neighborhood. Everything is decided by exact
//! feasibility LPs; returned certificates re-verify by substitution.
//!
//! The bilinear products `lambda_i * (point in P_i)` are linearized through
//! generator weights: `mu >= 0` summing to `lambda_i` over the points of
//! `P_i` plus free ray weights `nu >= 0`. At `lambda_i = 0` that relaxation
//! admits pure ray mass, which the corollary's statement does not; supports
//! are therefore re-solved per subset with a max-min-lambda objective, which
//! finds a strictly positive weighting exactly when a faithful certificate
//! exists.

use num::{One, Signed, Zero};

use crate::convexfn::{FnValue, PolyConvexFn};
use crate::error::{Error, Result};
use crate::kernel::{
    solve_lp, LinearProgram, LpObjective, LpOutcome, Matrix, RowSense, Scalar, VarBound, Vector,
};
use crate::polyhedra::Polyhedron;
use crate::supcalc::{SupFamily, Weights};

/// The convex program `min objective(x)` s.t. `f_t(x) <= 0` for all members.
#[derive(Clone, Debug)]
pub struct Program {
    pub objective: PolyConvexFn,
    pub constraints: SupFamily,
}

#[derive(Clone, Debug)]
pub enum SlaterStatus {
    /// A point with every constraint strictly negative.
    Witness(Vector),
    None { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockRole {
    Objective,
    ActiveConstraint(usize),
    InactiveConstraint(usize),
}

#[derive(Clone, Debug)]
pub struct CertificateBlock {
    pub role: BlockRole,
    pub lambda: Scalar,
    /// Selected point of the block's subdifferential set; present whenever
    /// `lambda > 0`.
    pub point: Option<Vector>,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub eps: Scalar,
    pub box_radius: Scalar,
    pub blocks: Vec<CertificateBlock>,
    pub slack: Vector,
}

#[derive(Debug)]
pub enum CertifyOutcome {
    Certificate(Certificate),
    NoCertificate { reason: String },
}

#[derive(Clone, Debug)]
pub struct ProbePair {
    pub eps: Scalar,
    pub box_radius: Scalar,
    /// Whether the branch with the objective multiplier forced to zero
    /// admits any (relaxed) solution.
    pub zero_branch_feasible: bool,
}

/// Outcome of the shrinking-(eps, radius) search for an infeasible
/// zero-objective-multiplier branch.
#[derive(Clone, Debug)]
pub struct SlaterProbe {
    pub witness: Vector,
    pub pairs: Vec<ProbePair>,
    /// First tested pair whose zero branch is infeasible, supporting a
    /// strictly positive objective multiplier there.
    pub supported_at: Option<(Scalar, Scalar)>,
}

#[derive(Clone)]
struct Block {
    role: BlockRole,
    /// Coefficient in the vector identity: one for the objective and active
    /// blocks, the slack for inactive blocks.
    coefficient: Scalar,
    points: Vec<Vector>,
    rays: Vec<Vector>,
}

impl Program {
    pub fn new(objective: PolyConvexFn, constraints: SupFamily) -> Result<Self> {
        if objective.dim() != constraints.dim() {
            return Err(Error::Dimension(
                "objective and constraints must share a dimension".into(),
            ));
        }
        Ok(Program {
            objective,
            constraints,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// Feasibility of a point: finite objective value and every constraint
    /// value nonpositive.
    pub fn is_feasible(&self, x: &Vector) -> Result<bool> {
        if !self.objective.eval(x)?.is_finite() {
            return Ok(false);
        }
        for m in self.constraints.members() {
            match m.f.eval(x)? {
                FnValue::Finite(v) if !v.is_positive() => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Exact minimization of the collapsed program by one LP over the
    /// epigraph variable; used to anchor "certificate must exist" claims.
    pub fn solve_collapsed(&self) -> Result<LpOutcome> {
        let n = self.dim();
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vec<Scalar> = Vec::new();
        // objective pieces below the epigraph variable
        for p in self.objective.pieces() {
            rows.push(p.gradient.with_appended(-Scalar::one()));
            rhs.push(-p.offset.clone());
        }
        let gh = self.objective.domain_poly().hrep()?;
        for r in 0..gh.rows() {
            rows.push(gh.a.row_vector(r).with_appended(Scalar::zero()));
            rhs.push(gh.b.get(r).clone());
        }
        for m in self.constraints.members() {
            for p in m.f.pieces() {
                rows.push(p.gradient.with_appended(Scalar::zero()));
                rhs.push(-p.offset.clone());
            }
            let h = m.f.domain_poly().hrep()?;
            for r in 0..h.rows() {
                rows.push(h.a.row_vector(r).with_appended(Scalar::zero()));
                rhs.push(h.b.get(r).clone());
            }
        }
        let count = rows.len();
        let mut objective = Vector::zeros(n + 1);
        objective.set(n, -Scalar::one());
        let lp = LinearProgram::new(
            Matrix::from_rows(rows, n + 1)?,
            Vector::new(rhs),
            vec![RowSense::Le; count],
            LpObjective::Maximize(objective),
            vec![VarBound::Free; n + 1],
        )?;
        // flip the epigraph maximization back into a minimum
        Ok(match solve_lp(&lp)? {
            LpOutcome::Optimal { point, value } => {
                let (x, _) = point.split_last();
                LpOutcome::Optimal {
                    point: x,
                    value: -value,
                }
            }
            other => other,
        })
    }

    /// Slack-scaled inactive weights for the extended family whose supremum
    /// vanishes at a feasible point: `eps / (eps - 2 f_t(x))` off the active
    /// set, one on it.
    pub fn corr_rho(&self, x: &Vector, eps: &Scalar) -> Result<Weights> {
        if !eps.is_positive() {
            return Err(Error::Domain("weights need a positive slack".into()));
        }
        let values = self.constraints.values_at(x)?;
        let two = Scalar::from_integer(2.into());
        Weights::new(
            values
                .iter()
                .map(|v| {
                    if v.is_zero() {
                        Scalar::one()
                    } else {
                        eps / &(eps - &(&two * v))
                    }
                })
                .collect(),
        )
    }
}

/// Existence of a point with every member value strictly negative, decided
/// by one exact LP on the epigraph variable (bounded below at -1 so the
/// witness is always a concrete point).
pub fn slater_check(family: &SupFamily) -> Result<SlaterStatus> {
    let n = family.dim();
    let mut rows: Vec<Vector> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    for m in family.members() {
        for p in m.f.pieces() {
            rows.push(p.gradient.with_appended(-Scalar::one()));
            rhs.push(-p.offset.clone());
        }
        let h = m.f.domain_poly().hrep()?;
        for r in 0..h.rows() {
            rows.push(h.a.row_vector(r).with_appended(Scalar::zero()));
            rhs.push(h.b.get(r).clone());
        }
    }
    // s >= -1 keeps the problem bounded; any s < 0 certifies strictness
    let mut bound_row = Vector::zeros(n + 1);
    bound_row.set(n, -Scalar::one());
    rows.push(bound_row);
    rhs.push(Scalar::one());

    let count = rows.len();
    let mut objective = Vector::zeros(n + 1);
    objective.set(n, -Scalar::one());
    let lp = LinearProgram::new(
        Matrix::from_rows(rows, n + 1)?,
        Vector::new(rhs),
        vec![RowSense::Le; count],
        LpObjective::Maximize(objective),
        vec![VarBound::Free; n + 1],
    )?;
    Ok(match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } => {
            if (-&value).is_negative() {
                let (x, _) = point.split_last();
                SlaterStatus::Witness(x)
            } else {
                SlaterStatus::None {
                    reason: "the supremum of the constraints is nonnegative everywhere".into(),
                }
            }
        }
        LpOutcome::Infeasible { .. } => SlaterStatus::None {
            reason: "the constraint domains have an empty intersection".into(),
        },
        LpOutcome::Unbounded => unreachable!("epigraph variable is bounded below"),
    })
}

impl Program {
    fn build_blocks(
        &self,
        x: &Vector,
        eps: &Scalar,
        rho: &Weights,
        include_objective: bool,
    ) -> Result<Vec<Block>> {
        if rho.len() != self.constraints.len() {
            return Err(Error::Dimension(
                "one inactive weight per constraint".into(),
            ));
        }
        let values = self.constraints.values_at(x)?;
        let mut blocks = Vec::new();
        if include_objective {
            let set = self.objective.eps_subdifferential(x, eps)?;
            blocks.push(Block::from_set(BlockRole::Objective, Scalar::one(), &set)?);
        }
        for (t, m) in self.constraints.members().iter().enumerate() {
            if values[t].is_zero() {
                let set = m.f.eps_subdifferential(x, eps)?;
                blocks.push(Block::from_set(
                    BlockRole::ActiveConstraint(t),
                    Scalar::one(),
                    &set,
                )?);
            } else {
                let set = m.f.scale(rho.get(t))?.eps_subdifferential(x, eps)?;
                blocks.push(Block::from_set(
                    BlockRole::InactiveConstraint(t),
                    eps.clone(),
                    &set,
                )?);
            }
        }
        Ok(blocks)
    }

    /// Searches for a faithful certificate at the given slack and box
    /// radius. Returns `NoCertificate` exactly when none exists (the
    /// support enumeration is complete for a finite family).
    pub fn certify(
        &self,
        x: &Vector,
        eps: &Scalar,
        box_radius: &Scalar,
        rho: &Weights,
    ) -> Result<CertifyOutcome> {
        if !eps.is_positive() || !box_radius.is_positive() {
            return Err(Error::Domain(
                "certification needs positive slack and box radius".into(),
            ));
        }
        if !self.is_feasible(x)? {
            return Err(Error::Domain(
                "certification point must be feasible".into(),
            ));
        }
        let blocks = self.build_blocks(x, eps, rho, true)?;

        // Fast negative path: if even the relaxed problem (ray mass allowed
        // at zero weight) is infeasible, no certificate exists.
        let relaxed = assemble_lp(&blocks, self.dim(), box_radius, None)?;
        if let LpOutcome::Infeasible { .. } = solve_lp(&relaxed)? {
            return Ok(CertifyOutcome::NoCertificate {
                reason: "the multiplier system is infeasible at this slack and radius".into(),
            });
        }

        // Exact search over supports, largest first: maximize the smallest
        // member weight; success with a positive optimum is a faithful
        // certificate on that support.
        let all: Vec<usize> = (0..blocks.len()).collect();
        let mut subsets: Vec<Vec<usize>> = subsets_of(&all);
        subsets.sort_by_key(|s| std::cmp::Reverse(s.len()));
        for support in subsets {
            if support.is_empty() {
                continue;
            }
            let restricted: Vec<Block> = support
                .iter()
                .map(|&i| blocks[i].clone())
                .collect();
            let lp = assemble_lp(&restricted, self.dim(), box_radius, Some(()))?;
            if let LpOutcome::Optimal { point, value } = solve_lp(&lp)? {
                if value.is_positive() {
                    let cert = extract_certificate(
                        &restricted,
                        &blocks,
                        &support,
                        &point,
                        self.dim(),
                        eps,
                        box_radius,
                    );
                    self.verify_certificate(x, rho, &cert)?;
                    return Ok(CertifyOutcome::Certificate(cert));
                }
            }
        }
        Ok(CertifyOutcome::NoCertificate {
            reason: "no support admits strictly positive weights within the box".into(),
        })
    }

    /// Exact re-verification by substitution: simplex membership, per-point
    /// Fenchel-Young membership in the stated set, the vector identity with
    /// the box slack, and the box bound itself.
    pub fn verify_certificate(
        &self,
        x: &Vector,
        rho: &Weights,
        cert: &Certificate,
    ) -> Result<()> {
        let mut total = Scalar::zero();
        let mut combo = cert.slack.clone();
        for b in &cert.blocks {
            if b.lambda.is_negative() {
                return Err(Error::Domain("negative multiplier".into()));
            }
            total += &b.lambda;
            if b.lambda.is_zero() {
                continue;
            }
            let z = b
                .point
                .as_ref()
                .ok_or_else(|| Error::Domain("positive multiplier without a point".into()))?;
            let member = match &b.role {
                BlockRole::Objective => {
                    self.objective.fenchel_young_member(x, z, &cert.eps)?
                }
                BlockRole::ActiveConstraint(t) => self
                    .constraints
                    .member(*t)
                    .fenchel_young_member(x, z, &cert.eps)?,
                BlockRole::InactiveConstraint(t) => self
                    .constraints
                    .member(*t)
                    .scale(rho.get(*t))?
                    .fenchel_young_member(x, z, &cert.eps)?,
            };
            if !member {
                return Err(Error::Domain(format!(
                    "selected point fails membership for block {:?}",
                    b.role
                )));
            }
            let coeff = match &b.role {
                BlockRole::InactiveConstraint(_) => &b.lambda * &cert.eps,
                _ => b.lambda.clone(),
            };
            combo = combo.add(&z.scaled(&coeff));
        }
        if total != Scalar::one() {
            return Err(Error::Domain("multipliers do not sum to one".into()));
        }
        if !combo.is_zero() {
            return Err(Error::Domain("vector identity fails".into()));
        }
        if cert.slack.max_abs() > cert.box_radius {
            return Err(Error::Domain("slack escapes the box".into()));
        }
        Ok(())
    }

    /// Feasibility of the branch with the objective multiplier forced to
    /// zero, in the relaxed sense (sound when infeasible).
    pub fn zero_objective_branch_feasible(
        &self,
        x: &Vector,
        eps: &Scalar,
        box_radius: &Scalar,
        rho: &Weights,
    ) -> Result<bool> {
        let blocks = self.build_blocks(x, eps, rho, false)?;
        if blocks.is_empty() {
            return Ok(false);
        }
        let lp = assemble_lp(&blocks, self.dim(), box_radius, None)?;
        Ok(!matches!(solve_lp(&lp)?, LpOutcome::Infeasible { .. }))
    }

    /// Sweeps (eps, radius) pairs, then keeps shrinking both geometrically
    /// until the zero branch goes infeasible or the floor is reached.
    pub fn slater_multiplier_probe(
        &self,
        x: &Vector,
        grid: &[(Scalar, Scalar)],
        floor: &Scalar,
    ) -> Result<SlaterProbe> {
        let witness = match slater_check(&self.constraints)? {
            SlaterStatus::Witness(w) => w,
            SlaterStatus::None { reason } => {
                return Err(Error::Domain(format!(
                    "probe requires the strict-feasibility condition: {reason}"
                )))
            }
        };
        let mut pairs = Vec::new();
        let mut supported_at = None;
        let mut check = |program: &Program, eps: &Scalar, radius: &Scalar| -> Result<bool> {
            let rho = program.corr_rho(x, eps)?;
            let feasible = program.zero_objective_branch_feasible(x, eps, radius, &rho)?;
            pairs.push(ProbePair {
                eps: eps.clone(),
                box_radius: radius.clone(),
                zero_branch_feasible: feasible,
            });
            Ok(!feasible)
        };
        for (eps, radius) in grid {
            if check(self, eps, radius)? && supported_at.is_none() {
                supported_at = Some((eps.clone(), radius.clone()));
            }
        }
        if supported_at.is_none() {
            // The inactive contributions scale like eps * rho(eps); a path
            // that shrinks both parameters together can stay feasible
            // forever, so the box radius shrinks alone at a pinned slack.
            let quarter = Scalar::new(1.into(), 4.into());
            let (eps, mut radius) = grid
                .last()
                .cloned()
                .unwrap_or((Scalar::one(), Scalar::one()));
            loop {
                radius = &radius * &quarter;
                if radius < *floor {
                    break;
                }
                if check(self, &eps, &radius)? {
                    supported_at = Some((eps.clone(), radius.clone()));
                    break;
                }
            }
        }
        Ok(SlaterProbe {
            witness,
            pairs,
            supported_at,
        })
    }
}

impl Block {
    fn from_set(role: BlockRole, coefficient: Scalar, set: &Polyhedron) -> Result<Block> {
        let v = set.vrep()?;
        if v.is_empty() {
            // Proper functions have nonempty eps-subdifferentials at
            // positive slack; an empty block cannot carry weight.
            return Err(Error::Domain(format!(
                "block {role:?} has an empty subdifferential set"
            )));
        }
        Ok(Block {
            role,
            coefficient,
            points: v.points.clone(),
            rays: v.rays.clone(),
        })
    }

    fn var_count(&self) -> usize {
        1 + self.points.len() + self.rays.len()
    }
}

fn subsets_of(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << items.len());
    for mask in 0..(1u32 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect(),
        );
    }
    out
}

/// Variable layout: per block `[lambda, mu.., nu..]`, then the n slack
/// coordinates, then the optional max-min variable.
fn assemble_lp(
    blocks: &[Block],
    dim: usize,
    box_radius: &Scalar,
    maxmin: Option<()>,
) -> Result<LinearProgram> {
    let block_vars: usize = blocks.iter().map(Block::var_count).sum();
    let ncols = block_vars + dim + usize::from(maxmin.is_some());
    let mcol = block_vars + dim;

    let mut rows: Vec<Vector> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    let mut senses: Vec<RowSense> = Vec::new();

    let block_offsets: Vec<usize> = blocks
        .iter()
        .scan(0usize, |acc, b| {
            let here = *acc;
            *acc += b.var_count();
            Some(here)
        })
        .collect();

    // weights sum to one
    let mut row = Vector::zeros(ncols);
    for &off in &block_offsets {
        row.set(off, Scalar::one());
    }
    rows.push(row);
    rhs.push(Scalar::one());
    senses.push(RowSense::Eq);

    // per block: point weights sum to the block weight
    for (b, &off) in blocks.iter().zip(&block_offsets) {
        let mut row = Vector::zeros(ncols);
        row.set(off, -Scalar::one());
        for j in 0..b.points.len() {
            row.set(off + 1 + j, Scalar::one());
        }
        rows.push(row);
        rhs.push(Scalar::zero());
        senses.push(RowSense::Eq);
    }

    // the vector identity, one row per coordinate
    for d in 0..dim {
        let mut row = Vector::zeros(ncols);
        for (b, &off) in blocks.iter().zip(&block_offsets) {
            for (j, p) in b.points.iter().enumerate() {
                row.set(off + 1 + j, &b.coefficient * p.get(d));
            }
            for (k, r) in b.rays.iter().enumerate() {
                row.set(off + 1 + b.points.len() + k, &b.coefficient * r.get(d));
            }
        }
        row.set(block_vars + d, Scalar::one());
        rows.push(row);
        rhs.push(Scalar::zero());
        senses.push(RowSense::Eq);
    }

    // box bounds on the slack
    for d in 0..dim {
        let mut up = Vector::zeros(ncols);
        up.set(block_vars + d, Scalar::one());
        rows.push(up);
        rhs.push(box_radius.clone());
        senses.push(RowSense::Le);
        let mut down = Vector::zeros(ncols);
        down.set(block_vars + d, -Scalar::one());
        rows.push(down);
        rhs.push(box_radius.clone());
        senses.push(RowSense::Le);
    }

    // max-min objective: m <= lambda_i for every block
    if maxmin.is_some() {
        for &off in &block_offsets {
            let mut row = Vector::zeros(ncols);
            row.set(mcol, Scalar::one());
            row.set(off, -Scalar::one());
            rows.push(row);
            rhs.push(Scalar::zero());
            senses.push(RowSense::Le);
        }
    }

    let mut bounds = vec![VarBound::NonNeg; block_vars];
    bounds.extend(vec![VarBound::Free; dim]);
    if maxmin.is_some() {
        bounds.push(VarBound::Free);
    }

    let objective = if maxmin.is_some() {
        let mut c = Vector::zeros(ncols);
        c.set(mcol, Scalar::one());
        LpObjective::Maximize(c)
    } else {
        LpObjective::Feasibility
    };

    LinearProgram::new(
        Matrix::from_rows(rows, ncols)?,
        Vector::new(rhs),
        senses,
        objective,
        bounds,
    )
}

fn extract_certificate(
    restricted: &[Block],
    all_blocks: &[Block],
    support: &[usize],
    solution: &Vector,
    dim: usize,
    eps: &Scalar,
    box_radius: &Scalar,
) -> Certificate {
    let mut blocks: Vec<CertificateBlock> = all_blocks
        .iter()
        .map(|b| CertificateBlock {
            role: b.role.clone(),
            lambda: Scalar::zero(),
            point: None,
        })
        .collect();
    let mut off = 0usize;
    for (slot, b) in restricted.iter().enumerate() {
        let lambda = solution.get(off).clone();
        let mut z = Vector::zeros(dim);
        for (j, p) in b.points.iter().enumerate() {
            z = z.add(&p.scaled(solution.get(off + 1 + j)));
        }
        for (k, r) in b.rays.iter().enumerate() {
            z = z.add(&r.scaled(solution.get(off + 1 + b.points.len() + k)));
        }
        let target = &mut blocks[support[slot]];
        target.lambda = lambda.clone();
        if lambda.is_positive() {
            target.point = Some(z.scaled(&lambda.recip()));
        }
        off += b.var_count();
    }
    let block_vars: usize = restricted.iter().map(Block::var_count).sum();
    let slack = Vector::new(
        (0..dim)
            .map(|d| solution.get(block_vars + d).clone())
            .collect(),
    );
    Certificate {
        eps: eps.clone(),
        box_radius: box_radius.clone(),
        blocks,
        slack,
    }
}

#[cfg(test)]
mod tests;
