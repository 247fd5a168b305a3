//! Seeded random instance generation. Construction is rejection-free: a
//! base point is drawn first and every member domain is shifted to contain
//! it, so generated queries are always well-posed. Identical seeds yield
//! byte-identical instance files.

use num::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{int, rat, scalar_to_string, LpOutcome, Scalar, Vector};

use super::instance::{
    DomainSpec, FunctionEntry, FunctionSpec, InstanceFile, MetaInfo, PieceSpec, QueryKind,
    QuerySpec, WeightChoice,
};

#[derive(Clone, Copy, Debug)]
pub struct GenBounds {
    pub max_dimension: usize,
    pub max_members: usize,
    pub max_pieces: usize,
    pub max_rows: usize,
}

impl Default for GenBounds {
    fn default() -> Self {
        GenBounds {
            max_dimension: 4,
            max_members: 6,
            max_pieces: 4,
            max_rows: 4,
        }
    }
}

impl GenBounds {
    fn validate(&self) -> Result<()> {
        if self.max_dimension == 0 || self.max_dimension > 4 {
            return Err(Error::Domain("dimension bound must be in 1..=4".into()));
        }
        if self.max_members == 0 || self.max_members > 6 {
            return Err(Error::Domain("member bound must be in 1..=6".into()));
        }
        if self.max_pieces == 0 || self.max_pieces > 4 {
            return Err(Error::Domain("piece bound must be in 1..=4".into()));
        }
        if self.max_rows > 4 {
            return Err(Error::Domain("row bound must be at most 4".into()));
        }
        Ok(())
    }
}

fn small_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    rat(rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2))
}

fn small_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| small_scalar(rng)).collect())
}

fn nonzero_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = small_vector(rng, dim);
        if !v.is_zero() {
            return v;
        }
    }
}

fn strings(v: &Vector) -> Vec<String> {
    v.iter().map(scalar_to_string).collect()
}

/// Domain rows anchored at the base point: each row `c x <= c x0 + slack`
/// holds at `x0`; `tight` forces one row to hold with equality so the
/// normal cone there is nontrivial.
fn anchored_domain(
    rng: &mut ChaCha8Rng,
    dim: usize,
    base: &Vector,
    max_rows: usize,
    tight: bool,
) -> Option<DomainSpec> {
    let rows = if tight {
        rng.gen_range(1..=max_rows.max(1))
    } else {
        rng.gen_range(0..=max_rows)
    };
    if rows == 0 {
        return None;
    }
    let mut c = Vec::with_capacity(rows);
    let mut d = Vec::with_capacity(rows);
    for i in 0..rows {
        let row = nonzero_vector(rng, dim);
        let slack = if tight && i == 0 {
            Scalar::zero()
        } else {
            rat(rng.gen_range(0i64..=2), 1)
        };
        let rhs = row.dot(base) + slack;
        c.push(strings(&row));
        d.push(scalar_to_string(&rhs));
    }
    Some(DomainSpec { c, d })
}

/// Pieces with values capped at the base point: `a x + b` where
/// `b = offset - a x0` keeps the value at `x0` equal to `offset`.
fn capped_piece(rng: &mut ChaCha8Rng, dim: usize, base: &Vector, value_at_base: Scalar) -> PieceSpec {
    let a = small_vector(rng, dim);
    let b = &value_at_base - &a.dot(base);
    PieceSpec {
        a: strings(&a),
        b: scalar_to_string(&b),
    }
}

fn default_epsilons() -> Vec<String> {
    vec!["1".into(), "1/2".into(), "1/8".into(), "1/64".into()]
}

/// A random family instance with a verification battery at the base point.
/// Half the instances carry an indicator-like member whose domain is tight
/// at the base point, so the normal cone to the common domain is nontrivial.
pub fn gen_random(seed: u64, bounds: &GenBounds) -> Result<InstanceFile> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=bounds.max_dimension);
    let members = rng.gen_range(1..=bounds.max_members);
    let base = small_vector(&mut rng, dim);
    let constrained = rng.gen_bool(0.5);
    let indicator_slot = rng.gen_range(0..members);

    let mut functions = Vec::with_capacity(members);
    for t in 0..members {
        let indicator_like = constrained && t == indicator_slot;
        let (pieces, domain) = if indicator_like {
            let level = rat(rng.gen_range(-1i64..=0), 1);
            let zero = Vector::zeros(dim);
            (
                vec![PieceSpec {
                    a: strings(&zero),
                    b: scalar_to_string(&level),
                }],
                anchored_domain(&mut rng, dim, &base, bounds.max_rows, true),
            )
        } else {
            let count = rng.gen_range(1..=bounds.max_pieces);
            let pieces = (0..count)
                .map(|_| {
                    // value at the base point in [-2, 0]
                    let v = rat(rng.gen_range(-2i64..=0), 1);
                    capped_piece(&mut rng, dim, &base, v)
                })
                .collect();
            (
                pieces,
                anchored_domain(&mut rng, dim, &base, bounds.max_rows, false),
            )
        };
        functions.push(FunctionEntry {
            id: format!("f{}", t + 1),
            spec: FunctionSpec { pieces, domain },
        });
    }

    let queries = vec![QuerySpec {
        kind: QueryKind::Verify,
        point: strings(&base),
        epsilons: default_epsilons(),
        formula: None,
        weights: None,
        custom_weights: None,
        deltas: None,
        probes: vec![strings(&small_vector(&mut rng, dim))],
        u_radii: vec![],
        probe_slater: false,
    }];

    Ok(InstanceFile {
        dimension: dim,
        meta: Some(MetaInfo {
            seed: Some(seed),
            base_point: Some(strings(&base)),
            comment: None,
        }),
        functions,
        objective: None,
        queries,
    })
}

/// Conic domain anchored at the base point: every row is tight there, so
/// the shifted domain is a cone with apex at the base. Slack-indexed
/// subdifferentials of members built over such domains are constant in the
/// slack, which makes intersection runs stabilize exactly.
fn conic_domain(
    rng: &mut ChaCha8Rng,
    dim: usize,
    base: &Vector,
    max_rows: usize,
) -> Option<DomainSpec> {
    let rows = rng.gen_range(0..=max_rows);
    if rows == 0 {
        return None;
    }
    let mut c = Vec::with_capacity(rows);
    let mut d = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row = nonzero_vector(rng, dim);
        d.push(scalar_to_string(&row.dot(base)));
        c.push(strings(&row));
    }
    Some(DomainSpec { c, d })
}

/// A family whose supremum attains its global minimum at the base point,
/// built so intersection runs stabilize: active members are maxima of
/// pieces vanishing at the base (the coordinate gauge pieces spread over
/// them), inactive members are negative constants, and all restricted
/// domains are cones anchored at the base.
pub fn gen_minimizer(seed: u64, bounds: &GenBounds) -> Result<InstanceFile> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=bounds.max_dimension);
    let members = rng.gen_range(1..=bounds.max_members);
    let base = small_vector(&mut rng, dim);

    let mut piece_lists: Vec<Vec<PieceSpec>> = vec![Vec::new(); members];
    for j in 0..dim {
        for sign in [1i64, -1] {
            let mut a = Vector::zeros(dim);
            a.set(j, int(sign));
            let b = -a.dot(&base);
            let slot = rng.gen_range(0..members);
            piece_lists[slot].push(PieceSpec {
                a: strings(&a),
                b: scalar_to_string(&b),
            });
        }
    }
    let mut functions = Vec::with_capacity(members);
    for (t, mut pieces) in piece_lists.into_iter().enumerate() {
        if pieces.is_empty() {
            // inactive member: a negative constant on a conic domain
            let level = rat(rng.gen_range(-2i64..=-1), 1);
            let zero = Vector::zeros(dim);
            pieces.push(PieceSpec {
                a: strings(&zero),
                b: scalar_to_string(&level),
            });
        } else {
            // more pieces vanishing at the base keep every piece active
            let extra = rng.gen_range(0..=bounds.max_pieces.saturating_sub(1));
            for _ in 0..extra {
                pieces.push(capped_piece(&mut rng, dim, &base, Scalar::zero()));
            }
        }
        let domain = conic_domain(&mut rng, dim, &base, bounds.max_rows);
        functions.push(FunctionEntry {
            id: format!("f{}", t + 1),
            spec: FunctionSpec { pieces, domain },
        });
    }

    let queries = vec![
        QuerySpec {
            kind: QueryKind::Subdiff,
            point: strings(&base),
            epsilons: default_epsilons(),
            formula: Some(super::instance::FormulaId::T1),
            weights: Some(WeightChoice::Corr),
            custom_weights: None,
            deltas: None,
            probes: vec![],
            u_radii: vec![],
            probe_slater: false,
        },
        QuerySpec {
            kind: QueryKind::Subdiff,
            point: strings(&base),
            epsilons: default_epsilons(),
            formula: Some(super::instance::FormulaId::T1bis),
            weights: Some(WeightChoice::Corr),
            custom_weights: None,
            deltas: None,
            probes: vec![],
            u_radii: vec![],
            probe_slater: false,
        },
    ];

    Ok(InstanceFile {
        dimension: dim,
        meta: Some(MetaInfo {
            seed: Some(seed),
            base_point: Some(strings(&base)),
            comment: None,
        }),
        functions,
        objective: None,
        queries,
    })
}

/// A program instance: random affine constraints anchored to be feasible at
/// a drawn point, an objective bounded through a box domain, and the
/// certification point taken from the exact collapsed optimum.
pub fn gen_program(seed: u64, bounds: &GenBounds) -> Result<InstanceFile> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=bounds.max_dimension);
    let members = rng.gen_range(1..=bounds.max_members.min(3));
    let anchor = small_vector(&mut rng, dim);

    let mut functions = Vec::with_capacity(members);
    for t in 0..members {
        let count = rng.gen_range(1..=bounds.max_pieces.min(2));
        // Componentwise-nonnegative nonzero gradients: subgradient masses
        // from different constraints can never cancel, which keeps the
        // strict-feasibility probe decisive, and the supremum is unbounded
        // below (strict feasibility always holds).
        let pieces = (0..count)
            .map(|_| {
                let mut a = Vector::zeros(dim);
                while a.is_zero() {
                    a = Vector::new(
                        (0..dim).map(|_| rat(rng.gen_range(0i64..=2), 1)).collect(),
                    );
                }
                let v = rat(rng.gen_range(-2i64..=0), 1);
                let b = &v - &a.dot(&anchor);
                PieceSpec {
                    a: strings(&a),
                    b: scalar_to_string(&b),
                }
            })
            .collect();
        functions.push(FunctionEntry {
            id: format!("f{}", t + 1),
            spec: FunctionSpec {
                pieces,
                domain: None,
            },
        });
    }

    // objective: random slope over a box domain so the minimum exists
    let slope = nonzero_vector(&mut rng, dim);
    let mut c = Vec::with_capacity(2 * dim);
    let mut d = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        let mut up = Vector::zeros(dim);
        up.set(j, int(1));
        c.push(strings(&up));
        d.push(scalar_to_string(&(anchor.get(j) + &int(3))));
        let mut down = Vector::zeros(dim);
        down.set(j, int(-1));
        c.push(strings(&down));
        d.push(scalar_to_string(&(&int(3) - anchor.get(j))));
    }
    let objective = FunctionSpec {
        pieces: vec![PieceSpec {
            a: strings(&slope),
            b: "0".into(),
        }],
        domain: Some(DomainSpec { c, d }),
    };

    let file = InstanceFile {
        dimension: dim,
        meta: Some(MetaInfo {
            seed: Some(seed),
            base_point: Some(strings(&anchor)),
            comment: None,
        }),
        functions,
        objective: Some(objective),
        queries: vec![],
    };

    // solve the collapsed program exactly; its optimum becomes the query point
    let instance = file.validate()?;
    let program = crate::optimality::Program::new(
        instance.objective.clone().expect("objective present"),
        instance.family.clone(),
    )?;
    let optimum = match program.solve_collapsed()? {
        LpOutcome::Optimal { point, .. } => point,
        other => {
            return Err(Error::Domain(format!(
                "generated program has no finite optimum: {other:?}"
            )))
        }
    };

    let mut file = file;
    file.meta = Some(MetaInfo {
        seed: Some(seed),
        base_point: Some(strings(&optimum)),
        comment: None,
    });
    file.queries = vec![QuerySpec {
        kind: QueryKind::Certify,
        point: strings(&optimum),
        epsilons: vec!["1/2".into(), "1/8".into()],
        formula: None,
        weights: Some(WeightChoice::Corr),
        custom_weights: None,
        deltas: None,
        probes: vec![],
        u_radii: vec!["1/2".into(), "1/100".into()],
        probe_slater: true,
    }];
    Ok(file)
}
