//! Executes instance queries: normal-cone identity checks per slack,
//! subdifferential intersection runs, the full verification battery, and
//! optimality certification. Queries run concurrently up to a worker count;
//! the report is assembled in query order for determinism.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::kernel::{LpOutcome, Scalar, Vector};
use crate::optimality::{CertifyOutcome, Program, SlaterStatus};
use crate::polyhedra::{Polyhedron, SetRelation};
use crate::supcalc::{EpsRunConfig, RhoChoice, SubdiffFormula, SupFamily, Weights};

use super::instance::{FormulaId, Instance, Query, QueryKind, WeightChoice};
use super::report::{
    eps_label, witness_strings, CheckReport, NamedSet, QueryReport, Report, Status,
};

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Overrides the per-query slack grids when set.
    pub eps_grid: Option<Vec<Scalar>>,
    pub eps_floor: Scalar,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps_grid: None,
            eps_floor: EpsRunConfig::default_floor(),
            workers: default_workers(),
        }
    }
}

/// Worker count: explicit env override, else the available parallelism.
pub fn default_workers() -> usize {
    if let Ok(value) = std::env::var("SUPDIFF_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

pub fn run_instance(instance: &Instance, config: &RunConfig) -> Report {
    let total = instance.queries.len();
    let reports: Mutex<Vec<Option<QueryReport>>> = Mutex::new(vec![None; total]);
    let next: AtomicUsize = AtomicUsize::new(0);
    let workers = config.workers.clamp(1, total.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= total {
                    break;
                }
                let report = run_query(instance, idx, &instance.queries[idx], config);
                reports.lock().expect("no panics hold the lock")[idx] = Some(report);
            });
        }
    });

    let queries = reports
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|q| q.expect("every query ran"))
        .collect();
    Report::from_queries(queries)
}

fn run_query(instance: &Instance, index: usize, query: &Query, config: &RunConfig) -> QueryReport {
    let start = Instant::now();
    let kind = match query.kind {
        QueryKind::NormalCone => "normal_cone",
        QueryKind::Subdiff => "subdiff",
        QueryKind::Verify => "verify",
        QueryKind::Certify => "certify",
    };
    let mut notes = Vec::new();
    let checks = match dispatch(instance, query, config, &mut notes) {
        Ok(checks) => checks,
        Err(Error::Resource(msg)) => {
            notes.push(format!("resource limit: {msg}"));
            vec![CheckReport {
                name: "resource".into(),
                status: Status::Inconclusive,
                witness: None,
                notes: vec![msg],
                sets: vec![],
            }]
        }
        Err(other) => vec![CheckReport {
            name: "error".into(),
            status: Status::Inconclusive,
            witness: None,
            notes: vec![other.to_string()],
            sets: vec![],
        }],
    };
    let status = checks
        .iter()
        .map(|c| c.status)
        .fold(Status::Verified, Status::worst);
    QueryReport {
        index,
        kind: kind.into(),
        status,
        point: super::instance::vector_to_strings(&query.point),
        checks,
        notes,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

fn effective_grid(query: &Query, config: &RunConfig) -> Vec<Scalar> {
    if let Some(grid) = &config.eps_grid {
        return grid.clone();
    }
    if !query.epsilons.is_empty() {
        return query.epsilons.clone();
    }
    EpsRunConfig::default_grid()
}

fn dispatch(
    instance: &Instance,
    query: &Query,
    config: &RunConfig,
    notes: &mut Vec<String>,
) -> Result<Vec<CheckReport>> {
    let grid = effective_grid(query, config);
    match query.kind {
        QueryKind::NormalCone => {
            let formula = query.formula.unwrap_or(FormulaId::P1);
            if !formula.is_normal_cone() {
                return Err(Error::Domain(format!(
                    "formula '{}' is not a normal-cone formula",
                    formula.as_str()
                )));
            }
            Ok(vec![normal_cone_check(
                &instance.family,
                formula,
                query,
                &grid,
            )?])
        }
        QueryKind::Subdiff => {
            let formula = query.formula.unwrap_or(FormulaId::T1bis);
            let check = subdiff_check(&instance.family, formula, query, &grid, config)?;
            Ok(vec![check])
        }
        QueryKind::Verify => verify_battery(instance, query, &grid, config, notes),
        QueryKind::Certify => certify_check(instance, query, &grid),
    }
}

fn resolve_weights(
    family: &SupFamily,
    query: &Query,
    choice: Option<WeightChoice>,
    x: &Vector,
    eps: &Scalar,
) -> Result<Weights> {
    match choice.unwrap_or(WeightChoice::Ones) {
        WeightChoice::Cp1 => family.biased_weights(x, eps),
        WeightChoice::Corr => family.rho_weights(x, eps),
        WeightChoice::Ones => Ok(Weights::ones(family.len())),
        WeightChoice::Custom => {
            let map = query.custom_weights.as_ref().ok_or_else(|| {
                Error::Domain("custom weights requested but none supplied".into())
            })?;
            weights_from_map(family, map)
        }
    }
}

fn weights_from_map(family: &SupFamily, map: &BTreeMap<String, Scalar>) -> Result<Weights> {
    let values = family
        .members()
        .iter()
        .map(|m| {
            map.get(&m.id)
                .cloned()
                .ok_or_else(|| Error::Domain(format!("missing weight for '{}'", m.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Weights::new(values)
}

fn deltas_for(family: &SupFamily, query: &Query, eps: &Scalar) -> Result<Vec<Scalar>> {
    match &query.deltas {
        Some(map) => family
            .members()
            .iter()
            .map(|m| {
                map.get(&m.id)
                    .cloned()
                    .ok_or_else(|| Error::Domain(format!("missing slack for '{}'", m.id)))
            })
            .collect(),
        // default spread: scale the slack differently per member
        None => Ok((0..family.len())
            .map(|t| eps / &Scalar::from_integer(((t + 1) as i64).into()))
            .collect()),
    }
}

/// One normal-cone formula against the direct cone, across the grid.
fn normal_cone_check(
    family: &SupFamily,
    formula: FormulaId,
    query: &Query,
    grid: &[Scalar],
) -> Result<CheckReport> {
    let x = &query.point;
    let direct = family.normal_cone_direct(x)?;
    let mut status = Status::Verified;
    let mut witness = None;
    let mut notes = Vec::new();
    let mut sets = vec![NamedSet::from_polyhedron("direct", &direct)?];

    for eps in grid {
        let cones: Vec<(String, Polyhedron)> = match formula {
            FormulaId::P1 => {
                let w = resolve_weights(family, query, query.weights, x, eps)?;
                vec![(
                    format!("eps={}", eps_label(eps)),
                    family.normal_cone_weighted(x, eps, &w)?,
                )]
            }
            FormulaId::Cp1 => {
                let w = family.biased_weights(x, eps)?;
                vec![(
                    format!("eps={}", eps_label(eps)),
                    family.normal_cone_weighted(x, eps, &w)?,
                )]
            }
            FormulaId::Ccor => vec![(
                format!("eps={}", eps_label(eps)),
                family.normal_cone_weighted(x, eps, &Weights::ones(family.len()))?,
            )],
            FormulaId::Lemconsum => {
                let w = resolve_weights(family, query, query.weights, x, eps)?;
                let deltas = deltas_for(family, query, eps)?;
                vec![(
                    format!("eps={}", eps_label(eps)),
                    family.normal_cone_weighted_per_index(x, &deltas, &w)?,
                )]
            }
            FormulaId::Normalnew => {
                let cones = family.normal_cone_positive_part(x, eps)?;
                if !cones.lambda_certified {
                    status = Status::worst(status, Status::Refuted);
                    if let Some(v) = &cones.uncertified_point {
                        witness = Some(witness_strings(v));
                    }
                    notes.push(format!(
                        "lambda certification failed at eps={}",
                        eps_label(eps)
                    ));
                }
                vec![
                    (
                        format!("eps={} plain", eps_label(eps)),
                        cones.plain,
                    ),
                    (
                        format!("eps={} strict", eps_label(eps)),
                        cones.strict,
                    ),
                ]
            }
            _ => unreachable!("normal-cone formulas only"),
        };
        for (label, cone) in cones {
            match cone.relate(&direct)? {
                SetRelation::Equal => {}
                rel => {
                    status = Status::worst(status, Status::Refuted);
                    let w = match rel {
                        SetRelation::ProperSubset { witness } => witness,
                        SetRelation::ProperSuperset { witness } => witness,
                        SetRelation::Incomparable { only_in_self, .. } => only_in_self,
                        SetRelation::Equal => unreachable!(),
                    };
                    notes.push(format!("{label}: differs from the direct cone"));
                    witness = Some(witness_strings(&w));
                }
            }
            sets.push(NamedSet::from_polyhedron(label, &cone)?);
        }
    }
    Ok(CheckReport {
        name: formula.as_str().into(),
        status,
        witness,
        notes,
        sets,
    })
}

fn rho_choice_for(query: &Query, family: &SupFamily) -> Result<RhoChoice> {
    Ok(match query.weights.unwrap_or(WeightChoice::Corr) {
        WeightChoice::Corr => RhoChoice::SlackScaled,
        WeightChoice::Ones => RhoChoice::Ones,
        WeightChoice::Cp1 => RhoChoice::SlackScaled,
        WeightChoice::Custom => {
            let map = query.custom_weights.as_ref().ok_or_else(|| {
                Error::Domain("custom weights requested but none supplied".into())
            })?;
            RhoChoice::Fixed(weights_from_map(family, map)?)
        }
    })
}

/// One subdifferential formula through the intersection-over-slacks driver.
fn subdiff_check(
    family: &SupFamily,
    formula: FormulaId,
    query: &Query,
    grid: &[Scalar],
    config: &RunConfig,
) -> Result<CheckReport> {
    let subformula = match formula {
        FormulaId::T1 => SubdiffFormula::ActiveUnion,
        FormulaId::T1bis => SubdiffFormula::ActiveSum,
        FormulaId::Hlz => SubdiffFormula::Section(Polyhedron::full_space(family.dim())),
        other => {
            return Err(Error::Domain(format!(
                "formula '{}' is not a subdifferential formula",
                other.as_str()
            )))
        }
    };
    let run_config = EpsRunConfig {
        grid: grid.to_vec(),
        floor: config.eps_floor.clone(),
        rho: rho_choice_for(query, family)?,
        probes: query.probes.clone(),
    };
    let run = family.eps_intersection_run(&subformula, &query.point, &run_config)?;

    let mut notes = Vec::new();
    let mut witness = None;
    let mut status = Status::Verified;

    // The inner inclusion is forced at every slack; a failure is a refutation.
    for step in &run.steps {
        if !step.inner_inclusion {
            status = Status::Refuted;
            if let SetRelation::ProperSuperset { witness: w } | SetRelation::Incomparable { only_in_self: w, .. } =
                run.subdifferential.relate(&step.rhs)?
            {
                witness = Some(witness_strings(&w));
            }
            notes.push(format!(
                "subgradient escapes the right-hand side at eps={}",
                eps_label(&step.eps)
            ));
        }
    }

    if status != Status::Refuted {
        let equality_claimed = match formula {
            FormulaId::T1 => run.minimizer,
            _ => true,
        };
        if equality_claimed {
            if run.stabilized && run.matches_subdifferential {
                status = Status::Verified;
            } else {
                status = Status::Inconclusive;
                notes.push("grid floor reached before stabilization to the subdifferential".into());
            }
        } else {
            // union form at a non-minimizer: only the inclusion is claimed
            if !run.strictness_witnesses.is_empty() {
                notes.push("strict inclusion witnessed (expected off minimizers)".into());
            }
        }
    }

    let mut sets = vec![NamedSet::from_polyhedron(
        "subdifferential",
        &run.subdifferential,
    )?];
    for step in &run.steps {
        sets.push(NamedSet::from_polyhedron(
            format!("rhs eps={}", eps_label(&step.eps)),
            &step.rhs,
        )?);
    }
    for probe in &run.probes {
        let desc = match (&probe.excluded_at, probe.in_subdifferential) {
            (Some(eps), _) => format!(
                "probe {:?} excluded at eps={}",
                super::instance::vector_to_strings(&probe.probe),
                eps_label(eps)
            ),
            (None, true) => format!(
                "probe {:?} is a subgradient (never excluded)",
                super::instance::vector_to_strings(&probe.probe)
            ),
            (None, false) => format!(
                "probe {:?} not excluded at the grid floor",
                super::instance::vector_to_strings(&probe.probe)
            ),
        };
        notes.push(desc);
    }

    Ok(CheckReport {
        name: formula.as_str().into(),
        status,
        witness,
        notes,
        sets,
    })
}

/// The full identity battery at one point: every normal-cone formula, the
/// oracle triangulation, and both subdifferential forms.
fn verify_battery(
    instance: &Instance,
    query: &Query,
    grid: &[Scalar],
    config: &RunConfig,
    notes: &mut Vec<String>,
) -> Result<Vec<CheckReport>> {
    let family = &instance.family;
    let x = &query.point;
    let mut checks = Vec::new();

    for formula in [
        FormulaId::P1,
        FormulaId::Cp1,
        FormulaId::Ccor,
        FormulaId::Lemconsum,
        FormulaId::Normalnew,
    ] {
        checks.push(normal_cone_check(family, formula, query, grid)?);
    }

    // oracle triangulation: conjugate-epigraph slice against the direct cone
    let direct = family.normal_cone_direct(x)?;
    let via_epi = family.normal_cone_via_conjugate_epigraphs(x)?;
    checks.push(match via_epi.relate(&direct)? {
        SetRelation::Equal => CheckReport {
            name: "oracle-triangulation".into(),
            status: Status::Verified,
            witness: None,
            notes: vec![],
            sets: vec![NamedSet::from_polyhedron("conjugate-epigraph-slice", &via_epi)?],
        },
        rel => {
            let w = match rel {
                SetRelation::ProperSubset { witness } => witness,
                SetRelation::ProperSuperset { witness } => witness,
                SetRelation::Incomparable { only_in_self, .. } => only_in_self,
                SetRelation::Equal => unreachable!(),
            };
            CheckReport {
                name: "oracle-triangulation".into(),
                status: Status::Refuted,
                witness: Some(witness_strings(&w)),
                notes: vec!["conjugate-epigraph slice differs from the direct cone".into()],
                sets: vec![NamedSet::from_polyhedron("conjugate-epigraph-slice", &via_epi)?],
            }
        }
    });

    for formula in [FormulaId::T1, FormulaId::T1bis, FormulaId::Hlz] {
        checks.push(subdiff_check(family, formula, query, grid, config)?);
    }

    if instance.objective.is_some() && !query.u_radii.is_empty() {
        checks.extend(certify_check(instance, query, grid)?);
    }
    let _ = notes;
    Ok(checks)
}

/// Optimality certification across the (eps, radius) grid, with the optional
/// zero-multiplier probe under strict feasibility.
fn certify_check(instance: &Instance, query: &Query, grid: &[Scalar]) -> Result<Vec<CheckReport>> {
    let objective = instance
        .objective
        .clone()
        .ok_or_else(|| Error::Domain("certification needs an objective".into()))?;
    let program = Program::new(objective, instance.family.clone())?;
    let x = &query.point;
    if !program.is_feasible(x)? {
        return Err(Error::Domain(
            "certification point violates the constraints".into(),
        ));
    }
    let radii = if query.u_radii.is_empty() {
        vec![
            Scalar::new(1.into(), 2.into()),
            Scalar::new(1.into(), 100.into()),
        ]
    } else {
        query.u_radii.clone()
    };

    // independent optimality validation anchors the existence claim
    let optimal = match program.solve_collapsed()? {
        LpOutcome::Optimal { value, .. } => {
            let at_x = program
                .objective
                .eval(x)?
                .finite()
                .expect("feasible point has finite objective value");
            at_x == value
        }
        _ => false,
    };

    let mut checks = Vec::new();
    let mut pair_notes = Vec::new();
    let mut status = Status::Verified;
    let mut witness = None;
    for eps in grid {
        for u in &radii {
            let rho = match query.weights.unwrap_or(WeightChoice::Corr) {
                WeightChoice::Ones => Weights::ones(program.constraints.len()),
                _ => program.corr_rho(x, eps)?,
            };
            match program.certify(x, eps, u, &rho)? {
                CertifyOutcome::Certificate(cert) => {
                    program.verify_certificate(x, &rho, &cert)?;
                    pair_notes.push(format!(
                        "eps={} u={}: certificate re-verified",
                        eps_label(eps),
                        eps_label(u)
                    ));
                }
                CertifyOutcome::NoCertificate { reason } => {
                    if optimal {
                        // the existence claim fails at a verified optimum
                        status = Status::Refuted;
                        witness = Some(witness_strings(x));
                    }
                    pair_notes.push(format!(
                        "eps={} u={}: no certificate ({reason})",
                        eps_label(eps),
                        eps_label(u)
                    ));
                }
            }
        }
    }
    if !optimal {
        pair_notes.push(
            "point is not an exact optimum of the collapsed program; outcomes recorded as-is"
                .into(),
        );
    }
    checks.push(CheckReport {
        name: "certify".into(),
        status,
        witness,
        notes: pair_notes,
        sets: vec![],
    });

    if query.probe_slater {
        let pairs: Vec<(Scalar, Scalar)> = grid
            .iter()
            .flat_map(|e| radii.iter().map(move |u| (e.clone(), u.clone())))
            .collect();
        let floor = Scalar::new(1.into(), (1u64 << 20).into());
        let check = match slater_gate(&program) {
            Some(reason) => CheckReport {
                name: "multiplier-positivity-probe".into(),
                status: Status::Verified,
                witness: None,
                notes: vec![format!("probe skipped: {reason}")],
                sets: vec![],
            },
            None => {
                let probe = program.slater_multiplier_probe(x, &pairs, &floor)?;
                let mut notes: Vec<String> = probe
                    .pairs
                    .iter()
                    .map(|p| {
                        format!(
                            "eps={} u={}: zero-branch {}",
                            eps_label(&p.eps),
                            eps_label(&p.box_radius),
                            if p.zero_branch_feasible {
                                "feasible"
                            } else {
                                "infeasible"
                            }
                        )
                    })
                    .collect();
                let status = match &probe.supported_at {
                    Some((e, u)) => {
                        notes.push(format!(
                            "objective multiplier forced positive at eps={} u={}",
                            eps_label(e),
                            eps_label(u)
                        ));
                        Status::Verified
                    }
                    None => {
                        notes.push("floor reached with the zero branch still feasible".into());
                        Status::Inconclusive
                    }
                };
                CheckReport {
                    name: "multiplier-positivity-probe".into(),
                    status,
                    witness: Some(witness_strings(&probe.witness)),
                    notes,
                    sets: vec![],
                }
            }
        };
        checks.push(check);
    }
    Ok(checks)
}

fn slater_gate(program: &Program) -> Option<String> {
    match crate::optimality::slater_check(&program.constraints) {
        Ok(SlaterStatus::Witness(_)) => None,
        Ok(SlaterStatus::None { reason }) => Some(reason),
        Err(e) => Some(e.to_string()),
    }
}
