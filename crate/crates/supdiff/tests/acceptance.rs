//! Acceptance gate: every criterion below runs at its stated tolerance
//! (exact set equality, zero tolerance, unless a criterion explicitly
//! allows an inconclusive verdict) over the bundled corpus plus seeded
//! random corpora, and prints one pass line on success.

use std::collections::BTreeSet;
use std::time::Instant;

use num::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use supdiff::harness::{
    bundled_corpus, gen_minimizer, gen_program, gen_random, GenBounds, Instance, InstanceFile,
};
use supdiff::kernel::{
    int, rat, solve_lp, verify_farkas, LinearProgram, LpObjective, LpOutcome, Matrix, RowSense,
    Scalar, VarBound, Vector,
};
use supdiff::optimality::{slater_check, CertifyOutcome, Program, SlaterStatus};
use supdiff::polyhedra::{closed_conv_union, HRep, Polyhedron, VRep};
use supdiff::supcalc::{EpsRunConfig, RhoChoice, SubdiffFormula, Weights};

fn eps_grid() -> Vec<Scalar> {
    vec![int(1), rat(1, 2), rat(1, 8), rat(1, 64)]
}

/// Bundled hand corpus plus one hundred seeded random instances.
fn corpus() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for (name, text) in bundled_corpus() {
        let instance = InstanceFile::parse_str(text)
            .expect("bundled instances parse")
            .validate()
            .expect("bundled instances validate");
        out.push((name.to_string(), instance));
    }
    let bounds = GenBounds::default();
    for seed in 0..100u64 {
        let instance = gen_random(seed, &bounds)
            .expect("generation succeeds")
            .validate()
            .expect("generated instances validate");
        out.push((format!("random-{seed}"), instance));
    }
    out
}

/// Distinct query points of an instance.
fn query_points(instance: &Instance) -> Vec<Vector> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for q in &instance.queries {
        let key = format!("{:?}", q.point);
        if seen.insert(key) {
            out.push(q.point.clone());
        }
    }
    out
}

fn random_weights(rng: &mut ChaCha8Rng, len: usize) -> Weights {
    Weights::new(
        (0..len)
            .map(|_| rat(rng.gen_range(1i64..=4), 4))
            .collect(),
    )
    .expect("weights in (0, 1]")
}

/// Criterion 1: every normal-cone formula, at every tested slack and every
/// admissible weight choice, equals the direct normal cone exactly.
#[test]
fn criterion_1_normal_cone_formulas_match_direct() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut checked = 0usize;
    for (name, instance) in corpus() {
        let family = &instance.family;
        for x in query_points(&instance) {
            let direct = family.normal_cone_direct(&x).expect("direct cone");
            for eps in eps_grid() {
                let weightings = vec![
                    ("cp1", family.biased_weights(&x, &eps).expect("weights")),
                    ("ones", Weights::ones(family.len())),
                    ("random", random_weights(&mut rng, family.len())),
                ];
                for (wname, w) in &weightings {
                    let cone = family
                        .normal_cone_weighted(&x, &eps, w)
                        .expect("weighted cone");
                    assert!(
                        cone.equals(&direct).expect("relate"),
                        "{name}: weighted[{wname}] differs at eps={eps} x={x:?}"
                    );
                    checked += 1;
                }
                // per-member slack variation
                let deltas: Vec<Scalar> = (0..family.len())
                    .map(|t| &eps / &int((t + 1) as i64))
                    .collect();
                for (wname, w) in &weightings[..2] {
                    let cone = family
                        .normal_cone_weighted_per_index(&x, &deltas, w)
                        .expect("per-member cone");
                    assert!(
                        cone.equals(&direct).expect("relate"),
                        "{name}: per-member[{wname}] differs at eps={eps} x={x:?}"
                    );
                    checked += 1;
                }
                // positive-part variants, with the exact lambda certification
                let cones = family
                    .normal_cone_positive_part(&x, &eps)
                    .expect("positive-part cones");
                assert!(
                    cones.plain.equals(&direct).expect("relate"),
                    "{name}: positive-part plain differs at eps={eps} x={x:?}"
                );
                assert!(
                    cones.strict.equals(&direct).expect("relate"),
                    "{name}: positive-part strict differs at eps={eps} x={x:?}"
                );
                assert!(
                    cones.lambda_certified,
                    "{name}: lambda certification failed at eps={eps} x={x:?}"
                );
                checked += 2;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "sweep took {elapsed:?}, budget is 60 s"
    );
    println!(
        "criterion 1: PASS - {checked} normal-cone identities exact in {:?}",
        elapsed
    );
}

/// Criterion 2: the conjugate-epigraph slice oracle agrees with the direct
/// normal cone on the full corpus.
#[test]
fn criterion_2_oracle_triangulation() {
    let mut checked = 0usize;
    for (name, instance) in corpus() {
        let family = &instance.family;
        for x in query_points(&instance) {
            let direct = family.normal_cone_direct(&x).expect("direct cone");
            let via_epi = family
                .normal_cone_via_conjugate_epigraphs(&x)
                .expect("epigraph slice");
            assert!(
                via_epi.equals(&direct).expect("relate"),
                "{name}: conjugate-epigraph slice differs at x={x:?}"
            );
            checked += 1;
        }
    }
    println!("criterion 2: PASS - {checked} oracle triangulations exact");
}

/// Criterion 3: the subdifferential right-hand sides contain the exact
/// subdifferential at every slack everywhere; constructed minimizer
/// instances stabilize to it exactly; the non-minimizer example reproduces
/// the strictness witness; nothing is ever refuted.
#[test]
fn criterion_3_subdifferential_formulas() {
    let grid = eps_grid();
    let config = EpsRunConfig {
        grid: grid.clone(),
        floor: rat(1, 4096),
        rho: RhoChoice::SlackScaled,
        probes: vec![],
    };

    // outer inclusion everywhere on the corpus
    let mut inclusion_checks = 0usize;
    for (name, instance) in corpus() {
        let family = &instance.family;
        for x in query_points(&instance) {
            for formula in [SubdiffFormula::ActiveUnion, SubdiffFormula::ActiveSum] {
                let run = family
                    .eps_intersection_run(&formula, &x, &config)
                    .expect("run");
                for step in &run.steps {
                    assert!(
                        step.inner_inclusion,
                        "{name}: inclusion fails at eps={} x={x:?}",
                        step.eps
                    );
                    inclusion_checks += 1;
                }
            }
        }
    }

    // constructed minimizer corpus stabilizes exactly
    let bounds = GenBounds::default();
    let mut minimizers = 0usize;
    for seed in 0..24u64 {
        let instance = gen_minimizer(seed, &bounds)
            .expect("generation succeeds")
            .validate()
            .expect("generated instances validate");
        let x = instance.queries[0].point.clone();
        for formula in [SubdiffFormula::ActiveUnion, SubdiffFormula::ActiveSum] {
            let run = instance
                .family
                .eps_intersection_run(&formula, &x, &config)
                .expect("run");
            assert!(run.minimizer, "seed {seed}: base point must minimize");
            assert!(
                run.stabilized && run.matches_subdifferential,
                "seed {seed}: minimizer run failed to stabilize exactly"
            );
            for step in &run.steps {
                assert!(step.inner_inclusion);
            }
        }
        minimizers += 1;
    }
    assert!(minimizers >= 20);

    // the strictness example: the origin survives every slack in the
    // union form but is not a subgradient
    let text = bundled_corpus()
        .into_iter()
        .find(|(n, _)| *n == "nonminimizer")
        .expect("bundled")
        .1;
    let instance = InstanceFile::parse_str(text)
        .expect("parses")
        .validate()
        .expect("validates");
    let x = instance.queries[0].point.clone();
    let mut strict_config = config.clone();
    strict_config.probes = vec![Vector::zeros(1)];
    let run = instance
        .family
        .eps_intersection_run(&SubdiffFormula::ActiveUnion, &x, &strict_config)
        .expect("run");
    assert!(!run.minimizer);
    assert!(
        run.strictness_witnesses.contains(&Vector::zeros(1)),
        "the origin must survive every slack"
    );
    assert!(!run
        .subdifferential
        .contains_point(&Vector::zeros(1))
        .expect("membership"));

    println!(
        "criterion 3: PASS - {inclusion_checks} inclusions exact, {minimizers} minimizer runs stabilized, strictness witnessed"
    );
}

/// Criterion 4: the minimizer union identity stabilizes for M in {0, 1, 5}
/// (plain and positive-part variants), and the per-vertex lambda
/// certification succeeds on every corpus instance.
#[test]
fn criterion_4_minimizer_union_and_lambda_certification() {
    let bounds = GenBounds::default();
    let grid = eps_grid();

    let mut union_runs = 0usize;
    for seed in 0..24u64 {
        let instance = gen_minimizer(seed, &bounds)
            .expect("generation succeeds")
            .validate()
            .expect("generated instances validate");
        let f = instance.family.collapse().expect("proper supremum");
        let x = instance.queries[0].point.clone();
        let sub = f.subdifferential(&x).expect("subdifferential");
        for m in [int(0), int(1), int(5)] {
            let mut last = None;
            for eps in &grid {
                let wide = f
                    .eps_subdifferential(&x, &(eps + &m))
                    .expect("subdifferential");
                let hull = closed_conv_union(&[
                    f.eps_subdifferential(&x, eps).expect("subdifferential"),
                    wide.scaled(eps).expect("scaled"),
                ])
                .expect("hull");
                assert!(
                    sub.is_subset_of(&hull).expect("inclusion"),
                    "seed {seed}: union bound fails at eps={eps}, M={m}"
                );
                let wide_plus = f
                    .positive_part()
                    .eps_subdifferential(&x, &(eps + &m))
                    .expect("subdifferential");
                let hull_plus = closed_conv_union(&[
                    f.eps_subdifferential(&x, eps).expect("subdifferential"),
                    wide_plus.scaled(eps).expect("scaled"),
                ])
                .expect("hull");
                assert!(
                    sub.is_subset_of(&hull_plus).expect("inclusion"),
                    "seed {seed}: positive-part union bound fails at eps={eps}, M={m}"
                );
                last = Some((hull, hull_plus));
            }
            let (hull, hull_plus) = last.expect("nonempty grid");
            assert!(
                hull.equals(&sub).expect("relate"),
                "seed {seed}: union run did not stabilize to the subdifferential (M={m})"
            );
            assert!(
                hull_plus.equals(&sub).expect("relate"),
                "seed {seed}: positive-part union run did not stabilize (M={m})"
            );
            union_runs += 1;
        }
    }

    // lambda certification across the whole corpus
    let lambda_grid = [Scalar::zero(), rat(1, 2), Scalar::one()];
    let mut scans = 0usize;
    for (name, instance) in corpus() {
        for x in query_points(&instance) {
            for member in instance.family.members() {
                for eps in [rat(1, 2), rat(1, 8)] {
                    let scan = member
                        .f
                        .positive_part_lambda_scan(&x, &eps, &lambda_grid)
                        .expect("scan");
                    assert!(
                        scan.certified,
                        "{name}: lambda certification failed for '{}' at eps={eps}",
                        member.id
                    );
                    for (_, set) in &scan.per_lambda {
                        assert!(
                            set.is_subset_of(&scan.direct).expect("inclusion"),
                            "{name}: lambda set escapes the direct subdifferential"
                        );
                    }
                    scans += 1;
                }
            }
        }
    }
    println!(
        "criterion 4: PASS - {union_runs} minimizer union runs stabilized, {scans} lambda scans certified"
    );
}

fn random_vrep(rng: &mut ChaCha8Rng, dim: usize) -> VRep {
    let points = (1..=rng.gen_range(1..=3))
        .map(|_| {
            Vector::new(
                (0..dim)
                    .map(|_| rat(rng.gen_range(-2i64..=2), rng.gen_range(1i64..=2)))
                    .collect(),
            )
        })
        .collect();
    let rays = (0..rng.gen_range(0..=2))
        .filter_map(|_| {
            let v = Vector::new((0..dim).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect());
            (!v.is_zero()).then_some(v)
        })
        .collect();
    VRep::new(points, rays, dim).expect("valid generators")
}

/// Criterion 5: the recession-cone identities for hulls of unions against
/// Minkowski sums, and for two-part families with one side rescaled, hold
/// exactly on at least fifty random polyhedron families.
#[test]
fn criterion_5_recession_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut families = 0usize;
    while families < 50 {
        let dim = rng.gen_range(1..=3);
        let a = Polyhedron::from_vrep(random_vrep(&mut rng, dim));
        let k = rng.gen_range(2..=3);
        let others: Vec<Polyhedron> = (0..k)
            .map(|_| Polyhedron::from_vrep(random_vrep(&mut rng, dim)))
            .collect();

        // hull of the union against the hull with the sum collapsed
        let mut summed = others[0].clone();
        for o in &others[1..] {
            summed = summed.minkowski_sum(o).expect("sum");
        }
        let mut union_members = vec![a.clone()];
        union_members.extend(others.iter().cloned());
        let lhs = closed_conv_union(&union_members)
            .expect("hull")
            .recession_cone()
            .expect("recession");
        let rhs = closed_conv_union(&[a.clone(), summed])
            .expect("hull")
            .recession_cone()
            .expect("recession");
        assert!(
            lhs.equals(&rhs).expect("relate"),
            "family {families}: union/sum recession identity fails"
        );

        // two-part family with one side rescaled
        let split = rng.gen_range(1..=others.len());
        let (part1, part2_src) = others.split_at(split);
        let mut part2: Vec<Polyhedron> = part2_src.to_vec();
        part2.push(a.clone());
        for m in [rat(1, 2), int(1), int(3)] {
            let plain = closed_conv_union(
                &part1
                    .iter()
                    .chain(&part2)
                    .cloned()
                    .collect::<Vec<_>>(),
            )
            .expect("hull")
            .recession_cone()
            .expect("recession");
            let scaled_members: Vec<Polyhedron> = part1
                .iter()
                .cloned()
                .chain(
                    part2
                        .iter()
                        .map(|p| p.scaled(&m).expect("scaled")),
                )
                .collect();
            let scaled = closed_conv_union(&scaled_members)
                .expect("hull")
                .recession_cone()
                .expect("recession");
            assert!(
                plain.equals(&scaled).expect("relate"),
                "family {families}: rescaled union recession fails at m={m}"
            );
            let mut pair_sums = Vec::new();
            for p in part1 {
                for q in &part2 {
                    pair_sums.push(
                        p.minkowski_sum(&q.scaled(&m).expect("scaled"))
                            .expect("sum"),
                    );
                }
            }
            let paired = closed_conv_union(&pair_sums)
                .expect("hull")
                .recession_cone()
                .expect("recession");
            assert!(
                plain.equals(&paired).expect("relate"),
                "family {families}: pairwise-sum recession fails at m={m}"
            );
        }
        families += 1;
    }
    println!("criterion 5: PASS - {families} random families, all recession identities exact");
}

/// Criterion 6: certificates exist and re-verify at exact optima for every
/// tested (slack, radius) pair, and the zero-objective branch goes
/// infeasible at some tested pair on every strictly feasible instance.
#[test]
fn criterion_6_optimality_certificates() {
    let bounds = GenBounds::default();
    let mut programs: Vec<(String, Program, Vector)> = Vec::new();
    for (name, text) in bundled_corpus() {
        let instance = InstanceFile::parse_str(text)
            .expect("parses")
            .validate()
            .expect("validates");
        if let Some(objective) = instance.objective.clone() {
            let program =
                Program::new(objective, instance.family.clone()).expect("program");
            programs.push((name.to_string(), program, instance.queries[0].point.clone()));
        }
    }
    for seed in 0..10u64 {
        let instance = gen_program(seed, &bounds)
            .expect("generation succeeds")
            .validate()
            .expect("validates");
        let program = Program::new(
            instance.objective.clone().expect("objective"),
            instance.family.clone(),
        )
        .expect("program");
        programs.push((
            format!("program-{seed}"),
            program,
            instance.queries[0].point.clone(),
        ));
    }
    assert!(programs.len() >= 10);

    let pairs = [
        (rat(1, 2), rat(1, 2)),
        (rat(1, 2), rat(1, 100)),
        (rat(1, 8), rat(1, 2)),
        (rat(1, 8), rat(1, 100)),
    ];
    let mut certificates = 0usize;
    let mut slater_supported = 0usize;
    let mut slater_total = 0usize;
    for (name, program, x) in &programs {
        // exact optimality validation anchors the existence claim
        let optimal_value = match program.solve_collapsed().expect("solvable") {
            LpOutcome::Optimal { value, .. } => value,
            other => panic!("{name}: expected a finite optimum, got {other:?}"),
        };
        let at_x = program
            .objective
            .eval(x)
            .expect("eval")
            .finite()
            .expect("feasible point");
        assert_eq!(at_x, optimal_value, "{name}: query point is not optimal");

        for (eps, u) in &pairs {
            let rho = program.corr_rho(x, eps).expect("weights");
            match program.certify(x, eps, u, &rho).expect("certify") {
                CertifyOutcome::Certificate(cert) => {
                    program
                        .verify_certificate(x, &rho, &cert)
                        .expect("re-verification");
                    certificates += 1;
                }
                CertifyOutcome::NoCertificate { reason } => {
                    panic!("{name}: no certificate at ({eps}, {u}): {reason}")
                }
            }
        }

        if matches!(
            slater_check(&program.constraints).expect("check"),
            SlaterStatus::Witness(_)
        ) {
            slater_total += 1;
            let probe = program
                .slater_multiplier_probe(x, &pairs, &rat(1, 1 << 20))
                .expect("probe");
            assert!(
                probe.supported_at.is_some(),
                "{name}: zero branch never went infeasible"
            );
            slater_supported += 1;
        }
    }
    assert!(slater_total >= 1, "corpus must contain strictly feasible programs");
    println!(
        "criterion 6: PASS - {certificates} certificates re-verified over {} programs, {slater_supported}/{slater_total} strict-feasibility probes supported",
        programs.len()
    );
}

/// Criterion 7: representation round-trips and the bipolar identity on one
/// hundred random polyhedra, exactness of every LP solution, and the full
/// bundled-corpus run within its time budget.
#[test]
fn criterion_7_infrastructure() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);

    let mut round_trips = 0usize;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=3);
        // random constraint side
        let rows = rng.gen_range(0..=6);
        let h = HRep::new(
            Matrix::from_rows(
                (0..rows)
                    .map(|_| {
                        Vector::new(
                            (0..dim).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect(),
                        )
                    })
                    .collect(),
                dim,
            )
            .expect("matrix"),
            Vector::new((0..rows).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect()),
        )
        .expect("hrep");
        let p = Polyhedron::from_hrep(h);
        let v = p.vrep().expect("conversion").clone();
        let back = Polyhedron::from_vrep(v.clone());
        assert!(p.equals(&back).expect("relate"), "round trip failed");

        // bipolar on the generator side
        let gen_poly = Polyhedron::from_vrep(random_vrep(&mut rng, dim));
        let double = gen_poly
            .negative_dual_cone()
            .expect("dual")
            .negative_dual_cone()
            .expect("dual");
        let gens = gen_poly.vrep().expect("vrep");
        let mut rays: Vec<Vector> = gens
            .points
            .iter()
            .filter(|g| !g.is_zero())
            .cloned()
            .collect();
        rays.extend(gens.rays.iter().cloned());
        let hull = Polyhedron::from_generators(vec![Vector::zeros(dim)], rays, dim)
            .expect("cone generators");
        assert!(
            double.equals(&hull).expect("relate"),
            "bipolar identity failed"
        );
        round_trips += 1;
    }

    // exact simplex: solutions satisfy every constraint, with Farkas
    // certificates on infeasible systems
    let mut lp_checked = 0usize;
    let mut infeasible_seen = 0usize;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=5);
        let a = Matrix::from_rows(
            (0..m)
                .map(|_| Vector::new((0..n).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect()))
                .collect(),
            n,
        )
        .expect("matrix");
        let b = Vector::new((0..m).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect());
        let senses = (0..m)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    RowSense::Eq
                } else {
                    RowSense::Le
                }
            })
            .collect();
        let bounds = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    VarBound::Free
                } else {
                    VarBound::NonNeg
                }
            })
            .collect::<Vec<_>>();
        let objective = if rng.gen_bool(0.5) {
            LpObjective::Feasibility
        } else {
            LpObjective::Maximize(Vector::new(
                (0..n).map(|_| rat(rng.gen_range(-2i64..=2), 1)).collect(),
            ))
        };
        let lp = LinearProgram::new(a, b, senses, objective, bounds).expect("lp");
        match solve_lp(&lp).expect("solve") {
            LpOutcome::Optimal { point, .. } => {
                assert!(
                    supdiff::kernel::satisfies(&lp, &point),
                    "LP solution violates a constraint"
                );
            }
            LpOutcome::Infeasible { farkas } => {
                assert!(verify_farkas(&lp, &farkas), "Farkas certificate fails");
                infeasible_seen += 1;
            }
            LpOutcome::Unbounded => {}
        }
        lp_checked += 1;
    }

    // the full bundled run stays far inside the five-minute budget
    let started = Instant::now();
    for (_, text) in bundled_corpus() {
        let instance = InstanceFile::parse_str(text)
            .expect("parses")
            .validate()
            .expect("validates");
        let report = supdiff::harness::run_instance(
            &instance,
            &supdiff::harness::RunConfig {
                workers: 1,
                ..Default::default()
            },
        );
        assert_eq!(
            report.status,
            supdiff::harness::Status::Verified,
            "bundled corpus must verify"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "self test exceeded its budget");

    println!(
        "criterion 7: PASS - {round_trips} round trips and bipolar identities, {lp_checked} exact LP solves ({infeasible_seen} certified infeasible), bundled corpus in {elapsed:?}"
    );
}

/// Supplementary gate: the supremum family invariants hold across the
/// corpus (domain intersection, recession of the subdifferential, and the
/// equality of the two sum-form scalings).
#[test]
fn corpus_family_invariants() {
    let mut checked = 0usize;
    for (name, instance) in corpus() {
        let family = &instance.family;
        let collapsed = family.collapse().expect("proper supremum");
        let common = family.common_domain().expect("domain");
        assert!(
            collapsed
                .domain_poly()
                .equals(&common)
                .expect("relate"),
            "{name}: collapsed domain differs from the intersection"
        );
        for x in query_points(&instance) {
            let direct = family.normal_cone_direct(&x).expect("cone");
            for eps in [int(1), rat(1, 2)] {
                let sub = collapsed
                    .eps_subdifferential(&x, &eps)
                    .expect("subdifferential");
                let rec = sub.recession_cone().expect("recession");
                assert!(
                    rec.equals(&direct).expect("relate"),
                    "{name}: subdifferential recession differs from the domain normal cone"
                );
                let rho = family.rho_weights(&x, &eps).expect("weights");
                let braces = family
                    .sup_rhs_active_sum(&x, &eps, &rho)
                    .expect("sum form");
                let interval = family
                    .sup_rhs_active_sum_interval(&x, &eps, &rho)
                    .expect("interval form");
                assert!(
                    braces.equals(&interval).expect("relate"),
                    "{name}: the two sum-form scalings differ"
                );
                checked += 1;
            }
        }
    }
    println!("supplementary: PASS - {checked} family invariants exact");
}
