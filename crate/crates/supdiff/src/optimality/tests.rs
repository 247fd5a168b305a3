use crate::convexfn::PolyConvexFn;
use crate::kernel::{int, rat, LpOutcome, Matrix, Vector};
use crate::polyhedra::HRep;
use crate::supcalc::SupFamily;

use super::*;

fn vec_i(entries: &[i64]) -> Vector {
    Vector::new(entries.iter().map(|&v| int(v)).collect())
}

fn hrep(rows: &[(&[i64], i64)], dim: usize) -> HRep {
    HRep::new(
        Matrix::from_rows(
            rows.iter()
                .map(|(r, _)| Vector::new(r.iter().map(|&v| int(v)).collect()))
                .collect(),
            dim,
        )
        .unwrap(),
        Vector::new(rows.iter().map(|&(_, b)| int(b)).collect()),
    )
    .unwrap()
}

/// min -x subject to x <= 0: optimum 0 at the origin.
fn basic_program() -> Program {
    Program::new(
        PolyConvexFn::affine(vec_i(&[-1]), int(0)).unwrap(),
        SupFamily::from_functions(vec![PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap()])
            .unwrap(),
    )
    .unwrap()
}

/// min -x1 subject to x1 <= 0 and x1 + x2 - 5 <= 0; (0, -5) is optimal with
/// the second constraint strictly slack.
fn two_constraint_program() -> Program {
    Program::new(
        PolyConvexFn::affine(vec_i(&[-1, 0]), int(0)).unwrap(),
        SupFamily::from_functions(vec![
            PolyConvexFn::affine(vec_i(&[1, 0]), int(0)).unwrap(),
            PolyConvexFn::affine(vec_i(&[1, 1]), int(-5)).unwrap(),
        ])
        .unwrap(),
    )
    .unwrap()
}

#[test]
fn slater_witness_cases() {
    // f1 = x, f2 = -x - 2: strictly negative around -1
    let fam = SupFamily::from_functions(vec![
        PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap(),
        PolyConvexFn::affine(vec_i(&[-1]), int(-2)).unwrap(),
    ])
    .unwrap();
    match slater_check(&fam).unwrap() {
        SlaterStatus::Witness(w) => {
            for m in fam.members() {
                let v = m.f.eval(&w).unwrap().finite().unwrap();
                assert!(v.is_negative());
            }
        }
        other => panic!("expected a witness, got {other:?}"),
    }

    // f1 = x, f2 = -x: max is |x| >= 0 everywhere
    let fam = SupFamily::from_functions(vec![
        PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap(),
        PolyConvexFn::affine(vec_i(&[-1]), int(0)).unwrap(),
    ])
    .unwrap();
    assert!(matches!(
        slater_check(&fam).unwrap(),
        SlaterStatus::None { .. }
    ));

    // single unbounded-below constraint still yields a concrete witness
    let fam =
        SupFamily::from_functions(vec![PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap()])
            .unwrap();
    assert!(matches!(
        slater_check(&fam).unwrap(),
        SlaterStatus::Witness(_)
    ));

    // domains that cannot meet
    let fam = SupFamily::from_functions(vec![
        PolyConvexFn::indicator(hrep(&[(&[1], 0)], 1)).unwrap(),
        PolyConvexFn::indicator(hrep(&[(&[-1], -1)], 1)).unwrap(),
    ])
    .unwrap();
    assert!(matches!(
        slater_check(&fam).unwrap(),
        SlaterStatus::None { .. }
    ));
}

#[test]
fn collapsed_solver_verifies_optimality() {
    let p = basic_program();
    match p.solve_collapsed().unwrap() {
        LpOutcome::Optimal { point, value } => {
            assert_eq!(point, vec_i(&[0]));
            assert_eq!(value, int(0));
        }
        other => panic!("expected an optimum, got {other:?}"),
    }

    let p = two_constraint_program();
    match p.solve_collapsed().unwrap() {
        LpOutcome::Optimal { value, .. } => assert_eq!(value, int(0)),
        other => panic!("expected an optimum, got {other:?}"),
    }
}

#[test]
fn certificate_at_the_optimum() {
    let p = basic_program();
    let x = vec_i(&[0]);
    let rho = p.corr_rho(&x, &rat(1, 2)).unwrap();
    match p.certify(&x, &rat(1, 2), &rat(1, 100), &rho).unwrap() {
        CertifyOutcome::Certificate(cert) => {
            // -lambda0 + lambda1 + s = 0 with lambda0 + lambda1 = 1 and
            // |s| <= 1/100 forces lambda0 = lambda1 = 1/2 up to the slack.
            p.verify_certificate(&x, &rho, &cert).unwrap();
            let lambda0 = cert
                .blocks
                .iter()
                .find(|b| b.role == BlockRole::Objective)
                .unwrap()
                .lambda
                .clone();
            assert!(lambda0 > rat(2, 5));
            assert!(lambda0 < rat(3, 5));
        }
        CertifyOutcome::NoCertificate { reason } => panic!("expected a certificate: {reason}"),
    }
}

#[test]
fn certificate_with_inactive_constraint() {
    let p = two_constraint_program();
    let x = vec_i(&[0, -5]);
    for (eps, u) in [(rat(1, 2), rat(1, 2)), (rat(1, 8), rat(1, 100))] {
        let rho = p.corr_rho(&x, &eps).unwrap();
        match p.certify(&x, &eps, &u, &rho).unwrap() {
            CertifyOutcome::Certificate(cert) => {
                p.verify_certificate(&x, &rho, &cert).unwrap();
            }
            CertifyOutcome::NoCertificate { reason } => {
                panic!("expected a certificate at ({eps}, {u}): {reason}")
            }
        }
    }
}

#[test]
fn suboptimal_interior_point_still_recorded_as_is() {
    // At x = -1 the constraint is strictly slack; an exact certificate with
    // a tiny objective multiplier exists, and the outcome is recorded as-is.
    let p = basic_program();
    let x = vec_i(&[-1]);
    let eps = rat(1, 100);
    let rho = p.corr_rho(&x, &eps).unwrap();
    match p.certify(&x, &eps, &rat(1, 100), &rho).unwrap() {
        CertifyOutcome::Certificate(cert) => {
            p.verify_certificate(&x, &rho, &cert).unwrap();
        }
        CertifyOutcome::NoCertificate { reason } => {
            panic!("the multiplier system is feasible here: {reason}")
        }
    }
}

#[test]
fn infeasible_point_is_a_domain_error() {
    let p = basic_program();
    let rho = Weights::ones(1);
    assert!(p
        .certify(&vec_i(&[1]), &rat(1, 2), &rat(1, 2), &rho)
        .is_err());
}

#[test]
fn zero_branch_infeasible_under_strict_feasibility() {
    // lambda0 = 0 forces 0 = lambda1 * 1 + s with lambda1 = 1, so |s| = 1
    // escapes any box smaller than 1.
    let p = basic_program();
    let x = vec_i(&[0]);
    let rho = p.corr_rho(&x, &rat(1, 2)).unwrap();
    assert!(!p
        .zero_objective_branch_feasible(&x, &rat(1, 2), &rat(1, 2), &rho)
        .unwrap());
    // a box of radius 1 absorbs it
    assert!(p
        .zero_objective_branch_feasible(&x, &rat(1, 2), &int(1), &rho)
        .unwrap());
}

#[test]
fn slater_probe_finds_support() {
    let p = basic_program();
    let x = vec_i(&[0]);
    let grid = [(rat(1, 2), rat(1, 2)), (rat(1, 8), rat(1, 100))];
    let probe = p
        .slater_multiplier_probe(&x, &grid, &rat(1, 1 << 20))
        .unwrap();
    assert_eq!(probe.supported_at, Some((rat(1, 2), rat(1, 2))));
    assert!(!probe.pairs[0].zero_branch_feasible);

    // no-strict-feasibility program: the probe refuses to run
    let no_slater = Program::new(
        PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap(),
        SupFamily::from_functions(vec![
            PolyConvexFn::affine(vec_i(&[1]), int(0)).unwrap(),
            PolyConvexFn::affine(vec_i(&[-1]), int(0)).unwrap(),
        ])
        .unwrap(),
    )
    .unwrap();
    assert!(no_slater
        .slater_multiplier_probe(&vec_i(&[0]), &grid, &rat(1, 1 << 20))
        .is_err());
}

#[test]
fn all_constraints_active_drops_inactive_blocks() {
    // x_bar = origin with both constraints active: the certificate uses
    // only objective and active blocks.
    let p = Program::new(
        PolyConvexFn::affine(vec_i(&[-1, -1]), int(0)).unwrap(),
        SupFamily::from_functions(vec![
            PolyConvexFn::affine(vec_i(&[1, 0]), int(0)).unwrap(),
            PolyConvexFn::affine(vec_i(&[0, 1]), int(0)).unwrap(),
        ])
        .unwrap(),
    )
    .unwrap();
    let x = vec_i(&[0, 0]);
    match p.solve_collapsed().unwrap() {
        LpOutcome::Optimal { value, .. } => assert_eq!(value, int(0)),
        other => panic!("expected optimum, got {other:?}"),
    }
    let rho = p.corr_rho(&x, &rat(1, 2)).unwrap();
    match p.certify(&x, &rat(1, 2), &rat(1, 100), &rho).unwrap() {
        CertifyOutcome::Certificate(cert) => {
            p.verify_certificate(&x, &rho, &cert).unwrap();
            assert!(cert
                .blocks
                .iter()
                .all(|b| !matches!(b.role, BlockRole::InactiveConstraint(_))));
        }
        CertifyOutcome::NoCertificate { reason } => panic!("expected a certificate: {reason}"),
    }
}
