//! End-to-end command-line checks: exit codes, determinism, and the
//! bundled-corpus self test.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_supdiff"))
}

fn instances_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("selftest: verified"));
}

#[test]
fn verify_bundled_instance() {
    let path = instances_dir().join("abs.json");
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
}

#[test]
fn strict_inclusion_is_reported_not_refuted() {
    let path = instances_dir().join("nonminimizer.json");
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(
        stdout_of(&out).contains("strict inclusion witnessed"),
        "expected a strictness note:\n{}",
        stdout_of(&out)
    );
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["verify", "missing.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zero_denominator_is_an_input_error_with_location() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "dimension": 1,
            "functions": [{"id": "f1", "pieces": [{"a": ["1/0"], "b": "0"}]}],
            "queries": [{"kind": "verify", "point": ["0"]}]
        }"#,
    )
    .expect("write");
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("pieces[0].a[0]"), "stderr was: {err}");
}

#[test]
fn unstabilized_run_is_inconclusive() {
    // the two-piece family at a smooth point with a shrinking inactive
    // contribution: the sum form never stabilizes on a finite grid
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("drift.json");
    std::fs::write(
        &path,
        r#"{
            "dimension": 1,
            "functions": [
                {"id": "f1", "pieces": [{"a": ["1"], "b": "0"}]},
                {"id": "f2", "pieces": [{"a": ["-1"], "b": "0"}]}
            ],
            "queries": [
                {"kind": "subdiff", "point": ["1"], "epsilons": ["1", "1/2", "1/8"],
                 "formula": "t1bis", "weights": "corr"}
            ]
        }"#,
    )
    .expect("write");
    let out = run(&["verify", path.to_str().unwrap(), "--eps-floor", "1/4096"]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout_of(&out));
}

#[test]
fn generation_is_byte_identical() {
    let a = run(&["gen", "--seed", "7"]);
    let b = run(&["gen", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout_of(&a), stdout_of(&b));
    let c = run(&["gen", "--seed", "8"]);
    assert_ne!(stdout_of(&a), stdout_of(&c));
}

#[test]
fn generated_instances_verify_end_to_end() {
    let dir = tempfile::tempdir().expect("tempdir");
    for seed in [3u64, 4] {
        let path = dir.path().join(format!("gen{seed}.json"));
        let out = run(&["gen", "--seed", &seed.to_string(), "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let out = run(&["verify", path.to_str().unwrap()]);
        // random instances may hit honest grid floors, but never refute
        assert_ne!(out.status.code(), Some(1), "{}", stdout_of(&out));
        assert_ne!(out.status.code(), Some(3), "{}", stdout_of(&out));
    }
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = instances_dir().join("indicator.json");
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for (report, workers) in [(&r1, "1"), (&r2, "4")] {
        let out = run(&[
            "verify",
            path.to_str().unwrap(),
            "--workers",
            workers,
            "--json-out",
            report.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let normalize = |p: &PathBuf| {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).expect("read")).expect("json");
        for q in v["queries"].as_array_mut().expect("queries") {
            q["wall_ms"] = serde_json::json!(0);
        }
        serde_json::to_string_pretty(&v).expect("serializes")
    };
    assert_eq!(normalize(&r1), normalize(&r2));
}

#[test]
fn certify_verb_with_overrides() {
    let path = instances_dir().join("program_basic.json");
    let out = run(&[
        "certify",
        path.to_str().unwrap(),
        "--epsilon",
        "1/2",
        "--u-radius",
        "1/100",
        "--rho",
        "corr",
        "--probe-slater",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("certificate re-verified"));
}

#[test]
fn kind_filter_requires_matching_queries() {
    let path = instances_dir().join("abs.json");
    let out = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dd_cap_trips_as_resource_limit() {
    let path = instances_dir().join("corner.json");
    let out = run(&["verify", path.to_str().unwrap(), "--dd-cap", "1"]);
    // resource limits are inconclusive, never refuted
    assert_eq!(out.status.code(), Some(2), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("resource"));
}
