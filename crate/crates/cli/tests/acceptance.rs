//! Acceptance gate: one test per verification criterion, each printing
//! a single pass/fail line. The shared workbench memoizes the expensive
//! pieces (fixed-point solve, spectrum, cascade tables) across tests.

use std::process::Command;
use std::sync::OnceLock;

use renormlab_cli::{run_criterion, RunConfig, Workbench};

static BENCH: OnceLock<Workbench> = OnceLock::new();

fn workbench() -> &'static Workbench {
    BENCH.get_or_init(|| Workbench::new(&RunConfig::default()).expect("workbench setup"))
}

fn check(name: &'static str) {
    let out = run_criterion(workbench(), name);
    let tag = if out.passed { "PASS" } else { "FAIL" };
    println!("{:<24} {}  {}", out.name, tag, out.detail);
    assert!(out.passed, "{}: {}", out.name, out.detail);
}

#[test]
fn criterion_01_oracle_delta() {
    check("oracle-delta");
}

#[test]
fn criterion_02_operator_delta() {
    check("operator-delta");
}

#[test]
fn criterion_03_codimension_one() {
    check("codimension-one");
}

#[test]
fn criterion_04_continuation_residuals() {
    check("continuation-residuals");
}

#[test]
fn criterion_05_conjugacy() {
    check("conjugacy");
}

#[test]
fn criterion_06_spectrum_equality() {
    check("spectrum-equality");
}

#[test]
fn criterion_07_superstable_exactness() {
    check("superstable-exactness");
}

#[test]
fn criterion_08_universality() {
    check("universality");
}

#[test]
fn criterion_09_real_bounds() {
    check("real-bounds");
}

#[test]
fn criterion_10_decay_slopes() {
    check("decay-slopes");
}

#[test]
fn criterion_11_univalence_screen() {
    check("univalence-screen");
}

#[test]
fn criterion_12_injectivity_probe() {
    check("injectivity-probe");
}

#[test]
fn criterion_13_determinism() {
    check("determinism");
    // Same check at the process level: two fresh runs of the binary on a
    // fast criterion subset must agree byte for byte.
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_renormlab"))
            .args(["verify", "--criteria", "oracle-delta,superstable-exactness"])
            .output()
            .expect("spawn verify")
    };
    let (first, second) = (run(), run());
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout, "repeated verify runs diverged");
}
