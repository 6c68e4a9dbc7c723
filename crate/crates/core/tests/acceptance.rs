//! Acceptance battery: one test per suite, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance` (add `-- --nocapture` to see the
//! per-suite lines even on success).

use kisin_weights::suites::{run_suite, SuiteReport};

const SEED: u64 = 0xC0FFEE;

fn run(name: &str) -> SuiteReport {
    let report = run_suite(name, SEED).expect("known suite");
    println!(
        "{} {} ({} cases checked)",
        if report.passed { "PASS" } else { "FAIL" },
        report.suite,
        report.cases
    );
    for note in &report.notes {
        println!("  note: {note}");
    }
    report
}

fn assert_passed(report: SuiteReport) {
    assert!(
        report.passed,
        "suite {} failed:\n{}",
        report.suite,
        report.failures.join("\n")
    );
}

#[test]
fn carry_trichotomy_exhaustive() {
    assert_passed(run("lemma71"));
}

#[test]
fn kernel_characterization_exhaustive() {
    assert_passed(run("lemma73"));
}

#[test]
fn reduction_soundness_randomized() {
    assert_passed(run("prop74-reduce"));
}

#[test]
fn class_counts_exhaustive() {
    assert_passed(run("thm75-counts"));
}

#[test]
fn jmax_and_model_raising() {
    assert_passed(run("jmax"));
}

#[test]
fn rebalancing() {
    assert_passed(run("rebalance"));
}

#[test]
fn cross_character_consistency() {
    assert_passed(run("cross-char"));
}
