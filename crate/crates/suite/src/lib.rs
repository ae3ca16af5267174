//! Helpers for the acceptance suite: criterion result lines and access to
//! the `dtsc` binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use dtsc_core::verify::CheckRecord;
use dtsc_core::{verify, FixtureSet, VerifyFilter, VerifyReport};

/// Writes one result line straight to stderr so it shows even when the
/// harness captures test output.
pub fn announce(criterion: u8, pass: bool, detail: &str) {
    let line = format!(
        "criterion {criterion:>2}: {} {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

pub fn describe(r: &CheckRecord) -> String {
    format!(
        "[{}] {}: expected {} {}, got {:.4}",
        r.table, r.check, r.tolerance, r.expected, r.actual
    )
}

/// Runs one criterion against the embedded fixtures and announces the result.
pub fn run_criterion(criterion: u8) -> VerifyReport {
    let filter = VerifyFilter::only(&[criterion.to_string()]).expect("valid criterion");
    let report = verify(&FixtureSet::embedded(), &filter).expect("verification runs");
    let failed: Vec<String> = report.failures().map(describe).collect();
    let detail = if failed.is_empty() {
        format!("({} checks)", report.records.len())
    } else {
        format!("({} of {} checks failed) {}", failed.len(), report.records.len(), failed.join("; "))
    };
    announce(criterion, report.passed(), &detail);
    report
}

/// Path of the `dtsc` binary next to the running test, built on demand.
pub fn dtsc_bin() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    let dir = exe
        .parent()
        .and_then(|d| if d.ends_with("deps") { d.parent() } else { Some(d) })
        .expect("target directory");
    let bin = dir.join(format!("dtsc{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-p", "dtsc-cli", "--bin", "dtsc"])
            .status()
            .expect("cargo runs");
        assert!(status.success(), "building dtsc failed");
    }
    bin
}
