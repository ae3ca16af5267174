//! Acceptance criteria 1 to 12. Each test prints one `criterion N: PASS|FAIL`
//! line and asserts the criterion in full.

use std::fs;
use std::process::Command;

use dtsc_core::fixtures::Table3Kind;
use dtsc_core::{verify, FixtureSet, TechProfile, Tree, VerifyFilter};
use dtsc_suite::{announce, dtsc_bin, run_criterion};

fn assert_criterion(criterion: u8) {
    let report = run_criterion(criterion);
    assert!(!report.records.is_empty());
    assert!(report.passed(), "criterion {criterion} failed:\n{report}");
}

/// Maps the published weights through the command line and compares every
/// capacitor with the printed design.
#[test]
fn criterion_01_capacitor_mapping() {
    let f = FixtureSet::embedded();
    let dir = std::env::temp_dir().join(format!("dtsc-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let weights = dir.join("weights.json");
    let tech = dir.join("tech.json");
    let out = dir.join("config.json");
    fs::write(&weights, serde_json::to_string(&f.neuron().unwrap()).unwrap()).unwrap();
    let profile = TechProfile {
        c_min_ff: 35.0,
        v_max: 1.8,
        v_cut: 1.3,
        cap_grid_ff: 1.0,
        parasitic_ff: 0.0,
        ..TechProfile::reference()
    };
    fs::write(&tech, serde_json::to_string(&profile).unwrap()).unwrap();
    let status = Command::new(dtsc_bin())
        .arg("map")
        .arg("--weights")
        .arg(&weights)
        .arg("--tech")
        .arg(&tech)
        .args(["--ct", "2115", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    let mapped: dtsc_core::AcnConfig = if status.success() {
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap()
    } else {
        announce(1, false, &format!("dtsc map exited with {status}"));
        panic!("dtsc map failed: {status}");
    };
    fs::remove_dir_all(&dir).unwrap();

    let mut failures = Vec::new();
    let mut checked = 0;
    for row in &f.table3 {
        let tree = row.tree;
        let (got, tol) = match row.kind {
            Table3Kind::Synapse => (
                mapped.synapse(row.index.unwrap()).map_or(0.0, |s| s.cap_ff),
                1.0,
            ),
            Table3Kind::Bias => (mapped.aux(tree).bias_ff, 1.0),
            Table3Kind::Ballast => (mapped.aux(tree).ballast_ff, 5.0),
        };
        checked += 1;
        if (got - row.cap_ff).abs() > tol {
            failures.push(format!("{:?} {} {:?}: {got} vs {} ±{tol}", row.kind, tree, row.index, row.cap_ff));
        }
    }
    assert_eq!(checked, 16);
    assert!(mapped.synapses.iter().all(|s| Some(s.tree) == Tree::of_weight(f.neuron().unwrap().weights()[s.index])));
    let lib = verify(&f, &VerifyFilter::only(&["1"]).unwrap()).unwrap();
    failures.extend(lib.failures().map(dtsc_suite::describe));
    let pass = failures.is_empty() && lib.passed();
    announce(1, pass, &format!("(command line and library, {checked} capacitors each) {}", failures.join("; ")));
    assert!(pass, "{failures:?}\n{lib}");
}

#[test]
fn criterion_02_membrane_voltages() {
    assert_criterion(2);
}

#[test]
fn criterion_03_hardware_outputs() {
    assert_criterion(3);
}

#[test]
fn criterion_04_loads() {
    assert_criterion(4);
}

#[test]
fn criterion_05_max_load() {
    assert_criterion(5);
}

#[test]
fn criterion_06_frequency() {
    assert_criterion(6);
}

#[test]
fn criterion_07_energy_calibration() {
    assert_criterion(7);
}

#[test]
fn criterion_08_offset_tables() {
    assert_criterion(8);
}

#[test]
fn criterion_09_equivalence_oracle() {
    assert_criterion(9);
}

#[test]
fn criterion_10_monte_carlo() {
    assert_criterion(10);
}

#[test]
fn criterion_11_voltage_sweep() {
    assert_criterion(11);
}

#[test]
fn criterion_12_verify_command() {
    let out = Command::new(dtsc_bin()).arg("verify").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failing: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("criterion") && l.ends_with("FAIL"))
        .collect();
    let covered = (1..=11)
        .all(|c| stdout.lines().any(|l| l.starts_with(&format!("criterion {c:>2}:"))));
    let pass = out.status.success() && covered;
    announce(
        12,
        pass,
        &format!("(dtsc verify exit {:?}) {}", out.status.code(), failing.join("; ")),
    );
    assert!(covered, "verify does not report all criteria:\n{stdout}");
    assert!(out.status.success(), "dtsc verify failed:\n{stdout}");
}
