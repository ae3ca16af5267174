use dtsc_core::fixtures::Table3Kind;
use dtsc_core::netlist::export_netlist;
use dtsc_core::{verify, FixtureSet, PowerClock, VerifyFilter};

fn only(keys: &[&str]) -> VerifyFilter {
    VerifyFilter::only(keys).unwrap()
}

#[test]
fn filtered_run_contains_only_requested_tables() {
    let rep = verify(&FixtureSet::embedded(), &only(&["table4"])).unwrap();
    assert!(rep.records.iter().all(|r| r.table == "table4"));
    assert!(rep.passed());
}

#[test]
fn tampered_ballast_fails_table3() {
    let mut f = FixtureSet::embedded();
    let row = f
        .table3
        .iter_mut()
        .find(|r| r.kind == Table3Kind::Ballast)
        .unwrap();
    row.cap_ff += 10.0;
    let rep = verify(&f, &only(&["table3"])).unwrap();
    assert!(!rep.passed());
    assert!(rep.failures().all(|r| r.check.starts_with("Cd")));
}

#[test]
fn tampered_synapse_is_caught() {
    let mut f = FixtureSet::embedded();
    f.table3[3].cap_ff += 10.0;
    let rep = verify(&f, &only(&["1"])).unwrap();
    let failed: Vec<_> = rep.failures().map(|r| r.check.clone()).collect();
    assert_eq!(failed, vec!["C3".to_string()]);
}

#[test]
fn report_serializes_every_record() {
    let rep = verify(&FixtureSet::embedded(), &only(&["table1"])).unwrap();
    let json: serde_json::Value = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), rep.records.len());
    assert!(rep.to_string().ends_with("0 failed"));
}

#[test]
fn exported_fixtures_reload() {
    let dir = std::env::temp_dir().join(format!("dtsc-fixtures-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, text) in FixtureSet::embedded_files() {
        std::fs::write(dir.join(name), text).unwrap();
    }
    let loaded = FixtureSet::load_dir(&dir).unwrap();
    assert_eq!(loaded.table5, FixtureSet::embedded().table5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn netlist_header_carries_hash() {
    let cfg = FixtureSet::embedded().config().unwrap();
    let text = export_netlist(&cfg, &PowerClock::default()).unwrap();
    let hash = text.lines().find_map(|l| l.strip_prefix("* hash sha256:")).unwrap();
    assert_eq!(hash.len(), 64);
    assert!(text.lines().take_while(|l| !l.starts_with('.')).all(|l| l.starts_with('*')));
}
