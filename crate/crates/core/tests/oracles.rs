//! Values frozen from an independent recomputation of the published design
//! (separate script, closed-form formulas, no shared code).

use dtsc_core::energy::{calibrate_energy, energy_at_load, sweep, SweepAxis};
use dtsc_core::verify::calibration_rows;
use dtsc_core::{
    capacitive_load, max_load_search, membrane_voltages, operating_frequency, FixtureSet,
    PowerClock, TlModel, TlVariant, Tree,
};

const LOADS: [(&str, f64); 16] = [
    ("TV1", 426.7096),
    ("TV2", 864.2360),
    ("TV3", 505.0658),
    ("TV4", 960.9554),
    ("TV5", 186.2927),
    ("TV6", 858.0238),
    ("TV7", 935.8679),
    ("TV8", 88.7709),
    ("TV9", 298.8246),
    ("TV10", 457.4656),
    ("TV11", 942.9933),
    ("TV12", 825.1592),
    ("TV13", 838.0134),
    ("TV14", 540.5858),
    ("TV15", 344.9346),
    ("TV16", 526.2973),
];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn tree_totals() {
    let cfg = FixtureSet::embedded().config().unwrap();
    assert_eq!(cfg.total_ff(Tree::Positive), 1955.0);
    assert_eq!(cfg.total_ff(Tree::Negative), 1957.0);
}

#[test]
fn loads_of_published_vectors() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    for (tv, expected) in LOADS {
        let x = &f.table5_row(tv).unwrap().vector;
        let got = capacitive_load(&cfg, x).unwrap();
        assert!(close(got, expected, 1e-4), "{tv}: {got} vs {expected}");
    }
}

#[test]
fn heaviest_vector_is_tv4() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let best = max_load_search(&cfg);
    // several vectors tie because the negative tree repeats 208 fF
    let tv4 = capacitive_load(&cfg, &f.table5_row("TV4").unwrap().vector).unwrap();
    assert_eq!(best.load_ff, tv4);
    assert!(close(best.load_ff, 960.9554, 1e-4));
}

#[test]
fn membrane_voltages_tv4() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let (p, m) = membrane_voltages(&cfg, &f.table5_row("TV4").unwrap().vector, 1.8).unwrap();
    // 1.8 * 796 / 1955 and 1.8 * 998 / 1957
    assert!(close(p * 1e3, 732.8900, 1e-3), "{p}");
    assert!(close(m * 1e3, 917.9356, 1e-3), "{m}");
}

#[test]
fn clock_frequencies() {
    let pc = PowerClock::default();
    assert!(close(operating_frequency(&pc, 961.0) / 1e3, 987.7782, 1e-3));
    assert!(close(operating_frequency(&pc, 0.0) / 1e3, 1006.5842, 1e-3));
}

#[test]
fn calibrated_parameters() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let p = calibrate_energy(&calibration_rows(&f, &cfg).unwrap(), &PowerClock::default()).unwrap();
    assert!(close(p.r_syn_ohm, 13266.4277, 1e-3), "{}", p.r_syn_ohm);
    assert!(close(p.e_pcg0_fj, 91.76023, 1e-4), "{}", p.e_pcg0_fj);
    assert!(close(p.ccn_overhead_fj, 53.58213, 1e-4), "{}", p.ccn_overhead_fj);
    let tl = TlModel::ideal();
    let b = energy_at_load(960.9554, &PowerClock::default(), &p, &tl).unwrap();
    assert!(close(b.savings_pct, 94.0481, 1e-3), "{}", b.savings_pct);
}

#[test]
fn supply_sweep_end_points() {
    let f = FixtureSet::embedded();
    let cfg = f.config().unwrap();
    let pc = PowerClock::default();
    let p = calibrate_energy(&calibration_rows(&f, &cfg).unwrap(), &pc).unwrap();
    let vectors: Vec<_> = ["TV4", "TV8", "TV13"]
        .iter()
        .map(|tv| f.table5_row(tv).unwrap().vector.clone())
        .collect();
    let rows = sweep(
        &cfg,
        &vectors,
        SweepAxis::Voltage,
        &[1.8, 1.0],
        &pc,
        &p,
        &TlModel::new(TlVariant::Proposed),
    )
    .unwrap();
    let expected = [94.0481, 72.8605, 94.0224, 89.1609, 72.4667, 89.7608];
    for (row, e) in rows.iter().zip(expected) {
        assert!(close(row.energy.savings_pct, e, 1e-3), "{} {}: {}", row.axis_value, row.vector, row.energy.savings_pct);
    }
}
