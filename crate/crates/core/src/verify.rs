//! Reproduction checks against the published reference data.
//!
//! Checks are grouped into eleven criteria. Every record names the fixture
//! table it draws its expectation from, so a run can be narrowed with
//! [`VerifyFilter`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{calibrate_energy, energy_at_load, savings_pct, sweep, CalibrationRow, SweepAxis};
use crate::error::{Error, Result};
use crate::fixtures::FixtureSet;
use crate::mapper::{map_weights, min_feasible_ct, AcnConfig};
use crate::model::{eval_software_neuron, InputVector, NeuronSpec, TechProfile, Tree};
use crate::montecarlo::{mc_run, mc_stats, McTarget, VariationModel};
use crate::sim::simulate;
use crate::tl::{offset_lookup, Corner, Direction, TlModel, TlVariant, TEMPERATURE_GRID};
use crate::tree::{capacitive_load, max_load_search, operating_frequency, tree_capacitances, PowerClock};

pub const SYNAPSE_CAP_TOL_FF: f64 = 1.0;
pub const BIAS_CAP_TOL_FF: f64 = 1.0;
pub const BALLAST_CAP_TOL_FF: f64 = 5.0;
pub const MEMBRANE_TOL_MV: f64 = 1.0;
pub const LOAD_TOL_FF: f64 = 0.5;
pub const FREQ_REL_TOL: f64 = 0.015;
pub const DROOP_RANGE: (f64, f64) = (0.015, 0.025);
pub const ACN_ENERGY_REL_TOL: f64 = 0.35;
pub const ANCHOR_TOL_FJ: f64 = 1e-6;
pub const MIN_SAVINGS_PCT: f64 = 70.0;
pub const LOADED_SAVINGS_PCT: f64 = 90.0;
pub const LOADED_THRESHOLD_FF: f64 = 400.0;
pub const SAVINGS_RECOMPUTE_TOL: f64 = 0.1;
pub const PROPOSED_MAX_OFFSET_MV: f64 = 9.01;
pub const ORACLE_NEURONS: usize = 100;
pub const ORACLE_MAX_INPUTS: usize = 8;
pub const ORACLE_SEED: u64 = 2024;
pub const MC_RUNS: usize = 1000;
pub const MC_SEED: u64 = 42;
pub const ACN_MIN_SKEW: f64 = 0.5;
pub const CCN_MAX_ABS_SKEW: f64 = 0.3;
pub const QQ_NORMAL: f64 = 0.99;
pub const VDD_SWEEP: [f64; 9] = [1.8, 1.7, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0];
pub const TV8_SAVINGS_RANGE: (f64, f64) = (60.0, 80.0);

/// How `actual` is judged against `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `|actual - expected| <= tol`
    Abs(f64),
    /// `|actual - expected| <= tol * |expected|`
    Rel(f64),
    /// `actual >= expected`
    AtLeast,
    /// `actual > expected`
    Above,
    /// `actual < expected`
    Below,
    /// `lo <= actual <= hi`; `expected` is ignored.
    Range(f64, f64),
}

impl Bound {
    fn holds(self, expected: f64, actual: f64) -> bool {
        match self {
            Bound::Abs(t) => (actual - expected).abs() <= t,
            Bound::Rel(t) => (actual - expected).abs() <= t * expected.abs(),
            Bound::AtLeast => actual >= expected,
            Bound::Above => actual > expected,
            Bound::Below => actual < expected,
            Bound::Range(lo, hi) => actual >= lo && actual <= hi,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Abs(t) => write!(f, "±{t}"),
            Bound::Rel(t) => write!(f, "±{}%", t * 100.0),
            Bound::AtLeast => f.write_str(">="),
            Bound::Above => f.write_str(">"),
            Bound::Below => f.write_str("<"),
            Bound::Range(lo, hi) => write!(f, "[{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub criterion: u8,
    pub check: String,
    pub table: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: Bound,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VerifyReport {
    pub records: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Criteria present in the report, in order.
    pub fn criteria(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.records.iter().map(|r| r.criterion).collect();
        c.dedup();
        c
    }

    pub fn criterion_passed(&self, criterion: u8) -> Option<bool> {
        let mut it = self.records.iter().filter(|r| r.criterion == criterion).peekable();
        it.peek()?;
        Some(it.all(|r| r.pass))
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    fn push(&mut self, criterion: u8, table: &'static str, check: impl Into<String>, expected: f64, actual: f64, tolerance: Bound) {
        self.records.push(CheckRecord {
            criterion,
            check: check.into(),
            table,
            expected,
            actual,
            tolerance,
            pass: tolerance.holds(expected, actual),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.records.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
        writeln!(
            f,
            "{:>2}  {:<7}  {:<width$}  {:>14}  {:>14}  {:>12}  result",
            "#", "table", "check", "expected", "actual", "tolerance"
        )?;
        for r in &self.records {
            writeln!(
                f,
                "{:>2}  {:<7}  {:<width$}  {:>14.4}  {:>14.4}  {:>12}  {}",
                r.criterion,
                r.table,
                r.check,
                r.expected,
                r.actual,
                r.tolerance.to_string(),
                if r.pass { "pass" } else { "FAIL" }
            )?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.records.len(), failed)
    }
}

/// Tables each criterion draws on.
pub fn criterion_tables(criterion: u8) -> &'static [&'static str] {
    match criterion {
        1 => &["table3"],
        2 | 3 => &["table4"],
        4 | 5 | 7 => &["table5"],
        6 => &["table6"],
        8 => &["table1", "table2"],
        9 => &["oracle"],
        10 => &["mc"],
        11 => &["table7"],
        _ => &[],
    }
}

/// Selects criteria by table id (`table4`), criterion number (`7`, `c7`) or `all`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyFilter {
    keys: Vec<String>,
}

impl VerifyFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn only<S: AsRef<str>>(keys: &[S]) -> Result<Self> {
        let keys: Vec<String> = keys.iter().map(|k| k.as_ref().trim().to_ascii_lowercase()).collect();
        for k in &keys {
            if k != "all" && !(1..=11).any(|c| Self::key_matches(k, c)) {
                return Err(Error::invalid(format!("unknown verify selector `{k}`")));
            }
        }
        Ok(VerifyFilter { keys })
    }

    fn key_matches(key: &str, criterion: u8) -> bool {
        let num = key.trim_start_matches("criterion").trim_start_matches('c');
        num.parse::<u8>() == Ok(criterion) || criterion_tables(criterion).contains(&key)
    }

    pub fn includes(&self, criterion: u8) -> bool {
        self.keys.is_empty()
            || self
                .keys
                .iter()
                .any(|k| k == "all" || Self::key_matches(k, criterion))
    }
}

/// Runs the selected checks against `fixtures`.
pub fn verify(fixtures: &FixtureSet, filter: &VerifyFilter) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let cfg = fixtures.config()?;
    let pc = PowerClock::default();
    type Check = fn(&mut VerifyReport, &FixtureSet, &AcnConfig, &PowerClock) -> Result<()>;
    let checks: [(u8, Check); 11] = [
        (1, check_mapping),
        (2, check_membrane),
        (3, check_hardware_outputs),
        (4, check_loads),
        (5, check_max_load),
        (6, check_frequency),
        (7, check_energy),
        (8, check_offsets),
        (9, check_equivalence),
        (10, check_monte_carlo),
        (11, check_voltage_sweep),
    ];
    for (c, check) in checks {
        if filter.includes(c) {
            check(&mut report, fixtures, &cfg, &pc)?;
        }
    }
    Ok(report)
}

fn check_mapping(r: &mut VerifyReport, f: &FixtureSet, published: &AcnConfig, _: &PowerClock) -> Result<()> {
    let spec = f.neuron()?;
    let mapped = map_weights(&spec, &f.tech()?, f.reference_value("ct_total")?)?;
    for s in &published.synapses {
        let got = mapped.synapse(s.index).map_or(0.0, |m| m.cap_ff);
        r.push(1, "table3", format!("C{}", s.index), s.cap_ff, got, Bound::Abs(SYNAPSE_CAP_TOL_FF));
    }
    for tree in Tree::BOTH {
        let (p, m) = (published.aux(tree), mapped.aux(tree));
        let t = tree.suffix();
        r.push(1, "table3", format!("Cb{t}"), p.bias_ff, m.bias_ff, Bound::Abs(BIAS_CAP_TOL_FF));
        r.push(1, "table3", format!("Cd{t}"), p.ballast_ff, m.ballast_ff, Bound::Abs(BALLAST_CAP_TOL_FF));
    }
    Ok(())
}

fn check_membrane(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let mut matches = 0;
    for row in &f.table4 {
        let s = simulate(cfg, &row.vector, pc, &TlModel::ideal(), None)?;
        r.push(2, "table4", format!("{} vm+", row.tv), row.vm_pos_mv, s.vm_pos_mv, Bound::Abs(MEMBRANE_TOL_MV));
        r.push(2, "table4", format!("{} vm-", row.tv), row.vm_neg_mv, s.vm_neg_mv, Bound::Abs(MEMBRANE_TOL_MV));
        matches += usize::from(s.decision.output == row.out_model);
    }
    let n = f.table4.len() as f64;
    r.push(2, "table4", "ideal outputs matching", n, matches as f64, Bound::Abs(0.0));
    Ok(())
}

fn check_hardware_outputs(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, pc: &PowerClock) -> Result<()> {
    for variant in [TlVariant::Proposed, TlVariant::Conventional] {
        let tl = TlModel::new(variant);
        let mut matches = 0;
        for row in &f.table4 {
            let expected = match variant {
                TlVariant::Proposed => row.out_proposed,
                _ => row.out_conventional,
            };
            let s = simulate(cfg, &row.vector, pc, &tl, None)?;
            matches += usize::from(s.decision.output == expected);
        }
        let n = f.table4.len() as f64;
        r.push(3, "table4", format!("{variant} outputs matching"), n, matches as f64, Bound::Abs(0.0));
    }
    Ok(())
}

fn check_loads(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, _: &PowerClock) -> Result<()> {
    for row in &f.table5 {
        let load = capacitive_load(cfg, &row.vector)?;
        r.push(4, "table5", format!("{} CL", row.tv), row.load_ff, load, Bound::Abs(LOAD_TOL_FF));
    }
    Ok(())
}

/// Achievable `C_on` values of one tree: bias plus every subset of its synapses.
fn achievable_on(cfg: &AcnConfig, tree: Tree) -> Vec<f64> {
    let caps: Vec<f64> = cfg.synapses_in(tree).map(|s| s.cap_ff).collect();
    let bias = cfg.aux(tree).bias_ff;
    (0u64..1 << caps.len())
        .map(|m| bias + (0..caps.len()).filter(|j| m >> j & 1 == 1).map(|j| caps[j]).sum::<f64>())
        .collect()
}

fn check_max_load(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, _: &PowerClock) -> Result<()> {
    let best = max_load_search(cfg);
    let state = tree_capacitances(cfg, &best.vector)?;
    for tree in Tree::BOTH {
        let half = cfg.total_ff(tree) / 2.0;
        let nearest = achievable_on(cfg, tree)
            .into_iter()
            .map(|c| (c - half).abs())
            .fold(f64::INFINITY, f64::min);
        let got = (state.get(tree).on_ff - half).abs();
        r.push(5, "table5", format!("argmax |Con{} - CA/2|", tree.suffix()), nearest, got, Bound::Abs(1e-9));
    }
    let heaviest = f
        .table5
        .iter()
        .max_by(|a, b| a.load_ff.total_cmp(&b.load_ff))
        .ok_or_else(|| Error::fixture("table5", "no rows"))?;
    let computed = capacitive_load(cfg, &heaviest.vector)?;
    r.push(5, "table5", format!("global max CL vs {} model CL", heaviest.tv), computed, best.load_ff, Bound::AtLeast);
    // the table prints loads to 0.1 fF
    let printed = (best.load_ff * 10.0).round() / 10.0;
    r.push(5, "table5", "global max CL at print resolution", heaviest.load_ff, printed, Bound::AtLeast);
    Ok(())
}

fn check_frequency(r: &mut VerifyReport, f: &FixtureSet, _: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let max_load = f
        .table5
        .iter()
        .map(|row| row.load_ff)
        .fold(f64::NEG_INFINITY, f64::max);
    let nominal = f
        .table6
        .iter()
        .find(|row| row.nominal_mhz == 1.0)
        .ok_or_else(|| Error::fixture("table6", "no 1 MHz row"))?;
    let published_hz = f.reference_value("f_op_max_load")? * 1e3;
    let loaded = operating_frequency(pc, max_load);
    r.push(6, "table6", "f_op at max load (kHz)", published_hz / 1e3, loaded / 1e3, Bound::Rel(FREQ_REL_TOL));
    r.push(
        6,
        "table6",
        "f_op vs operating column (kHz)",
        nominal.operating_mhz * 1e3,
        loaded / 1e3,
        Bound::Rel(FREQ_REL_TOL),
    );
    let droop = 1.0 - loaded / operating_frequency(pc, 0.0);
    let (lo, hi) = DROOP_RANGE;
    r.push(6, "table6", "droop from zero load", (lo + hi) / 2.0, droop, Bound::Range(lo, hi));
    Ok(())
}

/// Calibration rows with loads recomputed from `cfg`.
pub fn calibration_rows(f: &FixtureSet, cfg: &AcnConfig) -> Result<Vec<CalibrationRow>> {
    f.table5
        .iter()
        .map(|row| {
            Ok(CalibrationRow {
                vector: row.vector.clone(),
                load_ff: capacitive_load(cfg, &row.vector)?,
                acn_fj: row.acn_fj,
                ccn_fj: row.ccn_fj,
            })
        })
        .collect()
}

fn check_energy(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let rows = calibration_rows(f, cfg)?;
    let params = calibrate_energy(&rows, pc)?;
    let zero = InputVector::zeros(cfg.n_inputs);
    let max_load = rows.iter().map(|row| row.load_ff).fold(f64::NEG_INFINITY, f64::max);
    let tl = TlModel::ideal();
    for (row, cal) in f.table5.iter().zip(&rows) {
        let b = energy_at_load(cal.load_ff, pc, &params, &tl)?;
        let anchor = cal.vector == zero || cal.load_ff == max_load;
        let bound = if anchor {
            Bound::Abs(ANCHOR_TOL_FJ)
        } else {
            Bound::Rel(ACN_ENERGY_REL_TOL)
        };
        r.push(7, "table5", format!("{} ACN fJ", row.tv), row.acn_fj, b.acn_synapse_fj(), bound);
        let floor = if cal.load_ff > LOADED_THRESHOLD_FF {
            LOADED_SAVINGS_PCT
        } else {
            MIN_SAVINGS_PCT
        };
        r.push(7, "table5", format!("{} model savings %", row.tv), floor, b.savings_pct, Bound::AtLeast);
        r.push(
            7,
            "table5",
            format!("{} fixture savings %", row.tv),
            row.savings_pct,
            savings_pct(row.acn_fj, row.ccn_fj),
            Bound::Abs(SAVINGS_RECOMPUTE_TOL),
        );
    }
    Ok(())
}

fn check_offsets(r: &mut VerifyReport, f: &FixtureSet, _: &AcnConfig, _: &PowerClock) -> Result<()> {
    let models = [
        TlModel {
            offsets: f.offsets.for_design(TlVariant::Proposed),
            ..TlModel::new(TlVariant::Proposed)
        },
        TlModel {
            offsets: f.offsets.for_design(TlVariant::Conventional),
            ..TlModel::new(TlVariant::Conventional)
        },
    ];
    let mut exact = 0usize;
    for e in f.offsets.entries() {
        let m = models.iter().find(|m| m.variant == e.design).expect("two designs");
        let got = offset_lookup(m, e.corner, e.temp_c, e.direction)?;
        exact += usize::from(got.to_bits() == e.offset_mv.to_bits());
    }
    r.push(8, "table1", "offset entries reproduced", 60.0, exact as f64, Bound::Abs(0.0));
    let mut ordered = 0usize;
    for corner in Corner::ALL {
        for t in TEMPERATURE_GRID {
            let p = offset_lookup(&models[0], corner, t, Direction::Rising)?;
            let c = offset_lookup(&models[1], corner, t, Direction::Rising)?;
            ordered += usize::from(p < c);
        }
    }
    r.push(8, "table1", "proposed rising < conventional rising", 15.0, ordered as f64, Bound::Abs(0.0));
    let max_abs = models[0]
        .offsets
        .entries()
        .iter()
        .map(|e| e.offset_mv.abs())
        .fold(0.0, f64::max);
    r.push(8, "table2", "proposed max |offset| (mV)", PROPOSED_MAX_OFFSET_MV, max_abs, Bound::Range(0.0, PROPOSED_MAX_OFFSET_MV));
    Ok(())
}

/// A random feasible neuron for the equivalence oracle, with its mapping.
pub fn random_mapped_neuron(rng: &mut ChaCha8Rng, tech: &TechProfile) -> Result<(NeuronSpec, AcnConfig)> {
    loop {
        let n = rng.random_range(1..=ORACLE_MAX_INPUTS);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let bias = rng.random_range(-0.5..=0.5);
        let Ok(spec) = NeuronSpec::new(weights, bias) else {
            continue;
        };
        let ct = min_feasible_ct(&spec, tech);
        if let Ok(cfg) = map_weights(&spec, tech, ct) {
            return Ok((spec, cfg));
        }
    }
}

fn check_equivalence(r: &mut VerifyReport, _: &FixtureSet, _: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let tech = TechProfile::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let (mut checked, mut disagree) = (0usize, 0usize);
    let ideal = TlModel::ideal();
    for _ in 0..ORACLE_NEURONS {
        let (spec, cfg) = random_mapped_neuron(&mut rng, &tech)?;
        let delta = spec.len() as f64 * tech.cap_grid_ff / cfg.unit_cap_ff;
        for mask in 0u64..1 << spec.len() {
            let x = InputVector::from_mask(mask, spec.len());
            if spec.margin(&x)?.abs() <= delta {
                continue;
            }
            checked += 1;
            let hw = simulate(&cfg, &x, pc, &ideal, None)?.decision.output;
            disagree += usize::from(hw != eval_software_neuron(&spec, &x)?);
        }
    }
    r.push(9, "oracle", "vectors above margin checked", 1.0, checked as f64, Bound::AtLeast);
    r.push(9, "oracle", "disagreements above margin", 0.0, disagree as f64, Bound::Abs(0.0));
    Ok(())
}

fn check_monte_carlo(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let params = calibrate_energy(&calibration_rows(f, cfg)?, pc)?;
    let tv4 = &f
        .table5_row("TV4")
        .ok_or_else(|| Error::fixture("table5", "no TV4 row"))?
        .vector;
    let model = VariationModel {
        seed: MC_SEED,
        ..VariationModel::default()
    };
    let run = |target| mc_run(cfg, tv4, pc, &params, &model, MC_RUNS, target);
    let acn_samples = run(McTarget::Acn)?;
    let acn = mc_stats(&acn_samples)?;
    let ccn = mc_stats(&run(McTarget::Ccn)?)?;
    let nan = f64::NAN;
    r.push(10, "mc", "ACN skewness", ACN_MIN_SKEW, acn.skewness.unwrap_or(nan), Bound::Above);
    r.push(10, "mc", "ACN qq correlation", QQ_NORMAL, acn.qq_corr.unwrap_or(nan), Bound::Below);
    let ccn_skew = ccn.skewness.map_or(nan, f64::abs);
    r.push(10, "mc", "CCN |skewness|", CCN_MAX_ABS_SKEW, ccn_skew, Bound::Below);
    r.push(10, "mc", "CCN qq correlation", QQ_NORMAL, ccn.qq_corr.unwrap_or(nan), Bound::Above);
    r.push(10, "mc", "ACN cv over CCN cv", ccn.cv, acn.cv, Bound::Above);
    let rerun = run(McTarget::Acn)?;
    let identical = rerun.len() == acn_samples.len()
        && rerun.iter().zip(&acn_samples).all(|(a, b)| a.to_bits() == b.to_bits());
    r.push(10, "mc", "rerun bit-identical", 1.0, f64::from(u8::from(identical)), Bound::Abs(0.0));
    Ok(())
}

fn check_voltage_sweep(r: &mut VerifyReport, f: &FixtureSet, cfg: &AcnConfig, pc: &PowerClock) -> Result<()> {
    let params = calibrate_energy(&calibration_rows(f, cfg)?, pc)?;
    let pick = |tv: &str| -> Result<InputVector> {
        f.table5_row(tv)
            .map(|row| row.vector.clone())
            .ok_or_else(|| Error::fixture("table7", format!("no {tv} vector")))
    };
    let labels = ["TV4", "TV8", "TV13"];
    let vectors = labels.iter().map(|tv| pick(tv)).collect::<Result<Vec<_>>>()?;
    let points: Vec<f64> = f.table7.iter().map(|row| row.vdd).collect();
    let tl = TlModel::new(TlVariant::Proposed);
    let rows = sweep(cfg, &vectors, SweepAxis::Voltage, &points, pc, &params, &tl)?;
    let nominal: Vec<bool> = vectors
        .iter()
        .map(|x| simulate(cfg, x, pc, &tl, None).map(|s| s.decision.output))
        .collect::<Result<_>>()?;
    let (lo, hi) = TV8_SAVINGS_RANGE;
    for (i, row) in rows.iter().enumerate() {
        let k = i % vectors.len();
        let label = format!("{} @ {:.1} V savings %", labels[k], row.axis_value);
        let s = row.energy.savings_pct;
        if labels[k] == "TV8" {
            r.push(11, "table7", label, (lo + hi) / 2.0, s, Bound::Range(lo, hi));
        } else {
            r.push(11, "table7", label, LOADED_SAVINGS_PCT, s, Bound::AtLeast);
        }
    }
    let unchanged = rows
        .iter()
        .enumerate()
        .filter(|(i, row)| row.output == nominal[i % vectors.len()])
        .count();
    r.push(11, "table7", "outputs unchanged across sweep", rows.len() as f64, unchanged as f64, Bound::Abs(0.0));
    Ok(())
}
