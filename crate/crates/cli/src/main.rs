use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use dtsc_core::energy::{savings_pct, SweepAxis};
use dtsc_core::montecarlo::SamplerKind;
use dtsc_core::report::{self, McReport};
use dtsc_core::tree::SearchMode;
use dtsc_core::verify::calibration_rows;
use dtsc_core::{
    calibrate_energy, export_netlist, map_weights, max_load_search, mc_run, mc_stats, simulate,
    sweep, total_energy, verify, AcnConfig, Corner, EnergyParams, FixtureSet, InputVector,
    McTarget, NeuronSpec, PowerClock, TechProfile, TlModel, TlVariant, VariationModel,
    VerifyFilter,
};

/// Compiler and energy simulator for dual-tree adiabatic capacitive neurons.
#[derive(Parser)]
#[command(name = "dtsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a weight file to a capacitor configuration.
    Map(MapArgs),
    /// Membrane voltages and comparator outputs per vector.
    Sim(SimArgs),
    /// Per-operation energy breakdown per vector.
    Energy(EnergyArgs),
    /// Energy over a supply or frequency sweep.
    Sweep(SweepArgs),
    /// Monte Carlo energy distribution for one vector.
    Mc(McArgs),
    /// Fit energy parameters to a table of measured energies.
    Calibrate(CalibrateArgs),
    /// Check the model against the embedded reference tables.
    Verify(VerifyArgs),
    /// Behavioral netlist of a configuration.
    Netlist(NetlistArgs),
    /// Input vector with the largest clock load.
    MaxLoad(MaxLoadArgs),
    /// Write the embedded reference tables as CSV files.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct MapArgs {
    /// JSON `{"weights": [..], "bias": t}`.
    #[arg(long)]
    weights: PathBuf,
    /// Technology JSON; the parasitic-free reference profile when omitted.
    #[arg(long)]
    tech: Option<PathBuf>,
    /// Total synapse capacitance C_T in fF.
    #[arg(long)]
    ct: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration JSON from `map`; the published 12-input design when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Vectors CSV, one per line; the 16 published test vectors when omitted.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Power clock JSON; 1 MHz, 1 mH, 25 pF at 1.8 V when omitted.
    #[arg(long)]
    clock: Option<PathBuf>,
}

#[derive(Args)]
struct TlArgs {
    #[arg(long, default_value = "ideal")]
    tl: TlVariant,
    #[arg(long, default_value = "TT")]
    corner: Corner,
    /// Junction temperature in Celsius.
    #[arg(long, default_value_t = 27.0, allow_negative_numbers = true)]
    temp: f64,
    /// Override the comparator decision threshold in mV.
    #[arg(long)]
    threshold_mv: Option<f64>,
}

#[derive(Args)]
struct ParamsArgs {
    /// Energy parameter JSON from `calibrate`.
    #[arg(long, conflicts_with = "calibration")]
    params: Option<PathBuf>,
    /// Measured energies CSV (`vector,CL_fF,E_ACN_fJ,E_CCN_fJ`) to calibrate against.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    input: ConfigArgs,
    #[command(flatten)]
    tl: TlArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SavingsSource {
    /// Model ACN and CCN energies.
    Model,
    /// Published ACN and CCN energies where the vector appears in the table.
    Fixture,
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    input: ConfigArgs,
    #[command(flatten)]
    params: ParamsArgs,
    #[command(flatten)]
    tl: TlArgs,
    #[arg(long, value_enum, default_value = "model")]
    savings_source: SavingsSource,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Freq,
    Vdd,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: ConfigArgs,
    #[command(flatten)]
    params: ParamsArgs,
    #[command(flatten)]
    tl: TlArgs,
    #[arg(long, value_enum)]
    axis: Axis,
    /// Explicit points (V or Hz), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "step"])]
    values: Vec<f64>,
    /// Defaults: 1.8 V or 1e5 Hz.
    #[arg(long)]
    from: Option<f64>,
    /// Defaults: 1.0 V or 1e8 Hz.
    #[arg(long)]
    to: Option<f64>,
    /// Additive step for vdd, multiplicative factor for freq. Defaults: 0.1 V, 10x.
    #[arg(long)]
    step: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    clock: Option<PathBuf>,
    #[command(flatten)]
    params: ParamsArgs,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "acn")]
    target: TargetArg,
    /// Bits of the vector to evaluate; TV4 of the published design when omitted.
    #[arg(long)]
    vector: Option<InputVector>,
    #[arg(long, value_enum, default_value = "pseudorandom")]
    sampler: SamplerArg,
    #[arg(long)]
    sigma_mismatch: Option<f64>,
    #[arg(long)]
    sigma_global: Option<f64>,
    #[arg(long)]
    sigma_rsyn: Option<f64>,
    /// Also write raw samples with normal quantiles.
    #[arg(long)]
    samples_csv: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Acn,
    Ccn,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Pseudorandom,
    LowDiscrepancy,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Defaults to the published energy table.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long)]
    clock: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Table ids (`table4`, `oracle`, `mc`) or criterion numbers (`7`, `c7`).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Read fixture CSVs from a directory instead of the embedded copies.
    #[arg(long)]
    fixtures_dir: Option<PathBuf>,
}

#[derive(Args)]
struct NetlistArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    clock: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MaxLoadArgs {
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    /// Target directory, created if missing.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Debug)]
struct VerifyFailed(usize);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} verification check(s) failed", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use dtsc_core::Error as E;
    for cause in err.chain() {
        if cause.is::<VerifyFailed>() {
            return 5;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Infeasible(_) | E::BelowMinimum { .. } => 2,
                E::Dimension { .. } => 3,
                E::Calibration(_) => 4,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Map(a) => cmd_map(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Netlist(a) => cmd_netlist(a),
        Command::MaxLoad(a) => cmd_max_load(a),
        Command::Fixtures(a) => cmd_fixtures(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = report::read_text(path)?;
    let value = serde_json::from_str(&text)
        .map_err(dtsc_core::Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(value)
}

/// Writes to `path` atomically, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(report::write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<AcnConfig> {
    let cfg = match path {
        Some(p) => read_json::<AcnConfig>(p)?,
        None => FixtureSet::embedded().config()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_clock(path: Option<&Path>) -> Result<PowerClock> {
    let pc = match path {
        Some(p) => read_json(p)?,
        None => PowerClock::default(),
    };
    pc.validate()?;
    Ok(pc)
}

fn load_vectors(path: Option<&Path>, n: usize) -> Result<Vec<InputVector>> {
    let vectors = match path {
        Some(p) => {
            let text = report::read_text(p)?;
            let width = report::vector_width(&text).unwrap_or(n);
            if width != n {
                return Err(dtsc_core::Error::Dimension {
                    expected: n,
                    found: width,
                }
                .into());
            }
            report::parse_vectors(&text, n).with_context(|| format!("reading {}", p.display()))?
        }
        None => FixtureSet::embedded().vectors().into_iter().map(|(_, v)| v).collect(),
    };
    for v in &vectors {
        v.check_len(n)?;
    }
    Ok(vectors)
}

fn load_params(args: &ParamsArgs, pc: &PowerClock) -> Result<EnergyParams> {
    let params = match (&args.params, &args.calibration) {
        (Some(p), _) => {
            let params: EnergyParams = read_json(p)?;
            params.validate()?;
            params
        }
        (None, Some(c)) => {
            let rows = report::parse_calibration_csv(&report::read_text(c)?)?;
            calibrate_energy(&rows, pc)?
        }
        (None, None) => {
            let f = FixtureSet::embedded();
            calibrate_energy(&calibration_rows(&f, &f.config()?)?, pc)?
        }
    };
    Ok(params)
}

impl TlArgs {
    fn model(&self, vdd: f64) -> Result<TlModel> {
        let mut m = TlModel::new(self.tl).at_condition(self.corner, self.temp);
        if let Some(t) = self.threshold_mv {
            m = m.with_threshold(t);
        }
        m.vdd = vdd;
        m.validate()?;
        Ok(m)
    }
}

fn cmd_map(a: MapArgs) -> Result<()> {
    let spec: NeuronSpec = read_json(&a.weights)?;
    let tech = match &a.tech {
        Some(p) => read_json(p)?,
        None => TechProfile::reference(),
    };
    tech.validate()?;
    let cfg = map_weights(&spec, &tech, a.ct)?;
    emit(a.output.as_deref(), &report::to_json_pretty(&cfg)?)
}

fn cmd_sim(a: SimArgs) -> Result<()> {
    let cfg = load_config(a.input.config.as_deref())?;
    let pc = load_clock(a.input.clock.as_deref())?;
    let vectors = load_vectors(a.input.vectors.as_deref(), cfg.n_inputs)?;
    let tl = a.tl.model(pc.v_max)?;
    let rows = vectors
        .iter()
        .map(|x| simulate(&cfg, x, &pc, &tl, None))
        .collect::<dtsc_core::Result<Vec<_>>>()?;
    emit(a.output.as_deref(), &report::sim_csv(&rows)?)
}

fn cmd_energy(a: EnergyArgs) -> Result<()> {
    let cfg = load_config(a.input.config.as_deref())?;
    let pc = load_clock(a.input.clock.as_deref())?;
    let vectors = load_vectors(a.input.vectors.as_deref(), cfg.n_inputs)?;
    let params = load_params(&a.params, &pc)?;
    let tl = a.tl.model(pc.v_max)?;
    let fixtures = FixtureSet::embedded();
    let mut rows = Vec::with_capacity(vectors.len());
    for x in vectors {
        let mut b = total_energy(&cfg, &x, &pc, &params, &tl)?;
        if let SavingsSource::Fixture = a.savings_source {
            if let Some(row) = fixtures.table5.iter().find(|r| r.vector == x) {
                b.e_ccn_fj = row.ccn_fj;
                b.savings_pct = savings_pct(row.acn_fj, row.ccn_fj);
            }
        }
        rows.push((x, b));
    }
    emit(a.output.as_deref(), &report::energy_csv(&rows)?)
}

fn sweep_points(a: &SweepArgs) -> Result<Vec<f64>> {
    if !a.values.is_empty() {
        return Ok(a.values.clone());
    }
    let mut points = Vec::new();
    match a.axis {
        Axis::Vdd => {
            let (from, to) = (a.from.unwrap_or(1.8), a.to.unwrap_or(1.0));
            let step = a.step.unwrap_or(0.1).abs();
            if step <= 0.0 {
                bail!(dtsc_core::Error::Invalid("sweep step must be nonzero".into()));
            }
            let n = ((to - from).abs() / step + 1e-9).floor() as usize;
            let dir = if to < from { -1.0 } else { 1.0 };
            for i in 0..=n {
                // round to the step's decimal resolution so 1.8 - 8 * 0.1 prints as 1.0
                let v = from + dir * step * i as f64;
                points.push((v * 1e9).round() / 1e9);
            }
        }
        Axis::Freq => {
            let (from, to) = (a.from.unwrap_or(1e5), a.to.unwrap_or(1e8));
            let factor = a.step.unwrap_or(10.0);
            if factor <= 1.0 {
                bail!(dtsc_core::Error::Invalid("frequency step must be a factor above 1".into()));
            }
            let mut f = from;
            while f <= to * (1.0 + 1e-9) {
                points.push(f);
                f *= factor;
            }
        }
    }
    Ok(points)
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let cfg = load_config(a.input.config.as_deref())?;
    let pc = load_clock(a.input.clock.as_deref())?;
    let vectors = load_vectors(a.input.vectors.as_deref(), cfg.n_inputs)?;
    let params = load_params(&a.params, &pc)?;
    let tl = a.tl.model(pc.v_max)?;
    let axis = match a.axis {
        Axis::Freq => SweepAxis::Frequency,
        Axis::Vdd => SweepAxis::Voltage,
    };
    let rows = sweep(&cfg, &vectors, axis, &sweep_points(&a)?, &pc, &params, &tl)?;
    emit(a.output.as_deref(), &report::sweep_csv(&rows)?)
}

fn cmd_mc(a: McArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let pc = load_clock(a.clock.as_deref())?;
    let params = load_params(&a.params, &pc)?;
    let x = match a.vector {
        Some(v) => v,
        None => FixtureSet::embedded()
            .table5_row("TV4")
            .map(|r| r.vector.clone())
            .context("published TV4 vector missing")?,
    };
    x.check_len(cfg.n_inputs)?;
    let defaults = VariationModel::default();
    let model = VariationModel {
        sigma_cap_mismatch: a.sigma_mismatch.unwrap_or(defaults.sigma_cap_mismatch),
        sigma_cap_global: a.sigma_global.unwrap_or(defaults.sigma_cap_global),
        sigma_rsyn: a.sigma_rsyn.unwrap_or(defaults.sigma_rsyn),
        sampler: match a.sampler {
            SamplerArg::Pseudorandom => SamplerKind::Pseudorandom,
            SamplerArg::LowDiscrepancy => SamplerKind::LowDiscrepancy,
        },
        seed: a.seed,
    };
    let target = match a.target {
        TargetArg::Acn => McTarget::Acn,
        TargetArg::Ccn => McTarget::Ccn,
    };
    let samples = mc_run(&cfg, &x, &pc, &params, &model, a.n, target)?;
    let summary = mc_stats(&samples)?;
    if let Some(p) = &a.samples_csv {
        report::write_atomic(p, report::samples_csv(&samples)?.as_bytes())?;
    }
    let rep = McReport::new(&summary, a.seed, target, &x);
    emit(a.output.as_deref(), &report::to_json_pretty(&rep)?)
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<()> {
    let pc = load_clock(a.clock.as_deref())?;
    let params = load_params(
        &ParamsArgs {
            params: None,
            calibration: a.calibration,
        },
        &pc,
    )?;
    emit(a.output.as_deref(), &report::to_json_pretty(&params)?)
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let fixtures = match &a.fixtures_dir {
        Some(d) => FixtureSet::load_dir(d)?,
        None => FixtureSet::embedded(),
    };
    let filter = if a.only.is_empty() {
        VerifyFilter::all()
    } else {
        VerifyFilter::only(&a.only)?
    };
    let rep = verify(&fixtures, &filter)?;
    println!("{rep}");
    for c in rep.criteria() {
        let ok = rep.criterion_passed(c).unwrap_or(false);
        println!("criterion {c:>2}: {}", if ok { "pass" } else { "FAIL" });
    }
    if let Some(p) = &a.json {
        report::write_atomic(p, report::to_json_pretty(&rep)?.as_bytes())?;
    }
    let failed = rep.failures().count();
    if failed > 0 {
        return Err(VerifyFailed(failed).into());
    }
    Ok(())
}

fn cmd_netlist(a: NetlistArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let pc = load_clock(a.clock.as_deref())?;
    emit(a.output.as_deref(), &export_netlist(&cfg, &pc)?)
}

fn cmd_max_load(a: MaxLoadArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let best = max_load_search(&cfg);
    let mode = match best.mode {
        SearchMode::Exhaustive => "exhaustive",
        SearchMode::Heuristic => "heuristic",
    };
    println!("vector,CL_fF,search");
    println!("{},{:.2},{mode}", best.vector.grouped(), best.load_ff);
    Ok(())
}

fn cmd_fixtures(a: FixturesArgs) -> Result<()> {
    std::fs::create_dir_all(&a.dir).with_context(|| format!("creating {}", a.dir.display()))?;
    for (name, text) in FixtureSet::embedded_files() {
        report::write_atomic(&a.dir.join(name), text.as_bytes())?;
    }
    Ok(())
}
