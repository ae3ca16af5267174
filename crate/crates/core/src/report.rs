//! File formats: vector lists, CSV reports with units in the headers, JSON
//! reports, and atomic file replacement.
//!
//! Report resolution: capacitance 0.01 fF, voltage 0.01 mV, frequency
//! 0.01 kHz, energy 0.1 fJ, percentages 0.01.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{CalibrationRow, EnergyBreakdown, SweepRow};
use crate::error::{Error, Result};
use crate::model::{parse_input_vector, InputVector};
use crate::montecarlo::{qq_pairs, McSummary, McTarget};
use crate::sim::SimResult;

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One vector per line, first CSV field; an optional `vector` header and
/// blank lines are skipped. Parse errors carry the 1-based line number.
pub fn parse_vectors(text: &str, n: usize) -> Result<Vec<InputVector>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() || (lineno == 0 && field.eq_ignore_ascii_case("vector")) {
            continue;
        }
        match parse_input_vector(field, n) {
            Ok(v) => out.push(v),
            Err(Error::Parse { position, message }) => {
                return Err(Error::Parse {
                    position,
                    message: format!("line {}: {message}", lineno + 1),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Counts the bits on the first data line, for files whose width is not known yet.
pub fn vector_width(text: &str) -> Option<usize> {
    text.lines()
        .map(|l| l.split(',').next().unwrap_or("").trim())
        .filter(|f| !f.is_empty() && !f.eq_ignore_ascii_case("vector"))
        .map(|f| f.chars().filter(|c| *c == '0' || *c == '1').count())
        .next()
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn bit(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

pub const SIM_HEADER: [&str; 9] = [
    "vector", "Con_p_fF", "Con_m_fF", "CL_fF", "vm_p_mV", "vm_m_mV", "vmd_mV", "software", "output",
];

pub fn sim_csv(rows: &[SimResult]) -> Result<String> {
    csv_text(
        &SIM_HEADER,
        rows.iter().map(|r| {
            vec![
                r.vector.grouped(),
                format!("{:.2}", r.on_pos_ff),
                format!("{:.2}", r.on_neg_ff),
                format!("{:.2}", r.load_ff),
                format!("{:.2}", r.vm_pos_mv),
                format!("{:.2}", r.vm_neg_mv),
                format!("{:.2}", r.vmd_mv),
                r.software.map(bit).unwrap_or_default(),
                bit(r.decision.output),
            ]
        }),
    )
}

pub const ENERGY_HEADER: [&str; 9] = [
    "vector",
    "CL_fF",
    "f_op_kHz",
    "E_PCG_fJ",
    "E_AL_fJ",
    "E_TL_fJ",
    "E_ACN_syn_fJ",
    "E_CCN_fJ",
    "savings_pct",
];

fn energy_fields(b: &EnergyBreakdown) -> Vec<String> {
    vec![
        format!("{:.2}", b.load_ff),
        format!("{:.2}", b.f_op_hz / 1e3),
        format!("{:.1}", b.e_pcg_fj),
        format!("{:.1}", b.e_al_fj),
        format!("{:.1}", b.e_tl_fj),
        format!("{:.1}", b.acn_synapse_fj()),
        format!("{:.1}", b.e_ccn_fj),
        format!("{:.2}", b.savings_pct),
    ]
}

pub fn energy_csv(rows: &[(InputVector, EnergyBreakdown)]) -> Result<String> {
    csv_text(
        &ENERGY_HEADER,
        rows.iter().map(|(v, b)| {
            let mut r = vec![v.grouped()];
            r.extend(energy_fields(b));
            r
        }),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut header = vec!["axis_value"];
    header.extend(ENERGY_HEADER);
    header.push("output");
    csv_text(
        &header,
        rows.iter().map(|r| {
            let mut f = vec![format!("{}", r.axis_value), r.vector.grouped()];
            f.extend(energy_fields(&r.energy));
            f.push(bit(r.output));
            f
        }),
    )
}

/// A parsed energy report row, at report resolution.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EnergyRecord {
    #[serde(default)]
    pub axis_value: Option<f64>,
    pub vector: InputVector,
    #[serde(rename = "CL_fF")]
    pub load_ff: f64,
    #[serde(rename = "f_op_kHz")]
    pub f_op_khz: f64,
    #[serde(rename = "E_PCG_fJ")]
    pub e_pcg_fj: f64,
    #[serde(rename = "E_AL_fJ")]
    pub e_al_fj: f64,
    #[serde(rename = "E_TL_fJ")]
    pub e_tl_fj: f64,
    #[serde(rename = "E_ACN_syn_fJ")]
    pub e_acn_syn_fj: f64,
    #[serde(rename = "E_CCN_fJ")]
    pub e_ccn_fj: f64,
    pub savings_pct: f64,
}

pub fn parse_energy_csv(text: &str) -> Result<Vec<EnergyRecord>> {
    Ok(csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()?)
}

#[derive(Deserialize)]
struct CalibrationRecord {
    vector: InputVector,
    #[serde(rename = "CL_fF")]
    load_ff: f64,
    #[serde(rename = "E_ACN_fJ")]
    acn_fj: f64,
    #[serde(rename = "E_CCN_fJ")]
    ccn_fj: f64,
}

/// Measured energies with columns `vector,CL_fF,E_ACN_fJ,E_CCN_fJ`; other columns are ignored.
pub fn parse_calibration_csv(text: &str) -> Result<Vec<CalibrationRow>> {
    let mut out = Vec::new();
    for rec in csv::Reader::from_reader(text.as_bytes()).deserialize() {
        let r: CalibrationRecord = rec?;
        out.push(CalibrationRow {
            vector: r.vector,
            load_ff: r.load_ff,
            acn_fj: r.acn_fj,
            ccn_fj: r.ccn_fj,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub n: usize,
    pub seed: u64,
    pub target: McTarget,
    pub vector: String,
    #[serde(rename = "mean_fJ")]
    pub mean_fj: f64,
    #[serde(rename = "std_fJ")]
    pub std_fj: f64,
    pub cv: f64,
    pub skewness: Option<f64>,
    pub qq_corr: Option<f64>,
    pub classified_normal: bool,
}

impl McReport {
    pub fn new(summary: &McSummary, seed: u64, target: McTarget, vector: &InputVector) -> Self {
        McReport {
            n: summary.n,
            seed,
            target,
            vector: vector.grouped(),
            mean_fj: summary.mean,
            std_fj: summary.std,
            cv: summary.cv,
            skewness: summary.skewness,
            qq_corr: summary.qq_corr,
            classified_normal: summary.classified_normal,
        }
    }
}

/// Raw samples in draw order next to the sorted samples and their normal quantiles.
pub fn samples_csv(samples: &[f64]) -> Result<String> {
    let pairs = qq_pairs(samples);
    csv_text(
        &["draw", "sample_fJ", "sorted_fJ", "normal_quantile"],
        samples.iter().zip(&pairs).enumerate().map(|(i, (s, (sorted, q)))| {
            vec![i.to_string(), format!("{s:.4}"), format!("{sorted:.4}"), format!("{q:.8}")]
        }),
    )
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_files() {
        let text = "vector\n0001_1010_0000\n\n111111111111,extra\n";
        let v = parse_vectors(text, 12).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[0].get(3) && v[0].get(4) && v[0].get(6));
        assert_eq!(vector_width(text), Some(12));
        let err = parse_vectors("000000000000\n0001_1010_000\n", 12).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn calibration_file_reads_published_table() {
        let (_, text) = crate::fixtures::FixtureSet::embedded_files()
            .iter()
            .find(|(n, _)| *n == "table5.csv")
            .unwrap();
        let rows = parse_calibration_csv(text).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(parse_calibration_csv("vector,CL_fF\n0000,1\n").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("dtsc-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
        assert!(matches!(write_atomic(&p, b"x"), Err(Error::Io { .. })));
    }
}
