//! Behavioral threshold logic: comparator decision and output energy.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TlVariant {
    Ideal,
    Proposed,
    Conventional,
}

impl TlVariant {
    pub const ALL: [TlVariant; 3] = [TlVariant::Ideal, TlVariant::Proposed, TlVariant::Conventional];

    /// Effective decision threshold at the clock peak, in mV.
    pub fn default_threshold_mv(self) -> f64 {
        match self {
            TlVariant::Ideal => 0.0,
            TlVariant::Proposed => 5.0,
            TlVariant::Conventional => 20.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TlVariant::Ideal => "ideal",
            TlVariant::Proposed => "proposed",
            TlVariant::Conventional => "conventional",
        }
    }
}

impl fmt::Display for TlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TlVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(TlVariant::Ideal),
            "proposed" | "prop" => Ok(TlVariant::Proposed),
            "conventional" | "conv" => Ok(TlVariant::Conventional),
            other => Err(Error::invalid(format!("unknown threshold logic variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    FF,
    TT,
    SS,
}

impl Corner {
    pub const ALL: [Corner; 3] = [Corner::FF, Corner::TT, Corner::SS];
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Corner::FF => "FF",
            Corner::TT => "TT",
            Corner::SS => "SS",
        })
    }
}

impl FromStr for Corner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FF" => Ok(Corner::FF),
            "TT" => Ok(Corner::TT),
            "SS" => Ok(Corner::SS),
            other => Err(Error::invalid(format!("unknown process corner `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
}

/// Characterization temperatures, °C.
pub const TEMPERATURE_GRID: [f64; 5] = [-55.0, 0.0, 27.0, 100.0, 125.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetEntry {
    pub design: TlVariant,
    pub corner: Corner,
    #[serde(rename = "temp_C")]
    pub temp_c: f64,
    pub direction: Direction,
    #[serde(rename = "offset_mV")]
    pub offset_mv: f64,
}

/// Measured input-referred offsets per design, corner, temperature and
/// input direction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OffsetTable {
    entries: Vec<OffsetEntry>,
}

const EMBEDDED_OFFSETS: &str = include_str!("../fixtures/tl_offsets.csv");

impl OffsetTable {
    pub fn embedded() -> Self {
        Self::from_csv(EMBEDDED_OFFSETS.as_bytes()).expect("embedded offset table is well formed")
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for row in rdr.deserialize() {
            let e: OffsetEntry = row?;
            if !e.offset_mv.is_finite() {
                return Err(Error::fixture("offsets", "non-finite offset"));
            }
            if e.design == TlVariant::Ideal {
                return Err(Error::fixture("offsets", "the ideal comparator has no offsets"));
            }
            entries.push(e);
        }
        Ok(OffsetTable { entries })
    }

    pub fn entries(&self) -> &[OffsetEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only the rows of one design.
    pub fn for_design(&self, design: TlVariant) -> OffsetTable {
        OffsetTable {
            entries: self
                .entries
                .iter()
                .filter(|e| e.design == design)
                .cloned()
                .collect(),
        }
    }

    fn at(&self, design: TlVariant, corner: Corner, temp_c: f64, dir: Direction) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| {
                e.design == design && e.corner == corner && e.direction == dir && e.temp_c == temp_c
            })
            .map(|e| e.offset_mv)
    }

    /// Exact at grid temperatures, linear between neighbours, no extrapolation.
    pub fn lookup(&self, design: TlVariant, corner: Corner, temp_c: f64, dir: Direction) -> Result<f64> {
        let mut temps: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| e.design == design && e.corner == corner && e.direction == dir)
            .map(|e| e.temp_c)
            .collect();
        temps.sort_by(f64::total_cmp);
        temps.dedup();
        let (Some(&lo), Some(&hi)) = (temps.first(), temps.last()) else {
            return Err(Error::invalid(format!(
                "no {design} offsets for corner {corner}"
            )));
        };
        if !(temp_c >= lo && temp_c <= hi) {
            return Err(Error::OutOfRange {
                what: "temperature (°C)",
                value: temp_c,
                min: lo,
                max: hi,
            });
        }
        if let Some(v) = self.at(design, corner, temp_c, dir) {
            return Ok(v);
        }
        let upper = temps.partition_point(|t| *t < temp_c);
        let (t0, t1) = (temps[upper - 1], temps[upper]);
        let v0 = self.at(design, corner, t0, dir).expect("grid point");
        let v1 = self.at(design, corner, t1, dir).expect("grid point");
        Ok(v0 + (v1 - v0) * (temp_c - t0) / (t1 - t0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TlModel {
    pub variant: TlVariant,
    pub offsets: OffsetTable,
    /// Output high when `v_md >= threshold`.
    pub threshold_mv: f64,
    /// Output node load, fF.
    pub c_tl_ff: f64,
    pub corner: Corner,
    pub temp_c: f64,
    /// Supply, V. Inputs outside `[0, vdd]` are rejected.
    pub vdd: f64,
}

impl TlModel {
    pub fn ideal() -> Self {
        TlModel {
            variant: TlVariant::Ideal,
            offsets: OffsetTable::default(),
            threshold_mv: 0.0,
            c_tl_ff: 100.0,
            corner: Corner::TT,
            temp_c: 27.0,
            vdd: 1.8,
        }
    }

    /// A variant with its default threshold and its rows of the embedded offset table.
    pub fn new(variant: TlVariant) -> Self {
        let offsets = match variant {
            TlVariant::Ideal => OffsetTable::default(),
            v => OffsetTable::embedded().for_design(v),
        };
        TlModel {
            variant,
            offsets,
            threshold_mv: variant.default_threshold_mv(),
            ..TlModel::ideal()
        }
    }

    pub fn with_threshold(mut self, threshold_mv: f64) -> Self {
        self.threshold_mv = threshold_mv;
        self
    }

    pub fn at_condition(mut self, corner: Corner, temp_c: f64) -> Self {
        self.corner = corner;
        self.temp_c = temp_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == TlVariant::Ideal && (self.threshold_mv != 0.0 || !self.offsets.is_empty()) {
            return Err(Error::invalid("the ideal comparator has zero threshold and no offsets"));
        }
        if !self.threshold_mv.is_finite() {
            return Err(Error::invalid("decision threshold must be finite"));
        }
        if !(self.c_tl_ff.is_finite() && self.c_tl_ff >= 0.0) {
            return Err(Error::invalid("output load must be non-negative"));
        }
        if !(self.vdd.is_finite() && self.vdd > 0.0) {
            return Err(Error::invalid("supply must be positive"));
        }
        if self.offsets.entries.iter().any(|e| e.design != self.variant) {
            return Err(Error::invalid("offset rows belong to another design"));
        }
        if self.variant == TlVariant::Proposed
            && self.offsets.entries.iter().any(|e| e.offset_mv.abs() > 9.01)
        {
            return Err(Error::invalid("proposed comparator offsets exceed 9.01 mV"));
        }
        Ok(())
    }
}

pub fn offset_lookup(model: &TlModel, corner: Corner, temp_c: f64, dir: Direction) -> Result<f64> {
    if model.variant == TlVariant::Ideal {
        return Ok(0.0);
    }
    model.offsets.lookup(model.variant, corner, temp_c, dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TlDecision {
    pub output: bool,
    /// `v_m+ - v_m-`, mV.
    #[serde(rename = "vmd_mV")]
    pub margin_mv: f64,
    /// Offset at the model's corner and temperature for the direction the
    /// inputs cross in, mV.
    #[serde(rename = "offset_mV")]
    pub offset_mv: f64,
}

pub fn tl_decide(model: &TlModel, vm_pos_mv: f64, vm_neg_mv: f64) -> Result<TlDecision> {
    let max_mv = model.vdd * 1e3;
    for v in [vm_pos_mv, vm_neg_mv] {
        if !(v >= 0.0 && v <= max_mv) {
            return Err(Error::OutOfRange {
                what: "membrane voltage (mV)",
                value: v,
                min: 0.0,
                max: max_mv,
            });
        }
    }
    let margin_mv = vm_pos_mv - vm_neg_mv;
    let dir = if margin_mv >= 0.0 {
        Direction::Rising
    } else {
        Direction::Falling
    };
    Ok(TlDecision {
        output: margin_mv >= model.threshold_mv,
        margin_mv,
        offset_mv: offset_lookup(model, model.corner, model.temp_c, dir)?,
    })
}

/// `C_TL * V_DD^2`, fJ.
pub fn tl_energy(model: &TlModel, vdd: f64) -> Result<f64> {
    if !(vdd.is_finite() && vdd > 0.0) {
        return Err(Error::invalid(format!("supply {vdd} V must be positive")));
    }
    Ok(model.c_tl_ff * vdd * vdd)
}
