//! Per-operation energy of the adiabatic neuron and of a conventional CMOS
//! neuron driving the same capacitor trees.
//!
//! Capacitances are in fF and energies in fJ unless a name says otherwise.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::AcnConfig;
use crate::model::InputVector;
use crate::tl::{tl_decide, tl_energy, TlModel};
use crate::tree::{capacitive_load, membrane_voltages, operating_frequency, PowerClock};

const ADIABATIC_FACTOR: f64 = PI * PI / 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Synapse switch on-resistance at the nominal supply.
    #[serde(rename = "R_syn_ohm")]
    pub r_syn_ohm: f64,
    /// Clock generator bypass switch on-resistance.
    #[serde(rename = "R_pc_ohm")]
    pub r_pc_ohm: f64,
    /// Clock node capacitance seen by the bypass switch.
    #[serde(rename = "C_pc_F")]
    pub c_pc_f: f64,
    /// Residual clock voltage when the bypass switch closes, at the nominal supply.
    #[serde(rename = "V_x_V")]
    pub v_x: f64,
    /// Clock generator loss at the nominal supply.
    #[serde(rename = "E_pcg0_fJ")]
    pub e_pcg0_fj: f64,
    #[serde(rename = "ccn_overhead_fJ")]
    pub ccn_overhead_fj: f64,
    /// Threshold voltage of the on-resistance law.
    #[serde(rename = "V_th_V", default = "default_vth")]
    pub v_th: f64,
    #[serde(rename = "vdd_nom_V", default = "default_vdd")]
    pub vdd_nom: f64,
    #[serde(rename = "t_on_nom_s")]
    pub t_on_nom_s: f64,
}

fn default_vth() -> f64 {
    0.5
}

fn default_vdd() -> f64 {
    1.8
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.r_syn_ohm, self.r_pc_ohm, self.c_pc_f, self.vdd_nom, self.t_on_nom_s];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(
                "resistances, clock capacitance, supply and bypass window must be positive",
            ));
        }
        if !(self.v_x >= 0.0 && self.v_x <= self.vdd_nom) {
            return Err(Error::invalid(format!(
                "residual voltage {} V outside [0, {}]",
                self.v_x, self.vdd_nom
            )));
        }
        if !(self.ccn_overhead_fj.is_finite() && self.ccn_overhead_fj >= 0.0) {
            return Err(Error::invalid("CMOS overhead must be non-negative"));
        }
        if !(self.e_pcg0_fj.is_finite() && self.e_pcg0_fj >= 0.0) {
            return Err(Error::invalid("clock generator loss must be non-negative"));
        }
        if !(self.v_th.is_finite() && self.v_th >= 0.0 && self.v_th < self.vdd_nom) {
            return Err(Error::invalid("threshold voltage must lie below the nominal supply"));
        }
        Ok(())
    }

    /// Synapse on-resistance at supply `vdd`, inversely proportional to the overdrive.
    pub fn r_syn_at(&self, vdd: f64) -> Result<f64> {
        if vdd.is_nan() || vdd <= self.v_th {
            return Err(Error::invalid(format!(
                "supply {vdd} V does not exceed the threshold {} V",
                self.v_th
            )));
        }
        Ok(self.r_syn_ohm * (self.vdd_nom - self.v_th) / (vdd - self.v_th))
    }

    /// Clock generator loss at supply `vdd`; the residual voltage tracks the supply.
    pub fn pcg_loss_at(&self, vdd: f64) -> f64 {
        let scaled = EnergyParams {
            v_x: self.v_x * vdd / self.vdd_nom,
            ..self.clone()
        };
        energy_pcg(&scaled, self.c_pc_f, self.t_on_nom_s)
    }
}

/// Bypass-switch loss: `C V_x^2 / 2 * (1 - exp(-2 t_on / (R C)))`, fJ.
pub fn energy_pcg(params: &EnergyParams, c_pc_f: f64, t_on_s: f64) -> f64 {
    let settle = 1.0 - (-2.0 * t_on_s / (params.r_pc_ohm * c_pc_f)).exp();
    0.5 * c_pc_f * params.v_x * params.v_x * settle * 1e15
}

/// Loss of charging `c_load_ff` through `r_syn_ohm` along a sinusoidal ramp of length `t_r_s`, fJ.
pub fn energy_adiabatic(c_load_ff: f64, vdd: f64, r_syn_ohm: f64, t_r_s: f64) -> f64 {
    let rc = r_syn_ohm * c_load_ff * 1e-15;
    c_load_ff * vdd * vdd * ADIABATIC_FACTOR * rc / t_r_s
}

/// Conventional CMOS synapse energy: full swing of the load plus a fixed overhead.
pub fn energy_ccn(c_load_ff: f64, vdd: f64, params: &EnergyParams) -> f64 {
    let s = vdd / params.vdd_nom;
    c_load_ff * vdd * vdd + params.ccn_overhead_fj * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    #[serde(rename = "CL_fF")]
    pub load_ff: f64,
    #[serde(rename = "f_op_Hz")]
    pub f_op_hz: f64,
    #[serde(rename = "E_PCG_fJ")]
    pub e_pcg_fj: f64,
    #[serde(rename = "E_TL_fJ")]
    pub e_tl_fj: f64,
    #[serde(rename = "E_AL_fJ")]
    pub e_al_fj: f64,
    #[serde(rename = "E_total_fJ")]
    pub e_total_fj: f64,
    #[serde(rename = "E_CCN_fJ")]
    pub e_ccn_fj: f64,
    #[serde(rename = "savings_pct")]
    pub savings_pct: f64,
}

impl EnergyBreakdown {
    /// Synapse share of the adiabatic neuron: everything but the comparator.
    pub fn acn_synapse_fj(&self) -> f64 {
        self.e_pcg_fj + self.e_al_fj
    }
}

pub fn savings_pct(acn_fj: f64, ccn_fj: f64) -> f64 {
    100.0 * (ccn_fj - acn_fj) / ccn_fj
}

/// Breakdown at a given clock load. The supply is the clock amplitude.
pub fn energy_at_load(
    load_ff: f64,
    pc: &PowerClock,
    params: &EnergyParams,
    tl: &TlModel,
) -> Result<EnergyBreakdown> {
    if !(load_ff.is_finite() && load_ff >= 0.0) {
        return Err(Error::invalid(format!("load {load_ff} fF")));
    }
    let vdd = pc.v_max;
    let f_op_hz = operating_frequency(pc, load_ff);
    let t_r = 0.5 / f_op_hz;
    let e_pcg_fj = params.pcg_loss_at(vdd);
    let e_al_fj = energy_adiabatic(load_ff, vdd, params.r_syn_at(vdd)?, t_r);
    let e_tl_fj = tl_energy(tl, vdd)?;
    let e_ccn_fj = energy_ccn(load_ff, vdd, params);
    Ok(EnergyBreakdown {
        load_ff,
        f_op_hz,
        e_pcg_fj,
        e_tl_fj,
        e_al_fj,
        e_total_fj: e_pcg_fj + e_tl_fj + e_al_fj,
        e_ccn_fj,
        savings_pct: savings_pct(e_pcg_fj + e_al_fj, e_ccn_fj),
    })
}

pub fn total_energy(
    config: &AcnConfig,
    x: &InputVector,
    pc: &PowerClock,
    params: &EnergyParams,
    tl: &TlModel,
) -> Result<EnergyBreakdown> {
    energy_at_load(capacitive_load(config, x)?, pc, params, tl)
}

/// One row of measured energies used to fit the model.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub vector: InputVector,
    pub load_ff: f64,
    pub acn_fj: f64,
    pub ccn_fj: f64,
}

/// Fits the clock generator loss, synapse resistance and CMOS overhead.
///
/// The all-zero row and the largest-load row are reproduced exactly: with
/// `E = E_pcg0 + R_syn * a(C_L)` both unknowns follow from a 2x2 solve. The
/// CMOS overhead is what the all-zero CMOS row leaves after `C_L V^2`.
pub fn calibrate_energy(rows: &[CalibrationRow], pc: &PowerClock) -> Result<EnergyParams> {
    pc.validate()?;
    let zero = rows
        .iter()
        .find(|r| r.vector.bits().iter().all(|b| !b))
        .ok_or_else(|| Error::Calibration("no all-zero anchor row".into()))?;
    let max = rows
        .iter()
        .max_by(|a, b| a.load_ff.total_cmp(&b.load_ff))
        .filter(|r| r.load_ff > zero.load_ff)
        .ok_or_else(|| Error::Calibration("no loaded anchor row".into()))?;
    let vdd = pc.v_max;
    // adiabatic loss per ohm of synapse resistance
    let per_ohm = |load: f64| energy_adiabatic(load, vdd, 1.0, pc.ramp_time(load));
    let (a0, a1) = (per_ohm(zero.load_ff), per_ohm(max.load_ff));
    let r_syn_ohm = (max.acn_fj - zero.acn_fj) / (a1 - a0);
    if !(r_syn_ohm.is_finite() && r_syn_ohm > 0.0) {
        return Err(Error::Calibration(format!(
            "synapse resistance fit gives {r_syn_ohm} ohm; the loaded anchor must cost more than the idle one"
        )));
    }
    let e_pcg0_fj = zero.acn_fj - r_syn_ohm * a0;
    if e_pcg0_fj <= 0.0 {
        return Err(Error::Calibration(format!(
            "clock generator loss fit gives {e_pcg0_fj} fJ"
        )));
    }
    let ccn_overhead_fj = zero.ccn_fj - zero.load_ff * vdd * vdd;
    if ccn_overhead_fj < 0.0 {
        return Err(Error::Calibration(format!(
            "CMOS overhead fit gives {ccn_overhead_fj} fJ"
        )));
    }
    let c_pc_f = pc.c_e_f;
    let settle = 1.0 - (-2.0 * pc.t_on_s / (pc.r_pc_ohm * c_pc_f)).exp();
    let v_x = (2.0 * e_pcg0_fj * 1e-15 / (c_pc_f * settle)).sqrt();
    let params = EnergyParams {
        r_syn_ohm,
        r_pc_ohm: pc.r_pc_ohm,
        c_pc_f,
        v_x,
        e_pcg0_fj,
        ccn_overhead_fj,
        v_th: default_vth(),
        vdd_nom: vdd,
        t_on_nom_s: pc.t_on_s,
    };
    params.validate().map_err(|e| Error::Calibration(e.to_string()))?;
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Nominal clock frequency in Hz; the tank is retuned with `C_E` held.
    Frequency,
    /// Supply voltage in V.
    Voltage,
}

impl SweepAxis {
    pub fn range(self) -> (f64, f64) {
        match self {
            SweepAxis::Frequency => (1.0e5, 1.0e8),
            SweepAxis::Voltage => (1.0, 1.8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub vector: InputVector,
    pub output: bool,
    pub energy: EnergyBreakdown,
}

/// Evaluates every vector at every axis point. Rows are ordered by point,
/// then by vector.
pub fn sweep(
    config: &AcnConfig,
    vectors: &[InputVector],
    axis: SweepAxis,
    points: &[f64],
    pc: &PowerClock,
    params: &EnergyParams,
    tl: &TlModel,
) -> Result<Vec<SweepRow>> {
    let (lo, hi) = axis.range();
    for &p in points {
        if !(p >= lo - 1e-9 * hi && p <= hi * (1.0 + 1e-9)) {
            return Err(Error::OutOfRange {
                what: match axis {
                    SweepAxis::Frequency => "sweep frequency (Hz)",
                    SweepAxis::Voltage => "sweep supply (V)",
                },
                value: p,
                min: lo,
                max: hi,
            });
        }
    }
    for v in vectors {
        v.check_len(config.n_inputs)?;
    }
    let jobs: Vec<(f64, &InputVector)> = points
        .iter()
        .flat_map(|&p| vectors.iter().map(move |v| (p, v)))
        .collect();
    jobs.into_par_iter()
        .map(|(p, x)| {
            let (pc_point, tl_point) = match axis {
                SweepAxis::Frequency => (pc.retuned(p), tl.clone()),
                SweepAxis::Voltage => (
                    PowerClock {
                        v_max: p,
                        ..pc.clone()
                    },
                    TlModel {
                        vdd: p,
                        ..tl.clone()
                    },
                ),
            };
            let energy = total_energy(config, x, &pc_point, params, &tl_point)?;
            let (vp, vm) = membrane_voltages(config, x, pc_point.v_max)?;
            let output = tl_decide(&tl_point, vp * 1e3, vm * 1e3)?.output;
            Ok(SweepRow {
                axis_value: p,
                vector: x.clone(),
                output,
                energy,
            })
        })
        .collect()
}
