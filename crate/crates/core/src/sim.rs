//! Per-vector evaluation of a configuration.

use serde::Serialize;

use crate::energy::{total_energy, EnergyBreakdown, EnergyParams};
use crate::error::Result;
use crate::mapper::AcnConfig;
use crate::model::{eval_software_neuron, InputVector};
use crate::tl::{tl_decide, TlDecision, TlModel, TlVariant};
use crate::tree::{capacitive_load, membrane_voltages, operating_frequency, tree_capacitances, PowerClock};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub vector: InputVector,
    #[serde(rename = "Con_p_fF")]
    pub on_pos_ff: f64,
    #[serde(rename = "Con_m_fF")]
    pub on_neg_ff: f64,
    #[serde(rename = "Coff_p_fF")]
    pub off_pos_ff: f64,
    #[serde(rename = "Coff_m_fF")]
    pub off_neg_ff: f64,
    #[serde(rename = "CL_fF")]
    pub load_ff: f64,
    #[serde(rename = "f_op_Hz")]
    pub f_op_hz: f64,
    #[serde(rename = "vm_p_mV")]
    pub vm_pos_mv: f64,
    #[serde(rename = "vm_m_mV")]
    pub vm_neg_mv: f64,
    #[serde(rename = "vmd_mV")]
    pub vmd_mv: f64,
    /// Absent when the configuration carries no neuron.
    pub software: Option<bool>,
    pub ideal: bool,
    pub proposed: bool,
    pub conventional: bool,
    /// Decision of the requested comparator model.
    pub decision: TlDecision,
    pub energy: Option<EnergyBreakdown>,
}

/// Evaluates `x` at the clock peak. The three reference comparators use their
/// default thresholds; `tl` is reported as `decision`.
pub fn simulate(
    config: &AcnConfig,
    x: &InputVector,
    pc: &PowerClock,
    tl: &TlModel,
    params: Option<&EnergyParams>,
) -> Result<SimResult> {
    let state = tree_capacitances(config, x)?;
    let (vp, vm) = membrane_voltages(config, x, pc.v_max)?;
    let (vp, vm) = (vp * 1e3, vm * 1e3);
    let load_ff = capacitive_load(config, x)?;
    let reference = |v: TlVariant| -> Result<bool> {
        let m = TlModel {
            vdd: tl.vdd,
            ..TlModel::new(v)
        };
        Ok(tl_decide(&m, vp, vm)?.output)
    };
    let software = match &config.neuron {
        Some(spec) => Some(eval_software_neuron(spec, x)?),
        None => None,
    };
    let energy = match params {
        Some(p) => Some(total_energy(config, x, pc, p, tl)?),
        None => None,
    };
    Ok(SimResult {
        vector: x.clone(),
        on_pos_ff: state.positive.on_ff,
        on_neg_ff: state.negative.on_ff,
        off_pos_ff: state.positive.off_ff,
        off_neg_ff: state.negative.off_ff,
        load_ff,
        f_op_hz: operating_frequency(pc, load_ff),
        vm_pos_mv: vp,
        vm_neg_mv: vm,
        vmd_mv: vp - vm,
        software,
        ideal: reference(TlVariant::Ideal)?,
        proposed: reference(TlVariant::Proposed)?,
        conventional: reference(TlVariant::Conventional)?,
        decision: tl_decide(tl, vp, vm)?,
        energy,
    })
}
