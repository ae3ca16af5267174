//! Electrical model of the two capacitive trees and the power clock.
//!
//! Each tree is a capacitive divider between the power clock and ground. For
//! a given input vector the capacitors tied to the clock form `C_on` (active
//! synapses plus the bias capacitor) and the grounded ones form `C_off`
//! (idle synapses, ballast and membrane parasitic). The membrane node sits at
//! `V_B + V_pc * C_on / C_A`, and the clock sees the series combination
//! `C_on * C_off / C_A` of every tree as its load.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::AcnConfig;
use crate::model::{InputVector, Tree};

/// Clock-side and ground-side capacitance of one tree, in fF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeSplit {
    pub on_ff: f64,
    pub off_ff: f64,
}

impl TreeSplit {
    pub fn total_ff(&self) -> f64 {
        self.on_ff + self.off_ff
    }

    /// Series combination seen by the power clock.
    pub fn load_ff(&self) -> f64 {
        let total = self.total_ff();
        if total == 0.0 {
            0.0
        } else {
            self.on_ff * self.off_ff / total
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeState {
    pub positive: TreeSplit,
    pub negative: TreeSplit,
}

impl TreeState {
    pub fn get(&self, tree: Tree) -> &TreeSplit {
        match tree {
            Tree::Positive => &self.positive,
            Tree::Negative => &self.negative,
        }
    }
}

pub fn tree_capacitances(config: &AcnConfig, x: &InputVector) -> Result<TreeState> {
    x.check_len(config.n_inputs)?;
    let split = |tree: Tree| {
        let aux = config.aux(tree);
        let active: f64 = config
            .synapses_in(tree)
            .filter(|s| x.get(s.index))
            .map(|s| s.cap_ff)
            .sum();
        let on_ff = active + aux.bias_ff;
        TreeSplit {
            on_ff,
            off_ff: config.total_ff(tree) - on_ff,
        }
    };
    Ok(TreeState {
        positive: split(Tree::Positive),
        negative: split(Tree::Negative),
    })
}

/// `(v_m+, v_m-)` in volts with the clock at `v_pc`.
pub fn membrane_voltages(config: &AcnConfig, x: &InputVector, v_pc: f64) -> Result<(f64, f64)> {
    if !(v_pc.is_finite() && v_pc >= 0.0) {
        return Err(Error::invalid(format!("power clock voltage {v_pc} V")));
    }
    let state = tree_capacitances(config, x)?;
    let v = |tree: Tree| {
        let s = state.get(tree);
        config.aux(tree).bias_voltage + v_pc * s.on_ff / s.total_ff()
    };
    Ok((v(Tree::Positive), v(Tree::Negative)))
}

/// Peak membrane voltage envelope of one tree: all inputs low to all inputs high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Swing {
    pub low_v: f64,
    pub high_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingRange {
    pub positive: Swing,
    pub negative: Swing,
}

pub fn swing_range(config: &AcnConfig, v_max: f64) -> SwingRange {
    let swing = |tree: Tree| {
        let aux = config.aux(tree);
        let total = config.total_ff(tree);
        Swing {
            low_v: aux.bias_voltage + v_max * aux.bias_ff / total,
            high_v: aux.bias_voltage
                + v_max * (config.synapse_total_ff(tree) + aux.bias_ff) / total,
        }
    };
    SwingRange {
        positive: swing(Tree::Positive),
        negative: swing(Tree::Negative),
    }
}

/// Total power-clock load of both trees, in fF.
pub fn capacitive_load(config: &AcnConfig, x: &InputVector) -> Result<f64> {
    let state = tree_capacitances(config, x)?;
    Ok(quadratic_load(state.positive.on_ff, state.positive.total_ff())
        + quadratic_load(state.negative.on_ff, state.negative.total_ff()))
}

/// `C_on - C_on^2 / C_A`; peaks at `C_on = C_A / 2`.
pub fn quadratic_load(on_ff: f64, total_ff: f64) -> f64 {
    on_ff - on_ff * on_ff / total_ff
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Every one of the `2^N` vectors was evaluated.
    Exhaustive,
    /// Too many inputs to enumerate; the trees were searched separately and a
    /// tree larger than the enumeration limit was filled greedily.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxLoad {
    pub vector: InputVector,
    pub load_ff: f64,
    pub mode: SearchMode,
}

/// Largest `N` enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Finds the input vector that loads the power clock the most.
pub fn max_load_search(config: &AcnConfig) -> MaxLoad {
    if config.n_inputs <= EXHAUSTIVE_LIMIT {
        exhaustive_max_load(config)
    } else {
        per_tree_max_load(config)
    }
}

fn exhaustive_max_load(config: &AcnConfig) -> MaxLoad {
    let n = config.n_inputs;
    // Gray-code walk: one synapse flips per step.
    let mut delta = vec![(0usize, 0.0f64); n];
    for s in &config.synapses {
        let slot = match s.tree {
            Tree::Positive => 0,
            Tree::Negative => 1,
        };
        delta[s.index] = (slot, s.cap_ff);
    }
    let totals = [config.total_ff(Tree::Positive), config.total_ff(Tree::Negative)];
    let mut on = [config.positive.bias_ff, config.negative.bias_ff];
    let load = |on: &[f64; 2]| quadratic_load(on[0], totals[0]) + quadratic_load(on[1], totals[1]);

    let mut gray: u64 = 0;
    let mut best_mask = 0u64;
    let mut best = load(&on);
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let (slot, cap) = delta[bit];
        if gray >> bit & 1 == 1 {
            on[slot] += cap;
        } else {
            on[slot] -= cap;
        }
        let l = load(&on);
        if l > best {
            best = l;
            best_mask = gray;
        }
    }
    let vector = InputVector::from_mask(best_mask, n);
    // re-evaluate from scratch to shed accumulated rounding
    let load_ff = capacitive_load(config, &vector).unwrap_or(best);
    MaxLoad {
        vector,
        load_ff,
        mode: SearchMode::Exhaustive,
    }
}

fn per_tree_max_load(config: &AcnConfig) -> MaxLoad {
    let mut bits = vec![false; config.n_inputs];
    for tree in Tree::BOTH {
        let members: Vec<_> = config.synapses_in(tree).collect();
        let total = config.total_ff(tree);
        let bias = config.aux(tree).bias_ff;
        let chosen: Vec<usize> = if members.len() <= EXHAUSTIVE_LIMIT {
            let mut best = (quadratic_load(bias, total), 0u64);
            for mask in 1u64..(1u64 << members.len()) {
                let on = bias
                    + members
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| mask >> j & 1 == 1)
                        .map(|(_, s)| s.cap_ff)
                        .sum::<f64>();
                let l = quadratic_load(on, total);
                if l > best.0 {
                    best = (l, mask);
                }
            }
            (0..members.len())
                .filter(|j| best.1 >> j & 1 == 1)
                .map(|j| members[j].index)
                .collect()
        } else {
            // largest first, keep adding while it moves C_on toward C_A / 2
            let mut sorted = members.clone();
            sorted.sort_by(|a, b| b.cap_ff.total_cmp(&a.cap_ff));
            let mut on = bias;
            let mut picked = Vec::new();
            for s in sorted {
                if quadratic_load(on + s.cap_ff, total) > quadratic_load(on, total) {
                    on += s.cap_ff;
                    picked.push(s.index);
                }
            }
            picked
        };
        for i in chosen {
            bits[i] = true;
        }
    }
    let vector = InputVector::new(bits);
    let load_ff = capacitive_load(config, &vector).expect("vector built from config");
    MaxLoad {
        vector,
        load_ff,
        mode: SearchMode::Heuristic,
    }
}

/// Resonant power-clock generator. SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerClock {
    /// Peak clock voltage, equal to the supply.
    #[serde(rename = "vmax_V")]
    pub v_max: f64,
    #[serde(rename = "nominal_freq_Hz")]
    pub nominal_freq_hz: f64,
    #[serde(rename = "L_pc_H")]
    pub l_pc_h: f64,
    #[serde(rename = "C_E_F")]
    pub c_e_f: f64,
    /// Bypass-switch on time.
    #[serde(rename = "t_on_s")]
    pub t_on_s: f64,
    /// On resistance of the bypass switch.
    #[serde(rename = "R_pc_ohm")]
    pub r_pc_ohm: f64,
    /// Multiplies the LC resonance; 1.0 is the bare model.
    #[serde(default = "one")]
    pub freq_calibration: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PowerClock {
    /// 1 MHz nominal: 1 mH, 25 pF, 60 ns bypass window at 1.8 V.
    fn default() -> Self {
        PowerClock {
            v_max: 1.8,
            nominal_freq_hz: 1.0e6,
            l_pc_h: 1.0e-3,
            c_e_f: 25.0e-12,
            t_on_s: 60.0e-9,
            r_pc_ohm: 1.0e3,
            freq_calibration: 1.0,
        }
    }
}

impl PowerClock {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.v_max,
            self.nominal_freq_hz,
            self.l_pc_h,
            self.c_e_f,
            self.t_on_s,
            self.r_pc_ohm,
            self.freq_calibration,
        ];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("power clock parameters must all be positive"));
        }
        let lc = self.freq_calibration / (2.0 * PI * (self.l_pc_h * self.c_e_f).sqrt());
        if (lc / self.nominal_freq_hz - 1.0).abs() > 0.05 {
            return Err(Error::invalid(format!(
                "nominal frequency {} Hz is more than 5% from the LC resonance {lc:.0} Hz",
                self.nominal_freq_hz
            )));
        }
        Ok(())
    }

    /// Same generator retuned for another nominal frequency with `C_E` held:
    /// the inductor scales as `1/f^2` and the bypass window as `1/f`.
    pub fn retuned(&self, nominal_freq_hz: f64) -> PowerClock {
        let ratio = self.nominal_freq_hz / nominal_freq_hz;
        PowerClock {
            nominal_freq_hz,
            l_pc_h: self.l_pc_h * ratio * ratio,
            t_on_s: self.t_on_s * ratio,
            ..self.clone()
        }
    }

    /// Ramp time of the evaluation up-swing at load `c_load_ff`: half a period.
    pub fn ramp_time(&self, c_load_ff: f64) -> f64 {
        0.5 / operating_frequency(self, c_load_ff)
    }
}

/// Resonant frequency with the synapse load in parallel with the tank capacitor.
pub fn operating_frequency(pc: &PowerClock, c_load_ff: f64) -> f64 {
    let c = pc.c_e_f + c_load_ff.max(0.0) * 1e-15;
    pc.freq_calibration / (2.0 * PI * (pc.l_pc_h * c).sqrt())
}
