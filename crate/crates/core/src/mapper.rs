//! Weight-to-capacitor compilation.
//!
//! Each nonzero weight becomes one synapse capacitor `C_i = |w_i| * k` with
//! `k = C_T / w_T`. The bias lands on the bias capacitor of the tree that
//! must be handicapped: for `tau > 0` the negative tree carries the extra
//! `k * tau`, the other side is pinned at `C_min`. Ballast capacitors then
//! equalise the two tree totals and put the all-ones swing of the larger tree
//! exactly at `V_cut`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NeuronSpec, TechProfile, Tree};

/// Physical role of a capacitor; synapse and bias capacitors must meet `C_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapRole {
    Synapse,
    Bias,
    Ballast,
}

impl CapRole {
    fn needs_min(self) -> bool {
        matches!(self, CapRole::Synapse | CapRole::Bias)
    }

    fn name(self) -> &'static str {
        match self {
            CapRole::Synapse => "synapse",
            CapRole::Bias => "bias",
            CapRole::Ballast => "ballast",
        }
    }
}

/// Rounds to the nearest multiple of the capacitor grid, ties away from zero.
pub fn quantize_capacitance(value_ff: f64, tech: &TechProfile, role: CapRole) -> Result<f64> {
    if !value_ff.is_finite() || value_ff < 0.0 {
        return Err(Error::invalid(format!(
            "cannot quantize capacitance {value_ff} fF"
        )));
    }
    let q = snap(value_ff, tech.cap_grid_ff);
    if role.needs_min() && value_ff > 0.0 && q < tech.c_min_ff {
        return Err(Error::BelowMinimum {
            role: role.name(),
            value_ff: q,
            c_min_ff: tech.c_min_ff,
        });
    }
    Ok(q)
}

fn snap(value: f64, grid: f64) -> f64 {
    // the small epsilon keeps e.g. 0.5 * grid from falling to the lower step
    // when value / grid lands a hair below the half point
    (value / grid + 0.5 + 1e-9).floor() * grid
}

/// One synapse capacitor, keyed by its input index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub index: usize,
    pub tree: Tree,
    #[serde(rename = "cap_fF")]
    pub cap_ff: f64,
}

/// Bias, ballast and reset voltage of one tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeAux {
    #[serde(rename = "bias_fF")]
    pub bias_ff: f64,
    #[serde(rename = "ballast_fF")]
    pub ballast_ff: f64,
    #[serde(rename = "bias_voltage_V", default)]
    pub bias_voltage: f64,
}

/// A physical dual-tree neuron.
///
/// `n_inputs` may exceed the number of synapses: inputs whose weight is zero
/// have no capacitor and do not affect the trees.
#[derive(Debug, Clone, PartialEq)]
pub struct AcnConfig {
    pub n_inputs: usize,
    /// Sorted by input index, at most one per index.
    pub synapses: Vec<Synapse>,
    pub positive: TreeAux,
    pub negative: TreeAux,
    /// Wiring capacitance on each membrane node, in parallel with the ballast.
    pub parasitic_ff: f64,
    /// fF per unit weight.
    pub unit_cap_ff: f64,
    /// The neuron this configuration was compiled from, when known.
    pub neuron: Option<NeuronSpec>,
}

impl AcnConfig {
    pub fn new(
        n_inputs: usize,
        mut synapses: Vec<Synapse>,
        positive: TreeAux,
        negative: TreeAux,
        parasitic_ff: f64,
        unit_cap_ff: f64,
    ) -> Result<Self> {
        synapses.sort_by_key(|s| s.index);
        let cfg = AcnConfig {
            n_inputs,
            synapses,
            positive,
            negative,
            parasitic_ff,
            unit_cap_ff,
            neuron: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_neuron(mut self, neuron: NeuronSpec) -> Result<Self> {
        if neuron.len() != self.n_inputs {
            return Err(Error::Dimension {
                expected: self.n_inputs,
                found: neuron.len(),
            });
        }
        self.neuron = Some(neuron);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 {
            return Err(Error::invalid("configuration has no inputs"));
        }
        for pair in self.synapses.windows(2) {
            if pair[0].index == pair[1].index {
                return Err(Error::invalid(format!(
                    "input {} has two synapse capacitors",
                    pair[0].index
                )));
            }
        }
        for s in &self.synapses {
            if s.index >= self.n_inputs {
                return Err(Error::invalid(format!(
                    "synapse index {} out of range for {} inputs",
                    s.index, self.n_inputs
                )));
            }
            if !(s.cap_ff.is_finite() && s.cap_ff > 0.0) {
                return Err(Error::invalid(format!(
                    "synapse {} has non-positive capacitance",
                    s.index
                )));
            }
        }
        for tree in Tree::BOTH {
            let aux = self.aux(tree);
            let ok = aux.bias_ff.is_finite()
                && aux.ballast_ff.is_finite()
                && aux.bias_voltage.is_finite()
                && aux.bias_ff >= 0.0
                && aux.ballast_ff >= 0.0;
            if !ok {
                return Err(Error::invalid(format!(
                    "{tree} tree bias/ballast must be finite and non-negative"
                )));
            }
            if self.total_ff(tree) <= 0.0 {
                return Err(Error::invalid(format!("{tree} tree has no capacitance")));
            }
        }
        if !(self.parasitic_ff.is_finite() && self.parasitic_ff >= 0.0) {
            return Err(Error::invalid("parasitic capacitance must be non-negative"));
        }
        Ok(())
    }

    pub fn aux(&self, tree: Tree) -> &TreeAux {
        match tree {
            Tree::Positive => &self.positive,
            Tree::Negative => &self.negative,
        }
    }

    pub fn aux_mut(&mut self, tree: Tree) -> &mut TreeAux {
        match tree {
            Tree::Positive => &mut self.positive,
            Tree::Negative => &mut self.negative,
        }
    }

    pub fn synapses_in(&self, tree: Tree) -> impl Iterator<Item = &Synapse> {
        self.synapses.iter().filter(move |s| s.tree == tree)
    }

    pub fn synapse(&self, index: usize) -> Option<&Synapse> {
        self.synapses
            .binary_search_by_key(&index, |s| s.index)
            .ok()
            .map(|i| &self.synapses[i])
    }

    /// `C_T` of one tree.
    pub fn synapse_total_ff(&self, tree: Tree) -> f64 {
        self.synapses_in(tree).map(|s| s.cap_ff).sum()
    }

    /// `C_A = C_T + C_b + C_d`, plus the membrane parasitic.
    pub fn total_ff(&self, tree: Tree) -> f64 {
        let aux = self.aux(tree);
        self.synapse_total_ff(tree) + aux.bias_ff + aux.ballast_ff + self.parasitic_ff
    }

    /// Every physical capacitor of the design, synapses first, then bias and ballast.
    pub fn capacitor_count(&self) -> usize {
        self.synapses.len() + 4
    }

    pub fn derived(&self) -> Derived {
        Derived {
            ct_pos_ff: self.synapse_total_ff(Tree::Positive),
            ct_neg_ff: self.synapse_total_ff(Tree::Negative),
            ca_pos_ff: self.total_ff(Tree::Positive),
            ca_neg_ff: self.total_ff(Tree::Negative),
            unit_cap_ff: self.unit_cap_ff,
        }
    }
}

/// Read-only totals emitted next to a configuration for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    #[serde(rename = "CT_pos_fF")]
    pub ct_pos_ff: f64,
    #[serde(rename = "CT_neg_fF")]
    pub ct_neg_ff: f64,
    #[serde(rename = "CA_pos_fF")]
    pub ca_pos_ff: f64,
    #[serde(rename = "CA_neg_fF")]
    pub ca_neg_ff: f64,
    #[serde(rename = "k_fF_per_unit")]
    pub unit_cap_ff: f64,
}

#[derive(Serialize, Deserialize)]
struct ConfigFile {
    n_inputs: usize,
    synapses: Vec<Synapse>,
    positive: TreeAux,
    negative: TreeAux,
    #[serde(rename = "parasitic_fF", default)]
    parasitic_ff: f64,
    #[serde(rename = "unit_cap_fF")]
    unit_cap_ff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neuron: Option<NeuronSpec>,
    // ignored on input
    #[serde(default, skip_deserializing, skip_serializing_if = "Option::is_none")]
    derived: Option<Derived>,
}

impl Serialize for AcnConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConfigFile {
            n_inputs: self.n_inputs,
            synapses: self.synapses.clone(),
            positive: self.positive,
            negative: self.negative,
            parasitic_ff: self.parasitic_ff,
            unit_cap_ff: self.unit_cap_ff,
            neuron: self.neuron.clone(),
            derived: Some(self.derived()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AcnConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = ConfigFile::deserialize(d)?;
        let cfg = AcnConfig::new(
            f.n_inputs,
            f.synapses,
            f.positive,
            f.negative,
            f.parasitic_ff,
            f.unit_cap_ff,
        )
        .map_err(serde::de::Error::custom)?;
        match f.neuron {
            Some(n) => cfg.with_neuron(n).map_err(serde::de::Error::custom),
            None => Ok(cfg),
        }
    }
}

/// A violated mapping constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A synapse or bias capacitor quantizes below `C_min`.
    BelowMinimum {
        role: CapRole,
        index: Option<usize>,
        tree: Tree,
        value_ff: f64,
        c_min_ff: f64,
    },
    /// The all-ones membrane swing of a tree exceeds `V_cut`.
    SwingAboveCut {
        tree: Tree,
        swing_v: f64,
        v_cut: f64,
    },
    /// The ballast needed to balance the trees is negative.
    NegativeBallast { tree: Tree, value_ff: f64 },
}

impl Violation {
    /// Positive when the constraint is violated by that much (fF or V).
    pub fn margin(&self) -> f64 {
        match self {
            Violation::BelowMinimum {
                value_ff, c_min_ff, ..
            } => c_min_ff - value_ff,
            Violation::SwingAboveCut { swing_v, v_cut, .. } => swing_v - v_cut,
            Violation::NegativeBallast { value_ff, .. } => -value_ff,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BelowMinimum {
                role,
                index: Some(i),
                value_ff,
                c_min_ff,
                ..
            } => write!(
                f,
                "{} capacitor at index {i}: {value_ff:.2} fF < C_min {c_min_ff} fF (short by {:.2} fF)",
                role.name(),
                self.margin()
            ),
            Violation::BelowMinimum {
                role,
                index: None,
                tree,
                value_ff,
                c_min_ff,
            } => write!(
                f,
                "{tree} {} capacitor: {value_ff:.2} fF < C_min {c_min_ff} fF",
                role.name()
            ),
            Violation::SwingAboveCut {
                tree,
                swing_v,
                v_cut,
            } => write!(
                f,
                "{tree} tree swing {swing_v:.4} V exceeds V_cut {v_cut} V by {:.4} V",
                self.margin()
            ),
            Violation::NegativeBallast { tree, value_ff } => {
                write!(f, "{tree} ballast would be {value_ff:.2} fF (< 0)")
            }
        }
    }
}

/// Every constraint a mapping violates; empty means feasible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("feasible");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

struct Plan {
    config: AcnConfig,
    report: FeasibilityReport,
}

fn plan(spec: &NeuronSpec, tech: &TechProfile, ct_total_ff: f64) -> Result<Plan> {
    tech.validate()?;
    if !(ct_total_ff.is_finite() && ct_total_ff > 0.0) {
        return Err(Error::invalid(format!(
            "total synapse capacitance must be positive, got {ct_total_ff}"
        )));
    }
    let w_total = spec.weight_sum();
    let k = ct_total_ff / w_total;
    let grid = tech.cap_grid_ff;
    let mut violations = Vec::new();

    let mut synapses = Vec::new();
    for (i, w) in spec.weights().iter().enumerate() {
        let Some(tree) = Tree::of_weight(*w) else {
            continue;
        };
        let cap = snap(w.abs() * k, grid);
        if cap < tech.c_min_ff {
            violations.push(Violation::BelowMinimum {
                role: CapRole::Synapse,
                index: Some(i),
                tree,
                value_ff: w.abs() * k,
                c_min_ff: tech.c_min_ff,
            });
        }
        synapses.push(Synapse {
            index: i,
            tree,
            cap_ff: cap,
        });
    }

    // The handicapped tree carries k*|tau| on top of C_min.
    let tau = spec.bias();
    let loaded = if tau > 0.0 {
        Some(Tree::Negative)
    } else if tau < 0.0 {
        Some(Tree::Positive)
    } else {
        None
    };
    let base_bias = snap(tech.c_min_ff, grid);
    let bias_of = |tree: Tree| {
        if Some(tree) == loaded {
            snap(tech.c_min_ff + k * tau.abs(), grid)
        } else {
            base_bias
        }
    };
    let bias = [bias_of(Tree::Positive), bias_of(Tree::Negative)];
    for (tree, b) in Tree::BOTH.into_iter().zip(bias) {
        if b < tech.c_min_ff {
            violations.push(Violation::BelowMinimum {
                role: CapRole::Bias,
                index: None,
                tree,
                value_ff: b,
                c_min_ff: tech.c_min_ff,
            });
        }
    }

    let active = |tree: Tree, b: f64| -> f64 {
        synapses
            .iter()
            .filter(|s| s.tree == tree)
            .map(|s| s.cap_ff)
            .sum::<f64>()
            + b
    };
    let swing_caps = [active(Tree::Positive, bias[0]), active(Tree::Negative, bias[1])];
    let target = tech.v_max * swing_caps[0].max(swing_caps[1]) / tech.v_cut;

    let mut ballast = [0.0; 2];
    for (slot, tree) in Tree::BOTH.into_iter().enumerate() {
        let raw = target - swing_caps[slot] - tech.parasitic_ff;
        let q = if raw >= 0.0 { snap(raw, grid) } else { -snap(-raw, grid) };
        if q < 0.0 {
            violations.push(Violation::NegativeBallast { tree, value_ff: raw });
        }
        ballast[slot] = q.max(0.0);
    }

    // Check the swing limit on what was actually built.
    for (slot, tree) in Tree::BOTH.into_iter().enumerate() {
        let total = swing_caps[slot] + ballast[slot] + tech.parasitic_ff;
        let swing = tech.v_max * swing_caps[slot] / total;
        let eps = tech.v_max * grid / total;
        if swing > tech.v_cut + eps {
            violations.push(Violation::SwingAboveCut {
                tree,
                swing_v: swing,
                v_cut: tech.v_cut,
            });
        }
    }

    let aux = |slot: usize| TreeAux {
        bias_ff: bias[slot],
        ballast_ff: ballast[slot],
        bias_voltage: 0.0,
    };
    let config = AcnConfig {
        n_inputs: spec.len(),
        synapses,
        positive: aux(0),
        negative: aux(1),
        parasitic_ff: tech.parasitic_ff,
        unit_cap_ff: k,
        neuron: Some(spec.clone()),
    };
    Ok(Plan {
        config,
        report: FeasibilityReport { violations },
    })
}

/// Compiles a neuron into a balanced dual-tree capacitor configuration.
pub fn map_weights(spec: &NeuronSpec, tech: &TechProfile, ct_total_ff: f64) -> Result<AcnConfig> {
    let Plan { config, report } = plan(spec, tech, ct_total_ff)?;
    if !report.is_feasible() {
        return Err(Error::Infeasible(report));
    }
    Ok(config)
}

/// Lists every constraint the mapping of `spec` at `ct_total_ff` would violate.
pub fn check_feasibility(
    spec: &NeuronSpec,
    tech: &TechProfile,
    ct_total_ff: f64,
) -> Result<FeasibilityReport> {
    Ok(plan(spec, tech, ct_total_ff)?.report)
}

/// Smallest grid-aligned `C_T` for which every nonzero weight clears `C_min`.
pub fn min_feasible_ct(spec: &NeuronSpec, tech: &TechProfile) -> f64 {
    let w_min = spec
        .weights()
        .iter()
        .filter(|w| **w != 0.0)
        .map(|w| w.abs())
        .fold(f64::INFINITY, f64::min);
    let ct = tech.c_min_ff * spec.weight_sum() / w_min;
    (ct / tech.cap_grid_ff).ceil() * tech.cap_grid_ff
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE3_WEIGHTS: [f64; 12] = [
        0.937, -1.0, -1.0, -1.0, -1.0, 0.169, 0.600, -1.0, -0.529, 0.992, 0.961, -1.0,
    ];
    const TABLE3_CAPS: [f64; 12] = [
        195.0, 208.0, 208.0, 208.0, 208.0, 35.0, 125.0, 208.0, 110.0, 206.0, 200.0, 208.0,
    ];

    fn table3() -> AcnConfig {
        let spec = NeuronSpec::new(TABLE3_WEIGHTS.to_vec(), 0.1).unwrap();
        map_weights(&spec, &TechProfile::reference(), 2115.0).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let tech = TechProfile::reference();
        assert_eq!(quantize_capacitance(207.6, &tech, CapRole::Synapse).unwrap(), 208.0);
        assert_eq!(quantize_capacitance(34.6, &tech, CapRole::Synapse).unwrap(), 35.0);
        assert!(matches!(
            quantize_capacitance(12.0, &tech, CapRole::Synapse),
            Err(Error::BelowMinimum { .. })
        ));
        assert_eq!(quantize_capacitance(12.0, &tech, CapRole::Ballast).unwrap(), 12.0);
        assert_eq!(quantize_capacitance(40.5, &tech, CapRole::Synapse).unwrap(), 41.0);
        assert!(quantize_capacitance(-1.0, &tech, CapRole::Ballast).is_err());
    }

    #[test]
    fn quantize_coarse_grid() {
        let tech = TechProfile {
            cap_grid_ff: 5.0,
            ..TechProfile::reference()
        };
        assert_eq!(quantize_capacitance(42.4, &tech, CapRole::Synapse).unwrap(), 40.0);
        assert_eq!(quantize_capacitance(42.5, &tech, CapRole::Synapse).unwrap(), 45.0);
    }

    #[test]
    fn reproduces_table3_synapses() {
        let cfg = table3();
        for (i, want) in TABLE3_CAPS.iter().enumerate() {
            let got = cfg.synapse(i).unwrap().cap_ff;
            assert!((got - want).abs() <= 1.0, "C_{i}: {got} vs {want}");
        }
        assert_eq!(cfg.positive.bias_ff, 35.0);
        assert_eq!(cfg.negative.bias_ff, 56.0);
        assert!((cfg.positive.ballast_ff - 1159.0).abs() <= 5.0);
        assert!((cfg.negative.ballast_ff - 543.0).abs() <= 5.0);
    }

    #[test]
    fn table3_ballast_target() {
        // C_A target = 1.8 * (1358 + 56) / 1.3
        let target: f64 = 1.8 * 1414.0 / 1.3;
        assert!((target - 1957.846).abs() < 1e-3);
        let cfg = table3();
        assert_eq!(cfg.total_ff(Tree::Negative), 1958.0);
        assert_eq!(cfg.total_ff(Tree::Positive), 1958.0);
    }

    #[test]
    fn single_positive_weight() {
        // k = 200; C_b+ = C_b- = 35; target = 1.8 * 235 / 1.3 = 325.38
        let spec = NeuronSpec::new(vec![1.0], 0.0).unwrap();
        let cfg = map_weights(&spec, &TechProfile::reference(), 200.0).unwrap();
        assert_eq!(cfg.synapse(0).unwrap().cap_ff, 200.0);
        assert_eq!(cfg.positive.bias_ff, 35.0);
        assert_eq!(cfg.negative.bias_ff, 35.0);
        assert_eq!(cfg.positive.ballast_ff, 90.0);
        assert_eq!(cfg.negative.ballast_ff, 290.0);
    }

    #[test]
    fn symmetric_pair() {
        let spec = NeuronSpec::new(vec![1.0, -1.0], 0.0).unwrap();
        let cfg = map_weights(&spec, &TechProfile::reference(), 70.0).unwrap();
        assert_eq!(cfg.synapse(0).unwrap().cap_ff, 35.0);
        assert_eq!(cfg.synapse(1).unwrap().cap_ff, 35.0);
        assert_eq!(cfg.positive, cfg.negative);
    }

    #[test]
    fn negative_bias_loads_positive_tree() {
        let spec = NeuronSpec::new(vec![1.0, -1.0], -0.25).unwrap();
        let cfg = map_weights(&spec, &TechProfile::reference(), 400.0).unwrap();
        // k = 200, k * |tau| = 50
        assert_eq!(cfg.positive.bias_ff, 85.0);
        assert_eq!(cfg.negative.bias_ff, 35.0);
    }

    #[test]
    fn parasitic_is_taken_out_of_ballast() {
        let spec = NeuronSpec::new(TABLE3_WEIGHTS.to_vec(), 0.1).unwrap();
        let with = map_weights(&spec, &TechProfile::default(), 2115.0).unwrap();
        let without = table3();
        assert_eq!(with.positive.ballast_ff, without.positive.ballast_ff - 30.0);
        assert_eq!(with.negative.ballast_ff, without.negative.ballast_ff - 30.0);
        assert_eq!(with.total_ff(Tree::Negative), without.total_ff(Tree::Negative));
    }

    #[test]
    fn zero_weight_gets_no_capacitor() {
        let spec = NeuronSpec::new(vec![0.5, 0.0, -0.5], 0.0).unwrap();
        let cfg = map_weights(&spec, &TechProfile::reference(), 200.0).unwrap();
        assert_eq!(cfg.synapses.len(), 2);
        assert!(cfg.synapse(1).is_none());
        assert_eq!(cfg.n_inputs, 3);
    }

    #[test]
    fn feasibility_table3_clean() {
        let spec = NeuronSpec::new(TABLE3_WEIGHTS.to_vec(), 0.1).unwrap();
        let report = check_feasibility(&spec, &TechProfile::reference(), 2115.0).unwrap();
        assert!(report.is_feasible(), "{report}");
    }

    #[test]
    fn feasibility_flags_tiny_weight() {
        let mut w = TABLE3_WEIGHTS.to_vec();
        w.push(0.001);
        let spec = NeuronSpec::new(w, 0.1).unwrap();
        let report = check_feasibility(&spec, &TechProfile::reference(), 2115.0).unwrap();
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::BelowMinimum {
                index, value_ff, ..
            } => {
                assert_eq!(*index, Some(12));
                // 0.001 * 2115 / 10.189
                assert!((value_ff - 0.2076).abs() < 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            map_weights(&spec, &TechProfile::reference(), 2115.0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn feasibility_flags_negative_ballast() {
        // target - 70 = 70 * 0.5 / 1.3 = 26.9 fF, less than the 30 fF parasitic
        let spec = NeuronSpec::new(vec![1.0, -1.0], 0.0).unwrap();
        let report = check_feasibility(&spec, &TechProfile::default(), 70.0).unwrap();
        let negs = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::NegativeBallast { .. }))
            .count();
        assert_eq!(negs, 2, "{report}");
    }

    #[test]
    fn unity_swing_ratio_forces_negative_ballast() {
        let tech = TechProfile {
            v_max: 1.3,
            ..TechProfile::default()
        };
        let spec = NeuronSpec::new(TABLE3_WEIGHTS.to_vec(), 0.1).unwrap();
        let report = check_feasibility(&spec, &tech, 2115.0).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NegativeBallast { tree: Tree::Negative, .. })));
    }

    #[test]
    fn min_feasible_ct_is_feasible() {
        let spec = NeuronSpec::new(vec![0.05, -0.9, 0.4], 0.2).unwrap();
        let tech = TechProfile::reference();
        let ct = min_feasible_ct(&spec, &tech);
        assert!(check_feasibility(&spec, &tech, ct).unwrap().is_feasible());
    }

    #[test]
    fn config_json_roundtrip_ignores_derived() {
        let cfg = table3();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(text.contains("CA_neg_fF"));
        let back: AcnConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_duplicate_index() {
        let s = Synapse {
            index: 0,
            tree: Tree::Positive,
            cap_ff: 40.0,
        };
        let aux = TreeAux {
            bias_ff: 35.0,
            ballast_ff: 10.0,
            bias_voltage: 0.0,
        };
        assert!(AcnConfig::new(1, vec![s, s], aux, aux, 0.0, 1.0).is_err());
        assert!(AcnConfig::new(0, vec![], aux, aux, 0.0, 1.0).is_err());
    }
}
