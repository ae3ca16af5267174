//! Abstract neuron, binary input vectors and technology constants.
//!
//! A neuron fires when the weighted sum of its binary inputs reaches the
//! bias: `y = 1` iff `sum(w_i * x_i) >= tau`. Everything downstream (the
//! capacitor mapper, the tree model, the energy model) consumes these types.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which capacitive tree a synapse sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tree {
    /// Excitatory weights, drives `v_m+`.
    Positive,
    /// Inhibitory weights, drives `v_m-`.
    Negative,
}

impl Tree {
    pub const BOTH: [Tree; 2] = [Tree::Positive, Tree::Negative];

    pub fn of_weight(w: f64) -> Option<Tree> {
        if w > 0.0 {
            Some(Tree::Positive)
        } else if w < 0.0 {
            Some(Tree::Negative)
        } else {
            None
        }
    }

    pub fn opposite(self) -> Tree {
        match self {
            Tree::Positive => Tree::Negative,
            Tree::Negative => Tree::Positive,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Tree::Positive => "P",
            Tree::Negative => "N",
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tree::Positive => "positive",
            Tree::Negative => "negative",
        })
    }
}

/// A single-layer binary neuron with signed real weights and a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NeuronFile", into = "NeuronFile")]
pub struct NeuronSpec {
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct NeuronFile {
    weights: Vec<f64>,
    bias: f64,
}

impl TryFrom<NeuronFile> for NeuronSpec {
    type Error = Error;

    fn try_from(f: NeuronFile) -> Result<Self> {
        NeuronSpec::new(f.weights, f.bias)
    }
}

impl From<NeuronSpec> for NeuronFile {
    fn from(s: NeuronSpec) -> Self {
        NeuronFile {
            weights: s.weights,
            bias: s.bias,
        }
    }
}

impl NeuronSpec {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("neuron needs at least one input"));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(format!("weight {i} is not finite")));
        }
        if !bias.is_finite() {
            return Err(Error::invalid("bias is not finite"));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::invalid("weight sum |w| is zero"));
        }
        Ok(NeuronSpec { weights, bias })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w_T = sum |w_i|`.
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Indices whose weight is strictly positive (`I+`) or strictly negative (`I-`).
    pub fn indices(&self, tree: Tree) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| Tree::of_weight(**w) == Some(tree))
            .map(|(i, _)| i)
            .collect()
    }

    /// `sum(w_i * x_i)`.
    pub fn weighted_sum(&self, x: &InputVector) -> Result<f64> {
        x.check_len(self.len())?;
        Ok(self
            .weights
            .iter()
            .zip(x.bits())
            .filter(|(_, b)| **b)
            .map(|(w, _)| *w)
            .sum())
    }

    /// Signed distance of the weighted sum from the bias.
    pub fn margin(&self, x: &InputVector) -> Result<f64> {
        Ok(self.weighted_sum(x)? - self.bias)
    }
}

/// Heaviside neuron output; ties fire.
pub fn eval_software_neuron(spec: &NeuronSpec, x: &InputVector) -> Result<bool> {
    Ok(spec.weighted_sum(x)? >= spec.bias)
}

/// An ordered binary input vector; `bits()[0]` is `x_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputVector {
    bits: Vec<bool>,
}

impl InputVector {
    pub fn new(bits: Vec<bool>) -> Self {
        InputVector { bits }
    }

    pub fn zeros(n: usize) -> Self {
        InputVector {
            bits: vec![false; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        InputVector { bits: vec![true; n] }
    }

    /// Bit `i` of the vector is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        InputVector {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        let mut bits = self.bits.clone();
        bits[i] = value;
        InputVector { bits }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.bits.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: self.bits.len(),
            });
        }
        Ok(())
    }

    /// Renders as `0111_1001_1001` (groups of four, leftmost is `x_0`).
    pub fn grouped(&self) -> String {
        let mut s = String::with_capacity(self.bits.len() * 5 / 4);
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 && i % 4 == 0 {
                s.push('_');
            }
            s.push(if *b { '1' } else { '0' });
        }
        s
    }
}

impl fmt::Display for InputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InputVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = parse_bits(s)?;
        Ok(InputVector { bits })
    }
}

impl Serialize for InputVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InputVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(text.len());
    for (pos, c) in text.chars().enumerate() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            '_' => {}
            c if c.is_whitespace() => {}
            other => {
                return Err(Error::Parse {
                    position: pos,
                    message: format!("unexpected character {other:?} in input vector"),
                })
            }
        }
    }
    Ok(bits)
}

/// Parses `n` bits, ignoring underscores and whitespace. The leftmost bit is `x_0`.
pub fn parse_input_vector(text: &str, n: usize) -> Result<InputVector> {
    let bits = parse_bits(text)?;
    if bits.len() != n {
        return Err(Error::Parse {
            position: text.len(),
            message: format!("expected {n} bits, found {}", bits.len()),
        });
    }
    Ok(InputVector { bits })
}

/// Process constants used by the mapper. Capacitances in fF, voltages in V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechProfile {
    #[serde(rename = "vdd_V")]
    pub vdd: f64,
    /// Peak of the power clock.
    #[serde(rename = "vmax_V")]
    pub v_max: f64,
    /// Upper edge of the comparator input range.
    #[serde(rename = "vcut_V")]
    pub v_cut: f64,
    /// |V_thp| of the comparator pMOS inputs.
    #[serde(rename = "vthp_V")]
    pub v_thp: f64,
    #[serde(rename = "cmin_fF")]
    pub c_min_ff: f64,
    #[serde(rename = "cap_grid_fF")]
    pub cap_grid_ff: f64,
    /// Extracted wiring capacitance on each membrane node, in parallel with the ballast.
    #[serde(rename = "parasitic_fF", default = "default_parasitic")]
    pub parasitic_ff: f64,
}

fn default_parasitic() -> f64 {
    30.0
}

impl Default for TechProfile {
    /// 0.18 um, 1.8 V process with a 30 fF membrane parasitic.
    fn default() -> Self {
        TechProfile {
            vdd: 1.8,
            v_max: 1.8,
            v_cut: 1.3,
            v_thp: 0.5,
            c_min_ff: 35.0,
            cap_grid_ff: 1.0,
            parasitic_ff: default_parasitic(),
        }
    }
}

impl TechProfile {
    /// The profile used for the published 12-input design, which predates
    /// parasitic extraction.
    pub fn reference() -> Self {
        TechProfile {
            parasitic_ff: 0.0,
            ..TechProfile::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.vdd,
            self.v_max,
            self.v_cut,
            self.v_thp,
            self.c_min_ff,
            self.cap_grid_ff,
            self.parasitic_ff,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("technology profile has non-finite fields"));
        }
        if !(self.v_cut > 0.0 && self.v_cut <= self.vdd) {
            return Err(Error::invalid(format!(
                "v_cut {} must lie in (0, vdd={}]",
                self.v_cut, self.vdd
            )));
        }
        if ((self.vdd - self.v_thp) - self.v_cut).abs() > 0.1 + 1e-12 {
            return Err(Error::invalid(format!(
                "v_cut {} is not within 0.1 V of vdd - |vthp| = {}",
                self.v_cut,
                self.vdd - self.v_thp
            )));
        }
        if self.v_max <= 0.0 {
            return Err(Error::invalid("v_max must be positive"));
        }
        if self.c_min_ff <= 0.0 || self.cap_grid_ff <= 0.0 {
            return Err(Error::invalid("c_min and cap_grid must be positive"));
        }
        if self.parasitic_ff < 0.0 {
            return Err(Error::invalid("parasitic capacitance must be non-negative"));
        }
        Ok(())
    }
}
