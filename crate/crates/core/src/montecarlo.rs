//! Seeded process-variation engine and distribution statistics.
//!
//! Every draw is a pure function of `(seed, draw_index)`: the pseudorandom
//! sampler gives each draw its own ChaCha stream and the low-discrepancy
//! sampler computes the draw's Sobol point directly from its index. Runs
//! are therefore identical whether evaluated serially or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sobol::params::JoeKuoD6;
use sobol::{Sobol, SobolParams};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::energy::{energy_at_load, EnergyParams};
use crate::error::{Error, Result};
use crate::mapper::AcnConfig;
use crate::model::{InputVector, Tree};
use crate::tl::TlModel;
use crate::tree::{capacitive_load, PowerClock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Pseudorandom,
    LowDiscrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationModel {
    /// Relative, independent per capacitor.
    pub sigma_cap_mismatch: f64,
    /// Relative, shared by all capacitors of a draw.
    pub sigma_cap_global: f64,
    /// Log-standard-deviation of the synapse resistance factor.
    pub sigma_rsyn: f64,
    pub sampler: SamplerKind,
    pub seed: u64,
}

impl Default for VariationModel {
    fn default() -> Self {
        VariationModel {
            sigma_cap_mismatch: 0.01,
            sigma_cap_global: 0.03,
            sigma_rsyn: 0.25,
            sampler: SamplerKind::Pseudorandom,
            seed: 42,
        }
    }
}

impl VariationModel {
    pub fn validate(&self) -> Result<()> {
        for s in [self.sigma_cap_mismatch, self.sigma_cap_global, self.sigma_rsyn] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(format!("variation sigma {s} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Multiplicative factors of one draw. Capacitors are ordered as in
/// [`capacitor_values`].
#[derive(Debug, Clone, PartialEq)]
pub struct VariationDraw {
    pub global: f64,
    pub rsyn_factor: f64,
    pub mismatch: Vec<f64>,
}

impl VariationDraw {
    pub fn cap_factor(&self, i: usize) -> f64 {
        (1.0 + self.global) * (1.0 + self.mismatch[i])
    }
}

/// Synapses by index, then bias and ballast of the positive and negative trees.
pub fn capacitor_values(config: &AcnConfig) -> Vec<f64> {
    let mut caps: Vec<f64> = config.synapses.iter().map(|s| s.cap_ff).collect();
    for tree in Tree::BOTH {
        caps.push(config.aux(tree).bias_ff);
        caps.push(config.aux(tree).ballast_ff);
    }
    caps
}

const MAX_ATTEMPTS: usize = 100;

/// Draw generator for one configuration and variation model.
pub struct VariationSampler {
    model: VariationModel,
    nominal: Vec<f64>,
    sobol: Option<SobolPoints>,
}

struct SobolPoints {
    directions: Vec<Vec<u64>>,
    shift: Vec<u64>,
}

impl SobolPoints {
    fn new(dims: usize, seed: u64) -> Result<Self> {
        let params = JoeKuoD6::standard();
        if dims > params.max_dims() {
            return Err(Error::invalid(format!(
                "low-discrepancy sampler supports at most {} dimensions, need {dims}",
                params.max_dims()
            )));
        }
        let directions = Sobol::<u64>::init_direction_vals::<u32>(dims, 64, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let shift = (0..dims).map(|_| rng.random::<u64>()).collect();
        Ok(SobolPoints { directions, shift })
    }

    /// Point `n` of the Gray-code ordered sequence, digitally shifted, mapped into (0, 1).
    fn point(&self, n: u64) -> Vec<f64> {
        let gray = n ^ (n >> 1);
        self.directions
            .iter()
            .zip(&self.shift)
            .map(|(dirs, shift)| {
                let mut x = 0u64;
                for (bit, d) in dirs.iter().enumerate() {
                    if gray >> bit & 1 == 1 {
                        x ^= d;
                    }
                }
                x ^= shift;
                ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64
            })
            .collect()
    }
}

impl VariationSampler {
    pub fn new(config: &AcnConfig, model: &VariationModel) -> Result<Self> {
        model.validate()?;
        let nominal = capacitor_values(config);
        let sobol = match model.sampler {
            SamplerKind::Pseudorandom => None,
            SamplerKind::LowDiscrepancy => Some(SobolPoints::new(nominal.len() + 2, model.seed)?),
        };
        Ok(VariationSampler {
            model: model.clone(),
            nominal,
            sobol,
        })
    }

    fn factors(&self, z: &[f64]) -> VariationDraw {
        let m = &self.model;
        VariationDraw {
            global: m.sigma_cap_global * z[0],
            rsyn_factor: (m.sigma_rsyn * z[1]).exp(),
            mismatch: z[2..].iter().map(|v| m.sigma_cap_mismatch * v).collect(),
        }
    }

    fn acceptable(&self, d: &VariationDraw) -> bool {
        self.nominal
            .iter()
            .enumerate()
            .all(|(i, c)| *c == 0.0 || c * d.cap_factor(i) > 0.0)
    }

    /// Factors of draw `index`. Draws that would make a capacitor non-positive are redrawn.
    pub fn draw(&self, index: u64) -> Result<VariationDraw> {
        let dims = self.nominal.len() + 2;
        if let Some(sobol) = &self.sobol {
            let normal = Normal::standard();
            let z: Vec<f64> = sobol
                .point(index + 1)
                .into_iter()
                .map(|u| normal.inverse_cdf(u))
                .collect();
            let d = self.factors(&z);
            if self.acceptable(&d) {
                return Ok(d);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.model.seed);
        rng.set_stream(index);
        for _ in 0..MAX_ATTEMPTS {
            let z: Vec<f64> = (0..dims).map(|_| rng.sample(StandardNormal)).collect();
            let d = self.factors(&z);
            if self.acceptable(&d) {
                return Ok(d);
            }
        }
        Err(Error::ResampleExhausted {
            draw: index,
            attempts: MAX_ATTEMPTS,
        })
    }

    pub fn apply(
        &self,
        config: &AcnConfig,
        params: &EnergyParams,
        d: &VariationDraw,
    ) -> (AcnConfig, EnergyParams) {
        let mut out = config.clone();
        for (i, s) in out.synapses.iter_mut().enumerate() {
            s.cap_ff *= d.cap_factor(i);
        }
        let base = out.synapses.len();
        for (k, tree) in Tree::BOTH.into_iter().enumerate() {
            let aux = out.aux_mut(tree);
            aux.bias_ff *= d.cap_factor(base + 2 * k);
            aux.ballast_ff *= d.cap_factor(base + 2 * k + 1);
        }
        let params = EnergyParams {
            r_syn_ohm: params.r_syn_ohm * d.rsyn_factor,
            ..params.clone()
        };
        (out, params)
    }
}

pub fn sample_variation(
    config: &AcnConfig,
    params: &EnergyParams,
    model: &VariationModel,
    draw_index: u64,
) -> Result<(AcnConfig, EnergyParams)> {
    let sampler = VariationSampler::new(config, model)?;
    let d = sampler.draw(draw_index)?;
    Ok(sampler.apply(config, params, &d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McTarget {
    Acn,
    Ccn,
}

/// Synapse energy of `n` perturbed draws, in draw order, fJ.
pub fn mc_run(
    config: &AcnConfig,
    x: &InputVector,
    pc: &PowerClock,
    params: &EnergyParams,
    model: &VariationModel,
    n: usize,
    target: McTarget,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    x.check_len(config.n_inputs)?;
    let sampler = VariationSampler::new(config, model)?;
    let tl = TlModel::ideal();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let d = sampler.draw(i)?;
            let (cfg, p) = sampler.apply(config, params, &d);
            let b = energy_at_load(capacitive_load(&cfg, x)?, pc, &p, &tl)?;
            Ok(match target {
                McTarget::Acn => b.acn_synapse_fj(),
                McTarget::Ccn => b.e_ccn_fj,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n: usize,
    #[serde(rename = "mean_fJ")]
    pub mean: f64,
    #[serde(rename = "std_fJ")]
    pub std: f64,
    /// Percent.
    pub cv: f64,
    /// Bias-corrected sample skewness; absent when undefined.
    pub skewness: Option<f64>,
    pub qq_corr: Option<f64>,
    pub classified_normal: bool,
    /// All samples equal.
    pub degenerate: bool,
}

/// Q-Q correlation at or above this classifies a sample as normal.
pub const NORMAL_QQ_THRESHOLD: f64 = 0.99;

pub fn mc_stats(samples: &[f64]) -> Result<McSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite sample"));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = samples.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
    let std = (m2 * nf / (nf - 1.0)).sqrt();
    let degenerate = m2 == 0.0;
    let cv = if mean == 0.0 { f64::NAN } else { 100.0 * std / mean };
    let (skewness, qq_corr) = if n < 8 || degenerate {
        (None, None)
    } else {
        let g1 = m3 / m2.powf(1.5);
        let skew = g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0);
        (Some(skew), Some(qq_correlation(samples)))
    };
    Ok(McSummary {
        n,
        mean,
        std,
        cv,
        skewness,
        qq_corr,
        classified_normal: qq_corr.is_some_and(|q| q >= NORMAL_QQ_THRESHOLD),
        degenerate,
    })
}

/// Sorted samples paired with standard normal quantiles at `(i - 0.5) / n`.
pub fn qq_pairs(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let normal = Normal::standard();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, normal.inverse_cdf((i as f64 + 0.5) / n)))
        .collect()
}

fn qq_correlation(samples: &[f64]) -> f64 {
    let pairs = qq_pairs(samples);
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}
