//! Monte-Carlo estimate of `E(eps, R)`: the probability that a uniformly
//! random class-B polynomial on `2R` frequencies in `[0, R^2]` has
//! `|| |P|^2 - 1 ||_1 > eps`.
//!
//! Every sample draws from its own ChaCha8 stream seeded by
//! [`derive_seed`]`(seed, index)`, so results are identical for any number of
//! worker threads.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{FlatError, Result};
use crate::spectrum::eval_sparse;

/// splitmix64 finalizer (constants `0x9E3779B97F4A7C15`, `0xBF58476D1CE4E5B9`,
/// `0x94D049BB133111EB`).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(seed ^ splitmix64(index))`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Which two elements of `[0, R^2]` are fixed in every sampled set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoints {
    /// `0` and `R^2`.
    #[default]
    ZeroAndRSquared,
    /// `0` and `R`.
    ZeroAndR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    #[default]
    Hoeffding,
    Wilson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "R")]
    pub r: u64,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub grid_factor: usize,
    pub confidence: f64,
    #[serde(default)]
    pub interval: IntervalKind,
    #[serde(default)]
    pub endpoints: Endpoints,
}

impl ExperimentConfig {
    pub fn new(r: u64, epsilon: f64, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            r,
            epsilon,
            samples,
            seed,
            grid_factor: 4,
            confidence: 0.95,
            interval: IntervalKind::Hoeffding,
            endpoints: Endpoints::ZeroAndRSquared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(FlatError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if self.r < 2 {
            return bad("R", "must be at least 2");
        }
        if self.r > 1 << 16 {
            return bad("R", "R^2 grid would not fit in memory");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", "must be positive and finite");
        }
        if self.samples < 1 {
            return bad("samples", "must be at least 1");
        }
        if self.grid_factor < 2 {
            return bad("grid_factor", "must be at least 2");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad("confidence", "must lie in (0, 1)");
        }
        Ok(())
    }

    fn grid_size(&self) -> usize {
        self.grid_factor * (self.r as usize * self.r as usize + 1)
    }
}

/// Uniform random `S ⊆ [0, R^2]` with `|S| = 2R` containing the two fixed
/// endpoints; the remaining `2R - 2` elements are a uniform subset of the
/// other `R^2 - 1` candidates.
pub fn sample_omega<G: Rng + ?Sized>(r: u64, rng: &mut G, endpoints: Endpoints) -> Result<Vec<u64>> {
    if r < 2 {
        return Err(FlatError::InvalidInput("sample_omega needs R >= 2".into()));
    }
    let sq = r * r;
    let pool = (sq - 1) as usize;
    let picks = index::sample(rng, pool, (2 * r - 2) as usize);
    let mut set: Vec<u64> = match endpoints {
        Endpoints::ZeroAndRSquared => picks.iter().map(|i| i as u64 + 1).chain([0, sq]).collect(),
        Endpoints::ZeroAndR => picks
            .iter()
            .map(|i| {
                let v = i as u64 + 1;
                if v >= r {
                    v + 1
                } else {
                    v
                }
            })
            .chain([0, r])
            .collect(),
    };
    set.sort_unstable();
    Ok(set)
}

/// `|| |P_S|^2 - 1 ||_1` by grid quadrature for the class-B polynomial on `S`.
pub fn class_b_l1_sq(set: &[u64], fft: &dyn Fft<f64>) -> f64 {
    let c = 1.0 / (set.len() as f64).sqrt();
    let coefs = vec![c; set.len()];
    let vals = eval_sparse(set, &coefs, fft);
    vals.iter().map(|z| (z.norm_sqr() - 1.0).abs()).sum::<f64>() / vals.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    #[serde(rename = "R")]
    pub r: u64,
    pub epsilon: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_l1: f64,
    pub samples_used: usize,
    pub seed: u64,
}

impl ExperimentResult {
    pub const CSV_HEADER: &'static str = "R,epsilon,samples,estimate,ci_low,ci_high,mean_l1,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.r, self.epsilon, self.samples_used, self.estimate, self.ci_low, self.ci_high, self.mean_l1, self.seed
        )
    }
}

/// Hoeffding half-width `sqrt(ln(2 / (1 - confidence)) / (2 n))`.
pub fn hoeffding_half_width(samples: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt()
}

/// Wilson score interval for `hits` successes in `n` trials.
pub fn wilson_interval(hits: usize, n: usize, confidence: f64) -> (f64, f64) {
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center - half, center + half)
}

/// Per-sample L1 statistics in sample order.
pub fn sample_statistics(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(cfg.grid_size());
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i));
            let set = sample_omega(cfg.r, &mut rng, cfg.endpoints)?;
            Ok(class_b_l1_sq(&set, fft.as_ref()))
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let stats = sample_statistics(cfg)?;
    let n = stats.len();
    let hits = stats.iter().filter(|&&x| x > cfg.epsilon).count();
    let estimate = hits as f64 / n as f64;
    let (lo, hi) = match cfg.interval {
        IntervalKind::Hoeffding => {
            let h = hoeffding_half_width(n, cfg.confidence);
            (estimate - h, estimate + h)
        }
        IntervalKind::Wilson => wilson_interval(hits, n, cfg.confidence),
    };
    Ok(ExperimentResult {
        r: cfg.r,
        epsilon: cfg.epsilon,
        estimate,
        ci_low: lo.clamp(0.0, 1.0).min(estimate),
        ci_high: hi.clamp(0.0, 1.0).max(estimate),
        mean_l1: stats.iter().sum::<f64>() / n as f64,
        samples_used: n,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    #[serde(rename = "R")]
    pub r: u64,
    pub epsilon: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ExperimentResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// How the estimate moves with `R` at one `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub r: Vec<u64>,
    pub estimate: Vec<f64>,
    /// Change of the estimate from the previous `R`.
    pub delta: Vec<f64>,
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
    pub trends: Vec<Trend>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ExperimentResult::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            match &c.result {
                Some(r) => out.push_str(&r.csv_row()),
                None => out.push_str(&format!("{},{},,,,,,{}", c.r, c.epsilon, c.seed)),
            }
            out.push('\n');
        }
        out
    }
}

/// Seed of cell `(ri, ei)`: `derive_seed(derive_seed(seed, ri), ei)`.
pub fn cell_seed(seed: u64, ri: usize, ei: usize) -> u64 {
    derive_seed(derive_seed(seed, ri as u64), ei as u64)
}

/// Runs every `(R, epsilon)` cell; a failing cell is recorded and the sweep
/// continues.
pub fn sweep(r_list: &[u64], eps_list: &[f64], samples: usize, seed: u64, base: &ExperimentConfig) -> Result<SweepTable> {
    if r_list.is_empty() || eps_list.is_empty() {
        return Err(FlatError::InvalidInput("sweep needs non-empty R and epsilon lists".into()));
    }
    let mut cells = Vec::with_capacity(r_list.len() * eps_list.len());
    for (ri, &r) in r_list.iter().enumerate() {
        for (ei, &epsilon) in eps_list.iter().enumerate() {
            let cfg = ExperimentConfig {
                r,
                epsilon,
                samples,
                seed: cell_seed(seed, ri, ei),
                ..base.clone()
            };
            let (result, error) = match run_experiment(&cfg) {
                Ok(res) => (Some(res), None),
                Err(e) => {
                    log::warn!("sweep cell R={r} epsilon={epsilon}: {e}");
                    (None, Some(e.to_string()))
                }
            };
            cells.push(SweepCell {
                r,
                epsilon,
                seed: cfg.seed,
                result,
                error,
            });
        }
    }
    let trends = eps_list
        .iter()
        .map(|&eps| {
            let pts: Vec<(u64, f64)> = cells
                .iter()
                .filter(|c| c.epsilon == eps)
                .filter_map(|c| c.result.as_ref().map(|r| (c.r, r.estimate)))
                .collect();
            let delta: Vec<f64> = pts.windows(2).map(|w| w[1].1 - w[0].1).collect();
            Trend {
                epsilon: eps,
                r: pts.iter().map(|p| p.0).collect(),
                estimate: pts.iter().map(|p| p.1).collect(),
                non_increasing: delta.iter().all(|&d| d <= 0.0),
                delta,
            }
        })
        .collect();
    Ok(SweepTable { cells, trends })
}
