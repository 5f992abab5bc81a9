//! Dissociated products `prod_k |P_k(z^{l_k})|^2` and flatness metrics on the
//! circle. Weak limits are only represented through partial densities on a
//! grid.

use std::collections::HashSet;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FlatError, Result};
use crate::spectrum::{eval_grid, AnalyticPolynomial, OVERSAMPLING};

/// Maximum number of formal terms expanded by [`DissociationSchedule::verify_dissociated`].
pub const DEFAULT_EXPANSION_BUDGET: usize = 1_000_000;

/// Tolerance below zero that is clamped when forming densities.
pub const CLAMP_TOL: f64 = 1e-12;

/// Band `[1/T, T]` used by [`convergence_track`].
pub const BAND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DissociationSchedule {
    factors: Vec<AnalyticPolynomial>,
    exponents: Vec<u64>,
    degrees: Vec<u64>,
}

/// Positive frequencies of `|P|^2`.
fn square_support(p: &AnalyticPolynomial) -> Vec<u64> {
    let e = p.exponents();
    let mut diffs: Vec<u64> = Vec::with_capacity(e.len() * e.len() / 2);
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            diffs.push(e[j] - e[i]);
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    diffs
}

fn running_degrees(factors: &[AnalyticPolynomial], exponents: &[u64]) -> Result<Vec<u64>> {
    let mut total: u64 = 0;
    factors
        .iter()
        .zip(exponents)
        .enumerate()
        .map(|(i, (p, &l))| {
            total = l
                .checked_mul(p.degree())
                .and_then(|x| x.checked_add(total))
                .ok_or(FlatError::Overflow { index: i })?;
            Ok(total)
        })
        .collect()
}

/// Smallest exponents with `l_1 = 1` and `l_{k+1} > 2 sum_{i<=k} l_i deg_i`
/// (strictly increasing), which makes the squared factors dissociated.
pub fn schedule(factors: Vec<AnalyticPolynomial>) -> Result<DissociationSchedule> {
    if factors.is_empty() {
        return Err(FlatError::InvalidInput("schedule needs at least one factor".into()));
    }
    let mut exponents = Vec::with_capacity(factors.len());
    let mut total: u64 = 0;
    for (i, p) in factors.iter().enumerate() {
        let l = match exponents.last() {
            None => 1,
            Some(&prev) => {
                let need = total
                    .checked_mul(2)
                    .and_then(|x| x.checked_add(1))
                    .ok_or(FlatError::Overflow { index: i })?;
                need.max(prev + 1)
            }
        };
        total = l
            .checked_mul(p.degree())
            .and_then(|x| x.checked_add(total))
            .ok_or(FlatError::Overflow { index: i })?;
        exponents.push(l);
    }
    let degrees = running_degrees(&factors, &exponents)?;
    Ok(DissociationSchedule {
        factors,
        exponents,
        degrees,
    })
}

impl DissociationSchedule {
    /// A schedule with caller-chosen exponents, which need not dissociate.
    pub fn with_exponents(factors: Vec<AnalyticPolynomial>, exponents: Vec<u64>) -> Result<Self> {
        if factors.is_empty() || factors.len() != exponents.len() {
            return Err(FlatError::InvalidInput("need one positive exponent per factor".into()));
        }
        if exponents.contains(&0) {
            return Err(FlatError::InvalidInput("substitution exponents must be positive".into()));
        }
        let degrees = running_degrees(&factors, &exponents)?;
        Ok(DissociationSchedule {
            factors,
            exponents,
            degrees,
        })
    }

    pub fn factors(&self) -> &[AnalyticPolynomial] {
        &self.factors
    }

    /// Substitution exponents `l_k`.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Degree of `prod_{i<=k} P_i(z^{l_i})`, which is also the largest
    /// frequency of the squared product.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    fn degree_of_prefix(&self, prefix: usize) -> u64 {
        if prefix == 0 {
            0
        } else {
            self.degrees[prefix - 1]
        }
    }

    fn check_prefix(&self, prefix: usize) -> Result<()> {
        if prefix > self.len() {
            return Err(FlatError::InvalidInput(format!(
                "prefix {prefix} exceeds the {} scheduled factors",
                self.len()
            )));
        }
        Ok(())
    }

    /// Smallest grid accepted for the first `prefix` factors.
    pub fn min_grid(&self, prefix: usize) -> usize {
        OVERSAMPLING * (self.degree_of_prefix(prefix) as usize + 1)
    }

    pub fn verify_dissociated(&self, prefix: usize) -> Result<bool> {
        self.verify_dissociated_with_budget(prefix, DEFAULT_EXPANSION_BUDGET)
    }

    /// Expands `prod_{k<=prefix} |P_k(z^{l_k})|^2` formally and checks that no
    /// two term selections land on the same power of `z`.
    pub fn verify_dissociated_with_budget(&self, prefix: usize, budget: usize) -> Result<bool> {
        self.check_prefix(prefix)?;
        let supports: Vec<Vec<i64>> = self.factors[..prefix]
            .iter()
            .map(|p| {
                let pos = square_support(p);
                pos.iter()
                    .rev()
                    .map(|&n| -(n as i64))
                    .chain(std::iter::once(0))
                    .chain(pos.iter().map(|&n| n as i64))
                    .collect()
            })
            .collect();
        let mut terms: usize = 1;
        for s in &supports {
            terms = terms.saturating_mul(s.len());
            if terms > budget {
                return Err(FlatError::Budget(format!(
                    "expansion has more than {budget} terms"
                )));
            }
        }
        let mut powers: Vec<i128> = vec![0];
        for (s, &l) in supports.iter().zip(&self.exponents) {
            let mut next = Vec::with_capacity(powers.len() * s.len());
            for &e in &powers {
                for &f in s {
                    next.push(e + l as i128 * f as i128);
                }
            }
            powers = next;
        }
        let distinct: HashSet<i128> = powers.iter().copied().collect();
        Ok(distinct.len() == powers.len())
    }

    /// Grid values of `|P_k(z^{l_k})|^2` for factor `k`, read from one grid
    /// evaluation of `P_k` by index arithmetic modulo the grid size.
    fn factor_square(&self, k: usize, grid_size: usize) -> Vec<f64> {
        let vals: Vec<f64> = eval_grid(&self.factors[k], grid_size).iter().map(|z| z.norm_sqr()).collect();
        let l = (self.exponents[k] % grid_size as u64) as usize;
        (0..grid_size).map(|t| vals[(t * l) % grid_size]).collect()
    }

    fn check_grid(&self, prefix: usize, grid_size: usize) -> Result<()> {
        let required = self.min_grid(prefix);
        if grid_size < required {
            return Err(FlatError::Undersampled {
                required,
                got: grid_size,
            });
        }
        Ok(())
    }
}

/// `prod_{k<=prefix} |P_k(z^{l_k})|^2` on the grid `e^{2 pi i t / G}`.
pub fn partial_density(s: &DissociationSchedule, prefix: usize, grid_size: usize) -> Result<Vec<f64>> {
    s.check_prefix(prefix)?;
    s.check_grid(prefix, grid_size)?;
    let mut density = vec![1.0; grid_size];
    for k in 0..prefix {
        let f = s.factor_square(k, grid_size);
        density.par_iter_mut().zip(f.par_iter()).for_each(|(d, &v)| {
            *d *= v;
        });
    }
    for d in density.iter_mut() {
        if *d < 0.0 && *d >= -CLAMP_TOL {
            *d = 0.0;
        }
    }
    Ok(density)
}

/// Writes a density as a little-endian `u64` length followed by `f64` values.
pub fn write_density<W: Write>(mut w: W, density: &[f64]) -> io::Result<()> {
    w.write_all(&(density.len() as u64).to_le_bytes())?;
    for x in density {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_density(bytes: &[u8]) -> io::Result<Vec<f64>> {
    let bad = || io::Error::new(io::ErrorKind::InvalidData, "truncated density dump");
    let head: [u8; 8] = bytes.get(..8).ok_or_else(bad)?.try_into().unwrap();
    let n = u64::from_le_bytes(head) as usize;
    let body = bytes.get(8..).ok_or_else(bad)?;
    if body.len() != n.checked_mul(8).ok_or_else(bad)? {
        return Err(bad());
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub grid_size: usize,
    /// Grid estimate of `|| |P| - 1 ||_1`.
    pub l1_abs: f64,
    /// Grid estimate of `|| |P|^2 - 1 ||_1`.
    pub l1_sq: f64,
    pub sup_dev: f64,
    /// Fraction of grid points with `| |P| - 1 | < 0.1`.
    pub near_one_fraction: f64,
}

impl FlatnessReport {
    pub const CSV_HEADER: &'static str = "grid_size,l1_abs,l1_sq,sup_dev,near_one_fraction";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.grid_size, self.l1_abs, self.l1_sq, self.sup_dev, self.near_one_fraction
        )
    }
}

/// Flatness metrics from grid values of `|P|`.
pub fn flatness(p: &AnalyticPolynomial, grid_size: usize) -> Result<FlatnessReport> {
    let required = p.min_grid();
    if grid_size < required {
        return Err(FlatError::Undersampled {
            required,
            got: grid_size,
        });
    }
    let moduli: Vec<f64> = eval_grid(p, grid_size).iter().map(|z| z.norm()).collect();
    Ok(flatness_from_moduli(&moduli))
}

pub(crate) fn flatness_from_moduli(moduli: &[f64]) -> FlatnessReport {
    let g = moduli.len() as f64;
    let mut l1_abs = 0.0;
    let mut l1_sq = 0.0;
    let mut sup_dev: f64 = 0.0;
    let mut near = 0usize;
    for &a in moduli {
        let dev = (a - 1.0).abs();
        l1_abs += dev;
        l1_sq += (a * a - 1.0).abs();
        sup_dev = sup_dev.max(dev);
        if dev < 0.1 {
            near += 1;
        }
    }
    FlatnessReport {
        grid_size: moduli.len(),
        l1_abs: l1_abs / g,
        l1_sq: l1_sq / g,
        sup_dev,
        near_one_fraction: near as f64 / g,
    }
}

/// Summary of `prod_{k<=prefix} |P_k(z^{l_k})|` on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefixSummary {
    pub prefix: usize,
    /// `exp(mean log)`; zero when the product vanishes at a grid point.
    pub geo_mean: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of grid points inside `[1/10, 10]`.
    pub frac_in_band: f64,
    /// Grid mean of the squared product.
    pub mean_square: f64,
}

impl PrefixSummary {
    pub const CSV_HEADER: &'static str = "prefix,geo_mean,min,max,frac_in_band";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.prefix, self.geo_mean, self.min, self.max, self.frac_in_band
        )
    }
}

/// Per-prefix summaries of the running product over the whole schedule.
pub fn convergence_track(s: &DissociationSchedule, grid_size: usize) -> Result<Vec<PrefixSummary>> {
    s.check_grid(s.len(), grid_size)?;
    let mut running = vec![1.0f64; grid_size];
    let mut out = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        let f = s.factor_square(k, grid_size);
        for (r, v) in running.iter_mut().zip(f) {
            *r *= v.max(0.0).sqrt();
        }
        let g = grid_size as f64;
        let mut log_sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        let mut in_band = 0usize;
        let mut sq = 0.0;
        for &x in &running {
            log_sum += x.ln();
            min = min.min(x);
            max = max.max(x);
            if (1.0 / BAND..=BAND).contains(&x) {
                in_band += 1;
            }
            sq += x * x;
        }
        out.push(PrefixSummary {
            prefix: k + 1,
            geo_mean: (log_sum / g).exp(),
            min,
            max,
            frac_in_band: in_band as f64 / g,
            mean_square: sq / g,
        });
    }
    Ok(out)
}
