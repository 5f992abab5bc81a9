//! Polynomial families and difference-set utilities.

mod lambda;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FlatError, Result};
use crate::spectrum::AnalyticPolynomial;

pub use lambda::{lambda_exact, simple_cover, LambdaResult, EXHAUSTIVE_THRESHOLD};

/// Dirichlet polynomial `m^{-1/2} (1 + z + ... + z^{m-1})`.
pub fn dirichlet(m: u64) -> Result<AnalyticPolynomial> {
    if m < 1 {
        return Err(FlatError::InvalidInput("dirichlet needs m >= 1".into()));
    }
    AnalyticPolynomial::uniform((0..m).collect())
}

/// Exponents `{0, ..., j-1} ∪ {j, 2j, ..., j^2}`.
pub fn two_block_set(j: u64) -> Result<Vec<u64>> {
    if j < 2 {
        return Err(FlatError::InvalidInput("two-block family needs j >= 2".into()));
    }
    j.checked_mul(j).ok_or(FlatError::Overflow { index: 0 })?;
    Ok((0..j).chain((1..=j).map(|i| i * j)).collect())
}

/// Class-B polynomial on the two-block set; `|S_j| = 2j` and every frequency
/// `1..=j^2` occurs in `|P_j|^2`, yet the family is not flat.
pub fn two_block(j: u64) -> Result<AnalyticPolynomial> {
    AnalyticPolynomial::uniform(two_block_set(j)?)
}

/// The `2R`-element cover of `[1, R^2]`: `[0, R-1] ∪ {R, 2R, ..., R^2}`.
pub fn lambda_cover_set(r: u64) -> Result<Vec<u64>> {
    if r < 2 {
        return Err(FlatError::InvalidInput("lambda cover needs R >= 2".into()));
    }
    r.checked_mul(r).ok_or(FlatError::Overflow { index: 0 })?;
    Ok((0..r).chain((1..=r).map(|i| i * r)).collect())
}

pub fn lambda_cover(r: u64) -> Result<AnalyticPolynomial> {
    AnalyticPolynomial::uniform(lambda_cover_set(r)?)
}

fn normalized(set: &[u64]) -> Vec<u64> {
    let s: BTreeSet<u64> = set.iter().copied().collect();
    s.into_iter().collect()
}

/// One-sided difference counts `d_j = #{(a, b) in S x S : b - a = j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceProfile {
    pub r_max: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl DifferenceProfile {
    /// `(S - S)^+`.
    pub fn support(&self) -> Vec<u64> {
        self.counts.keys().copied().collect()
    }

    pub fn get(&self, j: u64) -> u64 {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    /// `M(S)`, the largest multiplicity.
    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn difference_profile(set: &[u64]) -> DifferenceProfile {
    let s = normalized(set);
    let mut counts = BTreeMap::new();
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            *counts.entry(b - a).or_insert(0) += 1;
        }
    }
    let r_max = match (s.first(), s.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    };
    DifferenceProfile { r_max, counts }
}

/// True when every positive difference occurs exactly once.
pub fn is_sidon(set: &[u64]) -> bool {
    difference_profile(set).counts.values().all(|&d| d == 1)
}

/// Greedy Sidon set: starting from `start`, repeatedly append the smallest
/// integer that keeps all differences distinct. With `start = 1` this is the
/// Mian–Chowla sequence.
pub fn sidon_greedy(count: usize, start: u64) -> Vec<u64> {
    let mut set: Vec<u64> = Vec::with_capacity(count);
    let mut used: BTreeSet<u64> = BTreeSet::new();
    if count == 0 {
        return set;
    }
    set.push(start);
    let mut cand = start + 1;
    while set.len() < count {
        let ok = set.iter().all(|&x| !used.contains(&(cand - x)));
        if ok {
            for &x in &set {
                used.insert(cand - x);
            }
            set.push(cand);
        }
        cand += 1;
    }
    set
}

/// Erdős–Turán bound `sqrt(R) + R^{1/4} + 1` on a Sidon subset of `[1, R]`.
pub fn erdos_turan_bound(r: u64) -> f64 {
    let r = r as f64;
    r.sqrt() + r.sqrt().sqrt() + 1.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCertificate {
    #[serde(rename = "R")]
    pub r: u64,
    pub set: Vec<u64>,
    pub is_cover: bool,
    pub missing: Vec<u64>,
}

/// Checks whether `(S - S)^+ = [1, R]` and lists the uncovered differences.
pub fn cover_certificate(set: &[u64], r: u64) -> Result<CoverCertificate> {
    let s = normalized(set);
    if let Some(&bad) = s.iter().find(|&&x| x > r) {
        return Err(FlatError::InvalidInput(format!("element {bad} lies outside [0, {r}]")));
    }
    let mut seen = vec![false; r as usize + 1];
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            seen[(b - a) as usize] = true;
        }
    }
    let missing: Vec<u64> = (1..=r).filter(|&d| !seen[d as usize]).collect();
    Ok(CoverCertificate {
        r,
        set: s,
        is_cover: missing.is_empty(),
        missing,
    })
}

/// Value of `sin((d + 1/2) v) / sin(v / 2) = sum_{|j| <= d} e^{ijv}`.
pub fn dirichlet_kernel(degree: u64, v: f64) -> f64 {
    let half = (v / 2.0).sin();
    if half.abs() < 1e-12 {
        return (2 * degree + 1) as f64;
    }
    ((degree as f64 + 0.5) * v).sin() / half
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelMin {
    pub min_value: f64,
    pub argmin: f64,
    /// `3 pi / (2 (d + 1/2))`, where the kernel equals `-1 / sin(v/2)`.
    pub test_point: f64,
    pub test_value: f64,
}

/// Minimum of the Dirichlet kernel over a uniform grid on `[0, 2 pi)` plus the
/// negativity test point.
pub fn dirichlet_kernel_min(degree: u64, grid_size: usize) -> Result<KernelMin> {
    let required = (8 * degree as usize).max(1);
    if grid_size < required {
        return Err(FlatError::Undersampled {
            required,
            got: grid_size,
        });
    }
    let test_point = 3.0 * PI / (2.0 * (degree as f64 + 0.5));
    let test_value = dirichlet_kernel(degree, test_point);
    let mut min_value = test_value;
    let mut argmin = test_point;
    for t in 0..grid_size {
        let v = 2.0 * PI * t as f64 / grid_size as f64;
        let k = dirichlet_kernel(degree, v);
        if k < min_value {
            min_value = k;
            argmin = v;
        }
    }
    Ok(KernelMin {
        min_value,
        argmin,
        test_point,
        test_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ArithmeticMode;
    use crate::spectrum::{autocorrelate, Coefficients};
    use num_bigint::BigInt;

    #[test]
    fn constructors() {
        assert_eq!(dirichlet(1).unwrap().exponents(), &[0]);
        assert_eq!(dirichlet(3).unwrap().exponents(), &[0, 1, 2]);
        assert!(dirichlet(0).is_err());
        assert_eq!(two_block(2).unwrap().exponents(), &[0, 1, 2, 4]);
        assert!(two_block(1).is_err());
        assert_eq!(lambda_cover(3).unwrap().exponents(), &[0, 1, 2, 3, 6, 9]);
        assert_eq!(lambda_cover(2).unwrap().exponents(), &[0, 1, 2, 4]);
        assert!(lambda_cover(1).is_err());
    }

    #[test]
    fn profiles() {
        let p = difference_profile(&[0, 1, 3]);
        assert_eq!(p.counts, BTreeMap::from([(1, 1), (2, 1), (3, 1)]));
        assert!(difference_profile(&[0]).counts.is_empty());
        let p = difference_profile(&(0..7).collect::<Vec<_>>());
        for j in 1..7 {
            assert_eq!(p.get(j), 7 - j);
        }
        assert_eq!(p.total(), 21);
        assert_eq!(p.max_count(), 6);
    }

    #[test]
    fn sidon_checks() {
        assert!(is_sidon(&[0, 1, 3]));
        assert!(!is_sidon(&[0, 1, 2]));
        assert!(is_sidon(&[0]));
    }

    #[test]
    fn greedy_matches_mian_chowla() {
        // A005282
        assert_eq!(sidon_greedy(5, 1), vec![1, 2, 4, 8, 13]);
        assert_eq!(sidon_greedy(11, 1), vec![1, 2, 4, 8, 13, 21, 31, 45, 66, 81, 97]);
        assert!(sidon_greedy(0, 1).is_empty());
        let s = sidon_greedy(30, 1);
        assert!(is_sidon(&s));
        assert!(s.len() as f64 <= erdos_turan_bound(*s.last().unwrap()));
    }

    #[test]
    fn sidon_covers_only_for_tiny_r() {
        for r in 1..=14u64 {
            let interior = r.saturating_sub(1) as u32;
            let found = (0u32..1 << interior).any(|mask| {
                let mut set = vec![0, r];
                set.extend((0..interior).filter(|b| mask >> b & 1 == 1).map(|b| b as u64 + 1));
                is_sidon(&set) && cover_certificate(&set, r).unwrap().is_cover
            });
            assert_eq!(found, [1, 3, 6].contains(&r), "R = {r}");
        }
    }

    #[test]
    fn certificates() {
        let c = cover_certificate(&[0, 1, 2, 3, 6, 9], 9).unwrap();
        assert!(c.is_cover);
        let c = cover_certificate(&[0, 1], 3).unwrap();
        assert_eq!(c.missing, vec![2, 3]);
        assert!(!c.is_cover);
        assert!(cover_certificate(&[0, 5], 3).is_err());
    }

    #[test]
    fn class_b_autocorrelation_is_profile_over_m() {
        let set = vec![0, 2, 3, 7, 11, 12, 20];
        let p = AnalyticPolynomial::uniform(set.clone()).unwrap();
        let sd = autocorrelate(&p, ArithmeticMode::Exact);
        let prof = difference_profile(&set);
        let Coefficients::Exact(a) = sd.coeffs() else { panic!() };
        assert_eq!(sd.freqs(), prof.support().as_slice());
        for (n, ak) in sd.freqs().iter().zip(a) {
            assert_eq!(ak * BigInt::from(7), BigInt::from(prof.get(*n)).into());
        }
    }

    #[test]
    fn kernel_values() {
        let k = dirichlet_kernel_min(0, 16).unwrap();
        assert!((k.min_value - 1.0).abs() < 1e-12);
        assert!(dirichlet_kernel_min(8, 63).is_err());
        // direct cosine sum at the test point
        let d = 20u64;
        let k = dirichlet_kernel_min(d, 8 * d as usize).unwrap();
        let direct = 1.0 + 2.0 * (1..=d).map(|j| (j as f64 * k.test_point).cos()).sum::<f64>();
        assert!((k.test_value - direct).abs() < 1e-9);
        assert!(k.test_value < 0.0);
        assert!((dirichlet_kernel(5, 0.0) - 11.0).abs() < 1e-12);
    }
}
