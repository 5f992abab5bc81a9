//! Covariance diagnostics of `|P|^2`: the quantities `L`, `D_k`, `A`, `B`,
//! `r`, `C`, the covariance matrix `M`, and the necessary-condition screen for
//! a.e. flat families.
//!
//! Matrix rows and columns are indexed by signed positions
//! `-N, ..., -1, 1, ..., N`, laid out as `0..2N` with `n_{-k} = -n_k`.
//! Entry `(k, l)` is `c(n_k - n_l) - a_k a_l` where `c` is the Fourier
//! coefficient of the measure `|P|^2 dz`.
//!
//! Exact sums are computed on integers: with `Q` the common denominator of
//! the `a_k` and `c_k = Q a_k`, every entry scaled by `Q^2` is the integer
//! `c(n_k - n_l) Q - c_k c_l`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FlatError, Result};
use crate::scalar::{ArithmeticMode, Scalar};
use crate::spectrum::{autocorrelate, AnalyticPolynomial, Coefficients, SpectralData};

/// Default cap on the side `2N` of a materialized covariance matrix.
pub const DEFAULT_MATRIX_CAP: usize = 4096;

/// Log-log slope of `C/m^2` against `m` above which the sequence is treated
/// as unbounded by [`verdict`].
pub const GROWTH_SLOPE_THRESHOLD: f64 = 0.5;

/// Frequency to positive index lookup.
pub(crate) enum FreqLookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, usize>),
}

impl FreqLookup {
    const DENSE_LIMIT: u64 = 1 << 22;

    pub(crate) fn new(freqs: &[u64]) -> Self {
        match freqs.last() {
            Some(&max) if max <= Self::DENSE_LIMIT => {
                let mut table = vec![0u32; max as usize + 1];
                for (k, &n) in freqs.iter().enumerate() {
                    table[n as usize] = k as u32 + 1;
                }
                FreqLookup::Dense(table)
            }
            None => FreqLookup::Dense(Vec::new()),
            Some(_) => FreqLookup::Sparse(freqs.iter().enumerate().map(|(k, &n)| (n, k)).collect()),
        }
    }

    #[inline]
    pub(crate) fn get(&self, n: u64) -> Option<usize> {
        match self {
            FreqLookup::Dense(t) => match t.get(n as usize) {
                Some(&i) if i > 0 => Some(i as usize - 1),
                _ => None,
            },
            FreqLookup::Sparse(h) => h.get(&n).copied(),
        }
    }
}

/// `D_k` for `k = 1..N`: the number of ordered pairs of distinct signed
/// frequencies whose difference is `n_k`. `D_{-k} = D_k`.
pub fn signed_difference_counts(s: &SpectralData) -> Vec<u64> {
    let signed = s.signed_freqs();
    let lookup = FreqLookup::new(s.freqs());
    s.freqs()
        .par_iter()
        .map(|&nk| {
            signed
                .iter()
                .filter(|&&x| {
                    let y = x + nk as i64;
                    y != 0 && lookup.get(y.unsigned_abs()).is_some()
                })
                .count() as u64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: Scalar,
    #[serde(rename = "A")]
    pub a: Scalar,
    #[serde(rename = "B")]
    pub b: Scalar,
    pub r: Scalar,
    #[serde(rename = "C")]
    pub c: Scalar,
    #[serde(rename = "C_over_m2")]
    pub ratio_c_over_m2: Scalar,
    #[serde(rename = "L2_over_C")]
    pub ratio_l2_over_c: Scalar,
    pub mode: ArithmeticMode,
    #[serde(default)]
    pub degenerate: bool,
}

impl DiagnosticsReport {
    pub const CSV_HEADER: &'static str = "m,N,L,A,r,C,C_over_m2,L2_over_C";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.m, self.n, self.l, self.a, self.r, self.c, self.ratio_c_over_m2, self.ratio_l2_over_c
        )
    }

    fn degenerate(m: usize, mode: ArithmeticMode) -> Self {
        let zero = if mode.is_exact() { Scalar::exact_int(0) } else { Scalar::Float(0.0) };
        DiagnosticsReport {
            m,
            n: 0,
            l: zero.clone(),
            a: zero.clone(),
            b: zero.clone(),
            r: zero.clone(),
            c: zero.clone(),
            ratio_c_over_m2: zero.clone(),
            ratio_l2_over_c: zero,
            mode,
            degenerate: true,
        }
    }
}

/// Row-parallel sweep over all `(k, l)` pairs returning the sum of entries and
/// the sum of their absolute values, every entry scaled by `scale^2`. Row sums are
/// reduced in row order so floating-point results do not depend on threads.
fn entry_sums<T>(signed: &[i64], coef: &[T], lookup: &FreqLookup, scale: &T) -> (T, T)
where
    T: Signed + Clone + Send + Sync,
{
    let n = coef.len();
    let at = |pos: usize| -> &T {
        if pos < n {
            &coef[n - 1 - pos]
        } else {
            &coef[pos - n]
        }
    };
    let rows: Vec<(T, T)> = (0..signed.len())
        .into_par_iter()
        .map(|k| {
            let ck = at(k);
            let mut sum = T::zero();
            let mut abs = T::zero();
            for l in 0..signed.len() {
                let diff = signed[k] - signed[l];
                let g = if diff == 0 {
                    scale.clone() * scale.clone()
                } else {
                    match lookup.get(diff.unsigned_abs()) {
                        Some(i) => coef[i].clone() * scale.clone(),
                        None => T::zero(),
                    }
                };
                let e = g - ck.clone() * at(l).clone();
                abs = abs + e.abs();
                sum = sum + e;
            }
            (sum, abs)
        })
        .collect();
    rows.into_iter()
        .fold((T::zero(), T::zero()), |(s, a), (rs, ra)| (s + rs, a + ra))
}

/// Exact `a_k` written as `c_k / Q` over a common denominator.
fn common_denominator(a: &[BigRational]) -> (BigInt, Vec<BigInt>) {
    let q = a.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let c = a.iter().map(|x| x.numer() * (&q / x.denom())).collect();
    (q, c)
}

fn ratio(num: BigInt, den: &BigInt) -> BigRational {
    BigRational::new(num, den.clone())
}

/// Computes the full report without materializing the covariance matrix.
pub fn compute_report(p: &AnalyticPolynomial, mode: ArithmeticMode) -> DiagnosticsReport {
    let spec = autocorrelate(p, mode);
    report_from_spectrum(p.m(), &spec)
}

pub fn report_from_spectrum(m: usize, spec: &SpectralData) -> DiagnosticsReport {
    if spec.n() == 0 {
        return DiagnosticsReport::degenerate(m, spec.mode());
    }
    let n = spec.n();
    let d = signed_difference_counts(spec);
    let signed = spec.signed_freqs();
    let lookup = FreqLookup::new(spec.freqs());

    match spec.coeffs() {
        Coefficients::Exact(a) => {
            let (q, c) = common_denominator(a);
            let q2 = &q * &q;
            let two = BigInt::from(2);
            let sum_c: BigInt = c.iter().sum();
            let l = ratio(&two * sum_c, &q);
            let ad: BigInt = c.iter().zip(&d).map(|(ck, &dk)| ck * BigInt::from(dk)).sum();
            let a_total = ratio(&two * ad, &q);

            // i128 suffices when the worst-case total stays below 2^120
            let cmax = c.iter().max().unwrap().to_f64().unwrap_or(f64::INFINITY);
            let qf = q.to_f64().unwrap_or(f64::INFINITY);
            let side = (2 * n) as f64;
            let bound = side * side * (qf * qf + cmax * qf + cmax * cmax);
            let (sum, abs) = if bound < 1.0e36 {
                let ci: Vec<i128> = c.iter().map(|x| x.to_i128().unwrap()).collect();
                let qi = q.to_i128().unwrap();
                let (s, a) = entry_sums(&signed, &ci, &lookup, &qi);
                (BigInt::from(s), BigInt::from(a))
            } else {
                entry_sums(&signed, &c, &lookup, &q)
            };
            let r = ratio(sum, &q2);
            let c_total = ratio(abs, &q2);
            let b = &l * &l;
            let m2 = BigRational::from_integer(BigInt::from(m * m));
            DiagnosticsReport {
                m,
                n,
                ratio_c_over_m2: Scalar::Exact(&c_total / &m2),
                ratio_l2_over_c: Scalar::Exact(&b / &c_total),
                l: Scalar::Exact(l),
                a: Scalar::Exact(a_total),
                b: Scalar::Exact(b),
                r: Scalar::Exact(r),
                c: Scalar::Exact(c_total),
                mode: spec.mode(),
                degenerate: false,
            }
        }
        Coefficients::Float(a) => {
            let l = 2.0 * a.iter().sum::<f64>();
            let a_total = 2.0 * a.iter().zip(&d).map(|(ak, &dk)| ak * dk as f64).sum::<f64>();
            let (r, c_total) = entry_sums(&signed, a, &lookup, &1.0);
            DiagnosticsReport {
                m,
                n,
                l: Scalar::Float(l),
                a: Scalar::Float(a_total),
                b: Scalar::Float(l * l),
                r: Scalar::Float(r),
                c: Scalar::Float(c_total),
                ratio_c_over_m2: Scalar::Float(c_total / (m * m) as f64),
                ratio_l2_over_c: Scalar::Float(l * l / c_total),
                mode: spec.mode(),
                degenerate: false,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixEntries {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Dense `2N x 2N` covariance matrix of the centered monomials
/// `X(k) = z^{n_k} - a_k` under `|P|^2 dz`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    positions: Vec<i64>,
    entries: MatrixEntries,
}

impl CovarianceMatrix {
    pub fn side(&self) -> usize {
        self.positions.len()
    }

    /// Signed frequency of each row.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn entries(&self) -> &MatrixEntries {
        &self.entries
    }

    pub fn entry(&self, k: usize, l: usize) -> Scalar {
        let i = k * self.side() + l;
        match &self.entries {
            MatrixEntries::Exact(v) => Scalar::Exact(v[i].clone()),
            MatrixEntries::Float(v) => Scalar::Float(v[i]),
        }
    }

    /// `r`: the sum of all entries.
    pub fn sum(&self) -> Scalar {
        match &self.entries {
            MatrixEntries::Exact(v) => Scalar::Exact(v.iter().sum()),
            MatrixEntries::Float(v) => Scalar::Float(v.iter().sum()),
        }
    }

    /// `C`: the sum of absolute values of all entries.
    pub fn abs_sum(&self) -> Scalar {
        match &self.entries {
            MatrixEntries::Exact(v) => Scalar::Exact(v.iter().map(|x| x.abs()).sum()),
            MatrixEntries::Float(v) => Scalar::Float(v.iter().map(|x| x.abs()).sum()),
        }
    }
}

pub fn covariance_matrix(p: &AnalyticPolynomial, mode: ArithmeticMode) -> Result<CovarianceMatrix> {
    covariance_matrix_capped(p, mode, DEFAULT_MATRIX_CAP)
}

pub fn covariance_matrix_capped(p: &AnalyticPolynomial, mode: ArithmeticMode, cap: usize) -> Result<CovarianceMatrix> {
    let spec = autocorrelate(p, mode);
    let side = 2 * spec.n();
    if side > cap {
        return Err(FlatError::MatrixCap { side, cap });
    }
    let positions = spec.signed_freqs();
    let n = spec.n();
    let idx = |pos: usize| if pos < n { n - 1 - pos } else { pos - n };
    let lookup = FreqLookup::new(spec.freqs());
    let entries = match spec.coeffs() {
        Coefficients::Exact(a) => {
            let mut v = Vec::with_capacity(side * side);
            for k in 0..side {
                for l in 0..side {
                    let diff = positions[k] - positions[l];
                    let g = if diff == 0 {
                        BigRational::one()
                    } else {
                        lookup.get(diff.unsigned_abs()).map_or_else(BigRational::zero, |i| a[i].clone())
                    };
                    v.push(g - &a[idx(k)] * &a[idx(l)]);
                }
            }
            MatrixEntries::Exact(v)
        }
        Coefficients::Float(a) => {
            let mut v = Vec::with_capacity(side * side);
            for k in 0..side {
                for l in 0..side {
                    let diff = positions[k] - positions[l];
                    let g = if diff == 0 {
                        1.0
                    } else {
                        lookup.get(diff.unsigned_abs()).map_or(0.0, |i| a[i])
                    };
                    v.push(g - a[idx(k)] * a[idx(l)]);
                }
            }
            MatrixEntries::Float(v)
        }
    };
    Ok(CovarianceMatrix { positions, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictFlag {
    /// `L_j` bounded away from zero while `C_j / m_j^2` stays bounded: the
    /// family fails the necessary condition.
    CannotBeFlat,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryConditionVerdict {
    pub l_floor: f64,
    pub min_l: f64,
    pub l_bounded_away: bool,
    pub m: Vec<usize>,
    pub c_over_m2: Vec<f64>,
    pub increasing: bool,
    /// Least-squares slope of `log(C/m^2)` against `log m` over the upper half
    /// of the family (by `m`), when at least two distinct `m` are present.
    pub growth_slope: Option<f64>,
    pub unbounded: bool,
    pub flag: VerdictFlag,
}

/// Screens a family against the necessary condition `C_j / m_j^2 -> infinity`.
/// The outcome never asserts flatness.
pub fn verdict(family: &[DiagnosticsReport], l_floor: f64) -> Result<NecessaryConditionVerdict> {
    if family.is_empty() {
        return Err(FlatError::InvalidInput("verdict needs a non-empty family".into()));
    }
    if !(l_floor > 0.0) {
        return Err(FlatError::InvalidInput("L floor must be positive".into()));
    }
    let min_l = family.iter().map(|r| r.l.to_f64()).fold(f64::INFINITY, f64::min);
    let l_bounded_away = min_l >= l_floor;
    let m: Vec<usize> = family.iter().map(|r| r.m).collect();
    let c_over_m2: Vec<f64> = family.iter().map(|r| r.ratio_c_over_m2.to_f64()).collect();
    let increasing = c_over_m2.len() > 1 && c_over_m2.last() > c_over_m2.first();

    let pts: Vec<(f64, f64)> = family
        .iter()
        .filter(|r| !r.degenerate && r.ratio_c_over_m2.to_f64() > 0.0)
        .map(|r| (r.m as f64, r.ratio_c_over_m2.to_f64()))
        .collect();
    let growth_slope = upper_half_slope(&pts);
    let unbounded = growth_slope.is_some_and(|s| s > GROWTH_SLOPE_THRESHOLD);
    let flag = if l_bounded_away && growth_slope.is_some() && !unbounded {
        VerdictFlag::CannotBeFlat
    } else {
        VerdictFlag::Inconclusive
    };
    Ok(NecessaryConditionVerdict {
        l_floor,
        min_l,
        l_bounded_away,
        m,
        c_over_m2,
        increasing,
        growth_slope,
        unbounded,
        flag,
    })
}

fn upper_half_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let max_m = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let upper: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 >= max_m / 2.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = upper.len() as f64;
    let mx = upper.iter().map(|p| p.0).sum::<f64>() / n;
    let my = upper.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = upper.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if upper.len() < 2 || sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = upper.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Running partial sums of `L_j^2 / C_j`.
pub fn singularity_series(family: &[DiagnosticsReport]) -> Result<Vec<f64>> {
    let mut total = 0.0;
    family
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let c = r.c.to_f64();
            if !(c > 0.0) {
                return Err(FlatError::InvalidInput(format!("report {j} has C = 0")));
            }
            total += r.ratio_l2_over_c.to_f64();
            Ok(total)
        })
        .collect()
}
