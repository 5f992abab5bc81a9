//! Analytic polynomials with non-negative coefficients, the autocorrelation
//! expansion of `|P|^2`, and evaluation on the unit circle.
//!
//! A polynomial is stored through its probability weights `p_i`; the
//! coefficient of `z^{R_i}` is `sqrt(p_i)`, so the `L^2` norm is one by
//! construction. Square roots are only taken when evaluating in floating
//! point.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FlatError, Result};
use crate::scalar::{format_rational, parse_rational, rational_sqrt, rational_to_f64, ArithmeticMode, Scalar};

/// Default bound on the number of positive frequencies of `|P|^2`.
pub const DEFAULT_WORK_BUDGET: usize = 20_000;

/// Grid oversampling factor relative to `degree + 1`.
pub const OVERSAMPLING: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPolynomial {
    exponents: Vec<u64>,
    weights: Vec<BigRational>,
    class_b: bool,
    shift: u64,
}

impl AnalyticPolynomial {
    /// Builds a polynomial from strictly increasing exponents and positive
    /// weights summing to one. A set not containing 0 is shifted down so that
    /// its smallest exponent becomes 0; the shift is kept in [`Self::shift`].
    pub fn new(exponents: Vec<u64>, weights: Vec<BigRational>) -> Result<Self> {
        Self::with_budget(exponents, weights, DEFAULT_WORK_BUDGET)
    }

    pub fn with_budget(mut exponents: Vec<u64>, weights: Vec<BigRational>, budget: usize) -> Result<Self> {
        if exponents.is_empty() {
            return Err(FlatError::InvalidPolynomial("no exponents".into()));
        }
        if exponents.len() != weights.len() {
            return Err(FlatError::InvalidPolynomial(format!(
                "{} exponents but {} weights",
                exponents.len(),
                weights.len()
            )));
        }
        if let Some(w) = exponents.windows(2).find(|w| w[0] >= w[1]) {
            return Err(FlatError::InvalidPolynomial(format!(
                "exponents must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(p) = weights.iter().find(|p| !p.is_positive()) {
            return Err(FlatError::InvalidPolynomial(format!("weight {} is not positive", format_rational(p))));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(FlatError::InvalidPolynomial(format!(
                "weights sum to {}, not 1",
                format_rational(&total)
            )));
        }

        let shift = exponents[0];
        if shift > 0 {
            log::warn!("exponent set does not contain 0; shifting down by {shift}");
            exponents.iter_mut().for_each(|e| *e -= shift);
        }

        let m = exponents.len();
        let pairs = m * (m - 1) / 2;
        let max_n = usize::try_from(*exponents.last().unwrap()).unwrap_or(usize::MAX);
        if pairs.min(max_n) > budget {
            return Err(FlatError::Budget(format!(
                "|P|^2 may have up to {} positive frequencies, budget is {budget}",
                pairs.min(max_n)
            )));
        }

        let class_b = weights.iter().all(|w| *w == weights[0]);
        Ok(AnalyticPolynomial {
            exponents,
            weights,
            class_b,
            shift,
        })
    }

    /// Class-B polynomial `m^{-1/2} (z^{R_0} + ... + z^{R_{m-1}})`.
    pub fn uniform(exponents: Vec<u64>) -> Result<Self> {
        Self::uniform_with_budget(exponents, DEFAULT_WORK_BUDGET)
    }

    pub fn uniform_with_budget(exponents: Vec<u64>, budget: usize) -> Result<Self> {
        let m = exponents.len().max(1);
        let w = BigRational::new(BigInt::one(), BigInt::from(m));
        let weights = vec![w; exponents.len()];
        Self::with_budget(exponents, weights, budget)
    }

    pub fn constant() -> Self {
        AnalyticPolynomial {
            exponents: vec![0],
            weights: vec![BigRational::one()],
            class_b: true,
            shift: 0,
        }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// Number of non-zero coefficients.
    pub fn m(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_class_b(&self) -> bool {
        self.class_b
    }

    pub fn degree(&self) -> u64 {
        *self.exponents.last().unwrap()
    }

    /// Amount subtracted from the exponents on ingestion.
    pub fn shift(&self) -> u64 {
        self.shift
    }

    /// Coefficients `sqrt(p_i)` in floating point.
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|p| rational_to_f64(p).sqrt()).collect()
    }

    /// `P(z^l)`: every exponent multiplied by `l`.
    pub fn substitute(&self, l: u64) -> Result<Self> {
        if l == 0 {
            return Err(FlatError::InvalidInput("substitution exponent must be positive".into()));
        }
        let exponents = self
            .exponents
            .iter()
            .map(|&e| e.checked_mul(l))
            .collect::<Option<Vec<_>>>()
            .ok_or(FlatError::Overflow { index: 0 })?;
        Ok(AnalyticPolynomial {
            exponents,
            weights: self.weights.clone(),
            class_b: self.class_b,
            shift: self.shift,
        })
    }

    /// Smallest grid accepted by [`evaluate_on_grid`].
    pub fn min_grid(&self) -> usize {
        OVERSAMPLING * (self.degree() as usize + 1)
    }
}

/// Wire form: `{"exponents":[0,1,4], "weights":["1/3","1/3","1/3"]}`, weights
/// optional (uniform when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub exponents: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

impl TryFrom<PolynomialJson> for AnalyticPolynomial {
    type Error = FlatError;

    fn try_from(js: PolynomialJson) -> Result<Self> {
        match js.weights {
            None => AnalyticPolynomial::uniform(js.exponents),
            Some(ws) => {
                let weights = ws.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>()?;
                AnalyticPolynomial::new(js.exponents, weights)
            }
        }
    }
}

impl From<&AnalyticPolynomial> for PolynomialJson {
    fn from(p: &AnalyticPolynomial) -> Self {
        PolynomialJson {
            exponents: p.exponents.clone(),
            weights: (!p.class_b).then(|| p.weights.iter().map(format_rational).collect()),
        }
    }
}

impl Serialize for AnalyticPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnalyticPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let js = PolynomialJson::deserialize(d)?;
        AnalyticPolynomial::try_from(js).map_err(serde::de::Error::custom)
    }
}

/// Coefficients of `|P|^2` at the positive frequencies.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Exact(v) => v.len(),
            Coefficients::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> Scalar {
        match self {
            Coefficients::Exact(v) => Scalar::Exact(v[k].clone()),
            Coefficients::Float(v) => Scalar::Float(v[k]),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Coefficients::Exact(v) => v.iter().map(rational_to_f64).collect(),
            Coefficients::Float(v) => v.clone(),
        }
    }
}

/// `|P(z)|^2 = 1 + sum_{k=1}^{N} a_k (z^{n_k} + z^{-n_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    freqs: Vec<u64>,
    coeffs: Coefficients,
    mode: ArithmeticMode,
}

impl SpectralData {
    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    /// Number of positive frequencies.
    pub fn n(&self) -> usize {
        self.freqs.len()
    }

    /// Mode actually used; may be `Float` when `Exact` was requested.
    pub fn mode(&self) -> ArithmeticMode {
        self.mode
    }

    fn index_of(&self, n: u64) -> Option<usize> {
        self.freqs.binary_search(&n).ok()
    }

    /// `int z^n |P|^2 dz`: 1 at `n = 0`, `a_k` at `|n| = n_k`, else 0.
    pub fn fourier_coefficient(&self, n: i64) -> Scalar {
        let exact = matches!(self.coeffs, Coefficients::Exact(_));
        if n == 0 {
            return if exact { Scalar::exact_int(1) } else { Scalar::Float(1.0) };
        }
        match self.index_of(n.unsigned_abs()) {
            Some(k) => self.coeffs.get(k),
            None if exact => Scalar::exact_int(0),
            None => Scalar::Float(0.0),
        }
    }

    /// Signed frequency list `-n_N, ..., -n_1, n_1, ..., n_N`.
    pub fn signed_freqs(&self) -> Vec<i64> {
        self.freqs
            .iter()
            .rev()
            .map(|&n| -(n as i64))
            .chain(self.freqs.iter().map(|&n| n as i64))
            .collect()
    }
}

/// Expands `|P|^2`. Exact mode requires every cross term `sqrt(p_i p_j)` to be
/// rational; otherwise the computation falls back to floating point and the
/// returned data reports the mode actually used.
pub fn autocorrelate(p: &AnalyticPolynomial, mode: ArithmeticMode) -> SpectralData {
    let e = &p.exponents;
    let m = e.len();

    if mode.is_exact() {
        if p.class_b {
            let mut counts: HashMap<u64, u64> = HashMap::new();
            for i in 0..m {
                for j in i + 1..m {
                    *counts.entry(e[j] - e[i]).or_default() += 1;
                }
            }
            let mut freqs: Vec<u64> = counts.keys().copied().collect();
            freqs.sort_unstable();
            let denom = BigInt::from(m);
            let a = freqs
                .iter()
                .map(|n| BigRational::new(BigInt::from(counts[n]), denom.clone()))
                .collect();
            return SpectralData {
                freqs,
                coeffs: Coefficients::Exact(a),
                mode,
            };
        }
        if let Some(sd) = exact_general(p) {
            return sd;
        }
        log::info!("cross terms are irrational; falling back to floating point");
    }

    let c = p.coefficients_f64();
    let mut acc: HashMap<u64, f64> = HashMap::new();
    for i in 0..m {
        for j in i + 1..m {
            *acc.entry(e[j] - e[i]).or_default() += c[i] * c[j];
        }
    }
    let mut freqs: Vec<u64> = acc.keys().copied().collect();
    freqs.sort_unstable();
    let a = freqs.iter().map(|n| acc[n]).collect();
    let mode = match mode {
        ArithmeticMode::Float { tol } => ArithmeticMode::Float { tol },
        ArithmeticMode::Exact => ArithmeticMode::float(),
    };
    SpectralData {
        freqs,
        coeffs: Coefficients::Float(a),
        mode,
    }
}

fn exact_general(p: &AnalyticPolynomial) -> Option<SpectralData> {
    let e = &p.exponents;
    let w = &p.weights;
    let mut acc: HashMap<u64, BigRational> = HashMap::new();
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let root = rational_sqrt(&(&w[i] * &w[j]))?;
            *acc.entry(e[j] - e[i]).or_insert_with(BigRational::zero) += root;
        }
    }
    let mut freqs: Vec<u64> = acc.keys().copied().collect();
    freqs.sort_unstable();
    let a = freqs.iter().map(|n| acc.remove(n).unwrap()).collect();
    Some(SpectralData {
        freqs,
        coeffs: Coefficients::Exact(a),
        mode: ArithmeticMode::Exact,
    })
}

/// `P(e^{2 pi i t / G})` for `t = 0..G`, with the oversampling rule enforced.
pub fn evaluate_on_grid(p: &AnalyticPolynomial, grid_size: usize) -> Result<Vec<Complex64>> {
    let required = p.min_grid();
    if grid_size < required {
        return Err(FlatError::Undersampled {
            required,
            got: grid_size,
        });
    }
    Ok(eval_grid(p, grid_size))
}

/// Grid evaluation without the oversampling check. Exponents are folded modulo
/// the grid size, which keeps the values exact for any `grid_size >= 1`.
pub(crate) fn eval_grid(p: &AnalyticPolynomial, grid_size: usize) -> Vec<Complex64> {
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(grid_size);
    eval_sparse(p.exponents(), &p.coefficients_f64(), fft.as_ref())
}

/// Evaluates `sum_i c_i z^{e_i}` on the grid of the given inverse transform.
pub(crate) fn eval_sparse(exponents: &[u64], coefs: &[f64], fft: &dyn Fft<f64>) -> Vec<Complex64> {
    let g = fft.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    for (&e, &c) in exponents.iter().zip(coefs) {
        buf[(e % g as u64) as usize].re += c;
    }
    fft.process(&mut buf);
    buf
}

/// `(P(1), max_i sqrt(p_i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStats {
    pub sum_of_coefficients: f64,
    pub max_coefficient: f64,
}

pub fn coefficient_stats(p: &AnalyticPolynomial) -> CoefficientStats {
    let c = p.coefficients_f64();
    CoefficientStats {
        sum_of_coefficients: c.iter().sum(),
        max_coefficient: c.iter().copied().fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rejects_bad_input() {
        assert!(AnalyticPolynomial::new(vec![], vec![]).is_err());
        assert!(AnalyticPolynomial::new(vec![0, 0], vec![q(1, 2), q(1, 2)]).is_err());
        assert!(AnalyticPolynomial::new(vec![0, 1], vec![q(1, 2), q(1, 3)]).is_err());
        assert!(AnalyticPolynomial::new(vec![0, 1], vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(AnalyticPolynomial::new(vec![0], vec![q(1, 2), q(1, 2)]).is_err());
    }

    #[test]
    fn shifts_to_zero() {
        let p = AnalyticPolynomial::uniform(vec![3, 4, 7]).unwrap();
        assert_eq!(p.exponents(), &[0, 1, 4]);
        assert_eq!(p.shift(), 3);
    }

    #[test]
    fn budget_rejects_large_sets() {
        let exps: Vec<u64> = (0..300).map(|i| i * 1000).collect();
        let err = AnalyticPolynomial::uniform(exps).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        // the same set passes a generous budget
        let exps: Vec<u64> = (0..300).map(|i| i * 1000).collect();
        assert!(AnalyticPolynomial::uniform_with_budget(exps, 100_000).is_ok());
    }

    #[test]
    fn constant_has_empty_spectrum() {
        let sd = autocorrelate(&AnalyticPolynomial::constant(), ArithmeticMode::Exact);
        assert_eq!(sd.n(), 0);
    }

    #[test]
    fn two_term_class_b() {
        let p = AnalyticPolynomial::uniform(vec![0, 1]).unwrap();
        let sd = autocorrelate(&p, ArithmeticMode::Exact);
        assert_eq!(sd.freqs(), &[1]);
        assert_eq!(sd.coeffs(), &Coefficients::Exact(vec![q(1, 2)]));
        assert_eq!(sd.fourier_coefficient(0), Scalar::exact_int(1));
        assert_eq!(sd.fourier_coefficient(1), Scalar::Exact(q(1, 2)));
        assert_eq!(sd.fourier_coefficient(-1), Scalar::Exact(q(1, 2)));
        assert_eq!(sd.fourier_coefficient(2), Scalar::exact_int(0));
    }

    #[test]
    fn dirichlet_coefficients() {
        for m in 2..20u64 {
            let p = AnalyticPolynomial::uniform((0..m).collect()).unwrap();
            let sd = autocorrelate(&p, ArithmeticMode::Exact);
            let want: Vec<BigRational> = (1..m as i64).map(|j| q(m as i64 - j, m as i64)).collect();
            assert_eq!(sd.coeffs(), &Coefficients::Exact(want));
        }
    }

    #[test]
    fn exact_general_weights_with_square_products() {
        // 1/5 * 4/5 = 4/25 is a square
        let p = AnalyticPolynomial::new(vec![0, 2], vec![q(1, 5), q(4, 5)]).unwrap();
        let sd = autocorrelate(&p, ArithmeticMode::Exact);
        assert_eq!(sd.mode(), ArithmeticMode::Exact);
        assert_eq!(sd.coeffs(), &Coefficients::Exact(vec![q(2, 5)]));
    }

    #[test]
    fn irrational_cross_terms_fall_back() {
        let p = AnalyticPolynomial::new(vec![0, 1], vec![q(3, 4), q(1, 4)]).unwrap();
        let sd = autocorrelate(&p, ArithmeticMode::Exact);
        assert!(!sd.mode().is_exact());
        let a = sd.coeffs().to_f64()[0];
        assert!((a - (3f64).sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn grid_values() {
        let c = evaluate_on_grid(&AnalyticPolynomial::constant(), 8).unwrap();
        assert!(c.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let p = AnalyticPolynomial::uniform(vec![0, 1]).unwrap();
        assert!(matches!(
            evaluate_on_grid(&p, 7),
            Err(FlatError::Undersampled { required: 8, got: 7 })
        ));
        let v = evaluate_on_grid(&p, 8).unwrap();
        assert!((v[0].re - 2f64.sqrt()).abs() < 1e-14);
        assert!(v[4].norm() < 1e-14);
    }

    #[test]
    fn coefficient_stats_examples() {
        let s = coefficient_stats(&AnalyticPolynomial::constant());
        assert_eq!((s.sum_of_coefficients, s.max_coefficient), (1.0, 1.0));

        let s = coefficient_stats(&AnalyticPolynomial::uniform(vec![0, 1, 2, 3]).unwrap());
        assert!((s.sum_of_coefficients - 2.0).abs() < 1e-15);
        assert!((s.max_coefficient - 0.5).abs() < 1e-15);

        let p = AnalyticPolynomial::new(vec![0, 1], vec![q(3, 4), q(1, 4)]).unwrap();
        let s = coefficient_stats(&p);
        assert!((s.sum_of_coefficients - (0.75f64.sqrt() + 0.5)).abs() < 1e-15);
        assert!((s.max_coefficient - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_roundtrip_and_defaults() {
        let p: AnalyticPolynomial = serde_json::from_str(r#"{"exponents":[0,1,4]}"#).unwrap();
        assert!(p.is_class_b());
        let js = r#"{"exponents":[0,1],"weights":["3/4","1/4"]}"#;
        let p: AnalyticPolynomial = serde_json::from_str(js).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), js);
        assert!(serde_json::from_str::<AnalyticPolynomial>(r#"{"exponents":[0,1],"weights":["1/2"]}"#).is_err());
    }
}
