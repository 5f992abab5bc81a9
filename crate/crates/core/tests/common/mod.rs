#![allow(dead_code)]

use std::f64::consts::PI;

use flatlab::spectrum::AnalyticPolynomial;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random class-B exponent set with `0` included, `2 <= m <= max_m`.
pub fn random_set<R: Rng>(rng: &mut R, max_m: usize, max_exp: u64) -> Vec<u64> {
    let m = rng.random_range(2..=max_m);
    let mut set: Vec<u64> = index::sample(rng, max_exp as usize, m - 1)
        .iter()
        .map(|i| i as u64 + 1)
        .collect();
    set.push(0);
    set.sort_unstable();
    set
}

/// 200 random class-B polynomials (m <= 12, exponents <= 64) followed by
/// dirichlet(m) for m = 2..=32.
pub fn corpus() -> Vec<AnalyticPolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out: Vec<AnalyticPolynomial> = (0..200)
        .map(|_| AnalyticPolynomial::uniform(random_set(&mut rng, 12, 64)).unwrap())
        .collect();
    out.extend((2..=32u64).map(|m| AnalyticPolynomial::uniform((0..m).collect()).unwrap()));
    out
}

/// Polynomial with random rational weights whose square roots are rational,
/// so the exact path applies.
pub fn random_square_weighted<R: Rng>(rng: &mut R, max_m: usize, max_exp: u64) -> AnalyticPolynomial {
    let set = random_set(rng, max_m, max_exp);
    let roots: Vec<u64> = set.iter().map(|_| rng.random_range(1..=5)).collect();
    let total: u64 = roots.iter().map(|r| r * r).sum();
    let weights = roots
        .iter()
        .map(|r| BigRational::new(BigInt::from(r * r), BigInt::from(total)))
        .collect();
    AnalyticPolynomial::new(set, weights).unwrap()
}

/// `int z^n |P(z)|^2 dz` by quadrature on `g` points.
pub fn quadrature_moment(p: &AnalyticPolynomial, n: i64, g: usize) -> f64 {
    let coefs = p.coefficients_f64();
    let mut acc = 0.0;
    for t in 0..g {
        let th = 2.0 * PI * t as f64 / g as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&e, &c) in p.exponents().iter().zip(&coefs) {
            re += c * (e as f64 * th).cos();
            im += c * (e as f64 * th).sin();
        }
        acc += (re * re + im * im) * (n as f64 * th).cos();
    }
    acc / g as f64
}
