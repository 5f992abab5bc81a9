//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use flatlab::diagnostics::{compute_report, covariance_matrix, signed_difference_counts, verdict, VerdictFlag};
use flatlab::families::{
    cover_certificate, difference_profile, dirichlet, lambda_cover_set, lambda_exact, two_block, two_block_set,
};
use flatlab::montecarlo::{class_b_l1_sq, run_experiment, sample_statistics, ExperimentConfig};
use flatlab::riesz::{flatness, partial_density, schedule};
use flatlab::scalar::{ArithmeticMode, Scalar};
use flatlab::spectrum::{autocorrelate, AnalyticPolynomial, Coefficients};
use flatlab::FlatError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ex(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exact(s: &Scalar) -> BigRational {
    s.as_exact().cloned().expect("exact scalar")
}

fn criterion_1(corpus: &[AnalyticPolynomial]) -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    for p in corpus {
        let r = compute_report(p, ArithmeticMode::Exact);
        let l = exact(&r.l);
        let rhs = exact(&r.a) + ex(2 * r.n as i64) - &l * &l;
        if exact(&r.r) != rhs {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0 && secs < 10.0,
        format!("{} polynomials, {bad} mismatches, {secs:.2}s", corpus.len()),
    )
}

fn criterion_2(corpus: &[AnalyticPolynomial]) -> Outcome {
    let (mut l_bad, mut n_bad, mut d_bad, mut a_bad) = (0, 0, 0, 0);
    let mut first_d: Option<String> = None;
    for p in corpus {
        let m = p.m() as i64;
        let spec = autocorrelate(p, ArithmeticMode::Exact);
        let r = compute_report(p, ArithmeticMode::Exact);
        let l = exact(&r.l);
        let n = r.n as i64;
        if l > ex(m - 1) {
            l_bad += 1;
        }
        if n < m - 1 || n > m * (m - 1) / 2 {
            n_bad += 1;
        }
        for (k, &dk) in signed_difference_counts(&spec).iter().enumerate() {
            let bound = 2 * n - 2 * (k as i64 + 1) + 2;
            if dk as i64 > bound {
                d_bad += 1;
                first_d.get_or_insert_with(|| {
                    format!("S = {:?}, k = {}, D_k = {dk} > {bound}", p.exponents(), k + 1)
                });
            }
        }
        if exact(&r.a).abs() > ex(m * (m - 1)) * &l {
            a_bad += 1;
        }
    }
    let mut detail = format!("violations: L {l_bad}, N {n_bad}, D_k {d_bad}, |A| {a_bad}");
    if let Some(f) = first_d {
        detail.push_str(&format!("; first D_k violation {f}"));
    }
    outcome(l_bad + n_bad + d_bad + a_bad == 0, detail)
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for m in 2..=64u64 {
        let p = dirichlet(m).unwrap();
        let spec = autocorrelate(&p, ArithmeticMode::Exact);
        let Coefficients::Exact(a) = spec.coeffs() else {
            bad.push(m);
            continue;
        };
        let mi = m as i64;
        let freqs_ok = spec.freqs() == (1..m).collect::<Vec<_>>().as_slice();
        let coeffs_ok = a
            .iter()
            .zip(1..)
            .all(|(aj, j)| *aj == BigRational::new(BigInt::from(mi - j), BigInt::from(mi)));
        let prof = difference_profile(p.exponents());
        let sum: BigRational = spec
            .freqs()
            .iter()
            .zip(a)
            .map(|(&n, aj)| aj * ex(prof.get(n) as i64))
            .sum::<BigRational>()
            * ex(2);
        let target = BigRational::new(BigInt::from((mi - 1) * (2 * mi - 1)), BigInt::from(3));
        if !(freqs_ok && coeffs_ok && sum == target) {
            bad.push(m);
        }
    }
    outcome(bad.is_empty(), format!("m = 2..64, failures at {bad:?}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for r in 2..=64u64 {
        let set = lambda_cover_set(r).unwrap();
        let cert = cover_certificate(&set, r * r).unwrap();
        if set.len() as u64 != 2 * r || !cert.is_cover {
            pass = false;
            notes.push(format!("cover fails at R = {r}"));
        }
    }
    let l4 = lambda_exact(4, None).unwrap().lambda;
    let l9 = lambda_exact(9, None).unwrap().lambda;
    if l4 != Some(4) || l9 != Some(5) {
        pass = false;
    }
    notes.push(format!("lambda(4) = {l4:?}, lambda(9) = {l9:?}"));
    let mut vals = Vec::new();
    for r in 2..=6u64 {
        let res = lambda_exact(r * r, None).unwrap();
        let Some(l) = res.lambda else {
            pass = false;
            continue;
        };
        vals.push(l);
        let lower = 2f64.sqrt() * r as f64;
        if !(lower < l as f64 && l as u64 <= 2 * r) {
            pass = false;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("lambda(R^2) for R = 2..6: {vals:?}"));
    outcome(pass && secs < 60.0, format!("{}, {secs:.2}s", notes.join("; ")))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for j in 2..=32u64 {
        let set = two_block_set(j).unwrap();
        let prof = difference_profile(&set);
        if set.len() as u64 != 2 * j || prof.support() != (1..=j * j).collect::<Vec<_>>() {
            pass = false;
            notes.push(format!("support fails at j = {j}"));
        }
    }
    let ratios: Vec<BigRational> = (4..=32u64)
        .map(|j| {
            let r = compute_report(&two_block(j).unwrap(), ArithmeticMode::Exact);
            exact(&r.c) / ex((4 * j * j) as i64)
        })
        .collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    if !increasing {
        pass = false;
    }
    let min_l1 = (8..=32u64)
        .map(|j| {
            let p = two_block(j).unwrap();
            flatness(&p, p.min_grid()).unwrap().l1_abs
        })
        .fold(f64::INFINITY, f64::min);
    if !(min_l1 > 0.1) {
        pass = false;
    }
    notes.push(format!(
        "C/(2j)^2 strictly increasing over j = 4..32: {increasing} ({:.4} -> {:.4}); min l1_abs over j = 8..32: {min_l1:.4}",
        flatlab::scalar::rational_to_f64(&ratios[0]),
        flatlab::scalar::rational_to_f64(ratios.last().unwrap())
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let dir: Vec<_> = (4..=64u64)
        .map(|m| compute_report(&dirichlet(m).unwrap(), ArithmeticMode::Exact))
        .collect();
    let tb: Vec<_> = (2..=32u64)
        .map(|j| compute_report(&two_block(j).unwrap(), ArithmeticMode::Exact))
        .collect();
    let vd = verdict(&dir, 1.0).unwrap();
    let vt = verdict(&tb, 1.0).unwrap();
    outcome(
        vd.flag == VerdictFlag::CannotBeFlat && vt.flag == VerdictFlag::Inconclusive,
        format!(
            "dirichlet {:?} (slope {:.3}), two-block {:?} (slope {:.3})",
            vd.flag,
            vd.growth_slope.unwrap_or(f64::NAN),
            vt.flag,
            vt.growth_slope.unwrap_or(f64::NAN)
        ),
    )
}

fn gram_error(p: &AnalyticPolynomial) -> f64 {
    let mat = covariance_matrix(p, ArithmeticMode::Exact).unwrap();
    let pos = mat.positions();
    let deg = p.degree() as usize;
    let g = 4 * (3 * deg + 1);
    let coefs = p.coefficients_f64();
    let thetas: Vec<f64> = (0..g).map(|t| 2.0 * PI * t as f64 / g as f64).collect();
    let dens: Vec<f64> = thetas
        .iter()
        .map(|&th| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&e, &c) in p.exponents().iter().zip(&coefs) {
                re += c * (e as f64 * th).cos();
                im += c * (e as f64 * th).sin();
            }
            re * re + im * im
        })
        .collect();
    let moment = |n: i64| thetas.iter().zip(&dens).map(|(&th, &d)| d * (n as f64 * th).cos()).sum::<f64>() / g as f64;
    let a: Vec<f64> = pos.iter().map(|&n| moment(n)).collect();
    let mut worst: f64 = 0.0;
    for k in 0..pos.len() {
        for l in 0..pos.len() {
            // Re of (z^{n_k} - a_k)(z^{-n_l} - a_l) |P|^2
            let q = thetas
                .iter()
                .zip(&dens)
                .map(|(&th, &d)| {
                    let (sk, ck) = (pos[k] as f64 * th).sin_cos();
                    let (sl, cl) = (pos[l] as f64 * th).sin_cos();
                    let re = (ck - a[k]) * (cl - a[l]) + sk * sl;
                    d * re
                })
                .sum::<f64>()
                / g as f64;
            worst = worst.max((q - mat.entry(k, l).to_f64()).abs());
        }
    }
    worst
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut polys = Vec::new();
    while polys.len() < 20 {
        let p = if polys.len() % 2 == 0 {
            AnalyticPolynomial::uniform(common::random_set(&mut rng, 10, 40)).unwrap()
        } else {
            common::random_square_weighted(&mut rng, 10, 40)
        };
        if autocorrelate(&p, ArithmeticMode::Exact).n() <= 64 {
            polys.push(p);
        }
    }
    let worst = polys.iter().map(gram_error).fold(0.0, f64::max);
    outcome(worst <= 1e-9, format!("20 polynomials, max |error| = {worst:.3e}"))
}

fn reports_equal(p: &AnalyticPolynomial, q: &AnalyticPolynomial) -> bool {
    let a = compute_report(p, ArithmeticMode::Exact);
    let b = compute_report(q, ArithmeticMode::Exact);
    a == b
}

fn criterion_8(corpus: &[AnalyticPolynomial]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut verified, mut skipped, mut failed) = (0, 0, 0);
    let mut worst_mean: f64 = 0.0;
    for _ in 0..40 {
        let k = rand::Rng::random_range(&mut rng, 1..=4);
        let factors: Vec<_> = (0..k)
            .map(|_| AnalyticPolynomial::uniform(common::random_set(&mut rng, 4, 6)).unwrap())
            .collect();
        let s = schedule(factors).unwrap();
        match s.verify_dissociated(s.len()) {
            Ok(true) => verified += 1,
            Ok(false) => failed += 1,
            Err(FlatError::Budget(_)) => skipped += 1,
            Err(e) => panic!("{e}"),
        }
        let g = s.min_grid(s.len());
        for prefix in 0..=s.len() {
            let d = partial_density(&s, prefix, g).unwrap();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            worst_mean = worst_mean.max((mean - 1.0).abs());
        }
    }
    let mut invariance_bad = 0;
    for p in corpus.iter().step_by(5) {
        for l in [2u64, 3, 5] {
            if !reports_equal(p, &p.substitute(l).unwrap()) {
                invariance_bad += 1;
            }
        }
    }
    outcome(
        failed == 0 && verified > 0 && worst_mean <= 1e-9 && invariance_bad == 0,
        format!(
            "schedules verified {verified}, not dissociated {failed}, over budget {skipped}; max |mean - 1| = {worst_mean:.2e}; z^l invariance failures {invariance_bad}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let base = ExperimentConfig::new(2, 0.5, 10_000, 0);
    let g = base.grid_factor * 5;
    let fft = FftPlanner::new().plan_fft_inverse(g);
    let mut values = Vec::new();
    for a in 1..=3u64 {
        for b in a + 1..=3 {
            values.push(class_b_l1_sq(&[0, a, b, 4], fft.as_ref()));
        }
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let eps = if sorted.len() > 1 { (sorted[0] + sorted[1]) / 2.0 } else { sorted[0] / 2.0 };
    let truth = values.iter().filter(|&&v| v > eps).count() as f64 / values.len() as f64;

    let mut covered = 0;
    for trial in 0..100u64 {
        let cfg = ExperimentConfig {
            epsilon: eps,
            seed: trial,
            ..base.clone()
        };
        let res = run_experiment(&cfg).unwrap();
        if res.ci_low <= truth && truth <= res.ci_high {
            covered += 1;
        }
    }

    let cfg = ExperimentConfig::new(6, 0.5, 2000, 42);
    let runs: Vec<Vec<u64>> = [1, 2, 8]
        .iter()
        .map(|&t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| sample_statistics(&cfg).unwrap())
                .iter()
                .map(|x| x.to_bits())
                .collect()
        })
        .collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        covered >= 90 && identical,
        format!("truth E = {truth:.4} at eps = {eps:.4}; covered {covered}/100; thread-identical {identical}"),
    )
}

fn criterion_10(corpus: &[AnalyticPolynomial]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut struct_bad = 0;
    for p in corpus {
        let e = compute_report(p, ArithmeticMode::Exact);
        let f = compute_report(p, ArithmeticMode::float());
        if e.m != f.m || e.n != f.n || e.degenerate != f.degenerate {
            struct_bad += 1;
        }
        for (x, y) in [
            (&e.l, &f.l),
            (&e.a, &f.a),
            (&e.b, &f.b),
            (&e.r, &f.r),
            (&e.c, &f.c),
            (&e.ratio_c_over_m2, &f.ratio_c_over_m2),
            (&e.ratio_l2_over_c, &f.ratio_l2_over_c),
        ] {
            worst = worst.max((x.to_f64() - y.to_f64()).abs());
        }
    }
    outcome(
        worst <= 1e-9 && struct_bad == 0,
        format!("max |float - exact| = {worst:.3e}, integer-field mismatches {struct_bad}"),
    )
}

fn main() -> ExitCode {
    let corpus = common::corpus();
    let checks: Vec<(u32, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(|| criterion_1(&corpus))),
        (2, Box::new(|| criterion_2(&corpus))),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(|| criterion_8(&corpus))),
        (9, Box::new(criterion_9)),
        (10, Box::new(|| criterion_10(&corpus))),
    ];
    let mut failures = 0;
    for (id, check) in checks {
        let o = check();
        println!("{} criterion {id:>2}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
