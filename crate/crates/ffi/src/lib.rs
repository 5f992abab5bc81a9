//! C ABI over `flatlab`.
//!
//! Every fallible function returns an [`FlStatus`] and writes its result
//! through an out-pointer. On failure, [`fl_last_error`] returns a message
//! for the calling thread. Polynomials are opaque [`FlPolynomial`] handles
//! released with [`fl_polynomial_free`]; strings returned by the library are
//! released with [`fl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use flatlab::diagnostics::compute_report;
use flatlab::families;
use flatlab::montecarlo::{run_experiment, ExperimentConfig};
use flatlab::riesz;
use flatlab::scalar::ArithmeticMode;
use flatlab::spectrum::AnalyticPolynomial;
use flatlab::FlatError;
use num_bigint::BigInt;
use num_rational::BigRational;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Budget = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlMode {
    Exact = 0,
    Float = 1,
}

/// Opaque polynomial handle.
pub struct FlPolynomial(AnalyticPolynomial);

/// Diagnostics report with every quantity rounded to `double`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlReport {
    pub m: usize,
    pub n: usize,
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub c: f64,
    pub c_over_m2: f64,
    pub l2_over_c: f64,
    /// True when the values were computed in exact arithmetic.
    pub exact: bool,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlFlatness {
    pub grid_size: usize,
    pub l1_abs: f64,
    pub l1_sq: f64,
    pub sup_dev: f64,
    pub near_one_fraction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlMonteCarloConfig {
    pub r: u64,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub grid_factor: usize,
    pub confidence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlMonteCarloResult {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_l1: f64,
    pub samples_used: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlLambda {
    /// Exact value, or 0 when the node budget ran out.
    pub lambda: usize,
    pub lower: usize,
    pub upper: usize,
    pub complete: bool,
    pub nodes: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &FlatError) -> FlStatus {
    match e.exit_code() {
        2 => FlStatus::InvalidInput,
        3 => FlStatus::Budget,
        _ => FlStatus::Internal,
    }
}

struct Fail(FlStatus, String);

impl From<FlatError> for Fail {
    fn from(e: FlatError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            FlStatus::Internal
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn poly_ref<'a>(p: *const FlPolynomial) -> Result<&'a AnalyticPolynomial, Fail> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null("polynomial"))
}

fn mode_of(mode: FlMode) -> ArithmeticMode {
    match mode {
        FlMode::Exact => ArithmeticMode::Exact,
        FlMode::Float => ArithmeticMode::float(),
    }
}

unsafe fn emit_handle(out: *mut *mut FlPolynomial, p: AnalyticPolynomial) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(FlPolynomial(p)));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a polynomial from `len` strictly increasing exponents. With
/// `weight_num` and `weight_den` both null the weights are uniform;
/// otherwise weight `i` is `weight_num[i] / weight_den[i]` and the weights
/// must sum to 1.
///
/// # Safety
/// Non-null array arguments must point to `len` readable elements and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_new(
    exponents: *const u64,
    weight_num: *const i64,
    weight_den: *const i64,
    len: usize,
    out: *mut *mut FlPolynomial,
) -> FlStatus {
    guard(|| {
        if exponents.is_null() {
            return Err(null("exponents"));
        }
        let exps = slice::from_raw_parts(exponents, len).to_vec();
        let p = match (weight_num.is_null(), weight_den.is_null()) {
            (true, true) => AnalyticPolynomial::uniform(exps)?,
            (false, false) => {
                let nums = slice::from_raw_parts(weight_num, len);
                let dens = slice::from_raw_parts(weight_den, len);
                let mut weights = Vec::with_capacity(len);
                for (&n, &d) in nums.iter().zip(dens) {
                    if d == 0 {
                        return Err(Fail(FlStatus::InvalidInput, "zero weight denominator".into()));
                    }
                    weights.push(BigRational::new(BigInt::from(n), BigInt::from(d)));
                }
                AnalyticPolynomial::new(exps, weights)?
            }
            _ => return Err(null("one of weight_num / weight_den")),
        };
        emit_handle(out, p)
    })
}

/// Parses `{"exponents": [...], "weights": ["p/q", ...]}` (weights optional).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_from_json(json: *const c_char, out: *mut *mut FlPolynomial) -> FlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(FlStatus::InvalidInput, format!("json is not UTF-8: {e}")))?;
        let p: AnalyticPolynomial = serde_json::from_str(text).map_err(|e| {
            Fail(
                FlStatus::InvalidInput,
                format!("parse error at {}:{}: {e}", e.line(), e.column()),
            )
        })?;
        emit_handle(out, p)
    })
}

/// Dirichlet polynomial of length `m`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_dirichlet(m: u64, out: *mut *mut FlPolynomial) -> FlStatus {
    guard(|| emit_handle(out, families::dirichlet(m)?))
}

/// Two-block polynomial on `{0..j-1} ∪ {j, 2j, ..., j^2}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_two_block(j: u64, out: *mut *mut FlPolynomial) -> FlStatus {
    guard(|| emit_handle(out, families::two_block(j)?))
}

/// Class-B polynomial on the `2R`-element cover of `[1, R^2]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_lambda_cover(r: u64, out: *mut *mut FlPolynomial) -> FlStatus {
    guard(|| emit_handle(out, families::lambda_cover(r)?))
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_free(p: *mut FlPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of terms, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_len(p: *const FlPolynomial) -> usize {
    p.as_ref().map_or(0, |h| h.0.m())
}

/// Degree, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_polynomial_degree(p: *const FlPolynomial) -> u64 {
    p.as_ref().map_or(0, |h| h.0.degree())
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_report(p: *const FlPolynomial, mode: FlMode, out: *mut FlReport) -> FlStatus {
    guard(|| {
        let r = compute_report(poly_ref(p)?, mode_of(mode));
        write_out(
            out,
            FlReport {
                m: r.m,
                n: r.n,
                l: r.l.to_f64(),
                a: r.a.to_f64(),
                b: r.b.to_f64(),
                r: r.r.to_f64(),
                c: r.c.to_f64(),
                c_over_m2: r.ratio_c_over_m2.to_f64(),
                l2_over_c: r.ratio_l2_over_c.to_f64(),
                exact: r.mode.is_exact(),
                degenerate: r.degenerate,
            },
        )
    })
}

/// Report as JSON; exact values appear as `"num/den"` strings. Free the
/// result with [`fl_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_report_json(p: *const FlPolynomial, mode: FlMode, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let r = compute_report(poly_ref(p)?, mode_of(mode));
        let text = serde_json::to_string(&r).map_err(|e| Fail(FlStatus::Internal, e.to_string()))?;
        let c = CString::new(text).map_err(|e| Fail(FlStatus::Internal, e.to_string()))?;
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Flatness metrics on `grid_size` points (0 picks `4 (deg + 1)`).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_flatness(p: *const FlPolynomial, grid_size: usize, out: *mut FlFlatness) -> FlStatus {
    guard(|| {
        let p = poly_ref(p)?;
        let g = if grid_size == 0 { p.min_grid() } else { grid_size };
        let f = riesz::flatness(p, g)?;
        write_out(
            out,
            FlFlatness {
                grid_size: f.grid_size,
                l1_abs: f.l1_abs,
                l1_sq: f.l1_sq,
                sup_dev: f.sup_dev,
                near_one_fraction: f.near_one_fraction,
            },
        )
    })
}

/// Config with the library defaults.
#[no_mangle]
pub extern "C" fn fl_montecarlo_config_default(r: u64, epsilon: f64, samples: usize, seed: u64) -> FlMonteCarloConfig {
    let c = ExperimentConfig::new(r, epsilon, samples, seed);
    FlMonteCarloConfig {
        r: c.r,
        epsilon: c.epsilon,
        samples: c.samples,
        seed: c.seed,
        grid_factor: c.grid_factor,
        confidence: c.confidence,
    }
}

/// Hoeffding-interval estimate of `E(epsilon, R)`.
///
/// # Safety
/// `cfg` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_montecarlo(cfg: *const FlMonteCarloConfig, out: *mut FlMonteCarloResult) -> FlStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        let mut config = ExperimentConfig::new(c.r, c.epsilon, c.samples, c.seed);
        config.grid_factor = c.grid_factor;
        config.confidence = c.confidence;
        let res = run_experiment(&config)?;
        write_out(
            out,
            FlMonteCarloResult {
                estimate: res.estimate,
                ci_low: res.ci_low,
                ci_high: res.ci_high,
                mean_l1: res.mean_l1,
                samples_used: res.samples_used,
            },
        )
    })
}

/// Exact `lambda(R)` with `budget` search nodes (0 for none). The witness is
/// copied into `witness` when it fits in `witness_cap` elements; its length
/// always goes to `witness_len`.
///
/// # Safety
/// `out` and `witness_len` must be writable; `witness` must be null or hold
/// `witness_cap` elements.
#[no_mangle]
pub unsafe extern "C" fn fl_lambda_exact(
    r: u64,
    budget: u64,
    out: *mut FlLambda,
    witness: *mut u64,
    witness_cap: usize,
    witness_len: *mut usize,
) -> FlStatus {
    guard(|| {
        let res = families::lambda_exact(r, (budget > 0).then_some(budget))?;
        write_out(witness_len, res.witness.len())?;
        if !witness.is_null() && res.witness.len() <= witness_cap {
            ptr::copy_nonoverlapping(res.witness.as_ptr(), witness, res.witness.len());
        }
        write_out(
            out,
            FlLambda {
                lambda: res.lambda.unwrap_or(0),
                lower: res.lower,
                upper: res.upper,
                complete: res.complete,
                nodes: res.nodes,
            },
        )
    })
}
