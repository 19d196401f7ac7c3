//! C ABI over `putargets`.
//!
//! Every function returns a [`PtStatus`]; results go through out-pointers.
//! Histograms and measures are opaque handles created by `*_new` and
//! released by `*_free`. After a failure, [`pt_last_error`] copies the
//! message of the calling thread's most recent error.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use putargets::bernoulli::{build_histogram, count_expansions, count_nk, default_iterations, frostman_exponent, DyadicHistogram};
use putargets::scales::{dim_formula, DimCase};
use putargets::septrans::min_poly_value;
use putargets::targets::{energy_estimate, mu_ball, MeasureCase, MeasureSpec, Schedule, TargetSpec};
use putargets::{Error, Params, SymbolWord};

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Budget = 3,
    NotConverged = 4,
    ScheduleTooShort = 5,
    Insufficient = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: PtStatus, message: String) -> PtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::Validation { .. } => PtStatus::Validation,
        Error::Budget(_) => PtStatus::Budget,
        Error::NotConverged { .. } => PtStatus::NotConverged,
        Error::ScheduleTooShort { .. } => PtStatus::ScheduleTooShort,
        Error::Insufficient(_) => PtStatus::Insufficient,
    }
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), PtStatusOr>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err(PtStatusOr::Lib(e))) => fail(status_of(&e), e.to_string()),
        Ok(Err(PtStatusOr::Null(name))) => fail(PtStatus::NullPointer, format!("`{name}` is null")),
        Err(_) => fail(PtStatus::Panic, "internal panic".into()),
    }
}

enum PtStatusOr {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for PtStatusOr {
    fn from(e: Error) -> Self {
        PtStatusOr::Lib(e)
    }
}

fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, PtStatusOr> {
    // SAFETY: the caller passes either null or a valid, aligned pointer.
    unsafe { p.as_mut() }.ok_or(PtStatusOr::Null(name))
}

fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, PtStatusOr> {
    // SAFETY: non-null handles come from the matching `*_new`.
    unsafe { p.as_ref() }.ok_or(PtStatusOr::Null(name))
}

fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], PtStatusOr> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(PtStatusOr::Null(name));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn word(p: *const u8, len: usize, name: &'static str) -> Result<SymbolWord, PtStatusOr> {
    Ok(SymbolWord::from_digits(slice(p, len, name)?)?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Closed-form dimension value of case 1, 2 or 3.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dim_formula(case_index: u8, lambda: f64, gamma: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        let case = DimCase::from_index(case_index)?;
        *o = dim_formula(case, &Params::new(lambda, gamma)?);
        Ok(())
    })
}

/// Depth-`k` cylinders meeting `[x − ρλ^k, x + ρλ^k]`.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_count_nk(x: f64, rho: f64, k: usize, lambda: f64, out_count: *mut u64) -> PtStatus {
    guard(|| {
        let o = out(out_count, "out_count")?;
        *o = count_nk(x, rho, k, lambda)?.count;
        Ok(())
    })
}

/// Depth-`k` prefixes of λ-expansions of `x`.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_count_expansions(x: f64, lambda: f64, k: usize, out_count: *mut u64) -> PtStatus {
    guard(|| {
        let o = out(out_count, "out_count")?;
        *o = count_expansions(x, lambda, k)?;
        Ok(())
    })
}

/// `min |P(λ)|` over nonzero `{0, ±1}` polynomials of degree `n`.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_min_poly_value(lambda: f64, n: usize, out_value: *mut f64) -> PtStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = min_poly_value(lambda, n)?.value;
        Ok(())
    })
}

/// Opaque dyadic histogram of the Bernoulli convolution.
pub struct PtHistogram(DyadicHistogram);

/// Builds the level-`level` histogram; `iterations == 0` picks the default.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_new(lambda: f64, level: u32, iterations: usize, out_handle: *mut *mut PtHistogram) -> PtStatus {
    guard(|| {
        let o = out(out_handle, "out_handle")?;
        let it = if iterations == 0 { default_iterations(level) } else { iterations };
        *o = Box::into_raw(Box::new(PtHistogram(build_histogram(lambda, level, it)?)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`pt_histogram_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_free(h: *mut PtHistogram) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of bins, `2^level`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_bins(h: *const PtHistogram, out_bins: *mut usize) -> PtStatus {
    guard(|| {
        *out(out_bins, "out_bins")? = handle(h, "h")?.0.bins();
        Ok(())
    })
}

/// Copies `min(len, bins)` bin masses into `masses`.
///
/// # Safety
/// `masses` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_masses(h: *const PtHistogram, masses: *mut f64, len: usize) -> PtStatus {
    guard(|| {
        let h = handle(h, "h")?;
        let n = len.min(h.0.bins());
        if n > 0 {
            if masses.is_null() {
                return Err(PtStatusOr::Null("masses"));
            }
            ptr::copy_nonoverlapping(h.0.mass.as_ptr(), masses, n);
        }
        Ok(())
    })
}

/// `ν([0, x])` with mass spread uniformly inside bins.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_cdf(h: *const PtHistogram, x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(h, "h")?.0.cdf(x);
        Ok(())
    })
}

/// Empirical uniform lower exponent over all dyadic levels.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_histogram_frostman(h: *const PtHistogram, out_value: *mut f64) -> PtStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = frostman_exponent(&handle(h, "h")?.0)?.exponent;
        Ok(())
    })
}

/// Opaque Cantor measure on codings.
pub struct PtMeasure(MeasureSpec);

/// Builds the case-`case_index` measure for centre `z` (0/1 bytes) and the
/// explicit return times `returns` with growth factor `growth`.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_new(
    case_index: u8,
    lambda: f64,
    gamma: f64,
    z: *const u8,
    z_len: usize,
    returns: *const usize,
    returns_len: usize,
    growth: usize,
    out_handle: *mut *mut PtMeasure,
) -> PtStatus {
    guard(|| {
        let o = out(out_handle, "out_handle")?;
        let p = Params::new(lambda, gamma)?;
        let schedule = Schedule::explicit(slice(returns, returns_len, "returns")?.to_vec(), growth, &p)?;
        let target = TargetSpec::new(word(z, z_len, "z")?, p)?;
        let ms = MeasureSpec::new(MeasureCase::from_index(case_index)?, target, schedule)?;
        *o = Box::into_raw(Box::new(PtMeasure(ms)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`pt_measure_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_free(m: *mut PtMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Deepest coding length the schedule determines.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_coverage(m: *const PtMeasure, out_depth: *mut usize) -> PtStatus {
    guard(|| {
        *out(out_depth, "out_depth")? = handle(m, "m")?.0.coverage();
        Ok(())
    })
}

/// Mass of the cylinder of `w`.
///
/// # Safety
/// `w` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_weight(m: *const PtMeasure, w: *const u8, len: usize, out_value: *mut f64) -> PtStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        *o = handle(m, "m")?.0.weight(&word(w, len, "w")?)?;
        Ok(())
    })
}

/// Writes a `μ`-random coding of length `depth` into `digits`.
///
/// # Safety
/// `digits` must hold `depth` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_sample(m: *const PtMeasure, depth: usize, seed: u64, digits: *mut u8) -> PtStatus {
    guard(|| {
        let w = handle(m, "m")?.0.sample_path(depth, seed)?;
        if depth > 0 {
            if digits.is_null() {
                return Err(PtStatusOr::Null("digits"));
            }
            ptr::copy_nonoverlapping(w.to_digits().as_ptr(), digits, depth);
        }
        Ok(())
    })
}

/// Bounds on `μ(Q(π(x), R))`, the cube of side `2R`.
///
/// # Safety
/// `x` must hold `len` bytes; out-pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_ball(
    m: *const PtMeasure,
    x: *const u8,
    len: usize,
    radius: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> PtStatus {
    guard(|| {
        let lo = out(out_lower, "out_lower")?;
        let hi = out(out_upper, "out_upper")?;
        let b = mu_ball(&handle(m, "m")?.0, &word(x, len, "x")?, radius)?;
        (*lo, *hi) = (b.lower, b.upper);
        Ok(())
    })
}

/// Stratified Monte Carlo estimate of the `t`-energy at coding depth `depth`.
///
/// # Safety
/// Out-pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pt_measure_energy(
    m: *const PtMeasure,
    t: f64,
    pairs: usize,
    depth: usize,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> PtStatus {
    guard(|| {
        let mean = out(out_mean, "out_mean")?;
        let se = out(out_std_error, "out_std_error")?;
        let e = energy_estimate(&handle(m, "m")?.0, t, pairs, depth, seed)?;
        (*mean, *se) = (e.mean, e.std_error);
        Ok(())
    })
}
