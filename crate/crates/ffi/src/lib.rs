//! C ABI for `ginibre_gap`.
//!
//! Ensembles and kernel evaluators are opaque heap handles created by
//! `*_new` and released by `*_free`. Every fallible call returns a
//! `GgStatus`; on failure the message is kept per thread and can be read
//! with `gg_last_error`. Outputs are written only on `GG_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ginibre_gap::dynamics::{integrate_through, trajectory_seed, IntegrateOptions};
use ginibre_gap::fredholm::{gap_probability, FredholmOptions, IntervalUnion};
use ginibre_gap::kernel::KernelEvaluator;
use ginibre_gap::montecarlo::{empirical_gap, SamplerConfig};
use ginibre_gap::{EnsembleSpec, GapError, QRoute};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgStatus {
    Ok = 0,
    InvalidParameter = 1,
    Pole = 2,
    Truncation = 3,
    ContourNonDecay = 4,
    NearResonance = 5,
    SingularOperator = 6,
    NotConverged = 7,
    StepCollapse = 8,
    ConservationDrift = 9,
    SeedTooLarge = 10,
    Unsupported = 11,
    NullPointer = 12,
    Panic = 13,
}

/// Evaluation route of the Q functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GgRoute {
    Auto = 0,
    Series = 1,
    Contour = 2,
}

/// Opaque ensemble handle.
pub struct GgEnsemble(EnsembleSpec);

/// Opaque kernel evaluator handle.
pub struct GgKernel(KernelEvaluator);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn status_of(e: &GapError) -> GgStatus {
    match e {
        GapError::InvalidParameter(_) => GgStatus::InvalidParameter,
        GapError::Pole(_) => GgStatus::Pole,
        GapError::Truncation { .. } => GgStatus::Truncation,
        GapError::ContourNonDecay(_) => GgStatus::ContourNonDecay,
        GapError::NearResonance(_) => GgStatus::NearResonance,
        GapError::SingularOperator => GgStatus::SingularOperator,
        GapError::NotConverged { .. } => GgStatus::NotConverged,
        GapError::StepCollapse { .. } => GgStatus::StepCollapse,
        GapError::ConservationDrift { .. } => GgStatus::ConservationDrift,
        GapError::SeedTooLarge(_) => GgStatus::SeedTooLarge,
        GapError::Unsupported(_) => GgStatus::Unsupported,
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Gap(GapError),
    Null(&'static str),
}

impl From<GapError> for Fail {
    fn from(e: GapError) -> Self {
        Fail::Gap(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GgStatus::Ok
        }
        Ok(Err(Fail::Gap(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            GgStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            GgStatus::Panic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(ptr: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if ptr.is_null() {
        return Err(Fail::Null(what));
    }
    ptr.write(value);
    Ok(())
}

fn fredholm_options(tol: f64) -> FredholmOptions {
    if tol > 0.0 {
        FredholmOptions { tol, ..Default::default() }
    } else {
        FredholmOptions::default()
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`) and returns its full length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn gg_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && cap > 0 {
            let k = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Creates an ensemble with M factors, n particles, exponents ν₁..ν_M and
/// thinning λ ∈ [0, 1].
///
/// # Safety
/// `nu` must be valid for `nu_len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gg_ensemble_new(m: usize, n: usize, nu: *const f64, nu_len: usize, lambda: f64, out: *mut *mut GgEnsemble) -> GgStatus {
    guard(|| {
        let nu = slice(nu, nu_len, "nu")?;
        let spec = EnsembleSpec::new(m, n, nu, lambda)?;
        write(out, Box::into_raw(Box::new(GgEnsemble(spec))), "out")
    })
}

/// Releases an ensemble; null is ignored.
///
/// # Safety
/// `ens` must come from `gg_ensemble_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gg_ensemble_free(ens: *mut GgEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// E(0; (0, s)) by the Fredholm determinant. `tol <= 0` selects the default.
///
/// # Safety
/// Pointers must be valid; `est_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn gg_gap_probability(ens: *const GgEnsemble, s: f64, tol: f64, value: *mut f64, est_error: *mut f64) -> GgStatus {
    guard(|| {
        let e = handle(ens, "ensemble")?;
        let r = gap_probability(&e.0, &IntervalUnion::hard_edge(s)?, &fredholm_options(tol))?;
        if !est_error.is_null() {
            est_error.write(r.est_error);
        }
        write(value, r.value, "value")
    })
}

/// E(0; J) for J = (a₁, a₂) ∪ (a₃, a₄) ∪ ⋯ given by `2k` increasing endpoints.
///
/// # Safety
/// `endpoints` must be valid for `len` reads; `est_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn gg_gap_probability_union(
    ens: *const GgEnsemble,
    endpoints: *const f64,
    len: usize,
    tol: f64,
    value: *mut f64,
    est_error: *mut f64,
) -> GgStatus {
    guard(|| {
        let e = handle(ens, "ensemble")?;
        let j = IntervalUnion::from_endpoints(slice(endpoints, len, "endpoints")?)?;
        let r = gap_probability(&e.0, &j, &fredholm_options(tol))?;
        if !est_error.is_null() {
            est_error.write(r.est_error);
        }
        write(value, r.value, "value")
    })
}

/// τ(s) = E(0; (0, s)) at increasing positive `s_grid` points by integrating
/// the isomonodromic flow. `tol <= 0` selects the default.
///
/// # Safety
/// `s_grid` and `tau` must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn gg_gap_dynamics(ens: *const GgEnsemble, s_grid: *const f64, len: usize, tol: f64, tau: *mut f64) -> GgStatus {
    guard(|| {
        let e = handle(ens, "ensemble")?;
        let grid = slice(s_grid, len, "s_grid")?;
        let out = slice_mut(tau, len, "tau")?;
        if grid.is_empty() {
            return Ok(());
        }
        let opts = if tol > 0.0 { IntegrateOptions { tol, ..Default::default() } } else { IntegrateOptions::default() };
        let states = integrate_through(&trajectory_seed(&e.0)?, &e.0, grid, &opts)?;
        for (o, st) in out.iter_mut().zip(&states) {
            *o = st.tau();
        }
        Ok(())
    })
}

/// Creates a kernel evaluator for the ensemble.
///
/// # Safety
/// `ens` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gg_kernel_new(ens: *const GgEnsemble, route: GgRoute, out: *mut *mut GgKernel) -> GgStatus {
    guard(|| {
        let e = handle(ens, "ensemble")?;
        let route = match route {
            GgRoute::Auto => QRoute::Auto,
            GgRoute::Series => QRoute::Series,
            GgRoute::Contour => QRoute::Contour,
        };
        let k = KernelEvaluator::new(&e.0, route)?;
        write(out, Box::into_raw(Box::new(GgKernel(k))), "out")
    })
}

/// Releases a kernel evaluator; null is ignored.
///
/// # Safety
/// `k` must come from `gg_kernel_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gg_kernel_free(k: *mut GgKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// K_n(x, y) in the integrable form.
///
/// # Safety
/// `k` must be valid; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gg_kernel_eval(k: *const GgKernel, x: f64, y: f64, value: *mut f64) -> GgStatus {
    guard(|| write(value, handle(k, "kernel")?.0.eval(x, y)?, "value"))
}

/// K_n(x, y) as the finite biorthogonal sum.
///
/// # Safety
/// `k` must be valid; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gg_kernel_eval_sum(k: *const GgKernel, x: f64, y: f64, value: *mut f64) -> GgStatus {
    guard(|| write(value, handle(k, "kernel")?.0.eval_sum(x, y)?, "value"))
}

/// Monte Carlo estimate of E(0; (0, s)) at λ = 1 for integer ν, with
/// binomial standard errors.
///
/// # Safety
/// `s_grid`, `estimates` and `std_errors` must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn gg_mc_gap(
    ens: *const GgEnsemble,
    samples: usize,
    seed: u64,
    s_grid: *const f64,
    len: usize,
    estimates: *mut f64,
    std_errors: *mut f64,
) -> GgStatus {
    guard(|| {
        let e = handle(ens, "ensemble")?;
        if e.0.lambda != 1.0 {
            return Err(GapError::InvalidParameter("Monte Carlo estimates need lambda = 1".into()).into());
        }
        let grid = slice(s_grid, len, "s_grid")?;
        let est = slice_mut(estimates, len, "estimates")?;
        let se = slice_mut(std_errors, len, "std_errors")?;
        let g = empirical_gap(&SamplerConfig::new(e.0.clone(), samples, seed)?, grid);
        est.copy_from_slice(&g.estimates);
        se.copy_from_slice(&g.standard_errors);
        Ok(())
    })
}
