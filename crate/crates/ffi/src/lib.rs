//! C ABI for the adaptive-sprt library.
//!
//! Every fallible function returns an [`AsprtStatus`]; on failure a message is
//! available from [`asprt_last_error`] on the same thread until the next call.
//! Hypothesis pairs are opaque handles created by `asprt_pair_new_*` and
//! released with [`asprt_pair_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adaptive_sprt::analytics::{self, wald_thresholds};
use adaptive_sprt::montecarlo::run_experiment;
use adaptive_sprt::{Error, ExperimentConfig, HypothesisPair, Procedure, TruthMode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsprtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    Numeric = 4,
    NonTermination = 5,
    Config = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsprtProcedure {
    Adaptive = 0,
    Classical = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsprtTruth {
    H0 = 0,
    H1 = 1,
    Random = 2,
}

/// Opaque hypothesis pair.
pub struct AsprtPair {
    inner: HypothesisPair,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsprtMoments {
    pub eta_x: f64,
    pub sigma2_x: f64,
    pub eta_y: f64,
    pub sigma2_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsprtThresholds {
    pub a: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AsprtExperimentOptions {
    pub alpha: f64,
    pub beta: f64,
    pub replications: u64,
    pub seed: u64,
    pub procedure: AsprtProcedure,
    pub truth: AsprtTruth,
    /// Step cap per trial; 0 selects the library default.
    pub cap: u64,
    /// Worker threads; 0 selects the environment or the machine default.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsprtSummary {
    pub pcs: f64,
    pub se_pcs: f64,
    pub accuracy: f64,
    pub mean_n_inferior: f64,
    pub se_n_inferior: f64,
    /// Mean total draws (adaptive) or mean rounds (classical).
    pub asn: f64,
    pub se_asn: f64,
    pub mean_total_draws: f64,
    pub n1_star_closed: f64,
    pub n1_star_series: f64,
    pub asn_wald_k0: f64,
    pub replications: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> AsprtStatus {
    match err {
        Error::Domain(_) => AsprtStatus::Domain,
        Error::UnsupportedVariant(_) => AsprtStatus::Unsupported,
        Error::Numeric { .. } => AsprtStatus::Numeric,
        Error::NonTermination { .. } => AsprtStatus::NonTermination,
        Error::Config(_) => AsprtStatus::Config,
        Error::Io(_) => AsprtStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AsprtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsprtStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            AsprtStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            AsprtStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller promises `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

unsafe fn pair_ref<'a>(p: *const AsprtPair) -> Result<&'a HypothesisPair, Failure> {
    // SAFETY: caller promises `p` is null or a live handle.
    unsafe { p.as_ref() }.map(|h| &h.inner).ok_or(Failure::Null("pair"))
}

unsafe fn store_pair(out: *mut *mut AsprtPair, pair: adaptive_sprt::Result<HypothesisPair>) -> AsprtStatus {
    guard(|| {
        // SAFETY: forwarded from the public contract.
        let slot = unsafe { out_ref(out, "out") }?;
        *slot = ptr::null_mut();
        *slot = Box::into_raw(Box::new(AsprtPair { inner: pair? }));
        Ok(())
    })
}

/// Normal pair with a common variance.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asprt_pair_new_normal(
    mean0: f64,
    mean1: f64,
    variance: f64,
    out: *mut *mut AsprtPair,
) -> AsprtStatus {
    let pair = adaptive_sprt::DistributionSpec::normal(mean0, variance)
        .and_then(|f0| Ok((f0, adaptive_sprt::DistributionSpec::normal(mean1, variance)?)))
        .and_then(|(f0, f1)| HypothesisPair::new(f0, f1));
    unsafe { store_pair(out, pair) }
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asprt_pair_new_poisson(rate0: f64, rate1: f64, out: *mut *mut AsprtPair) -> AsprtStatus {
    unsafe { store_pair(out, HypothesisPair::poisson(rate0, rate1)) }
}

/// Asymmetric Laplace pair given as (location, scale, asymmetry) for each density.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn asprt_pair_new_laplace(
    m0: f64,
    l0: f64,
    k0: f64,
    m1: f64,
    l1: f64,
    k1: f64,
    out: *mut *mut AsprtPair,
) -> AsprtStatus {
    unsafe { store_pair(out, HypothesisPair::asymmetric_laplace((m0, l0, k0), (m1, l1, k1))) }
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `pair` must be null or a handle from `asprt_pair_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn asprt_pair_free(pair: *mut AsprtPair) {
    if !pair.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(pair) });
    }
}

/// # Safety
/// `pair` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asprt_llr_moments(pair: *const AsprtPair, out: *mut AsprtMoments) -> AsprtStatus {
    guard(|| {
        let pair = unsafe { pair_ref(pair) }?;
        let out = unsafe { out_ref(out, "out") }?;
        let m = pair.llr_moments()?;
        *out = AsprtMoments { eta_x: m.eta_x, sigma2_x: m.sigma2_x, eta_y: m.eta_y, sigma2_y: m.sigma2_y };
        Ok(())
    })
}

/// Expected inferior allocations: closed form and truncated series.
/// Either output may be null.
///
/// # Safety
/// `pair` must be a live handle; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asprt_n1_star(
    pair: *const AsprtPair,
    eps: f64,
    closed_form: *mut f64,
    series: *mut f64,
) -> AsprtStatus {
    guard(|| {
        let pair = unsafe { pair_ref(pair) }?;
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Domain(format!("eps must be > 0, got {eps}")).into());
        }
        let m = pair.llr_moments()?;
        if let Some(c) = unsafe { closed_form.as_mut() } {
            *c = analytics::n1_star_closed_form(&m);
        }
        if let Some(s) = unsafe { series.as_mut() } {
            *s = analytics::n1_star_series(&m, eps);
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asprt_thresholds(alpha: f64, beta: f64, out: *mut AsprtThresholds) -> AsprtStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let t = wald_thresholds(alpha, beta)?;
        *out = AsprtThresholds { a: t.a, b: t.b };
        Ok(())
    })
}

/// Wald approximations to the expected statistic length under K0 and K1.
///
/// # Safety
/// `pair` must be a live handle; `asn_k0` and `asn_k1` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asprt_asn_wald(
    pair: *const AsprtPair,
    alpha: f64,
    beta: f64,
    asn_k0: *mut f64,
    asn_k1: *mut f64,
) -> AsprtStatus {
    guard(|| {
        let pair = unsafe { pair_ref(pair) }?;
        let k0 = unsafe { out_ref(asn_k0, "asn_k0") }?;
        let k1 = unsafe { out_ref(asn_k1, "asn_k1") }?;
        let t = wald_thresholds(alpha, beta)?;
        (*k0, *k1) = analytics::asn_wald(&pair.llr_moments()?, &t);
        Ok(())
    })
}

/// Options with the library defaults for the given error rates.
#[no_mangle]
pub extern "C" fn asprt_experiment_options_default(alpha: f64, beta: f64) -> AsprtExperimentOptions {
    AsprtExperimentOptions {
        alpha,
        beta,
        replications: adaptive_sprt::montecarlo::DEFAULT_REPLICATIONS,
        seed: 0,
        procedure: AsprtProcedure::Adaptive,
        truth: AsprtTruth::H0,
        cap: 0,
        threads: 0,
    }
}

/// Runs a Monte Carlo experiment. Results depend only on the options, not on
/// the thread count.
///
/// # Safety
/// `pair` must be a live handle, `options` readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn asprt_run_experiment(
    pair: *const AsprtPair,
    options: *const AsprtExperimentOptions,
    out: *mut AsprtSummary,
) -> AsprtStatus {
    guard(|| {
        let pair = unsafe { pair_ref(pair) }?;
        let opts = unsafe { options.as_ref() }.ok_or(Failure::Null("options"))?;
        let out = unsafe { out_ref(out, "out") }?;
        let mut cfg = ExperimentConfig::new(*pair, opts.alpha, opts.beta);
        cfg.replications = opts.replications;
        cfg.master_seed = opts.seed;
        cfg.procedure = match opts.procedure {
            AsprtProcedure::Adaptive => Procedure::Adaptive,
            AsprtProcedure::Classical => Procedure::Classical,
        };
        cfg.truth = match opts.truth {
            AsprtTruth::H0 => TruthMode::H0,
            AsprtTruth::H1 => TruthMode::H1,
            AsprtTruth::Random => TruthMode::Random,
        };
        if opts.cap != 0 {
            cfg.cap = opts.cap;
        }
        if opts.threads != 0 {
            cfg.threads = Some(opts.threads);
        }
        let s = run_experiment(&cfg)?;
        *out = AsprtSummary {
            pcs: s.pcs,
            se_pcs: s.se_pcs,
            accuracy: s.accuracy,
            mean_n_inferior: s.mean_n_inferior,
            se_n_inferior: s.se_n_inferior,
            asn: s.asn,
            se_asn: s.se_asn,
            mean_total_draws: s.mean_total_draws,
            n1_star_closed: s.n1_star_closed,
            n1_star_series: s.n1_star_series,
            asn_wald_k0: s.asn_wald_k0,
            replications: s.replications,
        };
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn asprt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asprt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Domain(String::new())), AsprtStatus::Domain);
        assert_eq!(status_of(&Error::Config(String::new())), AsprtStatus::Config);
        assert_eq!(status_of(&Error::Numeric { message: String::new(), achieved: 1.0 }), AsprtStatus::Numeric);
    }

    #[test]
    fn guard_records_and_clears_message() {
        let st = guard(|| Err(Error::Domain("bad alpha".into()).into()));
        assert_eq!(st, AsprtStatus::Domain);
        let msg = unsafe { CStr::from_ptr(asprt_last_error()) }.to_str().unwrap();
        assert!(msg.contains("bad alpha"), "{msg}");
        assert_eq!(guard(|| Ok(())), AsprtStatus::Ok);
        assert!(asprt_last_error().is_null());
    }

    #[test]
    fn panics_are_contained() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let st = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(st, AsprtStatus::Panic);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(asprt_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
