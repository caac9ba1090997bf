//! C ABI over `genmoments`.
//!
//! Every function returns a [`GmStatus`]; results go through out
//! pointers. On failure [`gm_last_error_message`] describes the error
//! for the calling thread. Handles are opaque and must be released with
//! their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use genmoments::bounds::{
    chi2_vs_mi_crossover, compare_power_vs_chi2, expected_gen_bound, highprob_bound_chi2,
    highprob_bound_power, highprob_bound_renyi, moment_bound_chi2, moment_bound_power,
    moment_bound_ratio, second_moment_bound_mi, BoundReport, ValidityMode,
};
use genmoments::distributions::{make_discrete, DiscreteDistribution, DEFAULT_ENUMERATION_CAP};
use genmoments::divergences::{divergence, DivergenceKind};
use genmoments::information::{
    build_joint, chi_square_information, max_density_ratio, mutual_information,
    power_information, JointDistribution, JointJson, DEFAULT_W_ROUND_DIGITS,
};
use genmoments::risk::ModelSpec;
use genmoments::Error;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotAbsolutelyContinuous = 3,
    EnumerationTooLarge = 4,
    SupportMismatch = 5,
    InvalidUtf8 = 6,
    Parse = 7,
    Unsupported = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmDivergenceKind {
    Kl = 0,
    Renyi = 1,
    Power = 2,
    ChiSquare = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmInformationKind {
    Mutual = 0,
    ChiSquare = 1,
    Power = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmTheorem {
    /// Power-information moment bound; uses `m`, `t`, `info`.
    Thm2 = 0,
    /// Chi-square moment bound; uses `m`, `info`.
    Cor1 = 1,
    /// Expected generalization error; uses `q`, `info`.
    Cor2 = 2,
    /// Density-ratio moment bound; uses `m`, `r`.
    Eq9 = 3,
    /// Mutual-information second moment; uses `info`.
    Thm3 = 4,
    /// Power-information single-draw bound; uses `t`, `delta`, `info`.
    Thm4 = 5,
    /// Rényi single-draw bound; uses `alpha`, `delta`, `info`.
    Eq12 = 6,
    /// Chi-square single-draw bound; uses `delta`, `info`.
    Cor3 = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmValidityMode {
    Strict = 0,
    Relaxed = 1,
}

/// Inputs of [`gm_bound`]. Fields a theorem does not use are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmBoundParams {
    pub sigma: f64,
    pub n: usize,
    pub m: u32,
    pub q: u32,
    pub t: f64,
    pub alpha: f64,
    pub delta: f64,
    pub info: f64,
    pub r: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GmBoundResult {
    pub value: f64,
    /// Valid under the requested mode.
    pub valid: bool,
    pub valid_strict: bool,
    pub valid_relaxed: bool,
}

/// Opaque discrete distribution.
pub struct GmDistribution(DiscreteDistribution);

/// Opaque joint law of hypothesis and training set.
pub struct GmJoint(JointDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(GmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NotAbsolutelyContinuous { .. } => GmStatus::NotAbsolutelyContinuous,
            Error::EnumerationTooLarge { .. } => GmStatus::EnumerationTooLarge,
            Error::SupportMismatch(_) | Error::LengthMismatch { .. } => GmStatus::SupportMismatch,
            Error::Json(_) => GmStatus::Parse,
            Error::NoExactEvaluator(_) => GmStatus::Unsupported,
            _ => GmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GmStatus::NullPointer, format!("null pointer: {what}"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            GmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            GmStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| Failure(GmStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a distribution from `len` atoms and weights. Weights are
/// normalised; repeated atoms are merged.
///
/// # Safety
/// `atoms` and `probs` must point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gm_distribution_new(
    atoms: *const f64,
    probs: *const f64,
    len: usize,
    out: *mut *mut GmDistribution,
) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = unsafe { read_slice(atoms, len, "atoms") }?;
        let p = unsafe { read_slice(probs, len, "probs") }?;
        let d = make_discrete(a, p)?;
        unsafe { write_out(out, Box::into_raw(Box::new(GmDistribution(d)))) }
    })
}

/// Number of distinct atoms.
///
/// # Safety
/// `dist` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_distribution_len(dist: *const GmDistribution, out: *mut usize) -> GmStatus {
    guard(|| {
        let d = unsafe { dist.as_ref() }.ok_or_else(|| null("dist"))?;
        unsafe { write_out(out, d.0.len()) }
    })
}

/// Releases a distribution. Null is ignored.
///
/// # Safety
/// `dist` must come from [`gm_distribution_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gm_distribution_free(dist: *mut GmDistribution) {
    if !dist.is_null() {
        drop(unsafe { Box::from_raw(dist) });
    }
}

/// Divergence of `p` from `q`. `order` is the power order `t` or the
/// Rényi `α`; it is ignored for KL and chi-square.
///
/// # Safety
/// `p` and `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_divergence(
    p: *const GmDistribution,
    q: *const GmDistribution,
    kind: GmDivergenceKind,
    order: f64,
    out: *mut f64,
) -> GmStatus {
    guard(|| {
        let p = unsafe { p.as_ref() }.ok_or_else(|| null("p"))?;
        let q = unsafe { q.as_ref() }.ok_or_else(|| null("q"))?;
        let (kind, order) = match kind {
            GmDivergenceKind::Kl => (DivergenceKind::Kl, None),
            GmDivergenceKind::ChiSquare => (DivergenceKind::ChiSquare, None),
            GmDivergenceKind::Renyi => (DivergenceKind::Renyi, Some(order)),
            GmDivergenceKind::Power => (DivergenceKind::Power, Some(order)),
        };
        let v = divergence(&p.0, &q.0, kind, order)?;
        unsafe { write_out(out, v.value) }
    })
}

/// Enumerates the joint of a model given as JSON (data, n, kernel, loss).
///
/// # Safety
/// `model_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_joint_from_model_json(
    model_json: *const c_char,
    out: *mut *mut GmJoint,
) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { read_str(model_json, "model_json") }?;
        let spec: ModelSpec = serde_json::from_str(text).map_err(Error::from)?;
        let data = spec.data.as_discrete().ok_or_else(|| {
            Failure(GmStatus::Unsupported, "model data must be discrete".into())
        })?;
        let j = build_joint(data, spec.n, &spec.kernel, DEFAULT_W_ROUND_DIGITS, DEFAULT_ENUMERATION_CAP)?;
        unsafe { write_out(out, Box::into_raw(Box::new(GmJoint(j)))) }
    })
}

/// Reads a joint given as JSON `{"w_atoms": [...], "s_count": k, "mass": [[...], ...]}`
/// where `mass` has one row of `s_count` entries per hypothesis.
///
/// # Safety
/// `joint_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_joint_from_json(joint_json: *const c_char, out: *mut *mut GmJoint) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { read_str(joint_json, "joint_json") }?;
        let raw: JointJson = serde_json::from_str(text).map_err(Error::from)?;
        let j = JointDistribution::from_json(raw)?;
        unsafe { write_out(out, Box::into_raw(Box::new(GmJoint(j)))) }
    })
}

/// Releases a joint. Null is ignored.
///
/// # Safety
/// `joint` must come from a `gm_joint_from_*` function and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gm_joint_free(joint: *mut GmJoint) {
    if !joint.is_null() {
        drop(unsafe { Box::from_raw(joint) });
    }
}

/// Information measure of a joint; `t` is used only for power information.
///
/// # Safety
/// `joint` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_information(
    joint: *const GmJoint,
    kind: GmInformationKind,
    t: f64,
    out: *mut f64,
) -> GmStatus {
    guard(|| {
        let j = unsafe { joint.as_ref() }.ok_or_else(|| null("joint"))?;
        let v = match kind {
            GmInformationKind::Mutual => mutual_information(&j.0).value,
            GmInformationKind::ChiSquare => chi_square_information(&j.0).value,
            GmInformationKind::Power => power_information(&j.0, t)?.value,
        };
        unsafe { write_out(out, v) }
    })
}

/// Largest `P(w|s)/P(w)` over the support.
///
/// # Safety
/// `joint` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_max_density_ratio(joint: *const GmJoint, out: *mut f64) -> GmStatus {
    guard(|| {
        let j = unsafe { joint.as_ref() }.ok_or_else(|| null("joint"))?;
        unsafe { write_out(out, max_density_ratio(&j.0)) }
    })
}

fn evaluate_bound(theorem: GmTheorem, p: &GmBoundParams, mode: ValidityMode) -> Result<BoundReport, Error> {
    match theorem {
        GmTheorem::Thm2 => moment_bound_power(p.sigma, p.n, p.m, p.t, p.info, mode),
        GmTheorem::Cor1 => moment_bound_chi2(p.sigma, p.n, p.m, p.info, mode),
        GmTheorem::Cor2 => expected_gen_bound(p.sigma, p.n, p.q, p.info, mode),
        GmTheorem::Eq9 => moment_bound_ratio(p.sigma, p.n, p.m, p.r, mode),
        GmTheorem::Thm3 => second_moment_bound_mi(p.sigma, p.n, p.info),
        GmTheorem::Thm4 => highprob_bound_power(p.sigma, p.n, p.t, p.delta, p.info, mode),
        GmTheorem::Eq12 => highprob_bound_renyi(p.sigma, p.n, p.alpha, p.delta, p.info, mode),
        GmTheorem::Cor3 => highprob_bound_chi2(p.sigma, p.n, p.delta, p.info, mode),
    }
}

/// Evaluates one bound.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_bound(
    theorem: GmTheorem,
    params: *const GmBoundParams,
    mode: GmValidityMode,
    out: *mut GmBoundResult,
) -> GmStatus {
    guard(|| {
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        let mode = match mode {
            GmValidityMode::Strict => ValidityMode::Strict,
            GmValidityMode::Relaxed => ValidityMode::Relaxed,
        };
        let r = evaluate_bound(theorem, p, mode)?;
        unsafe {
            write_out(
                out,
                GmBoundResult {
                    value: r.value,
                    valid: r.valid,
                    valid_strict: r.valid_strict,
                    valid_relaxed: r.valid_relaxed,
                },
            )
        }
    })
}

/// Threshold above which the chi-square moment bound is tighter than the
/// power-information bound of order `t > 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_power_vs_chi2_threshold(m: u32, t: f64, out: *mut f64) -> GmStatus {
    guard(|| {
        let c = compare_power_vs_chi2(m, t, 0.0)?;
        unsafe { write_out(out, c.threshold) }
    })
}

/// Chi-square information above which the chi-square second-moment bound
/// is tighter than the mutual-information one (located by bisection).
#[no_mangle]
pub extern "C" fn gm_chi2_vs_mi_crossover() -> f64 {
    chi2_vs_mi_crossover()
}
