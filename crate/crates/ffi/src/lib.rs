//! C ABI over `seqcliff`.
//!
//! Conventions:
//! * every fallible function returns a [`SeqcliffStatus`] and writes results
//!   through out-pointers, which are left untouched on failure;
//! * the message of the most recent failure on the calling thread is
//!   available from [`seqcliff_last_error`];
//! * objects are opaque handles created by `*_new`/`*_parse`/`*_generate`
//!   style functions and released by the matching `*_free`;
//! * strings returned as `char *` are owned by the caller and released with
//!   [`seqcliff_string_free`]; `const char *` results borrow from a handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seqcliff::pauli::{mul_strings, pauli_sar_theory, phase_chain_success, PauliNoiseParams, PauliString};
use seqcliff::scaling::{self, FitMethod, FitOptions, Observation, SaturatedPoints, ScalingFit};
use seqcliff::scoring::judge;
use seqcliff::sk::{self, SeriesOrder, SkEnsembleSpec, SkParams};
use seqcliff::tasks::{TaskInstance, TaskKind, TaskParams};
use seqcliff::{dnc, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqcliffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parameter = 3,
    Validation = 4,
    Size = 5,
    Domain = 6,
    Fit = 7,
    Numeric = 8,
    Config = 9,
    Io = 10,
    EmptyInput = 11,
    Panic = 12,
}

impl From<&Error> for SeqcliffStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parameter { .. } => SeqcliffStatus::Parameter,
            Error::Validation(_) => SeqcliffStatus::Validation,
            Error::Size { .. } => SeqcliffStatus::Size,
            Error::Domain { .. } => SeqcliffStatus::Domain,
            Error::Fit { .. } => SeqcliffStatus::Fit,
            Error::Numeric(_) => SeqcliffStatus::Numeric,
            Error::Config { .. } => SeqcliffStatus::Config,
            Error::Io { .. } => SeqcliffStatus::Io,
            Error::EmptyInput(_) => SeqcliffStatus::EmptyInput,
        }
    }
}

/// Task families for [`seqcliff_task_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqcliffTaskKind {
    Cyclic = 0,
    Addition = 1,
    Pauli = 2,
}

/// Fitting method for [`seqcliff_fit`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqcliffFitMethod {
    Transformed = 0,
    BinomialMl = 1,
}

/// Opaque Pauli string.
pub struct SeqcliffPauliString(PauliString);

/// Opaque task instance with its input and expected answer.
pub struct SeqcliffTask {
    instance: TaskInstance,
    input: CString,
    expected: CString,
}

/// Opaque scaling-law fit.
pub struct SeqcliffFit(ScalingFit);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Status(SeqcliffStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Runs `f`, recording any error or panic for [`seqcliff_last_error`].
fn guard(f: impl FnOnce() -> FfiResult<()>) -> SeqcliffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeqcliffStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            SeqcliffStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            SeqcliffStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::Status(SeqcliffStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn out_mut<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(SeqcliffStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn seqcliff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- Pauli strings ----

/// Parses a canonical Pauli string such as `"+i XZ"`.
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_pauli_parse(text: *const c_char, out: *mut *mut SeqcliffPauliString) -> SeqcliffStatus {
    guard(|| {
        let s: PauliString = read_str(text, "text")?.parse()?;
        *out_mut(out, "out")? = Box::into_raw(Box::new(SeqcliffPauliString(s)));
        Ok(())
    })
}

/// Product `a × b` of two strings of equal length.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_pauli_mul(
    a: *const SeqcliffPauliString,
    b: *const SeqcliffPauliString,
    out: *mut *mut SeqcliffPauliString,
) -> SeqcliffStatus {
    guard(|| {
        let p = mul_strings(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        *out_mut(out, "out")? = Box::into_raw(Box::new(SeqcliffPauliString(p)));
        Ok(())
    })
}

/// Canonical rendering; free with [`seqcliff_string_free`]. Null on a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_pauli_to_string(p: *const SeqcliffPauliString) -> *mut c_char {
    match p.as_ref() {
        Some(p) => owned_string(p.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `p` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_pauli_free(p: *mut SeqcliffPauliString) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---- Tasks and scoring ----

/// Generates an instance. `alphabet_size` is used by the cyclic task only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_task_generate(
    kind: SeqcliffTaskKind,
    n: usize,
    seed: u64,
    alphabet_size: u32,
    out: *mut *mut SeqcliffTask,
) -> SeqcliffStatus {
    guard(|| {
        let (kind, params) = match kind {
            SeqcliffTaskKind::Cyclic => (TaskKind::Cyclic, TaskParams::cyclic(alphabet_size)),
            SeqcliffTaskKind::Addition => (TaskKind::Addition, TaskParams::addition(n)),
            SeqcliffTaskKind::Pauli => (TaskKind::Pauli, TaskParams::pauli()),
        };
        let instance = TaskInstance::generate(kind, n, seed, params)?;
        let to_c = |s: &str| CString::new(s).map_err(|e| Failure::Lib(Error::Validation(e.to_string())));
        let task = SeqcliffTask {
            input: to_c(&instance.input)?,
            expected: to_c(&instance.expected)?,
            instance,
        };
        *out_mut(out, "out")? = Box::into_raw(Box::new(task));
        Ok(())
    })
}

/// Task input, borrowed from the handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_task_input(t: *const SeqcliffTask) -> *const c_char {
    t.as_ref().map_or(ptr::null(), |t| t.input.as_ptr())
}

/// Expected answer, borrowed from the handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_task_expected(t: *const SeqcliffTask) -> *const c_char {
    t.as_ref().map_or(ptr::null(), |t| t.expected.as_ptr())
}

/// Scores a free-text response against the instance.
///
/// # Safety
/// `t` must be a live handle, `response` a valid C string, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_task_judge(
    t: *const SeqcliffTask,
    response: *const c_char,
    strict: *mut bool,
    relaxed: *mut bool,
) -> SeqcliffStatus {
    guard(|| {
        let r = judge(&handle(t, "task")?.instance, "ffi", read_str(response, "response")?);
        let (s, l) = (out_mut(strict, "strict")?, out_mut(relaxed, "relaxed")?);
        *s = r.strict_correct;
        *l = r.relaxed_correct;
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_task_free(t: *mut SeqcliffTask) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ---- Scaling law ----

fn scalar(out: *mut f64, f: impl FnOnce() -> seqcliff::Result<f64>) -> SeqcliffStatus {
    guard(|| {
        let v = f()?;
        *unsafe { out_mut(out, "out") }? = v;
        Ok(())
    })
}

/// `exp(-β₀ n α^(n-1))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_sar_empirical(n: f64, alpha: f64, beta0: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || scaling::sar_empirical(n, alpha, beta0))
}

/// `1 + ln(1/β₀)/ln α`; domain error unless `α > 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_nstar_closed(alpha: f64, beta0: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || scaling::nstar_closed(alpha, beta0))
}

/// Length where the law crosses 1/2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_nstar_half(alpha: f64, beta0: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || scaling::nstar_half(alpha, beta0))
}

/// Fits the law to `len` points given as parallel arrays.
///
/// # Safety
/// The three arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit(
    n: *const f64,
    sar: *const f64,
    trials: *const f64,
    len: usize,
    method: SeqcliffFitMethod,
    clip_saturated: bool,
    out: *mut *mut SeqcliffFit,
) -> SeqcliffStatus {
    guard(|| {
        if n.is_null() || sar.is_null() || trials.is_null() {
            return Err(null("n/sar/trials"));
        }
        let (n, sar, trials) = (
            std::slice::from_raw_parts(n, len),
            std::slice::from_raw_parts(sar, len),
            std::slice::from_raw_parts(trials, len),
        );
        let obs: Vec<Observation> = (0..len)
            .map(|i| Observation {
                n: n[i],
                estimate: sar[i],
                trials: trials[i],
            })
            .collect();
        let opts = FitOptions {
            method: match method {
                SeqcliffFitMethod::Transformed => FitMethod::Transformed,
                SeqcliffFitMethod::BinomialMl => FitMethod::BinomialMl,
            },
            saturated: if clip_saturated {
                SaturatedPoints::Clip
            } else {
                SaturatedPoints::Exclude
            },
        };
        let fit = scaling::fit_observations(&obs, opts)?;
        *out_mut(out, "out")? = Box::into_raw(Box::new(SeqcliffFit(fit)));
        Ok(())
    })
}

/// Fitted `α`; NaN on a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_alpha(f: *const SeqcliffFit) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.alpha)
}

/// Fitted `β₀`; NaN on a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_beta0(f: *const SeqcliffFit) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.beta0)
}

/// Standard error of `ln α`; NaN on a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_log_alpha_se(f: *const SeqcliffFit) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.log_alpha_se)
}

/// Half-accuracy length of the fit; NaN when undefined.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_nstar_half(f: *const SeqcliffFit) -> f64 {
    f.as_ref().and_then(|f| f.0.nstar_half).unwrap_or(f64::NAN)
}

/// Number of points the fit used.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_points_used(f: *const SeqcliffFit) -> usize {
    f.as_ref().map_or(0, |f| f.0.points_used)
}

/// # Safety
/// `f` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_fit_free(f: *mut SeqcliffFit) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

// ---- Phase chain ----

/// `1/4 + 3/4 ((3 - 4p)/3)^n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_phase_chain_success(p_phi: f64, n: u32, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || phase_chain_success(p_phi, n))
}

/// Accuracy of the noisy Pauli agent.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_pauli_sar_theory(p_sigma: f64, p_phi: f64, n: u32, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || pauli_sar_theory(PauliNoiseParams::new(p_sigma, p_phi)?, n))
}

// ---- Spin-glass model ----

/// Geometric-mean SAR over `realizations` coupling draws, with the standard
/// error of its log. Either output may be null.
///
/// # Safety
/// Non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_sk_disorder_avg(
    n: usize,
    j0: f64,
    h: f64,
    realizations: usize,
    master_seed: u64,
    sar_geo: *mut f64,
    stderr_log: *mut f64,
) -> SeqcliffStatus {
    guard(|| {
        let spec = SkEnsembleSpec::new(SkParams::new(n, j0, h)?, realizations, master_seed)?;
        let avg = sk::sar_disorder_avg(&spec)?;
        if let Some(s) = sar_geo.as_mut() {
            *s = avg.sar_geo;
        }
        if let Some(s) = stderr_log.as_mut() {
            *s = avg.stderr_log;
        }
        Ok(())
    })
}

/// Truncated small-coupling series; `order` is 2 or 4.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_sk_perturbative(n: usize, j0: f64, h: f64, order: u32, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || sk::sar_perturbative(&SkParams::new(n, j0, h)?, SeriesOrder::try_from(order)?))
}

/// `(j0, h) → (α, β₀)`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_params_to_empirical(j0: f64, h: f64, alpha: *mut f64, beta0: *mut f64) -> SeqcliffStatus {
    guard(|| {
        let (a, b) = sk::params_to_empirical(j0, h);
        let (oa, ob) = (out_mut(alpha, "alpha")?, out_mut(beta0, "beta0")?);
        *oa = a;
        *ob = b;
        Ok(())
    })
}

// ---- Divide and conquer ----

/// `θ exp(-β₀ n α^(n/k - 1))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_sar_dc(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || dnc::sar_dc(n, k, alpha, beta0, theta))
}

/// Log gain of splitting into `k` segments.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_gain(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || dnc::gain(n, k, alpha, beta0, theta))
}

/// Length beyond which `k` segments are guaranteed to help.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_n_dc_bound(k: usize, alpha: f64, beta0: f64, theta: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || dnc::n_dc_bound(k, alpha, beta0, theta))
}

/// `1 + k ln(1/β₀)/ln α`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqcliff_nstar_extended(k: usize, alpha: f64, beta0: f64, out: *mut f64) -> SeqcliffStatus {
    scalar(out, || dnc::nstar_extended(k, alpha, beta0))
}
