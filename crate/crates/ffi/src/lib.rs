//! C ABI over the sparsechan estimators.
//!
//! Every function returns an [`ScStatus`]; on failure a message is available
//! from [`sc_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function. Panics never cross the
//! boundary; they surface as `SC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sparsechan::linalg::CVector;
use sparsechan::model::Dictionary;
use sparsechan::sbl::fast::{self, SblResult};
use sparsechan::sbl::{solve_gamma_cubic, PriorConfig, SblOptions};
use sparsechan::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScPrior {
    BesselK = 0,
    Rvm = 1,
    /// Laplace hierarchy with rate 1.
    Laplace = 2,
}

/// Delay-grid dictionary, `M` frequencies by `L` delays.
pub struct ScDictionary(Dictionary);

/// Output of one greedy estimation run.
pub struct ScSblResult(SblResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> ScStatus {
    match e {
        Error::InvalidConfig(_) | Error::Dimension(_) | Error::Parse { .. } => ScStatus::InvalidArgument,
        _ => ScStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (ScStatus, String)>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ScStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            ScStatus::Panic
        }
    }
}

fn null() -> (ScStatus, String) {
    (ScStatus::NullPointer, "null pointer argument".into())
}

fn lib_err(e: Error) -> (ScStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn input<'a, T>(p: *const T, n: usize) -> Result<&'a [T], (ScStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds `exp(-j 2 pi f_m tau_l)` for the given frequencies (Hz) and delays (s).
///
/// # Safety
/// `freqs` and `taus` must point to `n_freqs` and `n_taus` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_dictionary_new(
    freqs: *const f64,
    n_freqs: usize,
    taus: *const f64,
    n_taus: usize,
    out: *mut *mut ScDictionary,
) -> ScStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let f = input(freqs, n_freqs)?;
        let t = input(taus, n_taus)?;
        if f.is_empty() || t.is_empty() {
            return Err((ScStatus::InvalidArgument, "empty frequency or delay list".into()));
        }
        if f.iter().chain(t).any(|v| !v.is_finite()) {
            return Err((ScStatus::InvalidArgument, "non-finite frequency or delay".into()));
        }
        *out = Box::into_raw(Box::new(ScDictionary(Dictionary::from_delays(f, t))));
        Ok(())
    })
}

/// # Safety
/// `dict` must come from [`sc_dictionary_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sc_dictionary_free(dict: *mut ScDictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Greedy evidence maximization of `y = Phi alpha + noise`.
///
/// `y_re`/`y_im` hold the `m` pilot observations. A positive `fixed_lambda`
/// pins the noise precision; zero or negative estimates it.
///
/// # Safety
/// `dict` must be a live handle, `y_re`/`y_im` must point to `m` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_fast_sbl_run(
    dict: *const ScDictionary,
    y_re: *const f64,
    y_im: *const f64,
    m: usize,
    prior: ScPrior,
    fixed_lambda: f64,
    out: *mut *mut ScSblResult,
) -> ScStatus {
    guard(|| {
        if out.is_null() || dict.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let d = &(*dict).0;
        let re = input(y_re, m)?;
        let im = input(y_im, m)?;
        if m != d.nrows() {
            return Err((
                ScStatus::InvalidArgument,
                format!("observation length {m} does not match dictionary rows {}", d.nrows()),
            ));
        }
        let y = CVector::from_iterator(m, re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)));
        let p = match prior {
            ScPrior::BesselK => PriorConfig::bessel_k(),
            ScPrior::Rvm => PriorConfig::rvm(),
            ScPrior::Laplace => PriorConfig::laplace(1.0).map_err(lib_err)?,
        };
        let mut opts = SblOptions::fast(p);
        if fixed_lambda > 0.0 {
            opts = opts.with_fixed_lambda(fixed_lambda);
        }
        let r = fast::run(&y, &d.entries, &opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(ScSblResult(r)));
        Ok(())
    })
}

/// # Safety
/// `res` must come from [`sc_fast_sbl_run`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sc_result_free(res: *mut ScSblResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Grid size `L` of the estimate.
///
/// # Safety
/// `res` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn sc_result_len(res: *const ScSblResult, len: *mut usize) -> ScStatus {
    guard(|| {
        if res.is_null() || len.is_null() {
            return Err(null());
        }
        *len = (*res).0.alpha_hat.len();
        Ok(())
    })
}

/// Copies the posterior mean over the grid into `re`/`im`, which hold `len` doubles.
///
/// # Safety
/// `res` must be a live handle; `re` and `im` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sc_result_alpha(res: *const ScSblResult, re: *mut f64, im: *mut f64, len: usize) -> ScStatus {
    guard(|| {
        if res.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        let a = &(*res).0.alpha_hat;
        if len != a.len() {
            return Err((ScStatus::InvalidArgument, format!("buffer length {len}, estimate length {}", a.len())));
        }
        let (re, im) = (slice::from_raw_parts_mut(re, len), slice::from_raw_parts_mut(im, len));
        for (i, v) in a.iter().enumerate() {
            re[i] = v.re;
            im[i] = v.im;
        }
        Ok(())
    })
}

/// # Safety
/// `res` must be a live handle and `lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn sc_result_lambda(res: *const ScSblResult, lambda: *mut f64) -> ScStatus {
    guard(|| {
        if res.is_null() || lambda.is_null() {
            return Err(null());
        }
        *lambda = (*res).0.lambda_hat;
        Ok(())
    })
}

/// Applied add / delete / re-estimate actions and the active-set size.
///
/// # Safety
/// `res` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_result_iterations(
    res: *const ScSblResult,
    iterations: *mut usize,
    support_size: *mut usize,
    converged: *mut bool,
) -> ScStatus {
    guard(|| {
        if res.is_null() || iterations.is_null() || support_size.is_null() || converged.is_null() {
            return Err(null());
        }
        let r = &(*res).0;
        *iterations = r.iterations;
        *support_size = r.support.len();
        *converged = r.converged;
        Ok(())
    })
}

/// Maximizer of the per-basis objective for sparsity `s`, quality `q2 = |q|^2`
/// and prior `(epsilon, eta)`. `has_root` is false when no positive
/// stationary point improves on deleting the basis; `gamma` is then 0.
///
/// # Safety
/// `gamma` and `has_root` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_solve_gamma_cubic(
    s: f64,
    q2: f64,
    epsilon: f64,
    eta: f64,
    gamma: *mut f64,
    has_root: *mut bool,
) -> ScStatus {
    guard(|| {
        if gamma.is_null() || has_root.is_null() {
            return Err(null());
        }
        if !(s > 0.0 && q2 >= 0.0 && s.is_finite() && q2.is_finite()) {
            return Err((ScStatus::InvalidArgument, "need s > 0 and q2 >= 0".into()));
        }
        let prior = PriorConfig::custom(epsilon, eta).map_err(lib_err)?;
        let g = solve_gamma_cubic(s, q2, &prior).chosen();
        *gamma = g.unwrap_or(0.0);
        *has_root = g.is_some();
        Ok(())
    })
}
