//! C ABI over `chernoff_lab`.
//!
//! Every entry point returns a [`ClStatus`]; results come back through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`cl_last_error_message`]. Handles are opaque and must be released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chernoff_lab::experiments::{self, SamplingDomain};
use chernoff_lab::{ChernoffFamily, Error, SemigroupOracle, ShiftMixture, TestFunction};

/// Status code returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Construction = 3,
    Evaluation = 4,
    Resource = 5,
    Domain = 6,
    Configuration = 7,
    DegenerateFit = 8,
    Usage = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Exact semigroup used as reference by [`cl_sup_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClOracleKind {
    Translation = 0,
    HeatSpectral = 1,
    HeatQuadrature = 2,
}

/// Least-squares fit of `log error = c - p log n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClRateFit {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub points: usize,
}

/// Opaque handle to a finite shift mixture.
pub struct ClMixture(ShiftMixture);

/// Opaque handle to a Chernoff family.
pub struct ClFamily(ChernoffFamily);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(ClStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Construction(_) => ClStatus::Construction,
            Error::Evaluation(_) => ClStatus::Evaluation,
            Error::Resource { .. } => ClStatus::Resource,
            Error::Domain(_) => ClStatus::Domain,
            Error::Configuration(_) => ClStatus::Configuration,
            Error::DegenerateFit { .. } => ClStatus::DegenerateFit,
            Error::Usage(_) => ClStatus::Usage,
            Error::Io(_) | Error::Json(_) => ClStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ClStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> ClStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(ClStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            ClStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ClStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating to `cap - 1` bytes. Returns the full
/// message length in bytes, excluding the terminator. `buf` may be null to
/// query the length.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a mixture from `len` offsets and weights.
///
/// # Safety
/// `offsets` and `weights` must point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_new(
    offsets: *const f64,
    weights: *const f64,
    len: usize,
    out_mixture: *mut *mut ClMixture,
) -> ClStatus {
    guard(|| {
        let offsets = slice(offsets, len, "offsets")?;
        let weights = slice(weights, len, "weights")?;
        let slot = out(out_mixture, "out_mixture")?;
        let m = ShiftMixture::new(offsets.iter().copied().zip(weights.iter().copied()))?;
        *slot = boxed(ClMixture(m));
        Ok(())
    })
}

/// Releases a mixture. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_free(m: *mut ClMixture) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_len(m: *const ClMixture) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

/// Copies the atoms, sorted by offset, into caller buffers of length `cap`.
///
/// # Safety
/// `m` must be a live handle; `offsets` and `weights` must point to `cap`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_atoms(
    m: *const ClMixture,
    offsets: *mut f64,
    weights: *mut f64,
    cap: usize,
) -> ClStatus {
    guard(|| {
        let m = deref(m, "mixture")?;
        let atoms = m.0.atoms();
        if cap < atoms.len() {
            return Err(Failure(
                ClStatus::BufferTooSmall,
                format!("need room for {} atoms, got {cap}", atoms.len()),
            ));
        }
        if offsets.is_null() || weights.is_null() {
            return Err(null("atom buffer"));
        }
        for (i, a) in atoms.iter().enumerate() {
            *offsets.add(i) = a.offset;
            *weights.add(i) = a.weight;
        }
        Ok(())
    })
}

/// Composition `a * b`.
///
/// # Safety
/// `a` and `b` must be live handles; `out_mixture` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_convolve(
    a: *const ClMixture,
    b: *const ClMixture,
    out_mixture: *mut *mut ClMixture,
) -> ClStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let slot = out(out_mixture, "out_mixture")?;
        *slot = boxed(ClMixture(a.0.convolve(&b.0)?));
        Ok(())
    })
}

/// n-fold composition, `n >= 1`.
///
/// # Safety
/// `m` must be a live handle; `out_mixture` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_power(
    m: *const ClMixture,
    n: u64,
    out_mixture: *mut *mut ClMixture,
) -> ClStatus {
    guard(|| {
        let m = deref(m, "mixture")?;
        let slot = out(out_mixture, "out_mixture")?;
        *slot = boxed(ClMixture(m.0.power(n)?));
        Ok(())
    })
}

/// Evaluates `(M f)(x)` for a catalog function such as `"sine:1"`.
///
/// # Safety
/// `m` must be a live handle, `function` a NUL-terminated string and
/// `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_apply(
    m: *const ClMixture,
    function: *const c_char,
    x: f64,
    out_value: *mut f64,
) -> ClStatus {
    guard(|| {
        let m = deref(m, "mixture")?;
        let f = TestFunction::parse(string(function, "function")?)?;
        *out(out_value, "out_value")? = m.0.apply(&f, x)?;
        Ok(())
    })
}

/// Raw moment `sum w s^k`.
///
/// # Safety
/// `m` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_moment(
    m: *const ClMixture,
    k: u32,
    out_value: *mut f64,
) -> ClStatus {
    guard(|| {
        *out(out_value, "out_value")? = deref(m, "mixture")?.0.moment(k);
        Ok(())
    })
}

/// Sup-norm operator norm `sum |w|`.
///
/// # Safety
/// `m` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_operator_norm(
    m: *const ClMixture,
    out_value: *mut f64,
) -> ClStatus {
    guard(|| {
        *out(out_value, "out_value")? = deref(m, "mixture")?.0.operator_norm();
        Ok(())
    })
}

/// Characteristic function `sum w e^{iks}`.
///
/// # Safety
/// `m` must be a live handle; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cl_mixture_charfn(
    m: *const ClMixture,
    k: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ClStatus {
    guard(|| {
        let z = deref(m, "mixture")?.0.charfn(k);
        *out(out_re, "out_re")? = z.re;
        *out(out_im, "out_im")? = z.im;
        Ok(())
    })
}

/// Parses a family spec such as `"heat_S"` or `"quadratic_shift:1"`. `a` is
/// the diffusion coefficient used by the heat families.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_family` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_family_new(
    spec: *const c_char,
    a: f64,
    out_family: *mut *mut ClFamily,
) -> ClStatus {
    guard(|| {
        let fam = ChernoffFamily::parse(string(spec, "spec")?, a)?;
        *out(out_family, "out_family")? = boxed(ClFamily(fam));
        Ok(())
    })
}

/// Releases a family. Null is ignored.
///
/// # Safety
/// `f` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn cl_family_free(f: *mut ClFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// The mixture `G(t)`.
///
/// # Safety
/// `f` must be a live handle and `out_mixture` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_family_build(
    f: *const ClFamily,
    t: f64,
    out_mixture: *mut *mut ClMixture,
) -> ClStatus {
    guard(|| {
        let m = deref(f, "family")?.0.build(t)?;
        *out(out_mixture, "out_mixture")? = boxed(ClMixture(m));
        Ok(())
    })
}

/// The mixture `G(t/n)^n`.
///
/// # Safety
/// `f` must be a live handle and `out_mixture` writable.
#[no_mangle]
pub unsafe extern "C" fn cl_family_chernoff_power(
    f: *const ClFamily,
    t: f64,
    n: u64,
    out_mixture: *mut *mut ClMixture,
) -> ClStatus {
    guard(|| {
        let m = deref(f, "family")?.0.chernoff_power(t, n)?;
        *out(out_mixture, "out_mixture")? = boxed(ClMixture(m));
        Ok(())
    })
}

/// `max_x |G(t/n)^n f(x) - T(t) f(x)|` over `points` equispaced points of
/// `[x_min, x_max]`. `a` is the oracle's diffusion coefficient and `nodes`
/// its quadrature size; both are ignored where they do not apply.
///
/// # Safety
/// `family` must be a live handle, `function` a NUL-terminated string and
/// `out_value` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cl_sup_error(
    family: *const ClFamily,
    function: *const c_char,
    oracle: ClOracleKind,
    a: f64,
    nodes: usize,
    t: f64,
    n: u64,
    x_min: f64,
    x_max: f64,
    points: usize,
    out_value: *mut f64,
) -> ClStatus {
    guard(|| {
        let fam = deref(family, "family")?;
        let f = TestFunction::parse(string(function, "function")?)?;
        let oracle = match oracle {
            ClOracleKind::Translation => SemigroupOracle::translation(),
            ClOracleKind::HeatSpectral => SemigroupOracle::heat_spectral(a)?,
            ClOracleKind::HeatQuadrature => SemigroupOracle::heat_quadrature(a, nodes)?,
        };
        let domain = SamplingDomain::new(x_min, x_max, points)?;
        *out(out_value, "out_value")? = experiments::sup_error(&fam.0, &oracle, &f, t, n, &domain)?;
        Ok(())
    })
}

/// Fits `error ~ C n^-p` to the pairs with `n >= n_min_cut`.
///
/// # Safety
/// `ns` and `errors` must point to `len` readable values; `out_fit` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cl_fit_power_law(
    ns: *const u64,
    errors: *const f64,
    len: usize,
    n_min_cut: u64,
    out_fit: *mut ClRateFit,
) -> ClStatus {
    guard(|| {
        let fit = experiments::fit_power_law(
            slice(ns, len, "ns")?,
            slice(errors, len, "errors")?,
            n_min_cut,
        )?;
        *out(out_fit, "out_fit")? = ClRateFit {
            exponent: fit.exponent,
            log_intercept: fit.log_intercept,
            r_squared: fit.r_squared,
            n_min: fit.n_range.0,
            n_max: fit.n_range.1,
            points: fit.points,
        };
        Ok(())
    })
}
