//! C ABI for the szego crate.
//!
//! Symbols and spectral data live behind opaque handles that the caller frees
//! with the matching `_free` function. Every fallible call returns a
//! [`SzegoStatus`]; on failure the message is available from
//! [`szego_last_error`] on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use szego::nlft::{forward, inverse, ForwardOptions, SpectralData};
use szego::{Error, HardySymbol};

/// Opaque truncated Hardy-space symbol.
pub struct SzegoSymbol {
    inner: HardySymbol,
}

/// Opaque spectral data ((s_r), (Ψ_r)).
pub struct SzegoSpectral {
    inner: SpectralData,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SzegoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Rejected input; see the library's validation errors.
    Invalid = 2,
    /// A computation ran but its result could not be certified.
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn from_error(e: Error) -> SzegoStatus {
    let status = if e.is_validation() {
        SzegoStatus::Invalid
    } else {
        SzegoStatus::Numerical
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), SzegoStatus>) -> SzegoStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SzegoStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SzegoStatus::Panic
        }
    }
}

fn null(what: &str) -> SzegoStatus {
    set_error(format!("{what} is null"));
    SzegoStatus::NullPointer
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], SzegoStatus> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SzegoStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), SzegoStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn json_out(out: *mut *mut c_char, text: String) -> Result<(), SzegoStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(text).expect("JSON has no NUL").into_raw();
    Ok(())
}

unsafe fn json_in<'a>(text: *const c_char) -> Result<&'a str, SzegoStatus> {
    if text.is_null() {
        return Err(null("JSON text"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("JSON text is not UTF-8");
        SzegoStatus::Invalid
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn szego_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Symbol with coefficients re[k] + i·im[k], k < n. `im` may be NULL.
///
/// # Safety
/// `re` must point to `n` doubles, `im` to `n` doubles or be NULL.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_new(
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut SzegoSymbol,
) -> SzegoStatus {
    guard(|| {
        if n == 0 {
            set_error("a symbol needs at least one coefficient");
            return Err(SzegoStatus::Invalid);
        }
        let re = slice(re, n, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, n, "im")?) };
        let coeffs: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(re[k], im.map_or(0.0, |v| v[k])))
            .collect();
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            set_error("symbol coefficients must be finite");
            return Err(SzegoStatus::Invalid);
        }
        store(out, SzegoSymbol { inner: HardySymbol::new(coeffs) })
    })
}

/// # Safety
/// `sym` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_free(sym: *mut SzegoSymbol) {
    if !sym.is_null() {
        drop(Box::from_raw(sym));
    }
}

/// Number of stored modes; 0 for NULL.
///
/// # Safety
/// `sym` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_len(sym: *const SzegoSymbol) -> usize {
    sym.as_ref().map_or(0, |s| s.inner.n_modes())
}

/// Copy the coefficients into `re` and `im`, each of capacity `cap`.
///
/// # Safety
/// `re` and `im` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_coeffs(
    sym: *const SzegoSymbol,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> SzegoStatus {
    guard(|| {
        let s = deref(sym, "symbol")?;
        let c = s.inner.coeffs();
        if cap < c.len() {
            set_error(format!("need room for {} coefficients, got {cap}", c.len()));
            return Err(SzegoStatus::BufferTooSmall);
        }
        if re.is_null() || im.is_null() {
            return Err(null("coefficient buffer"));
        }
        for (k, z) in c.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// ‖u‖_{H^s}.
///
/// # Safety
/// `sym` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_sobolev_norm(
    sym: *const SzegoSymbol,
    s: f64,
    out: *mut f64,
) -> SzegoStatus {
    guard(|| {
        let u = deref(sym, "symbol")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = szego::hardy::sobolev_norm(&u.inner, s);
        Ok(())
    })
}

/// Parse {"coeffs": [[re, im], ...]}.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_from_json(
    json: *const c_char,
    out: *mut *mut SzegoSymbol,
) -> SzegoStatus {
    guard(|| {
        let u: HardySymbol = szego::io::from_json(json_in(json)?).map_err(from_error)?;
        store(out, SzegoSymbol { inner: u })
    })
}

/// JSON text, released with [`szego_string_free`].
///
/// # Safety
/// `sym` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_symbol_to_json(
    sym: *const SzegoSymbol,
    out: *mut *mut c_char,
) -> SzegoStatus {
    guard(|| {
        let u = deref(sym, "symbol")?;
        json_out(out, szego::io::to_json(&u.inner).map_err(from_error)?)
    })
}

/// Spectral data with degree-zero products e^{−i·angles[r]}.
///
/// # Safety
/// `s` and `angles` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_new(
    s: *const f64,
    angles: *const f64,
    n: usize,
    out: *mut *mut SzegoSpectral,
) -> SzegoStatus {
    guard(|| {
        let s = slice(s, n, "s")?;
        let a = slice(angles, n, "angles")?;
        let sd = SpectralData::with_angles(s.to_vec(), a).map_err(from_error)?;
        store(out, SzegoSpectral { inner: sd })
    })
}

/// Parse {"s": [...], "psi": [{"angle": ..., "zeros": [[re, im], ...]}, ...]}.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_from_json(
    json: *const c_char,
    out: *mut *mut SzegoSpectral,
) -> SzegoStatus {
    guard(|| {
        let sd: SpectralData = szego::io::from_json(json_in(json)?).map_err(from_error)?;
        store(out, SzegoSpectral { inner: sd })
    })
}

/// # Safety
/// `sd` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_to_json(
    sd: *const SzegoSpectral,
    out: *mut *mut c_char,
) -> SzegoStatus {
    guard(|| {
        let sd = deref(sd, "spectral data")?;
        json_out(out, szego::io::to_json(&sd.inner).map_err(from_error)?)
    })
}

/// # Safety
/// `sd` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_free(sd: *mut SzegoSpectral) {
    if !sd.is_null() {
        drop(Box::from_raw(sd));
    }
}

/// Number of singular values; 0 for NULL.
///
/// # Safety
/// `sd` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_len(sd: *const SzegoSpectral) -> usize {
    sd.as_ref().map_or(0, |d| d.inner.n())
}

/// Copy s_1 > … > s_n and the angles ψ_r into buffers of capacity `cap`.
/// `angles` may be NULL.
///
/// # Safety
/// `s` (and `angles` when non-NULL) must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn szego_spectral_values(
    sd: *const SzegoSpectral,
    s: *mut f64,
    angles: *mut f64,
    cap: usize,
) -> SzegoStatus {
    guard(|| {
        let d = deref(sd, "spectral data")?;
        let n = d.inner.n();
        if cap < n {
            set_error(format!("need room for {n} values, got {cap}"));
            return Err(SzegoStatus::BufferTooSmall);
        }
        if s.is_null() {
            return Err(null("value buffer"));
        }
        for (r, (v, p)) in d.inner.s().iter().zip(d.inner.psi()).enumerate() {
            *s.add(r) = *v;
            if !angles.is_null() {
                *angles.add(r) = p.angle();
            }
        }
        Ok(())
    })
}

/// Forward transform. Non-positive tolerances select the defaults.
///
/// # Safety
/// `sym` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_forward(
    sym: *const SzegoSymbol,
    tol_cluster: f64,
    tol_dominance: f64,
    out: *mut *mut SzegoSpectral,
) -> SzegoStatus {
    guard(|| {
        let u = deref(sym, "symbol")?;
        let mut opts = ForwardOptions::default();
        if tol_cluster > 0.0 {
            opts.tol_cluster = tol_cluster;
        }
        if tol_dominance > 0.0 {
            opts.tol_dominance = tol_dominance;
        }
        let a = forward(&u.inner, &opts).map_err(from_error)?;
        store(out, SzegoSpectral { inner: a.data })
    })
}

/// Inverse transform on an `m`-point grid, truncated to `n_out` modes.
///
/// # Safety
/// `sd` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_inverse(
    sd: *const SzegoSpectral,
    m: usize,
    n_out: usize,
    out: *mut *mut SzegoSymbol,
) -> SzegoStatus {
    guard(|| {
        let d = deref(sd, "spectral data")?;
        let rec = inverse(&d.inner, m, n_out).map_err(from_error)?;
        store(out, SzegoSymbol { inner: rec.symbol })
    })
}

/// Spectral data of the cubic Szegő flow at time `t`.
///
/// # Safety
/// `sd` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn szego_evolve_exact(
    sd: *const SzegoSpectral,
    t: f64,
    out: *mut *mut SzegoSpectral,
) -> SzegoStatus {
    guard(|| {
        let d = deref(sd, "spectral data")?;
        if !t.is_finite() {
            set_error("time must be finite");
            return Err(SzegoStatus::Invalid);
        }
        store(out, SzegoSpectral { inner: szego::flow::evolve_exact(&d.inner, t) })
    })
}

/// Best rank-k Hankel approximation r and its error ‖H_{u−r}‖.
///
/// # Safety
/// `sym` must be a live handle; `out` and `err` writable (`err` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn szego_best_rank_approx(
    sym: *const SzegoSymbol,
    k: usize,
    m: usize,
    n_out: usize,
    out: *mut *mut SzegoSymbol,
    err: *mut f64,
) -> SzegoStatus {
    guard(|| {
        let u = deref(sym, "symbol")?;
        let a = szego::aak::best_rank_approx(&u.inner, k, m, n_out).map_err(from_error)?;
        if !err.is_null() {
            *err = a.err;
        }
        store(out, SzegoSymbol { inner: a.r })
    })
}

/// # Safety
/// `s` must come from a `_to_json` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn szego_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
