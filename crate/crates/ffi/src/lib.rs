//! C interface to `pdc-core`.
//!
//! Objects are opaque handles created by `pdc_*` constructors that write the
//! new handle through an out-pointer, and released with the matching `_free`.
//! Every fallible call returns a [`PdcStatus`]; on failure a description is
//! available from [`pdc_last_error`] on the same thread. Handles are
//! immutable, so they may be shared between threads for reading.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pdc_core::coupling::solve_coupling;
use pdc_core::kernel_io::{load_kernel, KernelFormat};
use pdc_core::loss::{apply_loss, invert_loss};
use pdc_core::schmidt::{decompose_gaussian_svd, decompose_mehler_eps, decompose_svd};
use pdc_core::stats::{
    bank_from_spectrum, convolve_gf, joint_pnd, reference_poisson, reference_thermal,
    variational_distance,
};
use pdc_core::{Error, GaussianParams, Pnd, SchmidtSpectrum, Truncation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    DimensionMismatch = 4,
    ZeroKernel = 5,
    NotNormalized = 6,
    GammaOutOfRange = 7,
    DegenerateSeries = 8,
    EfficiencyOutOfRange = 9,
    Numerical = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for PdcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => PdcStatus::InvalidArgument,
            Error::ZeroKernel => PdcStatus::ZeroKernel,
            Error::DimensionMismatch(_) => PdcStatus::DimensionMismatch,
            Error::Parse { .. } | Error::Json(_) => PdcStatus::Parse,
            Error::NotNormalized { .. } => PdcStatus::NotNormalized,
            Error::GammaOutOfRange { .. } => PdcStatus::GammaOutOfRange,
            Error::DegenerateSeries(_) => PdcStatus::DegenerateSeries,
            Error::EfficiencyOutOfRange(_) => PdcStatus::EfficiencyOutOfRange,
            Error::Numerical(_) => PdcStatus::Numerical,
            Error::Io { .. } => PdcStatus::Io,
        }
    }
}

/// Schmidt spectrum handle.
pub struct PdcSpectrum(SchmidtSpectrum);

/// Photon-number distribution handle.
pub struct PdcPnd(Pnd);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PdcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PdcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PdcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PdcStatus::Panic
        }
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn get<'a, T>(handle: *const T, what: &str) -> Result<&'a T, Failure> {
    handle.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null("data pointer"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len < src.len() {
        return Err(Failure(
            PdcStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Library version as a NUL-terminated string with static lifetime.
#[no_mangle]
pub extern "C" fn pdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pdc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Spectrum of a Gaussian SDF by SVD on a `grid × grid` sampling.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_gaussian_svd(
    sigma_x2: f64,
    sigma_y2: f64,
    theta: f64,
    grid: usize,
    eps_lambda: f64,
    out: *mut *mut PdcSpectrum,
) -> PdcStatus {
    guard(|| {
        let p = GaussianParams::from_variances(sigma_x2, sigma_y2, theta)?;
        put(
            out,
            PdcSpectrum(decompose_gaussian_svd(&p, grid, eps_lambda)?),
        )
    })
}

/// Closed-form spectrum of a Gaussian SDF.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_gaussian_mehler(
    sigma_x2: f64,
    sigma_y2: f64,
    theta: f64,
    eps_lambda: f64,
    out: *mut *mut PdcSpectrum,
) -> PdcStatus {
    guard(|| {
        let p = GaussianParams::from_variances(sigma_x2, sigma_y2, theta)?;
        put(out, PdcSpectrum(decompose_mehler_eps(&p, eps_lambda)?))
    })
}

/// Spectrum of a tabulated kernel (`.csv` or `.json`), normalized first
/// unless `normalize` is false.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_from_kernel_file(
    path: *const c_char,
    normalize: bool,
    eps_lambda: f64,
    out: *mut *mut PdcSpectrum,
) -> PdcStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = PathBuf::from(CStr::from_ptr(path).to_string_lossy().into_owned());
        let kernel = load_kernel(&path, KernelFormat::from_path(&path), normalize)?;
        put(out, PdcSpectrum(decompose_svd(&kernel, eps_lambda)?))
    })
}

/// Spectrum from explicit weights (sorted internally, sum at most one).
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_from_eigenvalues(
    values: *const f64,
    len: usize,
    out: *mut *mut PdcSpectrum,
) -> PdcStatus {
    guard(|| {
        let v = slice(values, len)?.to_vec();
        put(out, PdcSpectrum(SchmidtSpectrum::from_eigenvalues(v)?))
    })
}

/// Number of kept modes; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_len(s: *const PdcSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the eigenvalues, largest first, into `buf`.
///
/// # Safety
/// `s` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_eigenvalues(
    s: *const PdcSpectrum,
    buf: *mut f64,
    len: usize,
) -> PdcStatus {
    guard(|| copy_out(get(s, "spectrum")?.0.eigenvalues(), buf, len))
}

/// Schmidt number `1/Σλ²`; NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_schmidt_number(s: *const PdcSpectrum) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.schmidt_number())
}

/// Weight discarded by the eigenvalue cutoff; NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_residual(s: *const PdcSpectrum) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.truncation_residual())
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdc_spectrum_free(s: *mut PdcSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Coupling constant giving mean photon number `mean`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_solve_coupling(
    s: *const PdcSpectrum,
    mean: f64,
    out: *mut f64,
) -> PdcStatus {
    guard(|| put_value(out, solve_coupling(&get(s, "spectrum")?.0, mean)?))
}

unsafe fn pnd_from_spectrum(
    s: *const PdcSpectrum,
    coupling: f64,
    trunc: Truncation,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    guard(|| {
        let bank = bank_from_spectrum(&get(s, "spectrum")?.0, coupling)?;
        put(out, PdcPnd(convolve_gf(&bank, trunc)?))
    })
}

/// Single-beam distribution, truncated once the remaining mass is below `tail`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_from_spectrum(
    s: *const PdcSpectrum,
    coupling: f64,
    tail: f64,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    pnd_from_spectrum(s, coupling, Truncation::Tail(tail), out)
}

/// Single-beam distribution on `0..=n_max`.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_from_spectrum_nmax(
    s: *const PdcSpectrum,
    coupling: f64,
    n_max: usize,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    pnd_from_spectrum(s, coupling, Truncation::Fixed(n_max), out)
}

/// Distribution from explicit probabilities and tail bound.
///
/// # Safety
/// `probs` must point to `len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_from_probs(
    probs: *const f64,
    len: usize,
    tail: f64,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    guard(|| put(out, PdcPnd(Pnd::new(slice(probs, len)?.to_vec(), tail)?)))
}

/// Thermal law with the given mean on `0..=n_max`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_reference_thermal(
    mean: f64,
    n_max: usize,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    guard(|| {
        put(
            out,
            PdcPnd(reference_thermal(mean, Truncation::Fixed(n_max))?),
        )
    })
}

/// Poisson law with the given mean on `0..=n_max`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_reference_poisson(
    mean: f64,
    n_max: usize,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    guard(|| {
        put(
            out,
            PdcPnd(reference_poisson(mean, Truncation::Fixed(n_max))?),
        )
    })
}

/// Number of stored probabilities (`n_max + 1`); 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_len(p: *const PdcPnd) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Copies `p(0..=n_max)` into `buf`.
///
/// # Safety
/// `p` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_probs(p: *const PdcPnd, buf: *mut f64, len: usize) -> PdcStatus {
    guard(|| copy_out(get(p, "distribution")?.0.probs(), buf, len))
}

/// Bound on the mass beyond `n_max`; NaN for a null handle.
///
/// # Safety
/// `p` must be null or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_tail(p: *const PdcPnd) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.tail())
}

/// Mean over the stored support; NaN for a null handle.
///
/// # Safety
/// `p` must be null or a live distribution handle.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_mean(p: *const PdcPnd) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.mean())
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_free(p: *mut PdcPnd) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Binomial thinning with detection efficiency `eta`.
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_apply_loss(
    p: *const PdcPnd,
    eta: f64,
    out: *mut *mut PdcPnd,
) -> PdcStatus {
    guard(|| put(out, PdcPnd(apply_loss(&get(p, "distribution")?.0, eta)?)))
}

/// Non-negative least-squares estimate of the distribution before loss.
/// `residual` may be null.
///
/// # Safety
/// `measured` must be a live handle; `out` must be valid for writes and
/// `residual` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_invert_loss(
    measured: *const PdcPnd,
    eta: f64,
    n_max: usize,
    out: *mut *mut PdcPnd,
    residual: *mut f64,
) -> PdcStatus {
    guard(|| {
        let inv = invert_loss(&get(measured, "distribution")?.0, eta, n_max)?;
        if !residual.is_null() {
            *residual = inv.residual;
        }
        put(out, PdcPnd(inv.pnd))
    })
}

/// Joint signal+idler distribution (odd entries zero).
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_pnd_joint(p: *const PdcPnd, out: *mut *mut PdcPnd) -> PdcStatus {
    guard(|| put(out, PdcPnd(joint_pnd(&get(p, "distribution")?.0))))
}

/// `Σ|p1(n) - p2(n)|`.
///
/// # Safety
/// `p1`, `p2` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdc_variational_distance(
    p1: *const PdcPnd,
    p2: *const PdcPnd,
    out: *mut f64,
) -> PdcStatus {
    guard(|| {
        let d = variational_distance(&get(p1, "distribution")?.0, &get(p2, "distribution")?.0);
        put_value(out, d.delta)
    })
}
