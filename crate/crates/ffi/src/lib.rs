//! C ABI over `nlsavg`. Objects cross the boundary as opaque handles, strings
//! as NUL-terminated UTF-8, and every call returns an [`NlsavgStatus`]. The
//! message of the last failure on the calling thread is available from
//! [`nlsavg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nlsavg::harness::{convergence_study, SimulationConfig};
use nlsavg::spectral::{assemble_operator, basis_from_json, basis_to_json, hp_norm, Grid, Potential, PotentialSpec, SpectralBasis};
use nlsavg::{Complex64, Error};
use serde::Deserialize;

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlsavgStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    Shape = 4,
    InsufficientData = 5,
    Numerical = 6,
    Io = 7,
    InvalidUtf8 = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Opaque spectral basis handle.
pub struct NlsavgBasis {
    inner: SpectralBasis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: NlsavgStatus, message: impl Into<String>) -> NlsavgStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> NlsavgStatus {
    let status = match &e {
        Error::Config(_) | Error::Json(_) => NlsavgStatus::Config,
        Error::Domain(_) => NlsavgStatus::Domain,
        Error::Shape(_) => NlsavgStatus::Shape,
        Error::InsufficientData(_) => NlsavgStatus::InsufficientData,
        Error::Numerical(_) | Error::Diverged { .. } => NlsavgStatus::Numerical,
        Error::Io(_) => NlsavgStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(body: impl FnOnce() -> Result<(), NlsavgStatus>) -> NlsavgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NlsavgStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(NlsavgStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, NlsavgStatus> {
    if text.is_null() {
        return Err(fail(NlsavgStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| fail(NlsavgStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn to_c_string(text: String) -> Result<*mut c_char, NlsavgStatus> {
    CString::new(text).map(CString::into_raw).map_err(|_| fail(NlsavgStatus::Config, "output contains a NUL byte"))
}

unsafe fn basis_ref<'a>(basis: *const NlsavgBasis) -> Result<&'a SpectralBasis, NlsavgStatus> {
    basis.as_ref().map(|b| &b.inner).ok_or_else(|| fail(NlsavgStatus::NullPointer, "null basis handle"))
}

fn check_out<T>(out: *mut T) -> Result<(), NlsavgStatus> {
    if out.is_null() {
        Err(fail(NlsavgStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

#[derive(Deserialize)]
struct BasisRequest {
    grid: Grid,
    potential: PotentialSpec,
    truncation: usize,
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nlsavg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nlsavg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a basis from JSON with `grid`, `potential` and `truncation`
/// (a full simulation config is accepted too).
///
/// # Safety
/// `config_json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_assemble(config_json: *const c_char, out: *mut *mut NlsavgBasis) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(config_json)?;
        let req: BasisRequest = serde_json::from_str(text).map_err(|e| fail(NlsavgStatus::Config, format!("basis request: {e}")))?;
        let potential = Potential::new(req.potential, req.grid).map_err(from_error)?;
        let basis = assemble_operator(&potential, req.truncation).map_err(from_error)?;
        *out = Box::into_raw(Box::new(NlsavgBasis { inner: basis }));
        Ok(())
    })
}

/// Reads a basis document produced by [`nlsavg_basis_to_json`].
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_from_json(json: *const c_char, out: *mut *mut NlsavgBasis) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let basis = basis_from_json(read_str(json)?).map_err(from_error)?;
        *out = Box::into_raw(Box::new(NlsavgBasis { inner: basis }));
        Ok(())
    })
}

/// Frees a basis handle. NULL is ignored.
///
/// # Safety
/// `basis` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_free(basis: *mut NlsavgBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Number of retained modes `M`.
///
/// # Safety
/// `basis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_truncation(basis: *const NlsavgBasis, out: *mut usize) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        *out = basis_ref(basis)?.truncation();
        Ok(())
    })
}

/// Copies `λ_1..λ_M` into `out`, which must hold at least `M` values.
///
/// # Safety
/// `basis` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_eigenvalues(basis: *const NlsavgBasis, out: *mut f64, len: usize) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let values = basis_ref(basis)?.eigenvalues();
        if len < values.len() {
            return Err(fail(NlsavgStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

/// `|v|_p` for mode coefficients given as separate real and imaginary arrays of length `M`.
///
/// # Safety
/// `re` and `im` must point to `len` readable doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_hp_norm(
    basis: *const NlsavgBasis,
    re: *const f64,
    im: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let b = basis_ref(basis)?;
        if re.is_null() || im.is_null() {
            return Err(fail(NlsavgStatus::NullPointer, "null coefficient array"));
        }
        if len != b.truncation() {
            return Err(fail(NlsavgStatus::Shape, format!("{len} coefficients for M = {}", b.truncation())));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let v: Vec<Complex64> = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        *out = hp_norm(&v, b, p);
        Ok(())
    })
}

/// Serialises a basis; free the result with [`nlsavg_string_free`].
///
/// # Safety
/// `basis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_basis_to_json(basis: *const NlsavgBasis, out: *mut *mut c_char) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let text = basis_to_json(basis_ref(basis)?).map_err(from_error)?;
        *out = to_c_string(text)?;
        Ok(())
    })
}

/// Runs a convergence study from a simulation config and returns the report
/// as JSON; free it with [`nlsavg_string_free`]. No files are written.
///
/// # Safety
/// `config_json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsavg_run_study(config_json: *const c_char, xi_only: bool, out: *mut *mut c_char) -> NlsavgStatus {
    guard(|| {
        check_out(out)?;
        let cfg = SimulationConfig::from_json(read_str(config_json)?).map_err(from_error)?;
        let (report, _) = convergence_study(&cfg, xi_only).map_err(from_error)?;
        let text = serde_json::to_string(&report).map_err(|e| fail(NlsavgStatus::Config, e.to_string()))?;
        *out = to_c_string(text)?;
        Ok(())
    })
}
