//! C ABI over `cgl-core`.
//!
//! Objects cross the boundary as opaque heap handles created by `cgl_*_new`
//! (or returned through out-pointers) and released with the matching
//! `cgl_*_free`. Every fallible function returns a [`CglStatus`]; on failure
//! `cgl_last_error_message` describes the error for the calling thread.
//! Panics never unwind into the caller; they are reported as
//! `CGL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use cgl_core::cli::{self, RunConfig};
use cgl_core::convex::{self, ProxSolveSettings};
use cgl_core::diagnostics::MonitorStatus;
use cgl_core::grid::{Field, Grid};
use cgl_core::stepper::RunOutput;
use cgl_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CglStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    GridMismatch = 4,
    InvalidField = 5,
    InvalidParams = 6,
    NoConvergence = 7,
    Config = 8,
    Io = 9,
    Panic = 10,
}

impl From<&Error> for CglStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGrid(_) => CglStatus::InvalidGrid,
            Error::GridMismatch { .. } => CglStatus::GridMismatch,
            Error::InvalidField(_) => CglStatus::InvalidField,
            Error::InvalidArgument(_) => CglStatus::InvalidArgument,
            Error::InvalidParams(_) => CglStatus::InvalidParams,
            Error::NoConvergence(_) => CglStatus::NoConvergence,
            Error::Config(_) => CglStatus::Config,
            Error::Io(_) => CglStatus::Io,
        }
    }
}

/// Equation coefficients, mirroring `cgl_core::convex::Params`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CglParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub q: f64,
    pub r: f64,
    pub epsilon: f64,
    pub mu: f64,
}

impl From<CglParams> for convex::Params {
    fn from(p: CglParams) -> Self {
        convex::Params {
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            kappa: p.kappa,
            q: p.q,
            r: p.r,
            epsilon: p.epsilon,
            mu: p.mu,
        }
    }
}

/// Number of values in one energy record.
pub const CGL_RECORD_FIELDS: usize = 8;

pub struct CglGrid(Grid);
pub struct CglField(Field);
pub struct CglConfig {
    config: RunConfig,
    base: PathBuf,
}
pub struct CglRunResult(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(msg).unwrap_or_default());
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cgl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

struct Failure(CglStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(CglStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> CglStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CglStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CglStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CglStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CglStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Creates a grid with `dim` axes; `lengths` and `n` hold `dim` entries.
///
/// # Safety
/// `lengths` and `n` must point to `dim` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_grid_new(
    dim: usize,
    lengths: *const f64,
    n: *const usize,
    out: *mut *mut CglGrid,
) -> CglStatus {
    guard(|| {
        let l = slice(lengths, dim, "lengths")?;
        let k = slice(n, dim, "n")?;
        put(out, CglGrid(Grid::new(dim, l, k)?))
    })
}

/// # Safety
/// `grid` must come from `cgl_grid_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn cgl_grid_free(grid: *mut CglGrid) {
    free(grid)
}

/// Number of interior points, or 0 for a null handle.
///
/// # Safety
/// `grid` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn cgl_grid_len(grid: *const CglGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Creates a field from `len` values per component.
///
/// # Safety
/// `u1` and `u2` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_field_new(
    u1: *const f64,
    u2: *const f64,
    len: usize,
    out: *mut *mut CglField,
) -> CglStatus {
    guard(|| {
        let a = slice(u1, len, "u1")?.to_vec();
        let b = slice(u2, len, "u2")?.to_vec();
        put(out, CglField(Field::new(a, b)?))
    })
}

/// # Safety
/// `field` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cgl_field_free(field: *mut CglField) {
    free(field)
}

/// # Safety
/// `field` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn cgl_field_len(field: *const CglField) -> usize {
    field.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the components into caller buffers of length `len`, which must
/// equal the field length.
///
/// # Safety
/// `u1` and `u2` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn cgl_field_read(field: *const CglField, u1: *mut f64, u2: *mut f64, len: usize) -> CglStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if len != f.len() {
            return Err(Error::GridMismatch {
                expected: f.len(),
                found: len,
            }
            .into());
        }
        if len > 0 && (u1.is_null() || u2.is_null()) {
            return Err(null("output buffer"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(u1, len).copy_from_slice(f.u1());
            std::slice::from_raw_parts_mut(u2, len).copy_from_slice(f.u2());
        }
        Ok(())
    })
}

/// Dirichlet energy of `field` on `grid`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_phi(grid: *const CglGrid, field: *const CglField, out: *mut f64) -> CglStatus {
    guard(|| {
        let v = convex::phi(&deref(field, "field")?.0, &deref(grid, "grid")?.0)?;
        put_value(out, v)
    })
}

/// `1/r int |U|^r`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_psi(grid: *const CglGrid, field: *const CglField, r: f64, out: *mut f64) -> CglStatus {
    guard(|| {
        let v = convex::psi_r(&deref(field, "field")?.0, r, &deref(grid, "grid")?.0)?;
        put_value(out, v)
    })
}

/// `-Delta_h U` as a new field.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_grad_phi(
    grid: *const CglGrid,
    field: *const CglField,
    out: *mut *mut CglField,
) -> CglStatus {
    guard(|| {
        let v = convex::grad_phi(&deref(field, "field")?.0, &deref(grid, "grid")?.0)?;
        put(out, CglField(v))
    })
}

/// `|U|^(r-2) U` as a new field.
///
/// # Safety
/// `field` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_grad_psi(field: *const CglField, r: f64, out: *mut *mut CglField) -> CglStatus {
    guard(|| put(out, CglField(convex::grad_psi(&deref(field, "field")?.0, r)?)))
}

/// `(1 + mu d psi_r)^{-1} U` with default solver settings.
///
/// # Safety
/// `field` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_resolvent_psi(
    field: *const CglField,
    r: f64,
    mu: f64,
    out: *mut *mut CglField,
) -> CglStatus {
    guard(|| {
        let v = convex::resolvent_psi(&deref(field, "field")?.0, r, mu, &ProxSolveSettings::default())?;
        put(out, CglField(v))
    })
}

/// Yosida approximation of `d psi_r` with index `mu`.
///
/// # Safety
/// `field` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_yosida_psi(field: *const CglField, r: f64, mu: f64, out: *mut *mut CglField) -> CglStatus {
    guard(|| {
        let v = convex::yosida_psi(&deref(field, "field")?.0, r, mu, &ProxSolveSettings::default())?;
        put(out, CglField(v))
    })
}

/// Moreau envelope of `psi_r` with index `mu`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_moreau_env_psi(
    grid: *const CglGrid,
    field: *const CglField,
    r: f64,
    mu: f64,
    out: *mut f64,
) -> CglStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let v = convex::moreau_env_psi(&deref(field, "field")?.0, r, mu, g, &ProxSolveSettings::default())?;
        put_value(out, v)
    })
}

/// Solves `(Id + mu (lambda + alpha I)(-Delta_h)) V = U`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_resolvent_phi_complex(
    grid: *const CglGrid,
    field: *const CglField,
    mu: f64,
    lambda: f64,
    alpha: f64,
    out: *mut *mut CglField,
) -> CglStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let v = convex::resolvent_phi_complex(
            &deref(field, "field")?.0,
            mu,
            lambda,
            alpha,
            g,
            &ProxSolveSettings::default(),
        )?;
        put(out, CglField(v))
    })
}

/// Checks `params` against the grid-dimension constraints.
///
/// # Safety
/// `params` must be readable.
#[no_mangle]
pub unsafe extern "C" fn cgl_params_validate(params: *const CglParams, dim: usize) -> CglStatus {
    guard(|| Ok(convex::Params::from(*deref(params, "params")?).validate(dim)?))
}

/// Parses a TOML run configuration. Relative file paths inside it resolve
/// against `base_dir`, or the working directory when `base_dir` is null.
///
/// # Safety
/// `text` must be a NUL-terminated string; `base_dir` NUL-terminated or null.
#[no_mangle]
pub unsafe extern "C" fn cgl_config_parse(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut CglConfig,
) -> CglStatus {
    guard(|| {
        let config = cli::parse_config(c_str(text, "text")?)?;
        let base = if base_dir.is_null() {
            PathBuf::new()
        } else {
            PathBuf::from(c_str(base_dir, "base_dir")?)
        };
        put(out, CglConfig { config, base })
    })
}

/// Loads a configuration file; relative paths resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cgl_config_load(path: *const c_char, out: *mut *mut CglConfig) -> CglStatus {
    guard(|| {
        let p = Path::new(c_str(path, "path")?);
        let config = cli::load_config(p)?;
        let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
        put(out, CglConfig { config, base })
    })
}

/// # Safety
/// `config` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn cgl_config_free(config: *mut CglConfig) {
    free(config)
}

/// Integrates a configuration. Blow-up is a normal outcome, queried with
/// `cgl_run_blown_up`.
///
/// # Safety
/// `config` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_run(config: *const CglConfig, out: *mut *mut CglRunResult) -> CglStatus {
    guard(|| {
        let c = deref(config, "config")?;
        put(out, CglRunResult(cli::run_config(&c.config, &c.base)?))
    })
}

/// # Safety
/// `result` must come from `cgl_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_result_free(result: *mut CglRunResult) {
    free(result)
}

/// Number of energy records, or 0 for a null handle.
///
/// # Safety
/// `result` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_record_count(result: *const CglRunResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.records.len())
}

/// Writes record `index` as `t, l2_sq, phi, psi_q, psi_r, dphi_l2, dpsi_q_l2, combined`
/// into `out`, which must hold `CGL_RECORD_FIELDS` values.
///
/// # Safety
/// `result` must be valid; `out` must point to `CGL_RECORD_FIELDS` writable values.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_record(result: *const CglRunResult, index: usize, out: *mut f64) -> CglStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let rec = r.records.get(index).ok_or_else(|| {
            Failure(
                CglStatus::InvalidArgument,
                format!("record index {index} out of range (have {})", r.records.len()),
            )
        })?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        std::slice::from_raw_parts_mut(out, CGL_RECORD_FIELDS).copy_from_slice(&rec.values());
        Ok(())
    })
}

/// 1 if blow-up was detected, 0 otherwise; `t_detect` (if non-null) receives
/// the detection time or NaN.
///
/// # Safety
/// `result` must be valid or null; `t_detect` writable or null.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_blown_up(result: *const CglRunResult, t_detect: *mut f64) -> c_int {
    let status = result.as_ref().map_or(MonitorStatus::Ok, |r| r.0.status);
    let (flag, t) = match status {
        MonitorStatus::BlownUp { t_detect } => (1, t_detect),
        MonitorStatus::Ok => (0, f64::NAN),
    };
    if !t_detect.is_null() {
        *t_detect = t;
    }
    flag
}

/// Final recorded state of the run as a new field.
///
/// # Safety
/// `result` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_final_field(result: *const CglRunResult, out: *mut *mut CglField) -> CglStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let last = r
            .trajectory
            .last()
            .ok_or_else(|| Failure(CglStatus::InvalidArgument, "empty trajectory".into()))?;
        put(out, CglField(last.u.clone()))
    })
}

/// Writes the records as CSV to `path`.
///
/// # Safety
/// `result` must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cgl_run_write_csv(result: *const CglRunResult, path: *const c_char) -> CglStatus {
    guard(|| {
        let r = &deref(result, "result")?.0;
        let p = Path::new(c_str(path, "path")?);
        Ok(cli::io::write_text(p, &cli::io::records_csv(&r.records))?)
    })
}

/// Runs the law suite; `all_pass` receives 1 iff every law holds.
///
/// # Safety
/// `all_pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cgl_check(samples: usize, seed: u64, all_pass: *mut c_int) -> CglStatus {
    guard(|| {
        let reports = cli::check_reports(samples, seed, false)?;
        put_value(all_pass, c_int::from(reports.iter().all(|r| r.passed())))
    })
}
