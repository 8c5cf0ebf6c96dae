//! C ABI over `kerrcat`.
//!
//! Every entry point takes a run configuration as `key = value` text (the
//! same format the command-line tool reads), returns a [`KcStatus`] and hands
//! results back through opaque handles. Handles are released with the
//! matching `kc_*_free`. After a non-zero status, `kc_last_error` describes
//! the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kerrcat::cli::{parse_config, RunConfig, SweepKind};
use kerrcat::dynamics::Trajectory;
use kerrcat::fockspace::cat_basis;
use kerrcat::openquantum::{decoherence_sweep, renormalized_populations};
use kerrcat::pulsecraft::{calibrate_physical, design, PulseSchedule};
use kerrcat::robustness::robustness_sweep;
use kerrcat::sweep::{simulate, SweepResult};
use kerrcat::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    /// Bad configuration or argument values.
    Validation = 1,
    /// A computation failed numerically.
    Numerical = 2,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 3,
    /// The requested column does not exist.
    UnknownColumn = 4,
    /// The output buffer is shorter than the column.
    BufferTooSmall = 5,
    /// Internal panic; the library state is still consistent.
    Panic = 6,
}

/// Calibrated control schedule.
pub struct KcSchedule(PulseSchedule);

/// Population trajectory, with renormalized columns when `renormalize = true`.
pub struct KcTrajectory {
    traj: Trajectory,
    renormalized: Option<(Vec<f64>, Vec<f64>)>,
}

/// Robustness or decoherence grid.
pub struct KcSweep(SweepResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KcStatus, msg: impl Into<String>) -> KcStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> KcStatus {
    let status = if e.is_validation() || matches!(e, Error::Io(_)) { KcStatus::Validation } else { KcStatus::Numerical };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> KcStatus) -> KcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(KcStatus::Panic, "internal panic"))
}

unsafe fn config_from(text: *const c_char) -> Result<RunConfig, KcStatus> {
    if text.is_null() {
        return Err(fail(KcStatus::InvalidArgument, "config text is null"));
    }
    let s = CStr::from_ptr(text).to_str().map_err(|_| fail(KcStatus::InvalidArgument, "config text is not UTF-8"))?;
    parse_config(s).map_err(from_error)
}

unsafe fn column_name<'a>(name: *const c_char) -> Result<&'a str, KcStatus> {
    if name.is_null() {
        return Err(fail(KcStatus::InvalidArgument, "column name is null"));
    }
    CStr::from_ptr(name).to_str().map_err(|_| fail(KcStatus::InvalidArgument, "column name is not UTF-8"))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize) -> KcStatus {
    if out.is_null() {
        return fail(KcStatus::InvalidArgument, "output buffer is null");
    }
    if capacity < values.len() {
        return fail(KcStatus::BufferTooSmall, format!("column has {} entries, buffer holds {capacity}", values.len()));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    KcStatus::Ok
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> KcStatus {
    *out = Box::into_raw(Box::new(value));
    KcStatus::Ok
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or null after a success.
/// The pointer stays valid until the next `kc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn kc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Designs the configured protocol and calibrates its drives against the
/// configured truncation.
///
/// # Safety
/// `config` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_design(config: *const c_char, out: *mut *mut KcSchedule) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return fail(KcStatus::InvalidArgument, "out is null");
        }
        let c = match config_from(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let dim = c.settings.active_dim().unwrap_or(c.settings.dim);
        let schedule = cat_basis(dim, c.spec.alpha).and_then(|b| calibrate_physical(&design(&c.spec)?, &b, c.settings.calibration));
        match schedule {
            Ok(s) => store(out, KcSchedule(s)),
            Err(e) => from_error(e),
        }
    })
}

/// Number of samples in the schedule; 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle from [`kc_design`].
#[no_mangle]
pub unsafe extern "C" fn kc_schedule_len(schedule: *const KcSchedule) -> usize {
    schedule.as_ref().map_or(0, |s| s.0.len())
}

/// Copies one schedule column (any name from the schedule CSV header) into `out`.
///
/// # Safety
/// `schedule` must be a live handle, `name` a nul-terminated string and
/// `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn kc_schedule_column(schedule: *const KcSchedule, name: *const c_char, out: *mut f64, capacity: usize) -> KcStatus {
    guard(|| {
        let Some(KcSchedule(s)) = schedule.as_ref() else {
            return fail(KcStatus::InvalidArgument, "schedule is null");
        };
        let name = match column_name(name) {
            Ok(n) => n,
            Err(st) => return st,
        };
        let drives = s.drives.as_ref();
        let col: &[f64] = match name {
            "t" => &s.times,
            "gamma" => &s.gamma,
            "gamma_dot" => &s.gamma_dot,
            "beta" => &s.beta,
            "beta_dot" => &s.beta_dot,
            "omega_re" => &s.omega_re,
            "omega_im" => &s.omega_im,
            "delta" => &s.delta,
            "r_plus" => &s.r_plus,
            "e_j" if drives.is_some() => &drives.unwrap().e_j,
            "epsilon" if drives.is_some() => &drives.unwrap().epsilon,
            _ => return fail(KcStatus::UnknownColumn, format!("no schedule column {name:?}")),
        };
        copy_out(col, out, capacity)
    })
}

/// # Safety
/// `schedule` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_schedule_free(schedule: *mut KcSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Propagates |C+> under the configured model, noise and control errors.
///
/// # Safety
/// `config` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_evolve(config: *const c_char, out: *mut *mut KcTrajectory) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return fail(KcStatus::InvalidArgument, "out is null");
        }
        let c = match config_from(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let run = simulate(&c.spec, c.error, &c.settings).and_then(|traj| {
            let renormalized = if c.renormalize { Some(renormalized_populations(&traj)?) } else { None };
            Ok(KcTrajectory { traj, renormalized })
        });
        match run {
            Ok(t) => store(out, t),
            Err(e) => from_error(e),
        }
    })
}

/// Number of output times; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle from [`kc_evolve`].
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_len(traj: *const KcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.times.len())
}

/// P₋ at the final time; NaN for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle from [`kc_evolve`].
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_final_p_minus(traj: *const KcTrajectory) -> f64 {
    traj.as_ref().map_or(f64::NAN, |t| t.traj.final_p_minus())
}

/// Copies one trajectory column (any name from the trajectory CSV header) into `out`.
///
/// # Safety
/// `traj` must be a live handle, `name` a nul-terminated string and `out`
/// valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_column(traj: *const KcTrajectory, name: *const c_char, out: *mut f64, capacity: usize) -> KcStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return fail(KcStatus::InvalidArgument, "trajectory is null");
        };
        let name = match column_name(name) {
            Ok(n) => n,
            Err(st) => return st,
        };
        let p_s;
        let col: &[f64] = match (name, &t.renormalized) {
            ("t", _) => &t.traj.times,
            ("p_plus", _) => &t.traj.p_plus,
            ("p_minus", _) => &t.traj.p_minus,
            ("p_s", _) => {
                p_s = t.traj.p_s();
                &p_s
            }
            ("leakage", _) => &t.traj.leakage,
            ("norm", _) => &t.traj.norms,
            ("p_plus_r", Some((rp, _))) => rp,
            ("p_minus_r", Some((_, rm))) => rm,
            _ => return fail(KcStatus::UnknownColumn, format!("no trajectory column {name:?}")),
        };
        copy_out(col, out, capacity)
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_trajectory_free(traj: *mut KcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Runs the configured sweep (`sweep = robustness` or `decoherence`). Cells
/// that fail numerically hold NaN; the call itself still succeeds.
///
/// # Safety
/// `config` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_sweep(config: *const c_char, out: *mut *mut KcSweep) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return fail(KcStatus::InvalidArgument, "out is null");
        }
        let c = match config_from(config) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let r = match c.sweep {
            SweepKind::Robustness => robustness_sweep(&c.spec, &c.mu_values, &c.nu_values, &c.settings),
            SweepKind::Decoherence => decoherence_sweep(&c.spec, &c.t_f_values, &c.kappa_values, c.settings.noise, &c.settings),
        };
        match r {
            Ok(r) => store(out, KcSweep(r)),
            Err(e) => from_error(e),
        }
    })
}

/// Grid shape; both zero for a null handle. `p_minus` is row-major with the
/// first axis (μ or t_f) varying slowest.
///
/// # Safety
/// `sweep` must be null or a live handle; `rows` and `cols` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kc_sweep_shape(sweep: *const KcSweep, rows: *mut usize, cols: *mut usize) -> KcStatus {
    if rows.is_null() || cols.is_null() {
        return fail(KcStatus::InvalidArgument, "rows or cols is null");
    }
    let (r, c) = sweep.as_ref().map_or((0, 0), |s| s.0.shape());
    *rows = r;
    *cols = c;
    KcStatus::Ok
}

/// Copies the final P₋ grid into `out` (length rows × cols).
///
/// # Safety
/// `sweep` must be a live handle and `out` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn kc_sweep_values(sweep: *const KcSweep, out: *mut f64, capacity: usize) -> KcStatus {
    guard(|| match sweep.as_ref() {
        Some(s) => copy_out(&s.0.p_minus, out, capacity),
        None => fail(KcStatus::InvalidArgument, "sweep is null"),
    })
}

/// Number of grid cells whose propagation failed.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_sweep_failures(sweep: *const KcSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.failures.len())
}

/// # Safety
/// `sweep` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_sweep_free(sweep: *mut KcSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}
