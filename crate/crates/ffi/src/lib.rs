//! C ABI for the `oldroyd` simulator.
//!
//! Handles are opaque and owned by the caller; every `*_new`/constructor has
//! a matching `*_free`. Functions return an [`ObStatus`]; on failure the
//! message is available from [`ob_last_error_message`] on the same thread.
//! Panics are caught at the boundary and reported as `OB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use oldroyd::cli_io::checkpoint::{read_checkpoint, write_checkpoint, CheckpointError};
use oldroyd::cli_io::{self, RunConfig, RunError, SimulateOptions};
use oldroyd::diagnostics::{DiagnosticsRecord, Recorder};
use oldroyd::dynamics::{gamma_residual, step, DynamicsError, State, StepperConfig};
use oldroyd::fields::ModelParams;
use oldroyd::init_data;
use oldroyd::spectral::FrequencyGrid;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Cfl = 3,
    Io = 4,
    Format = 5,
    Inapplicable = 6,
    Numerical = 7,
    Panic = 8,
}

/// Model coefficients. `alpha` and `b` are ignored when `corotational` is
/// true.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ObModelParams {
    pub a: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub b: f64,
    pub corotational: bool,
}

/// One diagnostics sample, same quantities and order as the series CSV
/// columns.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ObDiagnostics {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_tau: f64,
    pub h1_tau: f64,
    pub h2_tau: f64,
    pub linf_tau: f64,
    pub l4_tau: f64,
    pub linf_omega: f64,
    pub l2_omega: f64,
    pub linf_gamma: f64,
    pub b0inf1_gamma: f64,
    pub besov_tau_b0inf1: f64,
    pub bkm_accum: f64,
}

impl From<DiagnosticsRecord> for ObDiagnostics {
    fn from(r: DiagnosticsRecord) -> Self {
        Self {
            t: r.t,
            l2_u: r.l2_u,
            h1_u: r.h1_u,
            l2_tau: r.l2_tau,
            h1_tau: r.h1_tau,
            h2_tau: r.h2_tau,
            linf_tau: r.linf_tau,
            l4_tau: r.l4_tau,
            linf_omega: r.linf_omega,
            l2_omega: r.l2_omega,
            linf_gamma: r.linf_gamma,
            b0inf1_gamma: r.b0inf1_gamma,
            besov_tau_b0inf1: r.besov_tau_b0inf1,
            bkm_accum: r.bkm_accum,
        }
    }
}

/// Periodic grid of `n × n` points on `[0, L)²`.
pub struct ObGrid {
    inner: Arc<FrequencyGrid>,
}

/// Velocity and stress at a time, with the number of steps taken.
pub struct ObState {
    inner: State,
    step: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ObStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(ObStatus::NullPointer, format!("`{what}` is null"))
    }
    fn invalid(msg: impl ToString) -> Self {
        Failure(ObStatus::InvalidArgument, msg.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        let status = match e {
            DynamicsError::Cfl { .. } => ObStatus::Cfl,
            DynamicsError::InvalidConfig { .. } => ObStatus::InvalidArgument,
            DynamicsError::Inapplicable(_) => ObStatus::Inapplicable,
        };
        Failure(status, e.to_string())
    }
}

impl From<CheckpointError> for Failure {
    fn from(e: CheckpointError) -> Self {
        let status = match e {
            CheckpointError::Io(_) => ObStatus::Io,
            _ => ObStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let status = match &e {
            RunError::Io { .. } | RunError::Checkpoint(CheckpointError::Io(_)) => ObStatus::Io,
            RunError::Checkpoint(_) | RunError::Series(_) | RunError::MissingRows { .. } => {
                ObStatus::Format
            }
            RunError::NonFinite { .. } => ObStatus::Numerical,
            _ => ObStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| {
            CString::new(m.replace('\0', " ")).expect("interior NULs were replaced")
        });
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ObStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            ObStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("panic: {msg}")));
            ObStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("`{what}` is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn model_params(p: &ObModelParams) -> Result<ModelParams, Failure> {
    let r = if p.corotational {
        ModelParams::corotational(p.a, p.mu, p.nu)
    } else {
        ModelParams::general(p.a, p.mu, p.nu, p.alpha, p.b)
    };
    r.map_err(Failure::invalid)
}

unsafe fn emit_state(out: *mut *mut ObState, state: State, step: u64) -> Result<(), Failure> {
    let slot = as_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(ObState { inner: state, step }));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. The pointer stays valid until the next call into the
/// library on the same thread.
#[no_mangle]
pub extern "C" fn ob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a grid. `n` must be even and at least 16, `box_len` positive.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ob_grid_new(n: usize, box_len: f64, out: *mut *mut ObGrid) -> ObStatus {
    guard(|| {
        let slot = as_mut(out, "out")?;
        let inner = FrequencyGrid::new(n, box_len).map_err(Failure::invalid)?;
        *slot = Box::into_raw(Box::new(ObGrid { inner }));
        Ok(())
    })
}

/// # Safety
/// `grid` must be NULL or a handle from [`ob_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ob_grid_free(grid: *mut ObGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_zero(grid: *const ObGrid, out: *mut *mut ObState) -> ObStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        emit_state(out, init_data::zero_state(&g.inner), 0)
    })
}

/// Taylor-Green velocity with zero stress. The box length must be a
/// multiple of 2π.
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_taylor_green(
    grid: *const ObGrid,
    out: *mut *mut ObState,
) -> ObStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let s = init_data::taylor_green(&g.inner).map_err(Failure::invalid)?;
        emit_state(out, s, 0)
    })
}

/// Seeded random solenoidal velocity and stress with the given amplitude.
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_random_small(
    grid: *const ObGrid,
    seed: u64,
    amplitude: f64,
    out: *mut *mut ObState,
) -> ObStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let s = init_data::random_small(&g.inner, seed, amplitude).map_err(Failure::invalid)?;
        emit_state(out, s, 0)
    })
}

/// Rescaled vortex data `u₀ = εφ₀(εx)`, `φ₀(x) = A(x₂, −x₁)e^{−|x|²}`, with
/// stress `τ₀ = ε²A e^{−|εx|²} Id`.
///
/// # Safety
/// `grid` must be a live grid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_remark12(
    grid: *const ObGrid,
    amplitude: f64,
    eps: f64,
    out: *mut *mut ObState,
) -> ObStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let s = init_data::remark12_family(amplitude, eps, &g.inner).map_err(Failure::invalid)?;
        emit_state(out, s, 0)
    })
}

/// # Safety
/// `state` must be NULL or a state handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ob_state_free(state: *mut ObState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Simulation time of `state`, or NaN for NULL.
///
/// # Safety
/// `state` must be NULL or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn ob_state_time(state: *const ObState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.inner.t)
}

/// Number of steps taken since the initial data, or 0 for NULL.
///
/// # Safety
/// `state` must be NULL or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn ob_state_step_count(state: *const ObState) -> u64 {
    state.as_ref().map_or(0, |s| s.step)
}

/// Advances `state` in place by `steps` steps of size `dt`. On a CFL
/// violation the state holds the last admissible step and
/// `OB_STATUS_CFL` is returned.
///
/// # Safety
/// `state` must be a live state handle and `params` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ob_state_advance(
    state: *mut ObState,
    params: *const ObModelParams,
    dt: f64,
    steps: u64,
    cfl_safety: f64,
) -> ObStatus {
    guard(|| {
        let s = as_mut(state, "state")?;
        let p = model_params(as_ref(params, "params")?)?;
        let cfg = StepperConfig {
            dt,
            t_end: s.inner.t + dt * steps as f64,
            cfl_safety,
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Failure::invalid(format!("dt = {dt} must be positive and finite")));
        }
        if !(cfl_safety.is_finite() && cfl_safety > 0.0) {
            return Err(Failure::invalid(format!(
                "cfl_safety = {cfl_safety} must be positive and finite"
            )));
        }
        for _ in 0..steps {
            let next = step(&s.inner, &p, &cfg)?;
            s.inner = next;
            s.step += 1;
        }
        Ok(())
    })
}

/// Diagnostics of a single snapshot; `bkm_accum` is zero.
///
/// # Safety
/// `state` must be a live state handle, `params` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_diagnostics(
    state: *const ObState,
    params: *const ObModelParams,
    out: *mut ObDiagnostics,
) -> ObStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let p = model_params(as_ref(params, "params")?)?;
        let slot = as_mut(out, "out")?;
        let mut rec = Recorder::new(&s.inner, &p).map_err(Failure::invalid)?;
        *slot = rec.observe(&s.inner).map_err(Failure::invalid)?.into();
        Ok(())
    })
}

/// L² residual of the Γ transport law, probed with a centered difference
/// of step `dt_probe`. Only the co-rotational model with `nu = 0` is
/// supported; other models return `OB_STATUS_INAPPLICABLE`.
///
/// # Safety
/// `state` must be a live state handle, `params` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_state_gamma_residual(
    state: *const ObState,
    params: *const ObModelParams,
    dt_probe: f64,
    out: *mut f64,
) -> ObStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let p = model_params(as_ref(params, "params")?)?;
        let slot = as_mut(out, "out")?;
        *slot = gamma_residual(&s.inner, &p, dt_probe)?;
        Ok(())
    })
}

/// Writes `state` as a binary checkpoint.
///
/// # Safety
/// `state` must be a live state handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ob_checkpoint_write(state: *const ObState, path: *const c_char) -> ObStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let path = path_arg(path, "path")?;
        write_checkpoint(&path, &s.inner, s.step)?;
        Ok(())
    })
}

/// Reads a checkpoint into a new state handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_checkpoint_read(path: *const c_char, out: *mut *mut ObState) -> ObStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let c = read_checkpoint(&path)?;
        emit_state(out, c.state, c.step)
    })
}

/// Runs the configuration file at `config_path` like `oldroyd simulate`.
/// On `OB_STATUS_OK`, `out_exit_code` receives the command-line exit code
/// (0 completed, 2 blow-up suspected, 3 CFL failure).
///
/// # Safety
/// `config_path` must be a NUL-terminated string and `out_exit_code`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ob_simulate(config_path: *const c_char, out_exit_code: *mut i32) -> ObStatus {
    guard(|| {
        let path = path_arg(config_path, "config_path")?;
        let slot = as_mut(out_exit_code, "out_exit_code")?;
        let cfg = RunConfig::from_file(&path).map_err(RunError::from)?;
        let out = cli_io::simulate(&cfg, SimulateOptions::default())?;
        *slot = i32::from(out.exit_code());
        Ok(())
    })
}
