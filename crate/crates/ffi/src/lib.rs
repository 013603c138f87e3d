//! C ABI for `ampenc`.
//!
//! Handles (`AmpencConfig`, `AmpencReport`) are opaque and owned by the
//! caller once returned; release them with the matching `*_free` function.
//! Every fallible call returns an [`AmpencStatus`]; on failure a message is
//! kept per thread and can be read with [`ampenc_last_error_message`].
//! Strings returned by this library must be released with
//! [`ampenc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ampenc::amplify::EstimatorMode;
use ampenc::encoding::Backend;
use ampenc::linsolve::InversionMethod;
use ampenc::run::{execute, write_outputs, RunConfig, RunReport, SolverKind};
use ampenc::{verify, Error, ErrorCategory};

/// Result codes. The nonzero solver codes match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmpencStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Solver = 3,
    Validation = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmpencSolver {
    FixedPoint = 0,
    Newton = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmpencBackend {
    GateLevel = 0,
    Algebraic = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmpencInversion {
    Reference = 0,
    Qsvt = 1,
}

/// Run configuration.
pub struct AmpencConfig {
    inner: RunConfig,
}

/// Result of a solver run.
pub struct AmpencReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> AmpencStatus {
    match err.category() {
        ErrorCategory::Config => AmpencStatus::Config,
        ErrorCategory::Solver => AmpencStatus::Solver,
        ErrorCategory::Validation => AmpencStatus::Validation,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (AmpencStatus, String)>) -> AmpencStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AmpencStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            AmpencStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (AmpencStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AmpencStatus, String) {
    (AmpencStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AmpencStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (AmpencStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn config_mut<'a>(cfg: *mut AmpencConfig) -> Result<&'a mut RunConfig, (AmpencStatus, String)> {
    cfg.as_mut().map(|c| &mut c.inner).ok_or_else(|| null("config"))
}

unsafe fn report_ref<'a>(r: *const AmpencReport) -> Result<&'a RunReport, (AmpencStatus, String)> {
    r.as_ref().map(|r| &r.inner).ok_or_else(|| null("report"))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (AmpencStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ampenc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ampenc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ampenc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration for `solver` on the built-in problem `paper-g`.
#[no_mangle]
pub extern "C" fn ampenc_config_new(solver: AmpencSolver) -> *mut AmpencConfig {
    let solver = match solver {
        AmpencSolver::FixedPoint => SolverKind::FixedPoint,
        AmpencSolver::Newton => SolverKind::Newton,
    };
    Box::into_raw(Box::new(AmpencConfig { inner: RunConfig { solver, ..RunConfig::default() } }))
}

/// Parses a configuration from its JSON form (the `config` object of a
/// report). Writes the new handle to `out`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_from_json(json: *const c_char, out: *mut *mut AmpencConfig) -> AmpencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let inner: RunConfig = serde_json::from_str(str_arg(json, "json")?)
            .map_err(|e| (AmpencStatus::Config, format!("bad configuration: {e}")))?;
        *out = Box::into_raw(Box::new(AmpencConfig { inner }));
        Ok(())
    })
}

/// JSON form of a configuration; release with [`ampenc_string_free`].
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_to_json(cfg: *const AmpencConfig, out: *mut *mut c_char) -> AmpencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        let s = serde_json::to_string(&cfg.inner).map_err(|e| lib_err(e.into()))?;
        *out = CString::new(s).expect("json has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_free(cfg: *mut AmpencConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Built-in problem name (`paper-g`, `paper-g-direct`) or problem-file path.
///
/// # Safety
/// `cfg` must be a live handle and `problem` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_problem(cfg: *mut AmpencConfig, problem: *const c_char) -> AmpencStatus {
    guard(|| {
        let p = str_arg(problem, "problem")?.to_string();
        config_mut(cfg)?.problem = p;
        Ok(())
    })
}

/// Initial iterate with `n` entries; `im` may be null for a real vector.
///
/// # Safety
/// `re` (and `im` if not null) must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_x0(
    cfg: *mut AmpencConfig,
    re: *const f64,
    im: *const f64,
    n: usize,
) -> AmpencStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, n);
        let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
        let x0 = (0..n).map(|i| [re[i], im.map_or(0.0, |v| v[i])]).collect();
        config_mut(cfg)?.x0 = Some(x0);
        Ok(())
    })
}

/// Fixes the number of steps; a negative value restores the planned count.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_steps(cfg: *mut AmpencConfig, steps: i64) -> AmpencStatus {
    guard(|| {
        config_mut(cfg)?.steps = usize::try_from(steps).ok();
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_backend(cfg: *mut AmpencConfig, backend: AmpencBackend) -> AmpencStatus {
    guard(|| {
        config_mut(cfg)?.backend = match backend {
            AmpencBackend::GateLevel => Backend::GateLevel,
            AmpencBackend::Algebraic => Backend::Algebraic,
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_seed(cfg: *mut AmpencConfig, seed: u64) -> AmpencStatus {
    guard(|| {
        config_mut(cfg)?.seed = seed;
        Ok(())
    })
}

/// Switches to Monte Carlo estimation with `shots` per batch and
/// `repetitions` batches; `shots == 0` switches back to exact estimation.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_monte_carlo(
    cfg: *mut AmpencConfig,
    shots: u64,
    repetitions: u64,
) -> AmpencStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        if shots == 0 {
            c.estimator = EstimatorMode::Exact;
        } else {
            if repetitions == 0 {
                return Err((AmpencStatus::OutOfRange, "repetitions must be at least 1".into()));
            }
            c.estimator = EstimatorMode::MonteCarlo;
            c.shots = shots;
            c.repetitions = repetitions;
        }
        Ok(())
    })
}

/// Linear solver used by Newton steps. `angles_path` may be null to use the
/// bundled angle set.
///
/// # Safety
/// `cfg` must be a live handle; `angles_path` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ampenc_config_set_inversion(
    cfg: *mut AmpencConfig,
    method: AmpencInversion,
    kappa: f64,
    epsilon: f64,
    angles_path: *const c_char,
) -> AmpencStatus {
    guard(|| {
        let angles = if angles_path.is_null() { None } else { Some(PathBuf::from(str_arg(angles_path, "angles_path")?)) };
        let c = config_mut(cfg)?;
        c.inversion = match method {
            AmpencInversion::Reference => InversionMethod::Reference,
            AmpencInversion::Qsvt => InversionMethod::Qsvt,
        };
        c.kappa = kappa;
        c.solver_epsilon = epsilon;
        c.angles = angles;
        Ok(())
    })
}

/// Runs the configured solver and writes the report handle to `out`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_solve(cfg: *const AmpencConfig, out: *mut *mut AmpencReport) -> AmpencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        let inner = execute(&cfg.inner, |_, _| Ok(())).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AmpencReport { inner }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library that was not freed.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_free(report: *mut AmpencReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of records, the initial iterate included.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_len(report: *const AmpencReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.report.records.len() + 1)
}

/// Length of the iterate vectors, or 0 when none were recorded.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_dim(report: *const AmpencReport) -> usize {
    report.as_ref().map_or(0, |r| {
        r.inner.report.all_records().find_map(|s| s.iterate.as_ref().map(Vec::len)).unwrap_or(0)
    })
}

/// Copies the iterate of `step` into `re`/`im` (each of length `n`).
///
/// # Safety
/// `report` must be a live handle; `re` and `im` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_iterate(
    report: *const AmpencReport,
    step: usize,
    re: *mut f64,
    im: *mut f64,
    n: usize,
) -> AmpencStatus {
    guard(|| {
        let r = report_ref(report)?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let rec = r
            .report
            .all_records()
            .nth(step)
            .ok_or_else(|| (AmpencStatus::OutOfRange, format!("no step {step}")))?;
        let x = rec
            .iterate
            .as_ref()
            .ok_or_else(|| (AmpencStatus::OutOfRange, format!("step {step} has no recorded iterate")))?;
        if x.len() != n {
            return Err((AmpencStatus::OutOfRange, format!("buffer length {n}, iterate length {}", x.len())));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, n), std::slice::from_raw_parts_mut(im, n));
        for (i, p) in x.iter().enumerate() {
            re[i] = p[0];
            im[i] = p[1];
        }
        Ok(())
    })
}

/// Per-step scalars of a report.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AmpencStepInfo {
    pub gamma: f64,
    pub eta: f64,
    /// Negative when no iterate was recorded.
    pub norm: f64,
    pub amplification_rounds: u64,
    pub wires: u64,
    pub gate_count: u64,
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_step(
    report: *const AmpencReport,
    step: usize,
    out: *mut AmpencStepInfo,
) -> AmpencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let rec = report_ref(report)?
            .report
            .all_records()
            .nth(step)
            .ok_or_else(|| (AmpencStatus::OutOfRange, format!("no step {step}")))?;
        *out = AmpencStepInfo {
            gamma: rec.gamma,
            eta: rec.eta_after,
            norm: rec.norm.unwrap_or(-1.0),
            amplification_rounds: rec.k as u64,
            wires: rec.wires as u64,
            gate_count: rec.gate_count,
        };
        Ok(())
    })
}

/// Estimate of the final iterate's norm.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_final_norm(report: *const AmpencReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.report.final_norm)
}

/// Full report as JSON; release with [`ampenc_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_to_json(report: *const AmpencReport, out: *mut *mut c_char) -> AmpencStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = serde_json::to_string_pretty(report_ref(report)?).map_err(|e| lib_err(e.into()))?;
        *out = CString::new(s).expect("json has no NUL").into_raw();
        Ok(())
    })
}

/// Writes `report.json` and `iterates.csv` into `dir`.
///
/// # Safety
/// `report` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ampenc_report_write(report: *const AmpencReport, dir: *const c_char) -> AmpencStatus {
    guard(|| {
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        write_outputs(report_ref(report)?, &dir).map_err(lib_err)
    })
}

/// Runs the self-check suite (restricted by `filter` unless null) and
/// writes the number of failed checks to `failed`. Returns
/// `Validation` if any check failed.
///
/// # Safety
/// `filter` must be null or NUL-terminated; `failed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ampenc_verify(filter: *const c_char, failed: *mut usize) -> AmpencStatus {
    guard(|| {
        let filter = if filter.is_null() { None } else { Some(str_arg(filter, "filter")?) };
        let results = verify::run_suite(filter);
        let bad: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| format!("{}/{}", r.group, r.name)).collect();
        if let Some(f) = failed.as_mut() {
            *f = bad.len();
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err((AmpencStatus::Validation, format!("failed checks: {}", bad.join(", "))))
        }
    })
}
