//! C ABI over the `bwk` library.
//!
//! Every function returns a [`BwkStatus`]; on failure the message is kept per
//! thread and can be read with [`bwk_last_error_message`]. Instances are
//! opaque handles released with [`bwk_instance_free`]; strings returned by the
//! library are released with [`bwk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bwk::harness::{run_episode, EpisodeConfig};
use bwk::instance::{augment_with_null_arm, diagnostics, fixtures, generate_random_instance, OutcomeLaw, ProblemInstance};
use bwk::lp::{solve_lp, LinearProgram, LpStatus, DEFAULT_PIVOT_TOL};
use bwk::policy::PolicyKind;
use bwk::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Dimension = 3,
    InvalidInput = 4,
    Validation = 5,
    SolverFailure = 6,
    ContractViolation = 7,
    GenerationFailure = 8,
    Io = 9,
    Serialization = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwkLpStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BwkPolicy {
    TwoPhase = 0,
    OnePhase = 1,
    StaticLp = 2,
    Uniform = 3,
}

/// Opaque problem instance.
pub struct BwkInstance {
    inner: ProblemInstance,
}

/// Scalar diagnostics; undefined quantities are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BwkDiagnostics {
    pub opt_lp_per_t: f64,
    pub delta: f64,
    pub sigma: f64,
    pub chi: f64,
    pub theta: f64,
    pub nondegenerate: bool,
    pub num_optimal_arms: usize,
    pub num_binding: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BwkEpisodeSummary {
    pub tau: usize,
    pub total_reward: f64,
    /// `OPT_LP − total_reward`.
    pub regret: f64,
    /// Step at which identification finished, or -1.
    pub phase1_end: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BwkStatus {
    match e {
        Error::Dimension(_) => BwkStatus::Dimension,
        Error::InvalidInput(_) => BwkStatus::InvalidInput,
        Error::Validation(_) => BwkStatus::Validation,
        Error::SolverFailure { .. } => BwkStatus::SolverFailure,
        Error::ContractViolation(_) => BwkStatus::ContractViolation,
        Error::GenerationFailure { .. } => BwkStatus::GenerationFailure,
        Error::Episode { source, .. } => status_of(source),
        Error::Io(_) => BwkStatus::Io,
        Error::Json(_) | Error::Csv(_) => BwkStatus::Serialization,
    }
}

struct Fail(BwkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> BwkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BwkStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside bwk".into());
            BwkStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(BwkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn instance<'a>(p: *const BwkInstance) -> Result<&'a ProblemInstance, Fail> {
    p.as_ref().map(|i| &i.inner).ok_or_else(|| null("instance"))
}

fn boxed(inst: ProblemInstance) -> *mut BwkInstance {
    Box::into_raw(Box::new(BwkInstance { inner: inst }))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(BwkStatus::Serialization, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn bwk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bwk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves `max cᵀx s.t. Ax ≤ b, x ≥ 0`. `a` is row-major `k × n`; `x_out`
/// and `y_out` receive `n` and `k` values and may be NULL.
///
/// # Safety
/// Every non-NULL pointer must be valid for the stated length.
#[no_mangle]
pub unsafe extern "C" fn bwk_solve_lp(
    n: usize,
    k: usize,
    c: *const f64,
    a: *const f64,
    b: *const f64,
    status_out: *mut BwkLpStatus,
    objective_out: *mut f64,
    x_out: *mut f64,
    y_out: *mut f64,
) -> BwkStatus {
    guard(|| {
        let c = slice(c, n, "c")?.to_vec();
        let a = slice(a, n * k, "a")?;
        let b = slice(b, k, "b")?.to_vec();
        let matrix = if n == 0 { vec![Vec::new(); k] } else { a.chunks(n).map(<[f64]>::to_vec).collect() };
        let lp = LinearProgram::new(c, matrix, b)?;
        let sol = solve_lp(&lp, DEFAULT_PIVOT_TOL)?;
        *out_ref(status_out, "status_out")? = match sol.status {
            LpStatus::Optimal => BwkLpStatus::Optimal,
            LpStatus::Infeasible => BwkLpStatus::Infeasible,
            LpStatus::Unbounded => BwkLpStatus::Unbounded,
        };
        if let Some(o) = objective_out.as_mut() {
            *o = sol.objective_value;
        }
        if !x_out.is_null() {
            ptr::copy_nonoverlapping(sol.primal.as_ptr(), x_out, n);
        }
        if !y_out.is_null() {
            ptr::copy_nonoverlapping(sol.dual.as_ptr(), y_out, k);
        }
        Ok(())
    })
}

/// Builds an instance from the real arms and resources; the time row and the
/// null arm are added. `c` is row-major `d_raw × m_raw`.
///
/// # Safety
/// `mu` must hold `m_raw` values, `c` `d_raw·m_raw` values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_new(
    m_raw: usize,
    d_raw: usize,
    mu: *const f64,
    c: *const f64,
    b: f64,
    deterministic: bool,
    out: *mut *mut BwkInstance,
) -> BwkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if m_raw == 0 {
            return Err(Fail(BwkStatus::Validation, "m_raw must be at least 1".into()));
        }
        let mu = slice(mu, m_raw, "mu")?;
        let rows: Vec<Vec<f64>> = slice(c, m_raw * d_raw, "c")?.chunks(m_raw).map(<[f64]>::to_vec).collect();
        let law = if deterministic { OutcomeLaw::Deterministic } else { OutcomeLaw::Bernoulli };
        let inst = augment_with_null_arm(mu, &rows, b)?.with_dist(law);
        *out = boxed(inst);
        Ok(())
    })
}

/// Parses an instance from its JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_from_json(json: *const c_char, out: *mut *mut BwkInstance) -> BwkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(BwkStatus::InvalidUtf8, "json is not UTF-8".into()))?;
        *out = boxed(ProblemInstance::from_json(text)?);
        Ok(())
    })
}

/// Built-in fixture 1 or 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_fixture(which: u32, out: *mut *mut BwkInstance) -> BwkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inst = match which {
            1 => fixtures::f1(),
            2 => fixtures::f2(),
            other => return Err(Fail(BwkStatus::Validation, format!("no fixture {other}"))),
        };
        *out = boxed(inst);
        Ok(())
    })
}

/// Draws a random non-degenerate instance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_generate(
    m_raw: usize,
    d_raw: usize,
    b: f64,
    seed: u64,
    out: *mut *mut BwkInstance,
) -> BwkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(generate_random_instance(m_raw, d_raw, b, seed)?);
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_free(inst: *mut BwkInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of arms and resources, both including the added null arm and time row.
///
/// # Safety
/// `inst` must be a live handle; `m` and `d` writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_dims(inst: *const BwkInstance, m: *mut usize, d: *mut usize) -> BwkStatus {
    guard(|| {
        let inst = instance(inst)?;
        *out_ref(m, "m")? = inst.m;
        *out_ref(d, "d")? = inst.d;
        Ok(())
    })
}

/// Serialises the instance; free the result with [`bwk_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_instance_to_json(inst: *const BwkInstance, out: *mut *mut c_char) -> BwkStatus {
    guard(|| {
        let inst = instance(inst)?;
        let out = out_ref(out, "out")?;
        *out = c_string(inst.to_json()?)?;
        Ok(())
    })
}

/// Scalar LP diagnostics at horizon `horizon`.
///
/// # Safety
/// `inst` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_diagnostics(
    inst: *const BwkInstance,
    horizon: usize,
    tol: f64,
    out: *mut BwkDiagnostics,
) -> BwkStatus {
    guard(|| {
        let inst = instance(inst)?;
        let out = out_ref(out, "out")?;
        let d = diagnostics(inst, horizon, tol)?;
        *out = BwkDiagnostics {
            opt_lp_per_t: d.opt_lp_per_t,
            delta: d.delta.unwrap_or(f64::NAN),
            sigma: d.sigma,
            chi: d.chi.unwrap_or(f64::NAN),
            theta: d.theta.unwrap_or(f64::NAN),
            nondegenerate: d.nondegenerate,
            num_optimal_arms: d.sets.i_star.len(),
            num_binding: d.sets.j_star.len(),
        };
        Ok(())
    })
}

/// Full diagnostics as JSON; free the result with [`bwk_string_free`].
///
/// # Safety
/// `inst` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_diagnostics_json(
    inst: *const BwkInstance,
    horizon: usize,
    tol: f64,
    out: *mut *mut c_char,
) -> BwkStatus {
    guard(|| {
        let inst = instance(inst)?;
        let out = out_ref(out, "out")?;
        let d = diagnostics(inst, horizon, tol)?;
        *out = c_string(serde_json::to_string(&d).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Runs one seeded episode with default estimator settings.
///
/// # Safety
/// `inst` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bwk_run_episode(
    inst: *const BwkInstance,
    policy: BwkPolicy,
    horizon: usize,
    seed: u64,
    out: *mut BwkEpisodeSummary,
) -> BwkStatus {
    guard(|| {
        let inst = instance(inst)?;
        let out = out_ref(out, "out")?;
        let kind = match policy {
            BwkPolicy::TwoPhase => PolicyKind::TwoPhase,
            BwkPolicy::OnePhase => PolicyKind::OnePhase,
            BwkPolicy::StaticLp => PolicyKind::StaticLp,
            BwkPolicy::Uniform => PolicyKind::Uniform,
        };
        let trace = run_episode(inst, kind, horizon, seed, &EpisodeConfig::default())?;
        let opt = diagnostics(inst, horizon, bwk::lp::DEFAULT_FEAS_TOL)?.opt_lp_per_t * horizon as f64;
        *out = BwkEpisodeSummary {
            tau: trace.tau,
            total_reward: trace.total_reward,
            regret: opt - trace.total_reward,
            phase1_end: trace.phase1_end.map_or(-1, |e| e as i64),
        };
        Ok(())
    })
}
