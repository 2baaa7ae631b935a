//! C interface to `hfpquad`.
//!
//! Every fallible function returns an [`HfpStatus`]; on failure the message is
//! available from [`hfp_last_error_message`] on the same thread. Handles are
//! opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use hfpquad::em_constants;
use hfpquad::ie_solver::{
    build_advanced_system, build_simple_system, dirichlet_kernel_deriv, manufactured_rhs, solve_collocation,
    CollocationSolution, PeriodicKernel,
};
use hfpquad::oracles::{self, default_interval, GeometricKernelCase, Profile, ThetaCase};
use hfpquad::quadrature::{self, Evaluator, PeriodicIntegrand, RulePath, RuleSpec};
use hfpquad::HfpError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfpStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Domain = 3,
    MissingDerivatives = 4,
    UnsupportedRule = 5,
    EvaluationFailed = 6,
    NotConverged = 7,
    SingularSystem = 8,
    InsufficientData = 9,
    Io = 10,
    Panic = 11,
}

/// Rule selection for `hfp_t_hat`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfpRulePath {
    Compact = 0,
    Generic = 1,
    /// Compact when the `(m, s)` pair has a tabulated rule.
    Preferred = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfpApproach {
    Simple = 0,
    Advanced = 1,
}

/// `g(x)`; must be safe to call from several threads at once.
pub type HfpScalarFn = Option<unsafe extern "C" fn(x: f64, user: *mut c_void) -> f64>;

/// `U(t, x)` of the kernel `U(t, x)·θ_3(x - t)`.
pub type HfpKernelFn = Option<unsafe extern "C" fn(t: f64, x: f64, user: *mut c_void) -> f64>;

/// Writes `U_k(t, t)`, `k = 0..3`, into `out[0..4]`.
pub type HfpDiagonalFn = Option<unsafe extern "C" fn(t: f64, out: *mut f64, user: *mut c_void)>;

/// Opaque integrand `f(x) = g(x)/(x - t)^m` on `[a, b]`.
pub struct HfpIntegrand {
    inner: PeriodicIntegrand,
}

/// Opaque integral-equation kernel.
pub struct HfpKernel {
    inner: PeriodicKernel,
}

/// Opaque collocation solution.
pub struct HfpSolution {
    inner: CollocationSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure {
    status: HfpStatus,
    message: String,
}

impl From<HfpError> for Failure {
    fn from(e: HfpError) -> Self {
        let status = match &e {
            HfpError::InvalidParameter(_) | HfpError::OddDirichletOrder(_) | HfpError::MissingDiagonalDerivatives => {
                HfpStatus::InvalidArgument
            }
            HfpError::OrderTooLarge { .. } | HfpError::UnsupportedZetaArgument(_) | HfpError::Domain(_) => {
                HfpStatus::Domain
            }
            HfpError::MissingDerivatives { .. } => HfpStatus::MissingDerivatives,
            HfpError::UnsupportedCompactRule { .. } => HfpStatus::UnsupportedRule,
            HfpError::EvaluationFailed { .. } => HfpStatus::EvaluationFailed,
            HfpError::ReferenceNotConverged { .. } | HfpError::RhsNotConverged { .. } => HfpStatus::NotConverged,
            HfpError::SingularSystem { .. } => HfpStatus::SingularSystem,
            HfpError::InsufficientPreFloorData { .. } => HfpStatus::InsufficientData,
            HfpError::Io { .. } => HfpStatus::Io,
        };
        Failure { status, message: e.to_string() }
    }
}

fn null(name: &str) -> Failure {
    Failure {
        status: HfpStatus::NullPointer,
        message: format!("{name} is null"),
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        status: HfpStatus::InvalidArgument,
        message: message.into(),
    }
}

fn guard<F>(body: F) -> HfpStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HfpStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            HfpStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Carries the C `user` pointer into `Send + Sync` closures. The caller
/// promises the callback is thread-safe.
#[derive(Clone, Copy)]
struct UserData(*mut c_void);
unsafe impl Send for UserData {}
unsafe impl Sync for UserData {}

impl UserData {
    fn get(self) -> *mut c_void {
        self.0
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hfp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn hfp_status_name(status: HfpStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        HfpStatus::Ok => b"ok\0",
        HfpStatus::InvalidArgument => b"invalid argument\0",
        HfpStatus::NullPointer => b"null pointer\0",
        HfpStatus::Domain => b"domain error\0",
        HfpStatus::MissingDerivatives => b"missing derivatives\0",
        HfpStatus::UnsupportedRule => b"unsupported rule\0",
        HfpStatus::EvaluationFailed => b"evaluation failed\0",
        HfpStatus::NotConverged => b"not converged\0",
        HfpStatus::SingularSystem => b"singular system\0",
        HfpStatus::InsufficientData => b"insufficient data\0",
        HfpStatus::Io => b"I/O error\0",
        HfpStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Integrand from a callback for `g`. `derivs` may be NULL when
/// `deriv_count` is 0; otherwise it holds `g^(k)(t)`, `k < deriv_count`.
///
/// # Safety
/// `g` must stay callable with `user` for the lifetime of the handle;
/// `derivs` must point to `deriv_count` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_integrand_new(
    m: u32,
    t: f64,
    a: f64,
    b: f64,
    g: HfpScalarFn,
    user: *mut c_void,
    derivs: *const f64,
    deriv_count: usize,
    out: *mut *mut HfpIntegrand,
) -> HfpStatus {
    guard(|| {
        let g = g.ok_or_else(|| null("g"))?;
        if deriv_count > 0 && derivs.is_null() {
            return Err(null("derivs"));
        }
        let user = UserData(user);
        let eval: Evaluator = Arc::new(move |x| unsafe { g(x, user.get()) });
        let mut inner = PeriodicIntegrand::from_evaluator(m, t, a, b, eval)?;
        if deriv_count > 0 {
            inner = inner.with_derivatives(std::slice::from_raw_parts(derivs, deriv_count).to_vec());
        }
        write(out, Box::into_raw(Box::new(HfpIntegrand { inner })), "out")
    })
}

/// `θ_m(x - t)·poisson_u(η, 2πx/T)` on the period around `t`, derivatives attached.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_integrand_new_poisson(
    m: u32,
    t: f64,
    period: f64,
    eta: f64,
    out: *mut *mut HfpIntegrand,
) -> HfpStatus {
    guard(|| {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be > 0, got {period}")));
        }
        let (a, b) = default_interval(t, period);
        let case = ThetaCase::new(m, t, a, b, Profile::poisson(eta)?)?;
        let inner = case.integrand(m as usize + 1)?;
        write(out, Box::into_raw(Box::new(HfpIntegrand { inner })), "out")
    })
}

/// # Safety
/// `integrand` must come from an `hfp_integrand_new*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hfp_integrand_free(integrand: *mut HfpIntegrand) {
    if !integrand.is_null() {
        drop(Box::from_raw(integrand));
    }
}

/// `T̂^(s)_{m,n}`, `m` taken from the integrand.
///
/// # Safety
/// `integrand` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_t_hat(
    integrand: *const HfpIntegrand,
    s: u32,
    n: usize,
    path: HfpRulePath,
    out: *mut f64,
) -> HfpStatus {
    guard(|| {
        let f = &borrow(integrand, "integrand")?.inner;
        let m = f.m();
        let spec = match path {
            HfpRulePath::Compact => RuleSpec::new(m, s, n, RulePath::Compact)?,
            HfpRulePath::Generic => RuleSpec::new(m, s, n, RulePath::Generic)?,
            HfpRulePath::Preferred => RuleSpec::preferred(m, s, n)?,
        };
        write(out, quadrature::t_hat(&spec, f)?, "out")
    })
}

/// `ζ(j)` for even `j >= 2`, `j = 0`, or `j = 3`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_zeta(j: i64, out: *mut f64) -> HfpStatus {
    guard(|| write(out, em_constants::zeta_at(j)?, "out"))
}

/// `K(n)·u·n²`.
#[no_mangle]
pub extern "C" fn hfp_roundoff_floor(g_norm: f64, gp_norm: f64, gppp_norm: f64, period: f64, n: usize, u: f64) -> f64 {
    quadrature::roundoff_floor(g_norm, gp_norm, gppp_norm, period, n, u)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_poisson_u(eta: f64, x: f64, out: *mut f64) -> HfpStatus {
    guard(|| write(out, oracles::poisson_u(eta, x)?, "out"))
}

/// Closed-form value of the `m = 3`, `T = 2π` Poisson case.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_exact_supersingular(eta: f64, t: f64, out: *mut f64) -> HfpStatus {
    guard(|| write(out, GeometricKernelCase::new(eta, t)?.exact()?, "out"))
}

/// `D_n^{(k)}(y)`, `k <= 3`, `n` even.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_dirichlet_kernel_deriv(k: u32, n: usize, y: f64, period: f64, out: *mut f64) -> HfpStatus {
    guard(|| write(out, dirichlet_kernel_deriv(k as usize, n, y, period)?, "out"))
}

/// Kernel from callbacks. `diag` may be NULL; the advanced approach then fails.
///
/// # Safety
/// The callbacks must stay callable with `user` for the lifetime of the
/// handle, from any thread; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_kernel_new(
    a: f64,
    b: f64,
    u: HfpKernelFn,
    diag: HfpDiagonalFn,
    user: *mut c_void,
    out: *mut *mut HfpKernel,
) -> HfpStatus {
    guard(|| {
        let u = u.ok_or_else(|| null("u"))?;
        let user = UserData(user);
        let mut inner = PeriodicKernel::new(a, b, move |t, x| unsafe { u(t, x, user.get()) })?;
        if let Some(d) = diag {
            inner = inner.with_diagonal(move |t| {
                let mut buf = [0.0; 4];
                unsafe { d(t, buf.as_mut_ptr(), user.get()) };
                buf
            });
        }
        write(out, Box::into_raw(Box::new(HfpKernel { inner })), "out")
    })
}

/// `U(t, x) = (y/sin(πy/T))³ cos(πy/T)` with `y = x - t`, i.e. the kernel
/// `cos(πy/T)/sin³(πy/T)`, on `[a, b]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_kernel_new_cos_over_sin_cubed(a: f64, b: f64, out: *mut *mut HfpKernel) -> HfpStatus {
    guard(|| {
        let inner = PeriodicKernel::cos_over_sin_cubed(a, b)?;
        write(out, Box::into_raw(Box::new(HfpKernel { inner })), "out")
    })
}

/// # Safety
/// `kernel` must come from an `hfp_kernel_new*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hfp_kernel_free(kernel: *mut HfpKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

fn solve(
    kernel: &PeriodicKernel,
    w: impl Fn(f64) -> hfpquad::Result<f64> + Sync,
    lambda: f64,
    n: usize,
    approach: HfpApproach,
) -> Result<CollocationSolution, Failure> {
    let system = match approach {
        HfpApproach::Simple => build_simple_system(kernel, w, lambda, n)?,
        HfpApproach::Advanced => build_advanced_system(kernel, w, lambda, n)?,
    };
    Ok(solve_collocation(&system)?)
}

/// Solves `λφ(t) + ∫̄ K(t, x) φ(x) dx = w(t)`.
///
/// # Safety
/// `kernel` must be a live handle; `w` must be callable with `user` from any
/// thread during the call; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_solve_ie(
    kernel: *const HfpKernel,
    w: HfpScalarFn,
    user: *mut c_void,
    lambda: f64,
    n: usize,
    approach: HfpApproach,
    out: *mut *mut HfpSolution,
) -> HfpStatus {
    guard(|| {
        let k = &borrow(kernel, "kernel")?.inner;
        let w = w.ok_or_else(|| null("w"))?;
        let user = UserData(user);
        let inner = solve(k, move |x| Ok(unsafe { w(x, user.get()) }), lambda, n, approach)?;
        write(out, Box::into_raw(Box::new(HfpSolution { inner })), "out")
    })
}

/// Solves with the right-hand side manufactured from `φ = poisson_u(η, ·)`.
///
/// # Safety
/// `kernel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hfp_solve_ie_manufactured(
    kernel: *const HfpKernel,
    eta: f64,
    lambda: f64,
    n: usize,
    approach: HfpApproach,
    out: *mut *mut HfpSolution,
) -> HfpStatus {
    guard(|| {
        let k = &borrow(kernel, "kernel")?.inner;
        oracles::poisson_u(eta, 0.0)?;
        let phi: Evaluator = Arc::new(move |x| oracles::poisson_u(eta, x).unwrap_or(f64::NAN));
        let rhs = manufactured_rhs(k, phi, lambda, 8);
        let inner = solve(k, |x| rhs.value(x), lambda, n, approach)?;
        write(out, Box::into_raw(Box::new(HfpSolution { inner })), "out")
    })
}

/// Number of collocation nodes, 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_len(solution: *const HfpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.values.len())
}

/// Nodes, `hfp_solution_len` entries, owned by the handle.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_grid(solution: *const HfpSolution) -> *const f64 {
    solution.as_ref().map_or(std::ptr::null(), |s| s.inner.grid.as_ptr())
}

/// `φ̂` at the nodes, owned by the handle.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_values(solution: *const HfpSolution) -> *const f64 {
    solution.as_ref().map_or(std::ptr::null(), |s| s.inner.values.as_ptr())
}

/// `max |K̂φ̂ - w|`, NaN for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_residual(solution: *const HfpSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.residual)
}

/// 1-norm condition number, NaN for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_condition(solution: *const HfpSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.condition)
}

/// # Safety
/// `solution` must come from an `hfp_solve_ie*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hfp_solution_free(solution: *mut HfpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
