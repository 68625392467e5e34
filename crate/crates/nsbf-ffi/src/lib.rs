//! C ABI for the nsbf solver.
//!
//! The interface follows the usual opaque-handle pattern: `nsbf_solver_new*`
//! build a solver for one problem (potential, `l`, `b`, mesh), every entry
//! point returns an [`NsbfStatus`] code, and the detail message of the most
//! recent failure on the current thread is available through
//! [`nsbf_last_error_message`]. All functions are panic-safe: a Rust panic is
//! reported as `NSBF_STATUS_INTERNAL` instead of unwinding across the
//! boundary.
//!
//! The generated header is written to `include/nsbf.h` by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use nsbf::coeffs::{beta_coefficients, gamma_coefficients, shifted_potential, CoefficientSet};
use nsbf::evaluate::EvaluationRequest;
use nsbf::kernel::{kernel_k, kernel_k1, kernel_r};
use nsbf::particular::ensure_nonvanishing;
use nsbf::spectral::{default_scan_step, find_eigenvalues};
use nsbf::{BoundaryCondition, Grid, NsbfError, Potential, Problem};

/// Status code returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsbfStatus {
    /// Success.
    NsbfStatusOk = 0,
    /// A pointer argument was null.
    NsbfStatusNullPointer = 1,
    /// An argument was out of range or inconsistent.
    NsbfStatusInvalidArgument = 2,
    /// The problem definition itself is invalid.
    NsbfStatusInvalidProblem = 3,
    /// A numerical stage overflowed or failed to converge.
    NsbfStatusNumerical = 4,
    /// The output buffer was too small; nothing was written.
    NsbfStatusBufferTooSmall = 5,
    /// Unexpected internal failure.
    NsbfStatusInternal = 6,
}

/// Boundary condition selector for [`nsbf_eigenvalues`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsbfBoundary {
    NsbfBoundaryDirichlet = 0,
    NsbfBoundaryNeumann = 1,
    NsbfBoundaryRobin = 2,
}

/// Kernel selector for [`nsbf_kernel`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsbfKernel {
    /// Transmutation kernel of the solution representation.
    NsbfKernelK = 0,
    /// Kernel of the derivative representation.
    NsbfKernelK1 = 1,
    /// Fourier-side kernel (defined on `|t| <= x`).
    NsbfKernelR = 2,
}

/// Opaque solver handle: one problem with its coefficient families built and
/// truncation orders selected.
pub struct NsbfSolver {
    problem: Problem,
    coeffs: CoefficientSet,
    n1: usize,
    n2: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &NsbfError) -> NsbfStatus {
    match err {
        NsbfError::InvalidGrid(_) | NsbfError::InvalidArgument(_) | NsbfError::Config(_) => {
            NsbfStatus::NsbfStatusInvalidArgument
        }
        NsbfError::InvalidProblem(_) => NsbfStatus::NsbfStatusInvalidProblem,
        NsbfError::ShiftOverflow
        | NsbfError::ShiftSearchFailed
        | NsbfError::CoefficientOverflow(_)
        | NsbfError::OracleFailed(_) => NsbfStatus::NsbfStatusNumerical,
        NsbfError::Io(_) => NsbfStatus::NsbfStatusInternal,
    }
}

fn fail(err: NsbfError) -> NsbfStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Runs `body` with panics converted to `NSBF_STATUS_INTERNAL`.
fn guarded(body: impl FnOnce() -> NsbfStatus) -> NsbfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NsbfStatus::NsbfStatusInternal
        }
    }
}

fn null_fail(name: &str) -> NsbfStatus {
    set_error(&format!("{name} must not be null"));
    NsbfStatus::NsbfStatusNullPointer
}

fn build_solver(
    problem: Problem,
    mesh: usize,
    max_order: usize,
    out: *mut *mut NsbfSolver,
) -> NsbfStatus {
    let grid = match Grid::new(problem.b(), mesh) {
        Ok(g) => Arc::new(g),
        Err(e) => return fail(e),
    };
    let ps = match ensure_nonvanishing(&problem, &grid) {
        Ok(ps) => ps,
        Err(e) => return fail(e),
    };
    let (qs, q0) = match shifted_potential(problem.potential(), &grid, ps.lambda()) {
        Ok(pair) => pair,
        Err(e) => return fail(e),
    };
    let mut coeffs = match beta_coefficients(&ps, &qs, q0, max_order) {
        Ok(cs) => cs,
        Err(e) => return fail(e),
    };
    if let Err(e) = gamma_coefficients(&mut coeffs, &ps, max_order) {
        return fail(e);
    }
    let n1 = coeffs.select_beta_truncation();
    let n2 = coeffs.select_gamma_truncation();
    let solver = Box::new(NsbfSolver {
        problem,
        coeffs,
        n1,
        n2,
    });
    unsafe { *out = Box::into_raw(solver) };
    NsbfStatus::NsbfStatusOk
}

/// Message of the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nsbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a solver for the power potential `q(x) = c x^p` on `(0, b]`
/// (use `c = 0` for the free equation). `mesh` is the number of uniform
/// subintervals (a multiple of 5, e.g. 5000); `max_order` bounds the
/// coefficient families (the working truncations are selected
/// automatically, see [`nsbf_solver_orders`]).
///
/// # Safety
/// `out` must be a valid pointer; the handle must be released with
/// [`nsbf_solver_free`].
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_new_power(
    ell: f64,
    b: f64,
    c: f64,
    p: f64,
    mesh: usize,
    max_order: usize,
    out: *mut *mut NsbfSolver,
) -> NsbfStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let q = if c == 0.0 {
            Potential::Zero
        } else {
            Potential::Power { c, p }
        };
        let problem = match Problem::new(ell, b, q) {
            Ok(pr) => pr,
            Err(e) => return fail(e),
        };
        build_solver(problem, mesh, max_order, out)
    })
}

/// Creates a solver from potential samples on the uniform mesh: `values`
/// must hold `mesh + 1` node values `q(i b / mesh)`. `q0_finite` declares
/// whether the limit of `q` at zero is finite; when it is not, the
/// derivative-side truncation is selected from the coefficient tail instead
/// of the verification identity.
///
/// # Safety
/// `values` must point to `mesh + 1` readable doubles and `out` must be a
/// valid pointer; the handle must be released with [`nsbf_solver_free`].
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_new_sampled(
    ell: f64,
    b: f64,
    values: *const f64,
    mesh: usize,
    q0_finite: bool,
    max_order: usize,
    out: *mut *mut NsbfSolver,
) -> NsbfStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        if values.is_null() {
            return null_fail("values");
        }
        let samples: Vec<f64> = unsafe { std::slice::from_raw_parts(values, mesh + 1) }.to_vec();
        let q0 = if q0_finite { Some(samples[0]) } else { None };
        let q = Potential::Samples {
            values: Arc::new(samples),
            q0,
        };
        let problem = match Problem::new(ell, b, q) {
            Ok(pr) => pr,
            Err(e) => return fail(e),
        };
        build_solver(problem, mesh, max_order, out)
    })
}

/// Releases a solver handle. A null handle is ignored.
///
/// # Safety
/// `solver` must be a handle returned by a constructor, released once.
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_free(solver: *mut NsbfSolver) {
    if !solver.is_null() {
        drop(unsafe { Box::from_raw(solver) });
    }
}

/// Reports the automatically selected truncation orders: `n1` terms the
/// solution series, `n2` the derivative series.
///
/// # Safety
/// All pointers must be valid (output pointers may be null to skip a field).
#[no_mangle]
pub unsafe extern "C" fn nsbf_solver_orders(
    solver: *const NsbfSolver,
    n1: *mut usize,
    n2: *mut usize,
) -> NsbfStatus {
    guarded(|| {
        let Some(solver) = (unsafe { solver.as_ref() }) else {
            return null_fail("solver");
        };
        if let Some(slot) = unsafe { n1.as_mut() } {
            *slot = solver.n1;
        }
        if let Some(slot) = unsafe { n2.as_mut() } {
            *slot = solver.n2;
        }
        NsbfStatus::NsbfStatusOk
    })
}

/// Evaluates the regular solution `u(omega_i, x)` and its derivative for a
/// batch of frequencies at a fixed `x` in `(0, b]`. Either output array may
/// be null to skip that quantity; a non-null array must hold `count`
/// doubles.
///
/// # Safety
/// `solver` must be a live handle; `omegas` must point to `count` readable
/// doubles; non-null output arrays must have space for `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsbf_evaluate(
    solver: *const NsbfSolver,
    x: f64,
    omegas: *const f64,
    count: usize,
    u_out: *mut f64,
    du_out: *mut f64,
) -> NsbfStatus {
    guarded(|| {
        let Some(solver) = (unsafe { solver.as_ref() }) else {
            return null_fail("solver");
        };
        if omegas.is_null() {
            return null_fail("omegas");
        }
        let req = match EvaluationRequest::new(&solver.coeffs, x, solver.n1, solver.n2) {
            Ok(req) => req,
            Err(e) => return fail(e),
        };
        let omegas = unsafe { std::slice::from_raw_parts(omegas, count) };
        for (i, &omega) in omegas.iter().enumerate() {
            if !u_out.is_null() {
                match req.u(omega) {
                    Ok(v) => unsafe { *u_out.add(i) = v },
                    Err(e) => return fail(e),
                }
            }
            if !du_out.is_null() {
                match req.du(omega) {
                    Ok(v) => unsafe { *du_out.add(i) = v },
                    Err(e) => return fail(e),
                }
            }
        }
        NsbfStatus::NsbfStatusOk
    })
}

/// Computes the eigenvalues below `omega_max` for the given boundary
/// condition (`robin_a`, `robin_c` are read only for the Robin case).
/// `scan_step <= 0` selects the default step. Up to `capacity` eigenvalues
/// are written to `out` in increasing order and their number is stored in
/// `found`; if more were found than fit, `NSBF_STATUS_BUFFER_TOO_SMALL` is
/// returned with `found` set to the required size and `out` untouched.
///
/// # Safety
/// `solver`, `out` (with space for `capacity` doubles) and `found` must be
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nsbf_eigenvalues(
    solver: *const NsbfSolver,
    boundary: NsbfBoundary,
    robin_a: f64,
    robin_c: f64,
    omega_max: f64,
    scan_step: f64,
    out: *mut f64,
    capacity: usize,
    found: *mut usize,
) -> NsbfStatus {
    guarded(|| {
        let Some(solver) = (unsafe { solver.as_ref() }) else {
            return null_fail("solver");
        };
        if out.is_null() {
            return null_fail("out");
        }
        if found.is_null() {
            return null_fail("found");
        }
        let bc = match boundary {
            NsbfBoundary::NsbfBoundaryDirichlet => BoundaryCondition::Dirichlet,
            NsbfBoundary::NsbfBoundaryNeumann => BoundaryCondition::Neumann,
            NsbfBoundary::NsbfBoundaryRobin => BoundaryCondition::Robin {
                a: robin_a,
                c: robin_c,
            },
        };
        let step = if scan_step > 0.0 {
            scan_step
        } else {
            default_scan_step(solver.problem.b())
        };
        let req = match EvaluationRequest::new(
            &solver.coeffs,
            solver.problem.b(),
            solver.n1,
            solver.n2,
        ) {
            Ok(req) => req,
            Err(e) => return fail(e),
        };
        let spectrum = match find_eigenvalues(&req, bc, omega_max, step) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        unsafe { *found = spectrum.len() };
        if spectrum.len() > capacity {
            set_error(&format!(
                "eigenvalue buffer holds {capacity}, need {}",
                spectrum.len()
            ));
            return NsbfStatus::NsbfStatusBufferTooSmall;
        }
        for (i, &w) in spectrum.eigenvalues().iter().enumerate() {
            unsafe { *out.add(i) = w };
        }
        NsbfStatus::NsbfStatusOk
    })
}

/// Evaluates one kernel slice `kernel(x, t_i)` at the selected truncation
/// order; `t` and `values` must hold `count` doubles. For the K and K1
/// kernels `t_i` must lie in `[0, x]`; the Fourier-side kernel accepts
/// `[-x, x]`.
///
/// # Safety
/// `solver`, `t` (readable, `count` doubles) and `values` (writable,
/// `count` doubles) must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nsbf_kernel(
    solver: *const NsbfSolver,
    kind: NsbfKernel,
    x: f64,
    t: *const f64,
    count: usize,
    values: *mut f64,
) -> NsbfStatus {
    guarded(|| {
        let Some(solver) = (unsafe { solver.as_ref() }) else {
            return null_fail("solver");
        };
        if t.is_null() {
            return null_fail("t");
        }
        if values.is_null() {
            return null_fail("values");
        }
        let ts = unsafe { std::slice::from_raw_parts(t, count) };
        let slice = match kind {
            NsbfKernel::NsbfKernelK => kernel_k(&solver.coeffs, x, ts, solver.n1),
            NsbfKernel::NsbfKernelK1 => kernel_k1(&solver.coeffs, x, ts, solver.n2),
            NsbfKernel::NsbfKernelR => kernel_r(&solver.coeffs, x, ts, solver.n1),
        };
        let slice = match slice {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        for (i, &v) in slice.values().iter().enumerate() {
            unsafe { *values.add(i) = v };
        }
        NsbfStatus::NsbfStatusOk
    })
}
