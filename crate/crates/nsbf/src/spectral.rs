//! Eigenvalue search: scan a characteristic function built from the series
//! evaluators over a frequency range and refine each sign change by
//! bisection.

use std::f64::consts::PI;

use crate::error::{NsbfError, Result};
use crate::evaluate::{EvaluationRequest, OMEGA_MIN};

/// Boundary condition at `x = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `u(b) = 0`.
    Dirichlet,
    /// `u'(b) = 0`.
    Neumann,
    /// `a u(b) + c u'(b) = 0`.
    Robin { a: f64, c: f64 },
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        if let BoundaryCondition::Robin { a, c } = self {
            if !a.is_finite() || !c.is_finite() || (*a == 0.0 && *c == 0.0) {
                return Err(NsbfError::InvalidArgument(
                    "Robin weights must be finite and not both zero".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Result of an eigenvalue search.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    scan_range: (f64, f64),
    scan_step: f64,
    max_refinement_iterations: usize,
}

impl Spectrum {
    /// Strictly increasing eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `|characteristic(omega_n)|` for each entry.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn scan_range(&self) -> (f64, f64) {
        self.scan_range
    }

    pub fn scan_step(&self) -> f64 {
        self.scan_step
    }

    /// Largest bisection iteration count over all refined brackets.
    pub fn max_refinement_iterations(&self) -> usize {
        self.max_refinement_iterations
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Default scan resolution for a domain of size `b`: four times finer than
/// the asymptotic eigenvalue spacing `pi/b`.
pub fn default_scan_step(b: f64) -> f64 {
    PI / (8.0 * b)
}

/// The characteristic function whose positive zeros are the eigenvalues.
pub fn characteristic(
    req: &EvaluationRequest,
    bc: BoundaryCondition,
    omega: f64,
) -> Result<f64> {
    bc.validate()?;
    match bc {
        BoundaryCondition::Dirichlet => req.u(omega),
        BoundaryCondition::Neumann => req.du(omega),
        BoundaryCondition::Robin { a, c } => {
            let (u, du) = req.pair(omega)?;
            Ok(a * u + c * du)
        }
    }
}

/// All eigenvalues in `[OMEGA_MIN, omega_max]` at scan resolution
/// `scan_step`, each refined by bisection to `1e-13 * max(1, omega)`.
///
/// Steps coarser than `pi/(4 b)` risk missing eigenvalues (asymptotic
/// spacing is `pi/b`); callers wanting a safety margin should stick to
/// [`default_scan_step`].
pub fn find_eigenvalues(
    req: &EvaluationRequest,
    bc: BoundaryCondition,
    omega_max: f64,
    scan_step: f64,
) -> Result<Spectrum> {
    bc.validate()?;
    if !(scan_step > 0.0) || !(omega_max > scan_step) {
        return Err(NsbfError::InvalidArgument(format!(
            "need omega_max ({omega_max}) > scan_step ({scan_step}) > 0"
        )));
    }
    let f = |w: f64| characteristic(req, bc, w);

    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    let mut max_iter = 0usize;
    let mut prev_w = OMEGA_MIN;
    let mut prev_f = f(prev_w)?;
    let mut w = prev_w + scan_step;
    while prev_w < omega_max {
        let w_clamped = w.min(omega_max);
        let fw = f(w_clamped)?;
        if prev_f == 0.0 || prev_f * fw < 0.0 {
            let (root, iterations) = if prev_f == 0.0 {
                (prev_w, 0)
            } else {
                bisect(&f, prev_w, w_clamped, prev_f)?
            };
            max_iter = max_iter.max(iterations);
            let duplicate = eigenvalues
                .last()
                .is_some_and(|&last: &f64| root - last < scan_step / 2.0);
            if !duplicate {
                eigenvalues.push(root);
                residuals.push(f(root)?.abs());
            }
        }
        prev_w = w_clamped;
        prev_f = fw;
        w += scan_step;
    }

    Ok(Spectrum {
        eigenvalues,
        residuals,
        scan_range: (OMEGA_MIN, omega_max),
        scan_step,
        max_refinement_iterations: max_iter,
    })
}

/// Bisection on a bracketing interval; `fa` is `f(a)` (already computed by
/// the scan). Returns the midpoint estimate and the iteration count.
fn bisect(
    f: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
) -> Result<(f64, usize)> {
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-13 * mid.max(1.0) || iterations >= 200 {
            return Ok((mid, iterations));
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, iterations));
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        iterations += 1;
    }
}
