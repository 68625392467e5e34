//! Evaluation of the truncated series representations
//!
//! ```text
//! u_N(w, x)  = w x j_l(w x) + sum_{n=0}^{N1} beta_n(x) j_{l+2n+1}(w x)
//! u'_N(w, x) = w^2 x j_{l-1}(w x) + (x Q(x)/2 - l) w j_l(w x)
//!              + sum_{n=0}^{N2} gamma_n(x) j_{l+2n+1}(w x)
//! ```
//!
//! for batches of real `w >= 0`, one Bessel ladder per frequency.
//!
//! When the coefficients were built with a spectral shift `lambda`, the sums
//! above evaluate the shifted problem at `w_hat = sqrt(w^2 + lambda)`; the
//! factor `(w/w_hat)^{l+1}` then restores the normalization of the original
//! problem, whose regular solution scales like `(w x)^{l+1}` at the origin.

use crate::coeffs::CoefficientSet;
use crate::error::{NsbfError, Result};
use crate::grid::GridFunction;
use crate::special::spherical_bessel_ladder;

/// Smallest frequency accepted by [`EvaluationRequest::evaluate_du`]: the
/// `w^2 x j_{l-1}(w x)` term loses all digits to cancellation as `w -> 0`
/// for the lowest admissible orders.
pub const OMEGA_MIN: f64 = 1e-3;

/// A prepared evaluation point: the coefficient values at `x` are fixed up
/// front so that each frequency costs one Bessel ladder and a dot product.
#[derive(Debug, Clone)]
pub struct EvaluationRequest<'a> {
    coeffs: &'a CoefficientSet,
    x: f64,
    beta_at: Vec<f64>,
    gamma_at: Option<Vec<f64>>,
    q_cap_at: f64,
}

/// Coefficient value at `x`: exact at nodes, linear between them (an O(h^2)
/// penalty the callers accept for off-node points).
fn coefficient_at(f: &GridFunction, x: f64) -> f64 {
    let grid = f.grid();
    if let Some(i) = grid.node_index(x) {
        return f.value(i);
    }
    let h = grid.spacing();
    let i = ((x / h).floor() as usize).min(grid.len() - 2);
    let t = (x - grid.node(i)) / h;
    f.value(i) * (1.0 - t) + f.value(i + 1) * t
}

impl<'a> EvaluationRequest<'a> {
    /// Prepares evaluation at `x` with truncation orders `n1` (for `u`) and
    /// `n2` (for `u'`; ignored when no `gamma` family is available).
    pub fn new(coeffs: &'a CoefficientSet, x: f64, n1: usize, n2: usize) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 || x > coeffs.b() * (1.0 + 1e-12) {
            return Err(NsbfError::InvalidArgument(format!(
                "evaluation point {x} outside (0, {}]",
                coeffs.b()
            )));
        }
        if n1 >= coeffs.beta().len() {
            return Err(NsbfError::InvalidArgument(format!(
                "truncation order {n1} exceeds available beta count {}",
                coeffs.beta().len()
            )));
        }
        let beta_at = coeffs.beta()[..=n1]
            .iter()
            .map(|f| coefficient_at(f, x))
            .collect();
        let gamma_at = if coeffs.gamma().is_empty() {
            None
        } else {
            if n2 >= coeffs.gamma().len() {
                return Err(NsbfError::InvalidArgument(format!(
                    "truncation order {n2} exceeds available gamma count {}",
                    coeffs.gamma().len()
                )));
            }
            Some(
                coeffs.gamma()[..=n2]
                    .iter()
                    .map(|f| coefficient_at(f, x))
                    .collect(),
            )
        };
        let q_cap_at = coefficient_at(coeffs.q_integral(), x);
        Ok(EvaluationRequest {
            coeffs,
            x,
            beta_at,
            gamma_at,
            q_cap_at,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        self.coeffs
    }

    fn shift_map(&self, omega: f64) -> Result<(f64, f64)> {
        if !(omega >= 0.0) {
            return Err(NsbfError::InvalidArgument(format!(
                "frequency {omega} must be nonnegative"
            )));
        }
        let lambda = self.coeffs.lambda();
        if lambda == 0.0 {
            return Ok((omega, 1.0));
        }
        let omega_hat = (omega * omega + lambda).sqrt();
        let rescale = (omega / omega_hat).powf(self.coeffs.ell() + 1.0);
        Ok((omega_hat, rescale))
    }

    /// `u_N(w, x)` for one frequency.
    pub fn u(&self, omega: f64) -> Result<f64> {
        let (omega_hat, rescale) = self.shift_map(omega)?;
        // Every term carries a positive power of w; the l = -1/2 ladder
        // cannot even be built at zero argument, so take the limit directly.
        if omega_hat == 0.0 {
            return Ok(0.0);
        }
        let ell = self.coeffs.ell();
        let n1 = self.beta_at.len() - 1;
        let ladder = spherical_bessel_ladder(ell, n1, omega_hat * self.x)?;
        let mut sum = omega_hat * self.x * ladder.j_ell();
        for (n, &b) in self.beta_at.iter().enumerate() {
            sum += b * ladder.j_series_term(n);
        }
        Ok(rescale * sum)
    }

    /// `u'_N(w, x)` for one frequency; requires the `gamma` family and
    /// `w >= OMEGA_MIN`.
    pub fn du(&self, omega: f64) -> Result<f64> {
        Ok(self.pair(omega)?.1)
    }

    /// `(u_N, u'_N)` sharing a single Bessel ladder.
    pub fn pair(&self, omega: f64) -> Result<(f64, f64)> {
        let gamma_at = self.gamma_at.as_ref().ok_or_else(|| {
            NsbfError::InvalidArgument("derivative evaluation needs gamma coefficients".into())
        })?;
        if omega < OMEGA_MIN {
            return Err(NsbfError::InvalidArgument(format!(
                "frequency {omega} below the derivative evaluation floor {OMEGA_MIN}"
            )));
        }
        let (omega_hat, rescale) = self.shift_map(omega)?;
        let ell = self.coeffs.ell();
        let n_max = (self.beta_at.len() - 1).max(gamma_at.len() - 1);
        let ladder = spherical_bessel_ladder(ell, n_max, omega_hat * self.x)?;

        let mut u = omega_hat * self.x * ladder.j_ell();
        for (n, &b) in self.beta_at.iter().enumerate() {
            u += b * ladder.j_series_term(n);
        }
        let mut du = omega_hat * omega_hat * self.x * ladder.j_ell_minus_1()
            + (self.x * self.q_cap_at / 2.0 - ell) * omega_hat * ladder.j_ell();
        for (n, &g) in gamma_at.iter().enumerate() {
            du += g * ladder.j_series_term(n);
        }
        Ok((rescale * u, rescale * du))
    }

    /// Batch form of [`EvaluationRequest::u`].
    pub fn evaluate_u(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas.iter().map(|&w| self.u(w)).collect()
    }

    /// Batch form of [`EvaluationRequest::du`].
    pub fn evaluate_du(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas.iter().map(|&w| self.du(w)).collect()
    }
}
