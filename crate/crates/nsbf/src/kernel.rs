//! Transmutation-kernel reconstruction.
//!
//! The series coefficients determine fixed-`x` slices of three kernels:
//!
//! * `K_N(x, t)  = (t^(l+1)/x^(l+2)) sum_{n<=N} beta_n(x)  P_n^{(l+1/2, 0)}(1 - 2t^2/x^2)`,
//! * `K1_N(x, t) = (t^(l+1)/x^(l+2)) sum_{n<=N} gamma_n(x) P_n^{(l+1/2, 0)}(1 - 2t^2/x^2)`,
//! * `R_N(x, t)  = (1 - t^2/x^2)^(l+1) sum_{n<=N} (bt_n(x)/x) P_{2n}^{(l+1, l+1)}(t/x)`,
//!
//! where `bt_n` is the Gegenbauer-side rescaling of `beta_n` (see
//! [`beta_tilde`]). `K_N` is the approximate integral-transmutation kernel:
//! `u_N(omega, x) = omega x j_l(omega x) + int_0^x K_N(x, t) omega t j_l(omega t) dt`.
//! Its diagonal trace `K_N(x, x)` converges to `Q(x)/2` with
//! `Q(x) = int_0^x q`, which is the second verification identity the
//! coefficient module tracks.

use crate::coeffs::CoefficientSet;
use crate::error::{NsbfError, Result};
use crate::grid::GridFunction;
use crate::special::{jacobi_values, ln_gamma};

/// Which kernel a slice holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Transmutation kernel built from `beta_n`.
    K,
    /// Derivative-side kernel built from `gamma_n`.
    K1,
    /// Mehler-side (Fourier-Legendre) kernel on `[-x, x]`.
    R,
}

/// Values of one kernel at fixed `x` over a set of `t` nodes.
#[derive(Debug, Clone)]
pub struct KernelSlice {
    kind: KernelKind,
    x: f64,
    t: Vec<f64>,
    values: Vec<f64>,
    n_used: usize,
}

impl KernelSlice {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Truncation order the slice was built with.
    pub fn n_used(&self) -> usize {
        self.n_used
    }
}

/// Coefficient value at `x`: exact at mesh nodes, linear in between
/// (same rule as the series evaluators).
fn coefficient_at(f: &GridFunction, x: f64) -> f64 {
    let grid = f.grid();
    if let Some(i) = grid.node_index(x) {
        return f.value(i);
    }
    let h = grid.spacing();
    let i = ((x / h).floor() as usize).min(grid.len() - 2);
    let w = (x - grid.node(i)) / h;
    (1.0 - w) * f.value(i) + w * f.value(i + 1)
}

fn check_x(cs: &CoefficientSet, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= cs.b() * (1.0 + 1e-12)) {
        return Err(NsbfError::InvalidArgument(format!(
            "kernel abscissa x = {x} outside (0, {}]",
            cs.b()
        )));
    }
    Ok(())
}

fn check_order(available: usize, n: usize, what: &str) -> Result<()> {
    if n >= available {
        return Err(NsbfError::InvalidArgument(format!(
            "kernel order {n} needs {} {what} coefficients, only {available} available",
            n + 1
        )));
    }
    Ok(())
}

/// Shared body of the two Jacobi-series kernels on `[0, x]`.
fn jacobi_kernel(
    cs: &CoefficientSet,
    coeffs: &[GridFunction],
    kind: KernelKind,
    x: f64,
    t_grid: &[f64],
    n: usize,
) -> Result<KernelSlice> {
    check_x(cs, x)?;
    let ell = cs.ell();
    let at_x: Vec<f64> = coeffs[..=n].iter().map(|f| coefficient_at(f, x)).collect();
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(0.0 <= t && t <= x * (1.0 + 1e-12)) {
            return Err(NsbfError::InvalidArgument(format!(
                "kernel argument t = {t} outside [0, {x}]"
            )));
        }
        if t == 0.0 {
            // The weight t^(l+1) vanishes for every admissible l > -1.
            values.push(0.0);
            continue;
        }
        let y = 1.0 - 2.0 * (t / x) * (t / x);
        let p = jacobi_values(ell + 0.5, 0.0, n, y)?;
        let sum: f64 = at_x.iter().zip(&p).map(|(c, pv)| c * pv).sum();
        values.push(t.powf(ell + 1.0) / x.powf(ell + 2.0) * sum);
    }
    Ok(KernelSlice {
        kind,
        x,
        t: t_grid.to_vec(),
        values,
        n_used: n,
    })
}

/// Transmutation kernel `K_N(x, .)` on the `t` nodes (each in `[0, x]`).
pub fn kernel_k(cs: &CoefficientSet, x: f64, t_grid: &[f64], n: usize) -> Result<KernelSlice> {
    check_order(cs.beta().len(), n, "beta")?;
    jacobi_kernel(cs, cs.beta(), KernelKind::K, x, t_grid, n)
}

/// Derivative-side kernel `K1_N(x, .)` on the `t` nodes.
pub fn kernel_k1(cs: &CoefficientSet, x: f64, t_grid: &[f64], n: usize) -> Result<KernelSlice> {
    check_order(cs.gamma().len(), n, "gamma")?;
    jacobi_kernel(cs, cs.gamma(), KernelKind::K1, x, t_grid, n)
}

/// Gegenbauer-side coefficient
/// `bt_n = (-1)^n x^(l+1) Gamma(l+3/2) (2n)! beta_n / (2 sqrt(pi) Gamma(l+2n+2))`,
/// with the Gamma ratio taken in log space (it would overflow as a pair of
/// factorials long before n = 50).
pub fn beta_tilde(ell: f64, x: f64, n: usize, beta_n: f64) -> f64 {
    if beta_n == 0.0 {
        return 0.0;
    }
    let two_n = 2.0 * n as f64;
    let ln = (ell + 1.0) * x.ln() + ln_gamma(ell + 1.5) + ln_gamma(two_n + 1.0)
        - (2.0f64).ln()
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(ell + two_n + 2.0)
        + beta_n.abs().ln();
    let sign = if n % 2 == 0 { beta_n.signum() } else { -beta_n.signum() };
    sign * ln.exp()
}

/// Inverse of [`beta_tilde`].
pub fn beta_from_tilde(ell: f64, x: f64, n: usize, tilde_n: f64) -> f64 {
    if tilde_n == 0.0 {
        return 0.0;
    }
    let two_n = 2.0 * n as f64;
    let ln = -(ell + 1.0) * x.ln() - ln_gamma(ell + 1.5) - ln_gamma(two_n + 1.0)
        + (2.0f64).ln()
        + 0.5 * std::f64::consts::PI.ln()
        + ln_gamma(ell + two_n + 2.0)
        + tilde_n.abs().ln();
    let sign = if n % 2 == 0 { tilde_n.signum() } else { -tilde_n.signum() };
    sign * ln.exp()
}

/// Mehler-side kernel `R_N(x, .)` on the `t` nodes (each in `[-x, x]`).
pub fn kernel_r(cs: &CoefficientSet, x: f64, t_grid: &[f64], n: usize) -> Result<KernelSlice> {
    check_order(cs.beta().len(), n, "beta")?;
    check_x(cs, x)?;
    let ell = cs.ell();
    let tilde: Vec<f64> = (0..=n)
        .map(|k| beta_tilde(ell, x, k, coefficient_at(&cs.beta()[k], x)))
        .collect();
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t.abs() <= x * (1.0 + 1e-12)) {
            return Err(NsbfError::InvalidArgument(format!(
                "kernel argument t = {t} outside [-{x}, {x}]"
            )));
        }
        let s = (t / x).clamp(-1.0, 1.0);
        let weight = (1.0 - s * s).max(0.0).powf(ell + 1.0);
        if weight == 0.0 {
            values.push(0.0);
            continue;
        }
        let p = jacobi_values(ell + 1.0, ell + 1.0, 2 * n, s)?;
        let sum: f64 = tilde
            .iter()
            .enumerate()
            .map(|(k, bt)| bt / x * p[2 * k])
            .sum();
        values.push(weight * sum);
    }
    Ok(KernelSlice {
        kind: KernelKind::R,
        x,
        t: t_grid.to_vec(),
        values,
        n_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{beta_coefficients, gamma_coefficients, shifted_potential};
    use crate::evaluate::EvaluationRequest;
    use crate::grid::{definite_integral, Grid, GridFunction};
    use crate::particular::{ensure_nonvanishing, Problem};
    use crate::potential::Potential;
    use crate::special::spherical_bessel_ladder;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn build(ell: f64, b: f64, q: Potential, m: usize, n1: usize, n2: usize) -> CoefficientSet {
        let problem = Problem::new(ell, b, q).unwrap();
        let grid = Arc::new(Grid::new(b, m).unwrap());
        let ps = ensure_nonvanishing(&problem, &grid).unwrap();
        let (qs, q0) = shifted_potential(problem.potential(), &grid, ps.lambda()).unwrap();
        let mut cs = beta_coefficients(&ps, &qs, q0, n1).unwrap();
        if n2 > 0 {
            gamma_coefficients(&mut cs, &ps, n2).unwrap();
        }
        cs
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn zero_potential_kernels_vanish() {
        for ell in [0.0, 1.5] {
            let cs = build(ell, PI, Potential::Zero, 200, 5, 5);
            let t = linspace(0.0, PI, 21);
            for slice in [
                kernel_k(&cs, PI, &t, 5).unwrap(),
                kernel_k1(&cs, PI, &t, 5).unwrap(),
                kernel_r(&cs, PI, &t, 5).unwrap(),
            ] {
                for &v in slice.values() {
                    assert!(v.abs() <= 1e-9, "{:?}: {v}", slice.kind());
                }
            }
        }
    }

    #[test]
    fn diagonal_equals_alternating_sum_and_goursat_trace() {
        let cs = build(1.5, PI, Potential::Ex1, 5000, 40, 0);
        let n = cs.select_beta_truncation();
        for x in [PI / 2.0, PI] {
            let slice = kernel_k(&cs, x, &[x], n).unwrap();
            // Algebraic identity P_n^{(a,0)}(-1) = (-1)^n: the diagonal is
            // the alternating coefficient sum divided by x.
            let alt: f64 = (0..=n)
                .map(|k| {
                    let v = coefficient_at(&cs.beta()[k], x);
                    if k % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .sum();
            assert!((slice.values()[0] - alt / x).abs() <= 1e-12 * alt.abs().max(1.0));
            // Goursat trace: K(x, x) = Q(x)/2 with Q(x) = x^3/3 here.
            let q_cap = x * x * x / 3.0;
            assert!(
                (slice.values()[0] - q_cap / 2.0).abs() <= 1e-7 * (1.0 + q_cap.abs()),
                "x = {x}: {} vs {}",
                slice.values()[0],
                q_cap / 2.0
            );
        }
    }

    #[test]
    fn derivative_kernel_diagonal_trace() {
        // K1(x, x) = Q(x)^2/8 + q(x)/4 - (2l+1) q(0)/4 on smooth potentials.
        let cs = build(1.5, PI, Potential::Ex1, 5000, 40, 40);
        let n = cs.select_gamma_truncation();
        let slice = kernel_k1(&cs, PI, &[PI], n).unwrap();
        let q_cap = PI * PI * PI / 3.0;
        let rhs = q_cap * q_cap / 8.0 + PI * PI / 4.0;
        assert!(
            (slice.values()[0] - rhs).abs() <= 1e-5 * rhs.abs(),
            "{} vs {rhs}",
            slice.values()[0]
        );
    }

    #[test]
    fn origin_endpoint_and_evenness() {
        let cs = build(1.0, PI, Potential::Ex1, 1000, 10, 10);
        let k = kernel_k(&cs, PI, &[0.0], 10).unwrap();
        assert_eq!(k.values()[0], 0.0);
        let k1 = kernel_k1(&cs, PI, &[0.0], 10).unwrap();
        assert_eq!(k1.values()[0], 0.0);
        // Exactly mirrored nodes, so t -> -t is a sign flip with no rounding.
        let t: Vec<f64> = (-20..=20).map(|i| i as f64 / 20.0 * PI).collect();
        let r = kernel_r(&cs, PI, &t, 10).unwrap();
        assert_eq!(r.values()[0], 0.0);
        assert_eq!(*r.values().last().unwrap(), 0.0);
        let m = t.len();
        for i in 0..m {
            let (a, c) = (r.values()[i], r.values()[m - 1 - i]);
            // Even-index Jacobi polynomials with equal parameters are even;
            // the recurrence reproduces that up to a rounding ulp.
            assert!((a - c).abs() <= 4.0 * f64::EPSILON * a.abs(), "t = {}", t[i]);
        }
    }

    #[test]
    fn beta_tilde_round_trips() {
        let ell = 1.5;
        for n in [0usize, 3, 17, 40] {
            for beta in [3.2e-3, -17.0, 8.4e-11] {
                let bt = beta_tilde(ell, PI, n, beta);
                assert!(bt.is_finite());
                let back = beta_from_tilde(ell, PI, n, bt);
                assert!(
                    (back - beta).abs() <= 1e-12 * beta.abs(),
                    "n = {n}: {back} vs {beta}"
                );
            }
        }
    }

    #[test]
    fn quadrature_against_kernel_reproduces_the_series() {
        // int_0^x K_N(x, t) omega t j_l(omega t) dt equals the Bessel-tail
        // sum of the series, so adding omega x j_l(omega x) reproduces u_N.
        let ell = 1.5;
        let cs = build(ell, PI, Potential::Ex1, 5000, 40, 0);
        let n = cs.select_beta_truncation();
        let req = EvaluationRequest::new(&cs, PI, n, 0).unwrap();
        let quad_grid = Arc::new(Grid::new(PI, 2000).unwrap());
        let t_nodes: Vec<f64> = (0..quad_grid.len()).map(|i| quad_grid.node(i)).collect();
        let slice = kernel_k(&cs, PI, &t_nodes, n).unwrap();
        for omega in [1.0, 5.0, 20.0] {
            let integrand: Vec<f64> = t_nodes
                .iter()
                .zip(slice.values())
                .map(|(&t, &kv)| {
                    let j = if t == 0.0 {
                        0.0
                    } else {
                        let lad = spherical_bessel_ladder(ell, 0, omega * t).unwrap();
                        omega * t * lad.j_ell()
                    };
                    kv * j
                })
                .collect();
            let gf = GridFunction::new(Arc::clone(&quad_grid), integrand).unwrap();
            let integral = definite_integral(&gf);
            let lad = spherical_bessel_ladder(ell, 0, omega * PI).unwrap();
            let free = omega * PI * lad.j_ell();
            let u = req.u(omega).unwrap();
            assert!(
                (free + integral - u).abs() <= 1e-7,
                "omega = {omega}: {} vs {u}",
                free + integral
            );
        }
    }

    #[test]
    fn kernel_depends_continuously_on_the_potential() {
        // Order-of-magnitude smoke check: a 1e-3 bump in q moves the K
        // slice by O(1e-3) in discrete L^2(0, b).
        let b = PI;
        let m = 1000;
        let grid = Arc::new(Grid::new(b, m).unwrap());
        let delta = 1e-3;
        let base: Vec<f64> = (0..grid.len()).map(|i| grid.node(i).powi(2)).collect();
        let bumped: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                x * x + delta * (-(x - b / 2.0).powi(2)).exp()
            })
            .collect();
        let t = linspace(0.0, b, 201);
        let mut slices = Vec::new();
        for values in [base, bumped] {
            let q = Potential::Samples {
                values: Arc::new(values),
                q0: Some(0.0),
            };
            let cs = build(1.5, b, q, m, 20, 0);
            slices.push(kernel_k(&cs, b, &t, 12).unwrap());
        }
        let h = b / 200.0;
        let dist2: f64 = slices[0]
            .values()
            .iter()
            .zip(slices[1].values())
            .map(|(a, c)| (a - c) * (a - c) * h)
            .sum();
        let dist = dist2.sqrt();
        assert!(dist > 0.0 && dist <= 100.0 * delta, "L2 distance {dist}");
    }

    #[test]
    fn rejects_out_of_range_arguments() {
        let cs = build(1.0, PI, Potential::Ex1, 200, 5, 0);
        assert!(kernel_k(&cs, PI, &[-0.1], 5).is_err());
        assert!(kernel_k(&cs, 1.0, &[1.5], 5).is_err());
        assert!(kernel_k(&cs, PI, &[1.0], 6).is_err());
        assert!(kernel_k1(&cs, PI, &[1.0], 0).is_err());
        assert!(kernel_r(&cs, PI, &[-4.0], 5).is_err());
    }
}
