//! Real-order spherical Bessel functions and Jacobi polynomials.
//!
//! The representation of the regular solution needs the ladder of orders
//! `l-1, l, l+1, ..., l+2N+2` of the spherical Bessel function `j_nu` at a
//! common argument, for real `l >= -1/2`. Forward recurrence in the order is
//! unstable above the turning point `nu ~ z`, so the ladder is computed
//! either from the ascending power series (small `z`) or by backward
//! recurrence seeded with a continued-fraction ratio at the top order and
//! normalized by a Steed-method value at a low anchor order (large `z`).

use crate::error::{NsbfError, Result};

/// Orders with true magnitude below this are reported as exactly zero; they
/// contribute nothing to the Neumann series in double precision.
pub const UNDERFLOW_FLOOR: f64 = 1e-280;

const SERIES_SWITCH: f64 = 9.0;

/// Natural log of the Gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection keeps the Lanczos argument away from the poles
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let xx = x - 1.0;
    let mut a = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (xx + i as f64);
    }
    let t = xx + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xx + 0.5) * t.ln() - t + a.ln()
}

/// Ladder of spherical Bessel values `j_nu(z)` for
/// `nu = l - 1, l, ..., l + 2N + 2`.
#[derive(Debug, Clone)]
pub struct BesselOrderLadder {
    ell: f64,
    z: f64,
    values: Vec<f64>,
}

impl BesselOrderLadder {
    /// Base order of the ladder, `l - 1`.
    pub fn base_order(&self) -> f64 {
        self.ell - 1.0
    }

    pub fn argument(&self) -> f64 {
        self.z
    }

    /// All values, index `k` holding `j_{l-1+k}(z)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `j_{l-1}(z)`.
    pub fn j_ell_minus_1(&self) -> f64 {
        self.values[0]
    }

    /// `j_l(z)`.
    pub fn j_ell(&self) -> f64 {
        self.values[1]
    }

    /// `j_{l+2n+1}(z)`, the order multiplying `beta_n` and `gamma_n`.
    pub fn j_series_term(&self, n: usize) -> f64 {
        self.values[2 * n + 2]
    }
}

/// Computes `j_nu(z)` for `nu = l-1 .. l+2N+2` (that is, `2N + 4` orders).
///
/// Relative accuracy is about 1e-13 for every order whose magnitude is above
/// [`UNDERFLOW_FLOOR`]; smaller orders are reported as exactly zero.
pub fn spherical_bessel_ladder(ell: f64, n: usize, z: f64) -> Result<BesselOrderLadder> {
    if ell < -0.5 {
        return Err(NsbfError::InvalidArgument(format!(
            "Bessel ladder requires l >= -1/2, got {ell}"
        )));
    }
    if !(z >= 0.0) {
        return Err(NsbfError::InvalidArgument(format!(
            "Bessel ladder requires z >= 0, got {z}"
        )));
    }
    let count = 2 * n + 4;
    let nu0 = ell - 1.0;
    let mut values = if z == 0.0 {
        let mut v = Vec::with_capacity(count);
        for k in 0..count {
            let nu = nu0 + k as f64;
            if nu == 0.0 {
                v.push(1.0);
            } else if nu > 0.0 || (nu + 1.5).abs() < 1e-14 {
                v.push(0.0);
            } else {
                return Err(NsbfError::InvalidArgument(format!(
                    "j_nu(0) diverges for order nu = {nu}"
                )));
            }
        }
        v
    } else if z <= SERIES_SWITCH {
        (0..count)
            .map(|k| spherical_j_series(nu0 + k as f64, z))
            .collect()
    } else {
        spherical_ladder_steed(nu0, count, z)?
    };
    for v in &mut values {
        if v.abs() < UNDERFLOW_FLOOR {
            *v = 0.0;
        }
    }
    Ok(BesselOrderLadder { ell, z, values })
}

/// Ascending power series for `j_nu(z)`, `nu >= -3/2`, converging without
/// harmful cancellation for `z` up to about 9 (or up to `nu` when `nu > z`).
fn spherical_j_series(nu: f64, z: f64) -> f64 {
    debug_assert!(z > 0.0 && nu >= -1.5 - 1e-12);
    let half = 0.5 * std::f64::consts::PI.sqrt();
    let ln_half_z = (0.5 * z).ln();
    let m_q = 0.25 * z * z;
    // first term with a positive Gamma argument; nu = -3/2 hits the pole at
    // Gamma(0), whose term is zero
    let k0 = if nu + 1.5 > 1e-12 { 0 } else { 1 };
    let g0 = nu + k0 as f64 + 1.5;
    let ln_t0 = nu * ln_half_z + k0 as f64 * m_q.ln() - ln_gamma(k0 as f64 + 1.0) - ln_gamma(g0);
    if ln_t0 < -720.0 {
        return 0.0;
    }
    let mut term = half * ln_t0.exp() * if k0 % 2 == 0 { 1.0 } else { -1.0 };
    let mut sum = term;
    let mut k = k0;
    loop {
        let kf = k as f64 + 1.0;
        term *= -m_q / (kf * (nu + kf + 0.5));
        sum += term;
        k += 1;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) || k > 600 {
            break;
        }
    }
    sum
}

/// Backward-recurrence ladder for `z` above the series regime.
///
/// Works on the cylindrical orders `mu = nu + 1/2`: a Lentz continued
/// fraction gives the logarithmic derivative at the top order, the three-term
/// recurrence is run downward (stable in this direction for all orders), and
/// the trial values are normalized by Steed's method at the anchor order
/// `|mu| < 1/2` reachable from the ladder by integer steps.
fn spherical_ladder_steed(nu0: f64, count: usize, z: f64) -> Result<Vec<f64>> {
    let mu0 = nu0 + 0.5; // >= -1
    let trial = cylindrical_trial_ladder(mu0, count, z)?;
    let anchor_j = (-(mu0 + 0.5).floor()) as i64; // mu0 + anchor_j in [-1/2, 1/2)
    let xmu = mu0 + anchor_j as f64;
    debug_assert!((-0.5..0.5).contains(&xmu));

    let (trial_vals, jmin) = trial;
    let idx = |j: i64| (j - jmin) as usize;
    let trial_anchor = trial_vals[idx(anchor_j)];
    let trial_anchor_prime = {
        // J'_mu = (mu/x) J_mu - J_{mu+1}
        let jmu = trial_vals[idx(anchor_j)];
        let jmu1 = trial_vals[idx(anchor_j + 1)];
        (xmu / z) * jmu - jmu1
    };
    if trial_anchor == 0.0 {
        return Err(NsbfError::InvalidArgument(
            "Bessel ladder normalization hit a zero trial anchor".into(),
        ));
    }
    let f = trial_anchor_prime / trial_anchor;
    let (p, q) = steed_cf2(xmu, z)?;
    let w = 2.0 / (std::f64::consts::PI * z);
    let gam = (p - f) / q;
    let jmu_abs = (w / ((p - f) * gam + q)).sqrt();
    let jmu = jmu_abs.copysign(trial_anchor);
    let scale = jmu / trial_anchor;

    let pref = (std::f64::consts::PI / (2.0 * z)).sqrt();
    Ok((0..count as i64)
        .map(|j| pref * trial_vals[idx(j)] * scale)
        .collect())
}

/// Downward three-term recurrence for `J_{mu0+j}(z)`, `j = jmin ..= jmax`,
/// seeded at the top with the CF1 logarithmic derivative. The returned values
/// share one unknown overall scale.
fn cylindrical_trial_ladder(mu0: f64, count: usize, z: f64) -> Result<(Vec<f64>, i64)> {
    const FPMIN: f64 = 1e-291;
    const EPS: f64 = 1e-16;
    const MAXIT: usize = 30000;
    const BIG: f64 = 1e250;

    let jmax = count as i64 - 1;
    let anchor_j = (-(mu0 + 0.5).floor()) as i64;
    let jmin = anchor_j.min(0);
    let mutop = mu0 + jmax as f64;

    // CF1: h = J'/J at the top order, isign = sign of J there.
    let xi = 1.0 / z;
    let mut isign = 1.0_f64;
    let mut h = (mutop * xi).max(FPMIN);
    let mut b = 2.0 * mutop * xi;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += 2.0 * xi;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NsbfError::InvalidArgument(format!(
            "Bessel CF1 did not converge for order {mutop}, z = {z}"
        )));
    }

    let mut vals = vec![0.0; (jmax - jmin + 1) as usize];
    let mut rj = isign * FPMIN;
    let mut rjp = h * rj;
    vals[(jmax - jmin) as usize] = rj;
    let mut nu = mutop;
    let mut j = jmax;
    while j > jmin {
        // J_{nu-1} = (nu/z) J_nu + J'_nu ; J'_{nu-1} = ((nu-1)/z) J_{nu-1} - J_nu
        let rj_prev = (nu * xi) * rj + rjp;
        rjp = (nu - 1.0) * xi * rj_prev - rj;
        rj = rj_prev;
        nu -= 1.0;
        j -= 1;
        if rj.abs() > BIG {
            rj /= BIG;
            rjp /= BIG;
            for v in vals.iter_mut() {
                *v /= BIG;
            }
        }
        vals[(j - jmin) as usize] = rj;
    }
    Ok((vals, jmin))
}

/// Steed's complex continued fraction for `(J' + iY')/(J + iY)` at order
/// `|mu| < 1/2`; returns the real and imaginary parts `(p, q)`.
fn steed_cf2(mu: f64, x: f64) -> Result<(f64, f64)> {
    const FPMIN: f64 = 1e-291;
    const EPS: f64 = 1e-16;
    const MAXIT: usize = 30000;

    let xi = 1.0 / x;
    let mut a = 0.25 - mu * mu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for i in 1..MAXIT {
        a += 2.0 * i as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        let temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            return Ok((p, q));
        }
    }
    Err(NsbfError::InvalidArgument(format!(
        "Bessel CF2 did not converge at mu = {mu}, z = {x}"
    )))
}

/// Jacobi polynomial values `P_0^{(a,b)}(y) .. P_{n_max}^{(a,b)}(y)` by the
/// ascending three-term recurrence.
pub fn jacobi_values(alpha: f64, beta: f64, n_max: usize, y: f64) -> Result<Vec<f64>> {
    if alpha <= -1.0 || beta <= -1.0 {
        return Err(NsbfError::InvalidArgument(format!(
            "Jacobi parameters must exceed -1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if y.abs() > 1.0 + 1e-12 {
        return Err(NsbfError::InvalidArgument(format!(
            "Jacobi argument must lie in [-1, 1], got {y}"
        )));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(0.5 * ((alpha + beta + 2.0) * y + alpha - beta));
    for n in 2..=n_max {
        let nf = n as f64;
        let s = 2.0 * nf + alpha + beta;
        let a1 = 2.0 * nf * (nf + alpha + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 1.0) * s * (s - 2.0);
        let a4 = 2.0 * (nf + alpha - 1.0) * (nf + beta - 1.0) * s;
        let p = ((a2 + a3 * y) * out[n - 1] - a4 * out[n - 2]) / a1;
        out.push(p);
    }
    Ok(out)
}
