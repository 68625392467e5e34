//! Log-log decay-rate estimation for coefficient families.
//!
//! The decay study plots `log |beta_k(b)|` against `log k` and reads off the
//! slope of the linear part. [`fit_decay_slope`] makes that reproducible: it
//! detects the largest contiguous window where the magnitudes decrease
//! monotonically within a factor-3 band and stay above the 1e-12 noise
//! floor, then returns the least-squares slope over that window.

use crate::error::{NsbfError, Result};

/// Values at or below this are treated as numerical noise and never fitted.
const NOISE_FLOOR: f64 = 1e-12;

/// Fewest window points that count as a linear region.
const MIN_WINDOW: usize = 10;

/// Least-squares slope of `log magnitudes[k-1]` vs `log k` (`k` starting at
/// 1) over the largest admissible window. A decaying power law `k^(-a)`
/// yields `-a`. Requires at least 20 entries above 1e-13; errors with a
/// "no-fit" message when no linear region exists.
pub fn fit_decay_slope(magnitudes: &[f64]) -> Result<f64> {
    let usable = magnitudes.iter().filter(|&&m| m > 1e-13).count();
    if usable < 20 {
        return Err(NsbfError::InvalidArgument(format!(
            "decay fit needs at least 20 magnitudes above 1e-13, got {usable}"
        )));
    }
    if magnitudes.iter().any(|m| !(*m >= 0.0)) {
        return Err(NsbfError::InvalidArgument(
            "decay magnitudes must be non-negative".into(),
        ));
    }

    // Largest window in which each entry (a) is above the noise floor,
    // (b) never jumps up by more than 3x from its predecessor, and (c) stays
    // within a factor 3 of the decreasing lower envelope of the window.
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0usize;
    let mut run_min = f64::INFINITY;
    let consider = |best: &mut Option<(usize, usize)>, start: usize, end: usize| {
        // Half-open [start, end); only decreasing stretches qualify.
        if end - start >= MIN_WINDOW
            && magnitudes[end - 1] < magnitudes[start]
            && best.map_or(true, |(s, e)| end - start > e - s)
        {
            *best = Some((start, end));
        }
    };
    for (i, &m) in magnitudes.iter().enumerate() {
        let extends = m > NOISE_FLOOR
            && (i == start || (m <= 3.0 * magnitudes[i - 1] && m <= 3.0 * run_min));
        if extends {
            run_min = run_min.min(m);
        } else {
            consider(&mut best, start, i);
            start = i;
            run_min = m;
        }
    }
    consider(&mut best, start, magnitudes.len());

    let Some((s, e)) = best else {
        return Err(NsbfError::InvalidArgument(
            "no-fit: no linear region found in the magnitude sequence".into(),
        ));
    };

    let xs: Vec<f64> = (s..e).map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = magnitudes[s..e].iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovers_the_exponent() {
        let mags: Vec<f64> = (1..=100).map(|k| (k as f64).powi(-3)).collect();
        let slope = fit_decay_slope(&mags).unwrap();
        assert!((slope + 3.0).abs() <= 1e-6, "slope {slope}");
    }

    #[test]
    fn tiny_additive_noise_barely_moves_the_slope() {
        let mags: Vec<f64> = (1..=100)
            .map(|k| {
                // Deterministic pseudo-noise at the 1e-13 level.
                let jitter = ((k * 2654435761u64) % 1000) as f64 / 1000.0;
                (k as f64).powi(-3) + 1e-13 * jitter
            })
            .collect();
        let slope = fit_decay_slope(&mags).unwrap();
        assert!((slope + 3.0).abs() <= 0.05, "slope {slope}");
    }

    #[test]
    fn floor_is_excluded_from_the_fit() {
        // Power law down to the floor, then a flat noise plateau below it:
        // the plateau must not drag the slope towards zero.
        let mags: Vec<f64> = (1..=60)
            .map(|k| ((k as f64).powi(-6)).max(3e-13))
            .collect();
        let slope = fit_decay_slope(&mags).unwrap();
        assert!((slope + 6.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn flat_or_short_input_is_a_no_fit() {
        let flat = vec![1.0; 40];
        let err = fit_decay_slope(&flat).unwrap_err().to_string();
        assert!(err.contains("no-fit"), "{err}");
        assert!(fit_decay_slope(&[1.0, 0.5, 0.25]).is_err());
    }
}
