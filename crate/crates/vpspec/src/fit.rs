//! Log–log regression for decay exponents.

use alloc::vec::Vec;
// std's inherent float methods shadow these in test builds
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Fewest samples a decay fit accepts.
pub const MIN_SAMPLES: usize = 8;

/// A residual RMS above this marks the trace as not power-law on the window.
pub const RESIDUAL_FLAG: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of `log|value|` from the fitted line.
    pub residual: f64,
    pub samples: usize,
    /// Residual above [`RESIDUAL_FLAG`].
    pub flagged: bool,
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, rms)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (slope, icpt, (ss / n).sqrt())
}

/// Slope of `log|v|` against `log t` over samples with `t` in `window`.
pub fn decay_exponent_fit(trace: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &(t, v) in trace {
        if t >= window.0 && t <= window.1 {
            if !(t > 0.0 && v.abs() > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange("decay fit needs positive times and nonzero magnitudes"));
            }
            x.push(t.ln());
            y.push(v.abs().ln());
        }
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::WindowTooShort(x.len()));
    }
    let (slope, intercept, residual) = line_fit(&x, &y);
    Ok(DecayFit { slope, intercept, residual, samples: x.len(), flagged: residual > RESIDUAL_FLAG })
}

/// Running maxima of `|v|` over consecutive windows of length `width` in `t`,
/// each reported at the time it occurs. Strips the oscillation from a decaying
/// trace before a fit.
pub fn envelope(trace: &[(f64, f64)], width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if trace.is_empty() {
        return out;
    }
    let mut start = trace[0].0;
    let mut best = (trace[0].0, 0.0f64);
    for &(t, v) in trace {
        if t >= start + width {
            out.push(best);
            start = t;
            best = (t, 0.0);
        }
        if v.abs() > best.1 {
            best = (t, v.abs());
        }
    }
    out.push(best);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_square() {
        let tr: Vec<(f64, f64)> = (1..50).map(|j| (j as f64, (j as f64).powi(-2))).collect();
        let f = decay_exponent_fit(&tr, (1.0, 100.0)).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-6);
        assert!(!f.flagged);
    }

    #[test]
    fn exponential_flagged() {
        let tr: Vec<(f64, f64)> = (1..40).map(|j| (j as f64, (-(j as f64)).exp())).collect();
        let f = decay_exponent_fit(&tr, (1.0, 40.0)).unwrap();
        assert!(f.slope < -10.0);
        assert!(f.flagged);
    }

    #[test]
    fn short_window() {
        let tr: Vec<(f64, f64)> = (1..8).map(|j| (j as f64, 1.0)).collect();
        assert!(matches!(decay_exponent_fit(&tr, (0.0, 10.0)), Err(Error::WindowTooShort(7))));
    }

    #[test]
    fn envelope_of_damped_cosine() {
        let tr: Vec<(f64, f64)> = (0..2000).map(|j| {
            let t = 1.0 + j as f64 * 0.01;
            (t, t.powi(-3) * (6.0 * t).cos())
        }).collect();
        let env = envelope(&tr, 2.0 * core::f64::consts::PI / 6.0);
        let f = decay_exponent_fit(&env, (2.0, 21.0)).unwrap();
        assert!((f.slope + 3.0).abs() < 0.05, "{}", f.slope);
    }

    proptest! {
        #[test]
        fn recovers_power(p in -6.0f64..2.0, c in 0.1f64..10.0) {
            let tr: Vec<(f64, f64)> = (1..30).map(|j| { let t = j as f64 * 0.7; (t, c * t.powf(p)) }).collect();
            let f = decay_exponent_fit(&tr, (0.5, 30.0)).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
        }
    }
}
