use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Success count over a number of trials with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl StabilityEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
            )));
        }
        let (lo, hi) = wilson_interval(successes, trials, Z_95);
        Ok(StabilityEstimate {
            trials,
            successes,
            rate: successes as f64 / trials as f64,
            ci_low: lo,
            ci_high: hi,
        })
    }

    /// Standard error implied by the interval half-width.
    pub fn wilson_std_error(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * Z_95)
    }
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the endpoints are exact at the boundary rates
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_successes() {
        let e = StabilityEstimate::from_counts(40, 40).unwrap();
        assert_eq!(e.rate, 1.0);
        assert_eq!(e.ci_high, 1.0);
        assert!(e.ci_low < 1.0 && e.ci_low > 0.9);
    }

    #[test]
    fn half_rate_interval() {
        // closed form at p = 1/2: centre 1/2, half width z sqrt(1/(4n) + z²/(4n²)) / (1 + z²/n)
        let n = 100f64;
        let z = Z_95;
        let half = z * (0.25 / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
        let e = StabilityEstimate::from_counts(50, 100).unwrap();
        assert!((e.ci_low - (0.5 - half)).abs() < 1e-12);
        assert!((e.ci_high - (0.5 + half)).abs() < 1e-12);
        assert!((e.ci_low - 0.404).abs() < 5e-4 && (e.ci_high - 0.596).abs() < 5e-4);
    }

    #[test]
    fn invalid_counts() {
        assert!(StabilityEstimate::from_counts(0, 0).is_err());
        assert!(StabilityEstimate::from_counts(3, 2).is_err());
    }

    #[test]
    fn interval_contains_rate() {
        for trials in 1..60u64 {
            for s in 0..=trials {
                let e = StabilityEstimate::from_counts(s, trials).unwrap();
                assert!(0.0 <= e.ci_low && e.ci_low <= e.rate && e.rate <= e.ci_high && e.ci_high <= 1.0);
            }
        }
    }
}
