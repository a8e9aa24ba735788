//! Second-order quadratic variation and the Hurst estimator
//!
//! ```text
//! V(n)  = sum_{j=1}^{n-1} (X_{(j+1)/n} - 2 X_{j/n} + X_{(j-1)/n})^2
//! H'_n  = 1/2 + log(V(n) / V(2n)) / (2 log 2),   H_n = 0 v H'_n ^ 1
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvRecord {
    pub n: usize,
    pub v2_n: f64,
    pub v2_2n: f64,
    /// Uncapped estimate.
    pub h_hat_raw: f64,
    /// Estimate clamped to `[0, 1]`.
    pub h_hat: f64,
    /// `sqrt(n) (h_hat_raw - H)` when the true `H` is supplied.
    pub rescaled_error: Option<f64>,
}

pub fn second_diff(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 3 {
        return Err(Error::TooFewPoints(x.len()));
    }
    Ok(x.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect())
}

pub fn qv2(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::TooFewPoints(x.len()));
    }
    Ok(x.windows(3)
        .map(|w| {
            let d = w[2] - 2.0 * w[1] + w[0];
            d * d
        })
        .sum())
}

/// Returns `(h_hat_raw, h_hat)`.
pub fn hurst_hat(v2_n: f64, v2_2n: f64) -> Result<(f64, f64)> {
    if !(v2_n > 0.0 && v2_2n > 0.0) || !v2_n.is_finite() || !v2_2n.is_finite() {
        return Err(Error::DegenerateVariation { v2_n, v2_2n });
    }
    let raw = 0.5 + (v2_n / v2_2n).ln() / (2.0 * std::f64::consts::LN_2);
    Ok((raw, raw.clamp(0.0, 1.0)))
}

/// Estimate from the `2n + 1` values of a path on the grid `k / 2n`.
pub fn estimate_from_path(values: &[f64], n: usize, true_h: Option<f64>) -> Result<QvRecord> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if values.len() != 2 * n + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected 2n + 1 = {} path values, got {}",
            2 * n + 1,
            values.len()
        )));
    }
    let v2_2n = qv2(values)?;
    let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
    let v2_n = qv2(&coarse)?;
    let (h_hat_raw, h_hat) = hurst_hat(v2_n, v2_2n)?;
    Ok(QvRecord {
        n,
        v2_n,
        v2_2n,
        h_hat_raw,
        h_hat,
        rescaled_error: true_h.map(|h| (n as f64).sqrt() * (h_hat_raw - h)),
    })
}
