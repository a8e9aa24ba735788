//! Pathwise solution of `dX = V2(X) dt + V1(X) dB` along a sampled fBm path.
//!
//! For `H > 1/2` the integral against `B` is a Young integral and the plain
//! Euler scheme converges pathwise; Heun (trapezoidal predictor-corrector) is
//! offered as a higher-order option.

use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientSpec;
use crate::error::{Error, Result};
use crate::fbm::FbmPath;
use crate::interval::Hurst;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Heun,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "heun" => Ok(Integrator::Heun),
            other => Err(Error::InvalidArgument(format!(
                "unknown integrator `{other}` (expected euler or heun)"
            ))),
        }
    }
}

/// Solution values on the grid of the driving path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdePath {
    pub h: Hurst,
    pub n_points: usize,
    pub x0: f64,
    pub x_values: Vec<f64>,
}

fn solve_with(driver: &FbmPath, x0: f64, mut step: impl FnMut(f64, f64, f64) -> f64) -> Result<SdePath> {
    let m = driver.values.len() - 1;
    let dt = 1.0 / m as f64;
    let mut xs = Vec::with_capacity(m + 1);
    let mut x = x0;
    xs.push(x);
    for (k, w) in driver.values.windows(2).enumerate() {
        x = step(x, dt, w[1] - w[0]);
        if !x.is_finite() {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
        xs.push(x);
    }
    Ok(SdePath {
        h: driver.h,
        n_points: m,
        x0,
        x_values: xs,
    })
}

/// `X_{k+1} = X_k + V2(X_k)/m + V1(X_k) dB_k`.
pub fn euler_solve(coeffs: &CoefficientSpec, driver: &FbmPath, x0: f64) -> Result<SdePath> {
    solve_with(driver, x0, |x, dt, db| {
        x + coeffs.drift(x) * dt + coeffs.diffusion(x) * db
    })
}

/// Euler predictor, then both coefficients averaged over the step endpoints.
pub fn heun_solve(coeffs: &CoefficientSpec, driver: &FbmPath, x0: f64) -> Result<SdePath> {
    solve_with(driver, x0, |x, dt, db| {
        let (b0, s0) = (coeffs.drift(x), coeffs.diffusion(x));
        let xp = x + b0 * dt + s0 * db;
        let (b1, s1) = (coeffs.drift(xp), coeffs.diffusion(xp));
        x + 0.5 * (b0 + b1) * dt + 0.5 * (s0 + s1) * db
    })
}

pub fn solve(integrator: Integrator, coeffs: &CoefficientSpec, driver: &FbmPath, x0: f64) -> Result<SdePath> {
    match integrator {
        Integrator::Euler => euler_solve(coeffs, driver, x0),
        Integrator::Heun => heun_solve(coeffs, driver, x0),
    }
}
