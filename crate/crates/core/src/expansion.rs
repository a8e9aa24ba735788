//! Random coefficients of the mixed normal limit and the first-order
//! expansion of the law of `sqrt(n) (H'_n - H)`.
//!
//! Every expectation over the random coefficients is a plain Monte Carlo mean
//! over independently simulated paths. With `w = 2 log 2 z` and `G = G_inf`
//! per path,
//!
//! ```text
//! p^Z(w) = E[phi(w; G)]
//!        + n^{-1/2} E[(c3 (w^3/G^3 - 3w/G^2) + A/2 w/G) phi(w; G)]
//!        + n^{-1/2} g E[(2w - w^3/G) phi(w; G)]
//! p_n(z) = 2 log 2 p^Z(2 log 2 z)
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientSpec;
use crate::error::{Error, Result};
use crate::interval::HurstConstants;
use crate::numeric::{compensated_sum, normal_pdf, pairwise_mean};
use crate::sde::SdePath;
use crate::stats::normal_cdf;

const TWO_LOG2: f64 = 2.0 * std::f64::consts::LN_2;

/// Smallest `V_inf` accepted.
pub const MIN_V_INF: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFunctionals {
    /// `c_{2,H} int V1(X_t)^2 dt`.
    pub v_inf: f64,
    /// `V_inf^{-2} int V1(X_t)^4 dt`.
    pub g_hat: f64,
    /// `c_inf * g_hat`.
    pub g_inf: f64,
    /// `-1/2 V_inf^{-1} c_{2,H} (V1(X_0)^2 + V1(X_1)^2)`.
    pub a_n: f64,
    /// `int V1(X_t)^6 dt`.
    pub m6: f64,
    /// `c_qtor V_inf^{-3} m6`.
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub z_grid: Vec<f64>,
    pub leading: Vec<f64>,
    pub corrected: Vec<f64>,
    pub n: usize,
    pub mc_replicas: usize,
}

/// Functionals from diffusion values `sigma_k = V1(X_{k/q})`, `k = 0..q`
/// (left Riemann points), and the terminal value `V1(X_1)`.
pub fn functionals_from_diffusion(
    sigma: &[f64],
    sigma_end: f64,
    constants: &HurstConstants,
) -> Result<PathFunctionals> {
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("no quadrature points".into()));
    }
    let q = sigma.len() as f64;
    let mean_pow = |p: i32| compensated_sum(sigma.iter().map(|s| s.powi(p))) / q;
    let (m2, m4, m6) = (mean_pow(2), mean_pow(4), mean_pow(6));
    let v_inf = constants.c2h * m2;
    if !(v_inf >= MIN_V_INF) {
        return Err(Error::DegenerateCoefficient { v_inf });
    }
    let g_hat = m4 / (v_inf * v_inf);
    let a_n = -0.5 / v_inf * constants.c2h * (sigma[0] * sigma[0] + sigma_end * sigma_end);
    Ok(PathFunctionals {
        v_inf,
        g_hat,
        g_inf: constants.c_inf * g_hat,
        a_n,
        m6,
        c3: constants.c_qtor * m6 / (v_inf * v_inf * v_inf),
    })
}

/// Left Riemann sums over `quad_n` equally spaced points of the solution grid.
pub fn path_functionals(
    path: &SdePath,
    coeffs: &CoefficientSpec,
    constants: &HurstConstants,
    quad_n: usize,
) -> Result<PathFunctionals> {
    let m = path.x_values.len() - 1;
    if quad_n == 0 || m % quad_n != 0 {
        return Err(Error::InvalidArgument(format!(
            "quad_n = {quad_n} must divide the solution grid size {m}"
        )));
    }
    let step = m / quad_n;
    let sigma: Vec<f64> = (0..quad_n).map(|k| coeffs.diffusion(path.x_values[k * step])).collect();
    let end = coeffs.diffusion(path.x_values[m]);
    functionals_from_diffusion(&sigma, end, constants)
}

fn check_samples(samples: &[PathFunctionals]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no Monte Carlo samples".into()));
    }
    match samples.iter().find(|s| !(s.g_inf > 0.0)) {
        Some(s) => Err(Error::NonPositiveVariance(s.g_inf)),
        None => Ok(()),
    }
}

/// `E[phi(z; 0, (2 log 2)^{-2} G_inf)]` at each grid point.
pub fn mixed_normal_density(z_grid: &[f64], samples: &[PathFunctionals]) -> Result<Vec<f64>> {
    check_samples(samples)?;
    Ok(z_grid
        .par_iter()
        .map(|&z| {
            let terms: Vec<f64> = samples
                .iter()
                .map(|s| normal_pdf(z, s.g_inf / (TWO_LOG2 * TWO_LOG2)))
                .collect();
            pairwise_mean(&terms)
        })
        .collect())
}

/// Distribution function of the mixed normal limit.
pub fn mixture_cdf(z: f64, samples: &[PathFunctionals]) -> f64 {
    let terms: Vec<f64> = samples
        .iter()
        .map(|s| normal_cdf(TWO_LOG2 * z / s.g_inf.sqrt()))
        .collect();
    pairwise_mean(&terms)
}

/// Leading and corrected densities at one point.
fn expansion_at(z: f64, n: usize, samples: &[PathFunctionals], g_coeff: f64) -> (f64, f64) {
    let w = TWO_LOG2 * z;
    let k = samples.len();
    let mut phi = Vec::with_capacity(k);
    let mut cubic = Vec::with_capacity(k);
    let mut linear = Vec::with_capacity(k);
    let mut perturb = Vec::with_capacity(k);
    for s in samples {
        let g = s.g_inf;
        let p = normal_pdf(w, g);
        phi.push(p);
        cubic.push(s.c3 * (w * w * w / (g * g * g) - 3.0 * w / (g * g)) * p);
        linear.push(0.5 * s.a_n * (w / g) * p);
        perturb.push((2.0 * w - w * w * w / g) * p);
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let lead = pairwise_mean(&phi);
    let z_circ = lead + inv_sqrt_n * (pairwise_mean(&cubic) + pairwise_mean(&linear));
    let z_full = z_circ + inv_sqrt_n * g_coeff * pairwise_mean(&perturb);
    (TWO_LOG2 * lead, TWO_LOG2 * z_full)
}

pub fn expansion_density(
    z_grid: &[f64],
    n: usize,
    samples: &[PathFunctionals],
    constants: &HurstConstants,
) -> Result<DensityCurve> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    check_samples(samples)?;
    let (leading, corrected) = z_grid
        .par_iter()
        .map(|&z| expansion_at(z, n, samples, constants.g_coeff))
        .unzip();
    Ok(DensityCurve {
        z_grid: z_grid.to_vec(),
        leading,
        corrected,
        n,
        mc_replicas: samples.len(),
    })
}
