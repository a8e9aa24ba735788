//! Inner products of interval indicators in the reproducing space of
//! fractional Brownian motion, and the series constants built from them.
//!
//! For indicators of intervals the inner product is the covariance of the
//! corresponding fBm increments,
//!
//! ```text
//! <1[a,b], 1[c,d]> = 1/2 (|d-a|^{2H} + |c-b|^{2H} - |c-a|^{2H} - |d-b|^{2H}).
//! ```
//!
//! Every lag sequence here (`fgn_autocov`, `rho_hat`, `rho_tilde`) is a finite
//! signed combination `sum_k w_k |x + k|^{2H}` evaluated at an integer lag `x`.
//! At large lags these combinations are high-order finite differences of
//! `|.|^{2H}`, so direct evaluation cancels catastrophically. [`PowerStencil`]
//! switches to the binomial expansion in `1/x` with integer moments computed
//! exactly, which keeps full relative precision at every lag. All three
//! sequences are even and are evaluated at `|x|`, so tables are exactly
//! symmetric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, linear_convolution};

/// Hurst parameter.
///
/// [`Hurst::new`] accepts the model range `1/2 < h < 1`. The Brownian boundary
/// `h = 1/2` is available through [`Hurst::with_boundary`] for closed-form
/// constants only; the simulation modules call [`Hurst::require_model`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(Error::HurstRange { h, range: "(1/2, 1)" })
        }
    }

    pub fn with_boundary(h: f64) -> Result<Self> {
        if (0.5..1.0).contains(&h) {
            Ok(Hurst(h))
        } else {
            Err(Error::HurstRange { h, range: "[1/2, 1)" })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponent `2H` of the covariance kernel.
    pub fn alpha(self) -> f64 {
        2.0 * self.0
    }

    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }

    pub fn require_model(self) -> Result<Self> {
        Hurst::new(self.0)
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Hurst::with_boundary(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

#[inline]
fn abs_pow(x: f64, alpha: f64) -> f64 {
    x.abs().powf(alpha)
}

/// Covariance of the fBm increments over `[a, b]` and `[c, d]`.
///
/// Degenerate intervals (`a == b` or `c == d`) are zero kernels and give 0.
/// Reversed endpoints are accepted and give the signed value (the formula is
/// antisymmetric in each pair).
pub fn interval_inner(h: Hurst, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if a == b || c == d {
        return 0.0;
    }
    let al = h.alpha();
    0.5 * (abs_pow(d - a, al) + abs_pow(c - b, al) - abs_pow(c - a, al) - abs_pow(d - b, al))
}

/// A signed union of unit-lattice intervals, `sum sign * 1[a, b]`.
pub type LatticeKernel = [(i64, i64, i64)];

/// `x -> 1/2 * sum_k w_k |x + k|^{alpha}` with integer weights `w_k`.
#[derive(Debug, Clone)]
pub struct PowerStencil {
    /// (offset, doubled weight); zero weights removed.
    terms: Vec<(i64, i64)>,
    reach: i64,
}

impl PowerStencil {
    /// Stencil for `x -> <left, right shifted by x>` where both kernels are
    /// signed sums of indicators with integer endpoints.
    pub fn from_kernels(left: &LatticeKernel, right: &LatticeKernel) -> Self {
        let mut acc: BTreeMap<i64, i64> = BTreeMap::new();
        for &(s1, a, b) in left {
            for &(s2, c, d) in right {
                let s = s1 * s2;
                *acc.entry(d - a).or_default() += s;
                *acc.entry(c - b).or_default() += s;
                *acc.entry(c - a).or_default() -= s;
                *acc.entry(d - b).or_default() -= s;
            }
        }
        let terms: Vec<(i64, i64)> = acc.into_iter().filter(|&(_, w)| w != 0).collect();
        let reach = terms.iter().map(|&(k, _)| k.abs()).max().unwrap_or(0);
        PowerStencil { terms, reach }
    }

    pub fn eval(&self, alpha: f64, x: i64) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        if x.abs() > 2 * self.reach {
            self.eval_series(alpha, x)
        } else {
            let s: f64 = self
                .terms
                .iter()
                .map(|&(k, w)| w as f64 * abs_pow((x + k) as f64, alpha))
                .sum();
            0.5 * s
        }
    }

    /// `|x|^a sum_m binom(a, m) (sgn x)^m M_m / |x|^m` with exact moments
    /// `M_m = sum_k w_k k^m`.
    fn eval_series(&self, alpha: f64, x: i64) -> f64 {
        let big_x = x.unsigned_abs() as f64;
        let sign: i128 = if x < 0 { -1 } else { 1 };
        let ratio = self.reach as f64 / big_x;
        // (reach / |x|)^m below 1e-22 relative to the leading power.
        let terms = ((22.0 * std::f64::consts::LN_10) / -ratio.ln()).ceil() as usize + 1;
        let terms = terms.clamp(8, 80);

        let mut coeffs = Vec::with_capacity(terms);
        let mut binom = 1.0_f64;
        for m in 0..terms {
            if m > 0 {
                binom *= (alpha - (m as f64 - 1.0)) / m as f64;
            }
            let mut moment: i128 = 0;
            for &(k, w) in &self.terms {
                let sk = sign * k as i128;
                moment += w as i128 * sk.pow(m as u32);
            }
            coeffs.push(binom * moment as f64);
        }
        // Horner in 1/|x|, smallest terms first.
        let inv = 1.0 / big_x;
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = acc * inv + c;
        }
        0.5 * big_x.powf(alpha) * acc
    }
}

fn gamma_stencil() -> PowerStencil {
    PowerStencil::from_kernels(&[(1, 0, 1)], &[(1, 0, 1)])
}

fn rho_hat_stencil() -> PowerStencil {
    PowerStencil::from_kernels(&[(1, 0, 1), (-1, -1, 0)], &[(1, 0, 1), (-1, -1, 0)])
}

fn rho_tilde_stencil() -> PowerStencil {
    PowerStencil::from_kernels(&[(1, 0, 1), (-1, -1, 0)], &[(1, 0, 2), (-1, -2, 0)])
}

/// Autocovariance of unit-step fractional Gaussian noise,
/// `gamma(k) = 1/2 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`.
pub fn fgn_autocov(h: Hurst, k: i64) -> f64 {
    gamma_stencil().eval(h.alpha(), k.abs())
}

/// `<1[0,1] - 1[-1,0], 1[j,j+1] - 1[j-1,j]>`: covariance of unit second
/// differences at lag `j`.
pub fn rho_hat(h: Hurst, j: i64) -> f64 {
    rho_hat_stencil().eval(h.alpha(), j.abs())
}

/// `2^{-2H} <1[0,1] - 1[-1,0], 1[j,j+2] - 1[j-2,j]>`: covariance between a
/// unit second difference and a doubled-step one.
pub fn rho_tilde(h: Hurst, j: i64) -> f64 {
    2f64.powf(-h.alpha()) * rho_tilde_stencil().eval(h.alpha(), j.abs())
}

/// `c_{2,H} = 4 - 2^{2H}`, the variance of a unit second difference.
pub fn c2h(h: Hurst) -> f64 {
    4.0 - 2f64.powf(h.alpha())
}

/// Values of a lag sequence on `-k..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagTable {
    pub k: usize,
    pub values: Vec<f64>,
}

impl LagTable {
    fn build(k: usize, f: impl Fn(i64) -> f64) -> Self {
        let ki = k as i64;
        LagTable {
            k,
            values: (-ki..=ki).map(f).collect(),
        }
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        let idx = j + self.k as i64;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    /// Sub-table on `-k..=k` (k no larger than the stored reach).
    pub fn window(&self, k: usize) -> LagTable {
        let k = k.min(self.k);
        let start = self.k - k;
        LagTable {
            k,
            values: self.values[start..start + 2 * k + 1].to_vec(),
        }
    }
}

/// Constants of the limit theorem and of the first-order expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstConstants {
    pub h: Hurst,
    /// `4 - 2^{2H}`.
    pub c2h: f64,
    pub rho_hat: LagTable,
    pub rho_tilde: LagTable,
    /// `sum_j rho_hat(j)^2`.
    pub c_hat: f64,
    /// `sum_j rho_tilde(j)^2`.
    pub c_tilde: f64,
    /// `3 c_hat - 2^{2H+1} c_tilde`.
    pub c_inf: f64,
    pub c_qtor: f64,
    /// `1/2 c_hat / (3 c_hat - 2 * 2^{2H} c_tilde)`.
    pub g_coeff: f64,
    pub truncation_k: usize,
    pub tol: f64,
    /// Bound on the truncation error of every constant above.
    pub tail_bound: f64,
}

/// Hard cap on the truncation index.
pub const DEFAULT_K_CAP: usize = 200_000;
const MIN_K: usize = 64;

/// Analytic tail control derived from `|rho(k)| <= C |k|^{2H-4}`.
#[derive(Debug, Clone, Copy)]
struct TailModel {
    /// Bound on the truncation error of all constants: `coef * K^{4H-7}`.
    coef: f64,
    exponent: f64,
}

impl TailModel {
    fn new(h: Hurst) -> Self {
        let hv = h.value();
        let decay = 4.0 - 2.0 * hv;
        let c = 2.0
            * (2..=64_i64)
                .map(|k| rho_hat(h, k).abs().max(rho_tilde(h, k).abs()) * (k as f64).powf(decay))
                .fold(0.0_f64, f64::max);
        // Absolute sum of both sequences: explicit part plus the |k| > 64 tail.
        let head: f64 = (-64..=64_i64)
            .map(|k| rho_hat(h, k).abs() + rho_tilde(h, k).abs())
            .sum();
        let abs_sum = head + 4.0 * c * 64f64.powf(2.0 * hv - 3.0) / (3.0 - 2.0 * hv);

        let denom = 7.0 - 4.0 * hv;
        let pair = 2.0 * c * c / denom;
        let two_h1 = 2f64.powf(2.0 * hv + 1.0);
        let c_inf_coef = (3.0 + two_h1) * pair;
        let weight = 1.0 + two_h1 + 2f64.powf(2.0 * hv);
        let qtor_coef = weight * 16.0 * abs_sum * c * c * 4f64.powf(decay) / denom;
        TailModel {
            coef: c_inf_coef.max(qtor_coef),
            exponent: 4.0 * hv - 7.0,
        }
    }

    fn bound(&self, k: usize) -> f64 {
        self.coef * (k as f64).powf(self.exponent)
    }

    fn required_k(&self, tol: f64) -> f64 {
        (tol / self.coef).powf(1.0 / self.exponent).ceil()
    }
}

/// Series constants with the default truncation cap.
pub fn series_constants(h: Hurst, tol: f64) -> Result<HurstConstants> {
    series_constants_with_cap(h, tol, DEFAULT_K_CAP)
}

pub fn series_constants_with_cap(h: Hurst, tol: f64, cap: usize) -> Result<HurstConstants> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let tail = TailModel::new(h);
    let needed = tail.required_k(tol);
    if needed > cap as f64 {
        return Err(Error::Truncation {
            tol,
            needed_k: needed.min(u64::MAX as f64) as u64,
            cap,
            achieved_bound: tail.bound(cap),
        });
    }
    let k = (needed as usize).max(MIN_K);
    Ok(constants_at(h, k, tol, tail.bound(k)))
}

/// All constants at a fixed truncation index `k`.
pub fn constants_at_truncation(h: Hurst, k: usize) -> HurstConstants {
    let k = k.max(1);
    let bound = TailModel::new(h).bound(k);
    constants_at(h, k, 0.0, bound)
}

fn constants_at(h: Hurst, k: usize, tol: f64, tail_bound: f64) -> HurstConstants {
    let hat_stencil = rho_hat_stencil();
    let tilde_stencil = rho_tilde_stencil();
    let alpha = h.alpha();
    let tilde_scale = 2f64.powf(-alpha);
    let hat_wide = LagTable::build(2 * k, |j| hat_stencil.eval(alpha, j.abs()));
    let tilde_wide = LagTable::build(3 * k, |j| tilde_scale * tilde_stencil.eval(alpha, j.abs()));
    let rho_hat = hat_wide.window(k);
    let rho_tilde = tilde_wide.window(k);

    let c_hat = sum_of_squares(&rho_hat);
    let c_tilde = sum_of_squares(&rho_tilde);
    let two_2h = 2f64.powf(alpha);
    let c_inf = 3.0 * c_hat - 2.0 * two_2h * c_tilde;
    let c_qtor = qtor_by_convolution(&rho_hat, &hat_wide, &rho_tilde, &tilde_wide, two_2h);
    let g_coeff = 0.5 * c_hat / (3.0 * c_hat - 2.0 * two_2h * c_tilde);

    HurstConstants {
        h,
        c2h: c2h(h),
        c_hat,
        c_tilde,
        c_inf,
        c_qtor,
        g_coeff,
        truncation_k: k,
        tol,
        tail_bound,
        rho_hat,
        rho_tilde,
    }
}

/// Sums from the largest lags inward so small terms accumulate first.
fn sum_of_squares(t: &LagTable) -> f64 {
    let k = t.k as i64;
    let order = (0..=k).rev().flat_map(|a| if a == 0 { vec![0] } else { vec![-a, a] });
    compensated_sum(order.map(|j| {
        let v = t.get(j).unwrap();
        v * v
    }))
}

/// The three double sums of `c_qtor` as convolutions over the truncated
/// square `|i1|, |i2| <= K`.
fn qtor_by_convolution(
    hat: &LagTable,
    hat_wide: &LagTable,
    tilde: &LagTable,
    tilde_wide: &LagTable,
    two_2h: f64,
) -> f64 {
    let k = hat.k as i64;
    // t1: sum_{i1} hat(i1) sum_{i2} hat(i1 - i2) hat(i2); index i1 + 3K.
    let conv1 = linear_convolution(&hat_wide.values, &hat.values);
    let t1 = compensated_sum((-k..=k).map(|i1| hat.get(i1).unwrap() * conv1[(i1 + 3 * k) as usize]));
    // t2: sum_{i1} hat(i1) sum_{i2} tilde(2 i1 - i2) tilde(i2); index 2 i1 + 4K.
    let conv2 = linear_convolution(&tilde_wide.values, &tilde.values);
    let t2 = compensated_sum((-k..=k).map(|i1| hat.get(i1).unwrap() * conv2[(2 * i1 + 4 * k) as usize]));
    // t3: sum_{i1} tilde(i1) sum_{i2} hat(i1 - i2) tilde(i2); index i1 + 3K.
    let conv3 = linear_convolution(&hat_wide.values, &tilde.values);
    let t3 = compensated_sum((-k..=k).map(|i1| tilde.get(i1).unwrap() * conv3[(i1 + 3 * k) as usize]));
    t1 - 2.0 * two_2h * t2 + two_2h * t3
}

/// Direct `O(K^2)` evaluation of `c_qtor`; the test oracle for the
/// convolution route.
pub fn qtor_direct(h: Hurst, k: usize) -> f64 {
    let k = k as i64;
    let two_2h = 2f64.powf(h.alpha());
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut t3 = 0.0;
    for i1 in -k..=k {
        for i2 in -k..=k {
            t1 += rho_hat(h, i1) * rho_hat(h, i1 - i2) * rho_hat(h, i2);
            t2 += rho_tilde(h, i2) * rho_tilde(h, 2 * i1 - i2) * rho_hat(h, i1);
            t3 += rho_tilde(h, i1) * rho_tilde(h, i2) * rho_hat(h, i1 - i2);
        }
    }
    t1 - 2.0 * two_2h * t2 + two_2h * t3
}
