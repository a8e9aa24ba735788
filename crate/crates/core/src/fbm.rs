//! Exact sampling of fractional Gaussian noise and fBm paths on the uniform
//! grid `t_k = k/m` of `[0, 1]`.
//!
//! Two samplers: circulant embedding (Davies-Harte, the default) and a dense
//! Cholesky factor of the Toeplitz covariance. A plan is built once per
//! `(h, m, method)` and is shareable across threads; each path draws from its
//! own random stream.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{fgn_autocov, Hurst};
use crate::rng::StreamId;

/// Largest grid the dense sampler accepts.
pub const CHOLESKY_CAP: usize = 4096;

/// Relative tolerance below zero for embedding eigenvalues.
const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cholesky,
    #[default]
    Circulant,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Method::Cholesky),
            "circulant" => Ok(Method::Circulant),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler `{other}` (expected cholesky or circulant)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub stream: StreamId,
    pub method: Method,
    /// The circulant embedding failed and the dense sampler was used.
    pub fallback: bool,
}

/// fBm values `B_{k/m}` for `k = 0..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmPath {
    pub h: Hurst,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub seed_info: Option<SeedInfo>,
}

impl FbmPath {
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        let m = self.n_points as f64;
        (0..=self.n_points).map(|k| k as f64 / m).collect()
    }
}

enum Plan {
    Circulant {
        /// `sqrt(lambda_j / 2m)` for the length-2m embedding.
        weights: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(DMatrix<f64>),
}

/// A reusable fGn sampler for one `(h, m)`.
pub struct FgnGenerator {
    h: Hurst,
    m: usize,
    requested: Method,
    fallback: bool,
    scale: f64,
    plan: Plan,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("h", &self.h)
            .field("m", &self.m)
            .field("method", &self.method())
            .field("fallback", &self.fallback)
            .finish()
    }
}

impl FgnGenerator {
    pub fn new(h: Hurst, m: usize, method: Method) -> Result<Self> {
        Self::build(h.require_model()?, m, method)
    }

    fn build(h: Hurst, m: usize, method: Method) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("grid size must be at least 2, got {m}")));
        }
        let scale = (m as f64).powf(-h.value());
        let (plan, fallback) = match method {
            Method::Cholesky => (cholesky_plan(h, m)?, false),
            Method::Circulant => match circulant_plan(h, m) {
                Some(plan) => (plan, false),
                None => (cholesky_plan(h, m)?, true),
            },
        };
        Ok(FgnGenerator {
            h,
            m,
            requested: method,
            fallback,
            scale,
            plan,
        })
    }

    pub fn h(&self) -> Hurst {
        self.h
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The method actually used (after any fallback).
    pub fn method(&self) -> Method {
        match self.plan {
            Plan::Circulant { .. } => Method::Circulant,
            Plan::Cholesky(_) => Method::Cholesky,
        }
    }

    pub fn requested(&self) -> Method {
        self.requested
    }

    pub fn fell_back(&self) -> bool {
        self.fallback
    }

    /// Increments `B_{(k+1)/m} - B_{k/m}`, `k = 0..m`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.plan {
            Plan::Circulant { weights, fft } => {
                let mut buf: Vec<Complex64> = weights
                    .iter()
                    .map(|&w| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(w * re, w * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..self.m].iter().map(|c| c.re * self.scale).collect()
            }
            Plan::Cholesky(l) => {
                let z = DVector::from_fn(self.m, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().map(|x| x * self.scale).collect()
            }
        }
    }

    pub fn sample_path(&self, stream: &StreamId) -> FbmPath {
        let mut rng = stream.rng();
        let mut path = fbm_path(self.h, &self.sample(&mut rng));
        path.seed_info = Some(SeedInfo {
            stream: stream.clone(),
            method: self.method(),
            fallback: self.fallback,
        });
        path
    }
}

/// Eigenvalues of the minimal circulant embedding, or `None` if one is
/// negative beyond roundoff.
fn circulant_plan(h: Hurst, m: usize) -> Option<Plan> {
    let len = 2 * m;
    let mut row: Vec<Complex64> = (0..len)
        .map(|k| {
            let lag = if k <= m { k } else { len - k };
            Complex64::new(fgn_autocov(h, lag as i64), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    fft.process(&mut row);
    let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
    let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
    if min < -EIGEN_TOL * max {
        return None;
    }
    let weights = row.iter().map(|c| (c.re.max(0.0) / len as f64).sqrt()).collect();
    Some(Plan::Circulant { weights, fft })
}

fn cholesky_plan(h: Hurst, m: usize) -> Result<Plan> {
    if m > CHOLESKY_CAP {
        return Err(Error::CholeskyTooLarge { m, cap: CHOLESKY_CAP });
    }
    let gamma: Vec<f64> = (0..m as i64).map(|k| fgn_autocov(h, k)).collect();
    let cov = DMatrix::from_fn(m, m, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(Plan::Cholesky(chol.unpack()))
}

/// One draw of `m` fGn increments. Builds a fresh plan; reuse
/// [`FgnGenerator`] when sampling many paths.
pub fn sample_fgn<R: Rng + ?Sized>(h: Hurst, m: usize, rng: &mut R, method: Method) -> Result<Vec<f64>> {
    Ok(FgnGenerator::new(h, m, method)?.sample(rng))
}

/// Cumulative sums prefixed with 0.
pub fn fbm_path(h: Hurst, increments: &[f64]) -> FbmPath {
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    values.push(acc);
    for dx in increments {
        acc += dx;
        values.push(acc);
    }
    FbmPath {
        h,
        n_points: increments.len(),
        values,
        seed_info: None,
    }
}

/// Every `factor`-th value of the path.
pub fn coarsen(path: &FbmPath, factor: usize) -> Result<FbmPath> {
    let values = coarsen_values(&path.values, factor)?;
    Ok(FbmPath {
        h: path.h,
        n_points: values.len() - 1,
        values,
        seed_info: path.seed_info.clone(),
    })
}

/// Every `factor`-th entry of a grid of `m + 1` values; `factor` must divide `m`.
pub fn coarsen_values(values: &[f64], factor: usize) -> Result<Vec<f64>> {
    let m = values.len().saturating_sub(1);
    if factor == 0 || m == 0 || m % factor != 0 {
        return Err(Error::Coarsen { factor, m });
    }
    Ok(values.iter().step_by(factor).copied().collect())
}

/// Writes a uniform grid on `[0, 1]` as CSV with header `t,<column>`.
pub fn write_grid_csv<W: Write>(writer: W, column: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let m = values.len().saturating_sub(1).max(1) as f64;
    w.write_record(["t", column]).map_err(csv_error)?;
    for (k, v) in values.iter().enumerate() {
        w.write_record([format!("{}", k as f64 / m), format!("{v:?}")])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,value` CSV and checks that `t` is the uniform grid of `[0, 1]`.
pub fn read_grid_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != "t" {
        return Err(Error::Format(format!(
            "expected header `t,value`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {}: column {}: {e}", row + 2, i + 1)))
        };
        ts.push(parse(0)?);
        values.push(parse(1)?);
    }
    if values.len() < 2 {
        return Err(Error::Format(format!("need at least 2 rows, got {}", values.len())));
    }
    let m = (values.len() - 1) as f64;
    for (k, &t) in ts.iter().enumerate() {
        if (t - k as f64 / m).abs() > 1e-9 {
            return Err(Error::Format(format!(
                "row {}: t = {t} is not on the uniform grid k/{m}",
                k + 2
            )));
        }
    }
    Ok(values)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
