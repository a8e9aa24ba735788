//! Sample statistics for comparing simulated laws with density curves.

use serde::{Deserialize, Serialize};

use crate::numeric::pairwise_mean;

/// Upper bound on the number of histogram bins.
pub const MAX_BINS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Count / (total * width), so the bars integrate to 1.
    pub density: Vec<f64>,
    pub total: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    /// Bar height at `z`; zero outside the binned range.
    pub fn density_at(&self, z: f64) -> f64 {
        let (lo, hi) = self.range();
        if !(z >= lo && z <= hi) {
            return 0.0;
        }
        let idx = self.edges.partition_point(|&e| e <= z).saturating_sub(1);
        self.density[idx.min(self.bins() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.density)
            .map(|(e, d)| (e[1] - e[0]) * d)
            .sum()
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Histogram with the Freedman-Diaconis bin width `2 IQR / N^{1/3}`.
///
/// A single sample, or data without spread, gives one bin.
pub fn freedman_diaconis(samples: &[f64]) -> Histogram {
    assert!(!samples.is_empty(), "histogram of an empty sample");
    let s = sorted(samples);
    let n = s.len();
    let (min, max) = (s[0], s[n - 1]);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let width = 2.0 * iqr / (n as f64).cbrt();

    let (lo, bins, width) = if n == 1 || max <= min || !(width > 0.0) {
        let half = if max > min { 0.5 * (max - min) } else { 0.5 };
        let mid = 0.5 * (min + max);
        (mid - half, 1, 2.0 * half)
    } else {
        let bins = (((max - min) / width).ceil() as usize).clamp(1, MAX_BINS);
        (min, bins, (max - min) / bins as f64)
    };
    let mut counts = vec![0usize; bins];
    for &x in &s {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let density = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
    Histogram {
        edges,
        density,
        total: n,
    }
}

/// `sup_z |F_n(z) - F(z)|` for the empirical law of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(samples);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// L1 and sup distances between two densities tabulated at the midpoints of
/// a uniform grid with spacing `dz`.
pub fn l1_sup(a: &[f64], b: &[f64], dz: f64) -> (f64, f64) {
    let mut l1 = 0.0;
    let mut sup = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        l1 += d * dz;
        sup = sup.max(d);
    }
    (l1, sup)
}

/// Jackknife estimate and standard error of `sqrt(mean(values))`.
pub fn jackknife_sqrt_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let total: f64 = values.iter().sum();
    let est = (total / n as f64).sqrt();
    if n < 2 {
        return (est, f64::NAN);
    }
    let loo: Vec<f64> = values
        .iter()
        .map(|v| ((total - v) / (n - 1) as f64).max(0.0).sqrt())
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|t| (t - mean).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    (est, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn moments(samples: &[f64]) -> Moments {
    let n = samples.len();
    let mean = pairwise_mean(samples);
    let central = |p: i32| -> f64 {
        let v: Vec<f64> = samples.iter().map(|x| (x - mean).powi(p)).collect();
        pairwise_mean(&v)
    };
    let m2 = central(2);
    let sd = if n > 1 {
        (m2 * n as f64 / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (central(3) / m2.powf(1.5), central(4) / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Moments {
        count: n,
        mean,
        sd,
        skewness,
        excess_kurtosis,
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
