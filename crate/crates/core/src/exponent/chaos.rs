//! Second moments of catalog functionals, exactly and by Monte Carlo.
//!
//! A catalog graph with unit weights defines
//!
//! ```text
//! I_n = sum_{j in [n-1]^V} beta(j) I_q(kernels(j)),
//! beta(j) = prod_{edges} <k_{slot}(j_u), k_{slot'}(j_v)>^theta,
//! ```
//!
//! where vertex `v` contributes `q(v,1)` copies of `1^n_{j_v}` and `q(v,2)`
//! copies of `d^n_{j_v}`. By the isometry, `E[I_q(f) I_q(g)]` is the permanent
//! of the Gram matrix of the two kernel lists.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::catalog::catalog_entry;
use super::graph::{Slot, WeightedGraph};
use crate::error::{Error, Result};
use crate::fbm::{FgnGenerator, Method};
use crate::interval::{fgn_autocov, Hurst};
use crate::numeric::{compensated_sum, ls_slope, pairwise_mean};
use crate::rng::derive;
use crate::stats::jackknife_sqrt_mean;

/// Entries whose functionals the oracle evaluates.
pub const SUPPORTED: [&str; 9] = [
    "fig1711", "fig1712", "fig1713", "fig1714", "fig1715", "fig1716", "fig1717", "fig1718", "fig1719",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// `1^n_j = 1_{[(j-1)/n, j/n]}`
    One,
    /// `d^n_j = 1^n_{j+1} - 1^n_j`
    Diff,
}

fn kind(slot: Slot) -> Kind {
    if slot == 1 {
        Kind::One
    } else {
        Kind::Diff
    }
}

/// Inner products of grid kernels at scale `n`.
struct Kernels {
    scale: f64,
    gamma: Vec<f64>,
}

impl Kernels {
    fn new(h: Hurst, n: usize) -> Self {
        Kernels {
            scale: (n as f64).powf(-h.alpha()),
            gamma: (0..=n as i64 + 2).map(|k| fgn_autocov(h, k)).collect(),
        }
    }

    fn g(&self, d: i64) -> f64 {
        self.gamma[d.unsigned_abs() as usize]
    }

    fn inner(&self, a: (Kind, i64), b: (Kind, i64)) -> f64 {
        let d = a.1 - b.1;
        let raw = match (a.0, b.0) {
            (Kind::One, Kind::One) => self.g(d),
            (Kind::One, Kind::Diff) => self.g(d - 1) - self.g(d),
            (Kind::Diff, Kind::One) => self.g(d + 1) - self.g(d),
            (Kind::Diff, Kind::Diff) => 2.0 * self.g(d) - self.g(d - 1) - self.g(d + 1),
        };
        self.scale * raw
    }
}

fn kernel_list(g: &WeightedGraph, j: &[i64]) -> Vec<(Kind, i64)> {
    let mut out = Vec::new();
    for (v, w) in g.q.iter().enumerate() {
        out.extend(std::iter::repeat_n((Kind::One, j[v]), w[0] as usize));
        out.extend(std::iter::repeat_n((Kind::Diff, j[v]), w[1] as usize));
    }
    out
}

fn beta(g: &WeightedGraph, k: &Kernels, j: &[i64]) -> f64 {
    g.theta
        .iter()
        .map(|(&((u, us), (v, vs)), &w)| k.inner((kind(us), j[u]), (kind(vs), j[v])).powi(w as i32))
        .product()
}

fn permanent(m: &[Vec<f64>]) -> f64 {
    fn rec(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == m.len() {
            return 1.0;
        }
        let mut s = 0.0;
        for c in 0..m.len() {
            if !used[c] {
                used[c] = true;
                s += m[row][c] * rec(m, row + 1, used);
                used[c] = false;
            }
        }
        s
    }
    rec(m, 0, &mut vec![false; m.len()])
}

fn pairing(k: &Kernels, a: &[(Kind, i64)], b: &[(Kind, i64)]) -> f64 {
    let gram: Vec<Vec<f64>> = a.iter().map(|&x| b.iter().map(|&y| k.inner(x, y)).collect()).collect();
    permanent(&gram)
}

/// All tuples in `[1, n-1]^arity`, in lexicographic order.
fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<i64>> {
    let top = n as i64 - 1;
    let total = (top.max(0) as u64).pow(arity as u32);
    (0..total).map(move |mut idx| {
        let mut j = vec![0i64; arity];
        for slot in j.iter_mut().rev() {
            *slot = (idx % top as u64) as i64 + 1;
            idx /= top as u64;
        }
        j
    })
}

fn q_bar(g: &WeightedGraph) -> u32 {
    g.q.iter().map(|w| w[0] + w[1]).sum()
}

/// `E[I_n^2]` by the pairing formula over all pairs of index tuples. Cost is
/// `(n-1)^{2|V|}` permanents; meant for small `n` and as a cross-check.
pub fn second_moment_by_pairings(g: &WeightedGraph, n: usize, h: Hurst) -> f64 {
    let k = Kernels::new(h, n);
    let terms: Vec<(f64, Vec<(Kind, i64)>)> = tuples(n, g.len())
        .map(|j| (beta(g, &k, &j), kernel_list(g, &j)))
        .collect();
    if q_bar(g) == 0 {
        let s = compensated_sum(terms.iter().map(|t| t.0));
        return s * s;
    }
    compensated_sum(
        terms
            .iter()
            .flat_map(|a| terms.iter().map(move |b| (a, b)))
            .map(|(a, b)| a.0 * b.0 * pairing(&k, &a.1, &b.1)),
    )
}

fn diff_gram(k: &Kernels, n: usize) -> DMatrix<f64> {
    let big_n = n - 1;
    DMatrix::from_fn(big_n, big_n, |a, b| {
        k.inner((Kind::Diff, a as i64 + 1), (Kind::Diff, b as i64 + 1))
    })
}

fn supported(name: &str) -> Result<WeightedGraph> {
    if !SUPPORTED.contains(&name) {
        return Err(Error::UnsupportedEntry(name.to_string()));
    }
    Ok(catalog_entry(name).expect("supported entries are cataloged").graph)
}

/// `sqrt(E[I_n^2])` for a supported catalog entry.
pub fn exact_l2_norm(name: &str, n: usize, h: Hurst) -> Result<f64> {
    let g = supported(name)?;
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be at least 3, got {n}")));
    }
    let k = Kernels::new(h, n);
    let big_n = (n - 1) as i64;
    let second = if q_bar(&g) == 0 {
        let s = compensated_sum(tuples(n, g.len()).map(|j| beta(&g, &k, &j)));
        s * s
    } else if g.len() == 1 {
        // Stationary in j - k: sum over lags with multiplicity.
        let base = kernel_list(&g, &[0]);
        compensated_sum((-(big_n - 1)..big_n).map(|d| {
            let other = kernel_list(&g, &[d]);
            (big_n - d.abs()) as f64 * pairing(&k, &base, &other)
        }))
    } else if name == "fig1718" {
        // sum G_jk G_j'k' (G_jj' G_kk' + G_jk' G_kj') = 2 tr(G^4)
        let gm = diff_gram(&k, n);
        let g2 = &gm * &gm;
        2.0 * g2.iter().map(|x| x * x).sum::<f64>()
    } else {
        // fig1719: I_3 of F (x) g with F = sum_j d_j d_j and g = sum_k d_k:
        // 3! |sym|^2 = 2 |F|^2 |g|^2 + 4 |F g|^2.
        let gm = diff_gram(&k, n);
        let u: Vec<f64> = gm.row_iter().map(|r| r.sum()).collect();
        let gamma: f64 = u.iter().sum();
        let frob: f64 = gm.iter().map(|x| x * x).sum();
        let gu = &gm * nalgebra::DVector::from_vec(u.clone());
        let ugu: f64 = u.iter().zip(gu.iter()).map(|(a, b)| a * b).sum();
        2.0 * frob * gamma + 4.0 * ugu
    };
    Ok(second.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct McNorm {
    /// `sqrt(mean I_n^2)`.
    pub estimate: f64,
    /// Jackknife standard error of `estimate`.
    pub standard_error: f64,
    pub mean: f64,
    pub mean_standard_error: f64,
    pub replicas: usize,
}

/// Multiple integral of order `<= 3` from the values `B(f)` and the Gram
/// entries.
fn wick(k: &Kernels, kernels: &[(Kind, i64)], b: &[f64]) -> f64 {
    let ip = |x: usize, y: usize| k.inner(kernels[x], kernels[y]);
    match kernels.len() {
        0 => 1.0,
        1 => b[0],
        2 => b[0] * b[1] - ip(0, 1),
        3 => b[0] * b[1] * b[2] - ip(0, 1) * b[2] - ip(0, 2) * b[1] - ip(1, 2) * b[0],
        q => unreachable!("chaos order {q} is not supported"),
    }
}

fn sample_functional(g: &WeightedGraph, k: &Kernels, n: usize, increments: &[f64]) -> f64 {
    // B(1_j) = increment j-1; B(d_j) = increment j - increment j-1.
    let value = |(kind, j): (Kind, i64)| -> f64 {
        let j = j as usize;
        match kind {
            Kind::One => increments[j - 1],
            Kind::Diff => increments[j] - increments[j - 1],
        }
    };
    compensated_sum(tuples(n, g.len()).map(|j| {
        let kernels = kernel_list(g, &j);
        let b: Vec<f64> = kernels.iter().map(|&x| value(x)).collect();
        beta(g, k, &j) * wick(k, &kernels, &b)
    }))
}

/// Monte Carlo estimate of the norm from `replicas` independent fGn grids.
pub fn mc_l2_norm(name: &str, n: usize, h: Hurst, replicas: usize, seed: u64) -> Result<McNorm> {
    let g = supported(name)?;
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be positive".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be at least 3, got {n}")));
    }
    let gen = FgnGenerator::new(h, n, Method::Circulant)?;
    let k = Kernels::new(h, n);
    let label = format!("ordercheck/{name}/{n}");
    let values: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let inc = gen.sample(&mut derive(seed, &label, i));
            sample_functional(&g, &k, n, &inc)
        })
        .collect();
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let (estimate, standard_error) = jackknife_sqrt_mean(&squares);
    let mean = pairwise_mean(&values);
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicas.max(2) - 1) as f64;
    Ok(McNorm {
        estimate,
        standard_error,
        mean,
        mean_standard_error: (var / replicas as f64).sqrt(),
        replicas,
    })
}

/// Least-squares slope of `log norm` against `log n`.
pub fn order_slope(ns: &[usize], norms: &[f64]) -> Result<f64> {
    if ns.len() != norms.len() || ns.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least 3 (n, norm) pairs of equal length".into(),
        ));
    }
    if let Some(bad) = norms.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("norms must be positive, got {bad}")));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(ls_slope(&x, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rho_hat;

    fn hurst(h: f64) -> Hurst {
        Hurst::with_boundary(h).unwrap()
    }

    #[test]
    fn fig1711_matches_the_lag_sum() {
        let h = hurst(0.6);
        let n = 40;
        let want: f64 = 2.0
            * (n as f64).powf(-4.0 * 0.6)
            * (1..n as i64)
                .flat_map(|j| (1..n as i64).map(move |k| rho_hat(h, j - k).powi(2)))
                .sum::<f64>();
        let got = exact_l2_norm("fig1711", n, h).unwrap().powi(2);
        assert!(((got - want) / want).abs() < 1e-12);
    }

    #[test]
    fn brownian_hand_value() {
        // rho_hat = (-1, 2, -1): sum over 3x3 lags of rho_hat^2 is 3*4 + 4*1.
        let got = exact_l2_norm("fig1711", 4, hurst(0.5)).unwrap();
        assert!((got - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fast_routes_match_pairings() {
        for name in SUPPORTED {
            let g = catalog_entry(name).unwrap().graph;
            for h in [0.5, 0.7] {
                let h = hurst(h);
                let n = if g.len() == 1 { 9 } else { 6 };
                let slow = second_moment_by_pairings(&g, n, h).sqrt();
                let fast = exact_l2_norm(name, n, h).unwrap();
                assert!(((slow - fast) / slow).abs() < 1e-11, "{name}: {slow} vs {fast}");
                assert!(fast > 0.0);
            }
        }
    }

    #[test]
    fn unsupported_entries_error() {
        let h = hurst(0.7);
        assert!(matches!(
            exact_l2_norm("fig1723", 16, h),
            Err(Error::UnsupportedEntry(_))
        ));
        assert!(matches!(
            mc_l2_norm("fig1720", 16, h, 10, 1),
            Err(Error::UnsupportedEntry(_))
        ));
        assert!(mc_l2_norm("fig1711", 16, h, 0, 1).is_err());
    }

    #[test]
    fn first_chaos_is_centred() {
        let h = hurst(0.7);
        let r = mc_l2_norm("fig1713", 32, h, 2000, 5).unwrap();
        assert!(r.mean.abs() < 3.0 * r.mean_standard_error);
        // sum_j 1_j = 1_{[0, 1 - 1/n]}, so the norm is (1 - 1/n)^H.
        let exact = exact_l2_norm("fig1713", 32, h).unwrap();
        assert!((exact - (31.0f64 / 32.0).powf(0.7)).abs() < 1e-12);
        assert!((r.estimate - exact).abs() < 3.0 * r.standard_error);
    }

    #[test]
    fn slope_examples() {
        let ns = [64, 128, 256, 512];
        let norms: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-0.5)).collect();
        assert!((order_slope(&ns, &norms).unwrap() + 0.5).abs() < 1e-12);
        assert!(order_slope(&ns, &[2.0; 4]).unwrap().abs() < 1e-12);
        assert!(order_slope(&ns, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(order_slope(&ns[..2], &norms[..2]).is_err());
    }

    #[test]
    fn fig1711_slope_at_h_06() {
        let h = hurst(0.6);
        let ns = [64, 128, 256, 512];
        let norms: Vec<f64> = ns.iter().map(|&n| exact_l2_norm("fig1711", n, h).unwrap()).collect();
        let slope = order_slope(&ns, &norms).unwrap();
        assert!((slope - (0.5 - 1.2)).abs() < 1e-2, "{slope}");
    }
}
