//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hurst_qv::estimator::estimate_from_path;
use hurst_qv::expansion::expansion_density;
use hurst_qv::expansion::mixture_cdf;
use hurst_qv::exponent::{
    builtin_catalog, component_sets, ell2, ell2_brute_force, exact_l2_norm, exponent, mc_l2_norm, order_slope,
    WeightedGraph,
};
use hurst_qv::fbm::{FgnGenerator, Method};
use hurst_qv::harness::{run_experiment, write_outputs, ExperimentConfig, ExperimentResult, SdeChoice};
use hurst_qv::interval::{c2h, fgn_autocov, interval_inner, rho_hat, series_constants, Hurst};
use hurst_qv::numeric::trapezoid;
use hurst_qv::rng::{derive, StreamId};
use hurst_qv::stats::ks_statistic;

const H_GRID: [f64; 5] = [0.55, 0.65, 0.75, 0.85, 0.95];
const SEED: u64 = 911;

type Outcome = std::result::Result<String, String>;

fn hurst(h: f64) -> Hurst {
    Hurst::new(h).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let mut worst_rho = 0.0f64;
    let mut worst_pair = 0.0f64;
    for h in H_GRID.map(hurst) {
        let target = 4.0 - 2f64.powf(h.alpha());
        worst_rho = worst_rho.max((rho_hat(h, 0) - target).abs());
        // <d_0, 1_1> with 1_j = [j-1, j] and d_j = 1_{j+1} - 1_j at unit scale.
        let pair = interval_inner(h, 0.0, 1.0, 0.0, 1.0) - interval_inner(h, -1.0, 0.0, 0.0, 1.0);
        worst_pair = worst_pair.max((pair - c2h(h) / 2.0).abs());
    }
    check(
        worst_rho < 1e-12 && worst_pair < 1e-12,
        format!("max |rho_hat(0) - c2h| = {worst_rho:.1e}, max |<d,1> - c2h/2| = {worst_pair:.1e} (< 1e-12)"),
    )
}

fn criterion_2() -> Outcome {
    let c = series_constants(Hurst::with_boundary(0.5).unwrap(), 1e-10).map_err(|e| e.to_string())?;
    let err = [(c.c_hat, 6.0), (c.c_tilde, 1.5), (c.c_inf, 12.0)]
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        err < 1e-10,
        format!(
            "c_hat = {}, c_tilde = {}, c_inf = {} (max error {err:.1e} < 1e-10)",
            c.c_hat, c.c_tilde, c.c_inf
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for h in H_GRID.map(hurst) {
        let a = series_constants(h, 1e-8).map_err(|e| e.to_string())?;
        let b = series_constants(h, 1e-12).map_err(|e| e.to_string())?;
        for (x, y) in [
            (a.c_hat, b.c_hat),
            (a.c_tilde, b.c_tilde),
            (a.c_inf, b.c_inf),
            (a.c_qtor, b.c_qtor),
        ] {
            worst = worst.max((x - y).abs());
        }
    }
    check(
        worst < 1e-7,
        format!("max difference tol 1e-8 vs 1e-12: {worst:.1e} (< 1e-7)"),
    )
}

fn criterion_4() -> Outcome {
    let catalog = builtin_catalog();
    let mut bad = Vec::new();
    for entry in &catalog {
        let report = exponent(&entry.graph, None).map_err(|e| e.to_string())?;
        if report.total != entry.expected {
            bad.push(format!("{}: {} != {}", entry.name, report.total, entry.expected));
        }
    }
    check(
        catalog.len() == 14 && bad.is_empty(),
        format!("{} entries, mismatches: {bad:?}", catalog.len()),
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> WeightedGraph {
    let nv = rng.random_range(1..=5);
    let mut g = WeightedGraph::new((0..nv).map(|i| format!("v{i}")));
    for v in 0..nv {
        g.q[v] = [rng.random_range(0..3), rng.random_range(0..3)];
    }
    for u in 0..nv {
        for v in u + 1..nv {
            for us in 1..=2u8 {
                for vs in 1..=2u8 {
                    if rng.random_bool(0.3) {
                        g.add_theta(u, us, v, vs, rng.random_range(1..3)).unwrap();
                    }
                }
            }
        }
    }
    g
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut components = 0;
    for i in 0..200 {
        let g = random_graph(&mut rng);
        for set in component_sets(&g) {
            let c = g.induced(&set);
            let fast = ell2(&c).map_err(|e| e.to_string())?;
            let brute = ell2_brute_force(&c).map_err(|e| e.to_string())?;
            if fast != brute {
                return Err(format!(
                    "graph {i}: component count {fast} != spanning-tree maximum {brute}"
                ));
            }
            components += 1;
        }
    }
    Ok(format!("200 graphs, {components} components agree"))
}

fn criterion_6() -> Outcome {
    let ns = [64, 128, 256, 512, 1024];
    let mut lines = Vec::new();
    let mut ok = true;
    for h in [0.55, 0.75, 0.9] {
        let norms: Vec<f64> = ns
            .iter()
            .map(|&n| exact_l2_norm("fig1711", n, hurst(h)))
            .collect::<hurst_qv::Result<_>>()
            .map_err(|e| e.to_string())?;
        let slope = order_slope(&ns, &norms).map_err(|e| e.to_string())?;
        let target = 0.5 - 2.0 * h;
        ok &= (slope - target).abs() <= 0.02;
        let exact = exact_l2_norm("fig1711", 128, hurst(h)).map_err(|e| e.to_string())?;
        let mc = mc_l2_norm("fig1711", 128, hurst(h), 4000, SEED).map_err(|e| e.to_string())?;
        let z = (mc.estimate - exact).abs() / mc.standard_error;
        ok &= z <= 3.0;
        lines.push(format!("h={h}: slope {slope:.4} vs {target:.2}, MC {z:.2} se"));
    }
    check(ok, lines.join("; "))
}

fn covariance_z(method: Method) -> Result<f64, String> {
    let (h, m, reps) = (hurst(0.7), 64usize, 100_000u64);
    let gen = FgnGenerator::new(h, m, method).map_err(|e| e.to_string())?;
    let label = format!("acceptance/cov/{method:?}");
    // Per-replica products x_j x_k, summed with their squares for the standard error.
    let (sum, sq) = (0..reps)
        .into_par_iter()
        .fold(
            || (vec![0.0; m * m], vec![0.0; m * m]),
            |(mut s, mut q), i| {
                let x = gen.sample(&mut derive(SEED, &label, i));
                for j in 0..m {
                    for k in 0..m {
                        let p = x[j] * x[k];
                        s[j * m + k] += p;
                        q[j * m + k] += p * p;
                    }
                }
                (s, q)
            },
        )
        .reduce(
            || (vec![0.0; m * m], vec![0.0; m * m]),
            |(mut a, mut b), (c, d)| {
                a.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                b.iter_mut().zip(d).for_each(|(x, y)| *x += y);
                (a, b)
            },
        );
    let n = reps as f64;
    let scale = (m as f64).powf(-h.alpha());
    let mut worst = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            let mean = sum[j * m + k] / n;
            let var = (sq[j * m + k] / n - mean * mean) * n / (n - 1.0);
            let target = scale * fgn_autocov(h, j as i64 - k as i64);
            worst = worst.max((mean - target).abs() / (var / n).sqrt());
        }
    }
    Ok(worst)
}

fn criterion_7() -> Outcome {
    let circ = covariance_z(Method::Circulant)?;
    let chol = covariance_z(Method::Cholesky)?;
    check(
        circ <= 5.0 && chol <= 5.0,
        format!("max |z| over 4096 entries: circulant {circ:.2}, cholesky {chol:.2} (<= 5)"),
    )
}

fn fbm_errors(h: f64, n: usize, paths: u64) -> Result<Vec<f64>, String> {
    let gen = FgnGenerator::new(hurst(h), 2 * n, Method::Circulant).map_err(|e| e.to_string())?;
    (0..paths)
        .into_par_iter()
        .map(|i| {
            let path = gen.sample_path(&StreamId::new(SEED, &format!("acceptance/fbm/{h}/{n}"), i));
            estimate_from_path(&path.values, n, Some(h))
                .map(|r| r.h_hat_raw - h)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for h in [0.55, 0.7, 0.85] {
        let mean_abs = |e: &[f64]| e.iter().map(|x| x.abs()).sum::<f64>() / e.len() as f64;
        let small = fbm_errors(h, 128, 2000)?;
        let large = fbm_errors(h, 512, 2000)?;
        let (a, b) = (mean_abs(&small), mean_abs(&large));
        let rescaled: Vec<f64> = large.iter().map(|e| e * 512f64.sqrt()).collect();
        let sd = hurst_qv::stats::moments(&rescaled).sd;
        let c = series_constants(hurst(h), 1e-10).map_err(|e| e.to_string())?;
        let target = c.c_inf.sqrt() / (2.0 * std::f64::consts::LN_2 * c.c2h);
        let rel = (sd - target).abs() / target;
        ok &= b < a && rel <= 0.15;
        lines.push(format!(
            "h={h}: mean|err| {a:.4} -> {b:.4}, sd {sd:.3} vs {target:.3} ({:.1}%)",
            100.0 * rel
        ));
    }
    check(ok, lines.join("; "))
}

fn config(sde: &str, h: f64, n: usize, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(hurst(h), n, SdeChoice::Builtin(sde.into()));
    cfg.hist_paths = 10_000;
    cfg.mc_paths = 2_000;
    cfg.master_seed = SEED;
    cfg.out_dir = out.to_path_buf();
    cfg
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let r = run_experiment(&config("sde1", 0.55, 64, dir.path())).map_err(|e| e.to_string())?;
    let ks = ks_statistic(&r.errors, |z| mixture_cdf(z, &r.functionals));
    check(
        ks <= 0.05 && r.errors.len() >= 9_900 && r.functionals.len() >= 1_980,
        format!(
            "KS = {ks:.4} (<= 0.05) over {} paths, {} mixture samples",
            r.errors.len(),
            r.functionals.len()
        ),
    )
}

fn criterion_10() -> Result<(String, ExperimentResult), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();
    let mut first = None;
    for sde in ["sde1", "sde2"] {
        for h in [0.55, 0.85] {
            let r = run_experiment(&config(sde, h, 16, dir.path())).map_err(|e| e.to_string())?;
            let d = &r.summary.distances;
            ok &= d.l1_corrected < d.l1_leading;
            lines.push(format!("{sde} h={h}: L1 {:.4} < {:.4}", d.l1_corrected, d.l1_leading));
            first.get_or_insert(r);
        }
    }
    let detail = lines.join("; ");
    if ok {
        Ok((detail, first.unwrap()))
    } else {
        Err(detail)
    }
}

fn criterion_11(r: &ExperimentResult) -> Outcome {
    let c = &r.curves;
    let mass = trapezoid(&c.z_grid, &c.corrected);
    let span = (c.z_grid[c.z_grid.len() - 1] - c.z_grid[0]) / 2.0;
    let constants = series_constants(r.summary.config.h, r.summary.config.tol).map_err(|e| e.to_string())?;
    let at0 = expansion_density(&[0.0], c.n, &r.functionals, &constants).map_err(|e| e.to_string())?;
    let equal = at0.corrected[0] == at0.leading[0];
    check(
        (mass - 1.0).abs() <= 0.01 && equal && (span - 6.0 * r.summary.moments.sd).abs() < 1e-9 * span,
        format!(
            "mass on +-6 sd = {mass:.6}, corrected(0) = {} = leading(0): {equal}",
            at0.corrected[0]
        ),
    )
}

fn criterion_12() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for dir in [a.path(), b.path()] {
        let cfg = config("sde1", 0.55, 16, dir);
        let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
        write_outputs(&r, dir).map_err(|e| e.to_string())?;
    }
    let mut differ = Vec::new();
    for f in ["hist.csv", "curves.csv", "plot.py"] {
        if std::fs::read(a.path().join(f)).ok() != std::fs::read(b.path().join(f)).ok() {
            differ.push(f.to_string());
        }
    }
    // The summary differs only by wall-clock runtime and the output directory.
    let strip = |p: &Path| -> Result<serde_json::Value, String> {
        let text = std::fs::read_to_string(p.join("summary.json")).map_err(|e| e.to_string())?;
        let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        v["runtime_seconds"] = serde_json::Value::Null;
        v["config"]["out_dir"] = serde_json::Value::Null;
        Ok(v)
    };
    if strip(a.path())? != strip(b.path())? {
        differ.push("summary.json".into());
    }
    check(differ.is_empty(), format!("files differing between runs: {differ:?}"))
}

struct Report {
    failures: usize,
}

impl Report {
    fn run<T>(&mut self, id: u32, limit: Duration, f: impl FnOnce() -> Result<(String, T), String>) -> Option<T> {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail, value) = match outcome {
            Ok((d, v)) if elapsed <= limit => (true, d, Some(v)),
            Ok((d, v)) => (false, format!("{d}; over the {limit:?} budget"), Some(v)),
            Err(d) => (false, d, None),
        };
        if !ok {
            self.failures += 1;
        }
        println!(
            "criterion {id:>2}: {} ({:.2} s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        value
    }

    fn simple(&mut self, id: u32, limit: Duration, f: impl FnOnce() -> Outcome) {
        self.run(id, limit, || f().map(|d| (d, ())));
    }
}

fn main() {
    let secs = Duration::from_secs;
    let mut report = Report { failures: 0 };
    report.simple(1, secs(1), criterion_1);
    report.simple(2, secs(1), criterion_2);
    report.simple(3, secs(10), criterion_3);
    report.simple(4, secs(1), criterion_4);
    report.simple(5, secs(30), criterion_5);
    report.simple(6, secs(120), criterion_6);
    report.simple(7, secs(120), criterion_7);
    report.simple(8, secs(300), criterion_8);
    report.simple(9, secs(900), criterion_9);
    let fit = report.run(10, secs(1200), criterion_10);
    match fit {
        Some(r) => report.simple(11, secs(1), || criterion_11(&r)),
        None => report.simple(11, secs(1), || Err("criterion 10 produced no curves".into())),
    }
    report.simple(12, secs(1200), criterion_12);
    println!("{} of 12 criteria passed", 12 - report.failures);
    if report.failures > 0 {
        std::process::exit(1);
    }
}
