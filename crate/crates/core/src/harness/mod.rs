//! Experiment orchestration: simulate the law of `sqrt(n) (H'_n - H)` for an
//! SDE, build the mixed normal and expansion curves from independent paths,
//! and compare.
//!
//! Histogram path `i` draws from stream `(master_seed, "hist", i)` and curve
//! path `j` from `(master_seed, "mc", j)`. Replicas run in parallel and are
//! collected in index order, so outputs do not depend on the thread count.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, SdeChoice, FULL_HIST_PATHS, FULL_MC_PATHS};

use crate::coeff::CoefficientSpec;
use crate::error::{Error, Result};
use crate::estimator::estimate_from_path;
use crate::expansion::{expansion_density, mixture_cdf, path_functionals, DensityCurve, PathFunctionals};
use crate::fbm::{FgnGenerator, Method};
use crate::interval::{series_constants, HurstConstants};
use crate::numeric::{linspace, trapezoid};
use crate::rng::StreamId;
use crate::sde::solve;
use crate::stats::{freedman_diaconis, ks_statistic, l1_sup, moments, Histogram, Moments};

/// Cells of the midpoint grid on which histogram and curves are compared.
pub const DISTANCE_CELLS: usize = 4000;

/// Largest tolerated fraction of degenerate paths.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;

pub fn version_string() -> String {
    format!(
        "hurst-qv {} ({})",
        env!("CARGO_PKG_VERSION"),
        option_env!("HURST_QV_GIT").unwrap_or("unknown")
    )
}

/// Successful replicas in index order plus the skipped count.
#[derive(Debug, Clone)]
pub struct Sampled<T> {
    pub values: Vec<T>,
    pub skipped: usize,
    pub first_failure: Option<String>,
}

fn collect_replicas<T: Send>(count: usize, run: impl Fn(u64) -> Result<T> + Sync) -> Result<Sampled<T>> {
    let raw: Vec<std::result::Result<T, String>> = (0..count as u64)
        .into_par_iter()
        .map(|i| run(i).map_err(|e| format!("replica {i}: {e}")))
        .collect();
    let mut values = Vec::with_capacity(count);
    let mut skipped = 0;
    let mut first_failure = None;
    for r in raw {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                skipped += 1;
                first_failure.get_or_insert(e);
            }
        }
    }
    if skipped as f64 > MAX_DEGENERATE_FRACTION * count as f64 {
        return Err(Error::TooManyDegenerate {
            skipped,
            total: count,
            first: first_failure.unwrap_or_default(),
        });
    }
    Ok(Sampled {
        values,
        skipped,
        first_failure,
    })
}

/// `sqrt(n) (H'_n - H)` over `cfg.hist_paths` independent paths.
pub fn sample_rescaled_errors(
    cfg: &ExperimentConfig,
    coeffs: &CoefficientSpec,
) -> Result<(Sampled<f64>, Method, bool)> {
    let m = cfg.hist_grid();
    let gen = FgnGenerator::new(cfg.h, m, cfg.method)?;
    let h = cfg.h.value();
    let sampled = collect_replicas(cfg.hist_paths, |i| {
        let driver = gen.sample_path(&StreamId::new(cfg.master_seed, "hist", i));
        let sol = solve(cfg.integrator, coeffs, &driver, cfg.x0)?;
        // Points k/2n of the fine grid.
        let coarse: Vec<f64> = sol.x_values.iter().step_by(cfg.oversample).copied().collect();
        let rec = estimate_from_path(&coarse, cfg.n, Some(h))?;
        Ok(rec.rescaled_error.expect("true H supplied"))
    })?;
    Ok((sampled, gen.method(), gen.fell_back()))
}

/// Path functionals over `cfg.mc_paths` independent paths.
pub fn sample_functionals(
    cfg: &ExperimentConfig,
    coeffs: &CoefficientSpec,
    constants: &HurstConstants,
) -> Result<Sampled<PathFunctionals>> {
    let gen = FgnGenerator::new(cfg.h, cfg.mc_grid(), cfg.method)?;
    collect_replicas(cfg.mc_paths, |i| {
        let driver = gen.sample_path(&StreamId::new(cfg.master_seed, "mc", i));
        let sol = solve(cfg.integrator, coeffs, &driver, cfg.x0)?;
        path_functionals(&sol, coeffs, constants, cfg.quad_n)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsSummary {
    pub c2h: f64,
    pub c_hat: f64,
    pub c_tilde: f64,
    pub c_inf: f64,
    pub c_qtor: f64,
    pub g_coeff: f64,
    pub truncation_k: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSummary {
    pub requested: usize,
    pub used: usize,
    pub skipped: usize,
    pub first_failure: Option<String>,
    pub fine_grid: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Distances {
    pub l1_leading: f64,
    pub l1_corrected: f64,
    pub sup_leading: f64,
    pub sup_corrected: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub version: String,
    pub config: ExperimentConfig,
    pub sampler: Method,
    pub sampler_fallback: bool,
    pub constants: ConstantsSummary,
    pub histogram_paths: SampleSummary,
    pub curve_paths: SampleSummary,
    pub moments: Moments,
    pub histogram_bins: usize,
    pub mean_g_inf: f64,
    pub distances: Distances,
    /// Kolmogorov-Smirnov distance to the mixed normal limit.
    pub ks_mixture: f64,
    pub curve_mass_leading: f64,
    pub curve_mass_corrected: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub summary: Summary,
    pub histogram: Histogram,
    pub curves: DensityCurve,
    pub errors: Vec<f64>,
    pub functionals: Vec<PathFunctionals>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    cfg.validate()?;
    let coeffs = cfg.sde.coefficients()?;
    let constants = series_constants(cfg.h, cfg.tol)?;
    if !(constants.c_inf > 0.0) {
        return Err(Error::NonPositiveVariance(constants.c_inf));
    }

    let (hist_sample, sampler, fallback) = sample_rescaled_errors(cfg, &coeffs)?;
    let mc_sample = sample_functionals(cfg, &coeffs, &constants)?;
    let errors = hist_sample.values;
    let functionals = mc_sample.values;
    if errors.is_empty() || functionals.is_empty() {
        return Err(Error::TooManyDegenerate {
            skipped: hist_sample.skipped + mc_sample.skipped,
            total: cfg.hist_paths + cfg.mc_paths,
            first: hist_sample
                .first_failure
                .clone()
                .or(mc_sample.first_failure.clone())
                .unwrap_or_default(),
        });
    }

    let histogram = freedman_diaconis(&errors);
    let stats = moments(&errors);
    let mean_g_inf = functionals.iter().map(|f| f.g_inf).sum::<f64>() / functionals.len() as f64;
    let two_log2 = 2.0 * std::f64::consts::LN_2;
    let sd = if stats.sd > 0.0 {
        stats.sd
    } else {
        mean_g_inf.sqrt() / two_log2
    };
    let z_grid = linspace(stats.mean - 6.0 * sd, stats.mean + 6.0 * sd, cfg.z_points);
    let curves = expansion_density(&z_grid, cfg.n, &functionals, &constants)?;

    // Compare on a fine midpoint grid covering both the bars and the curves.
    let (hlo, hhi) = histogram.range();
    let lo = hlo.min(z_grid[0]);
    let hi = hhi.max(*z_grid.last().unwrap());
    let dz = (hi - lo) / DISTANCE_CELLS as f64;
    let mids: Vec<f64> = (0..DISTANCE_CELLS).map(|i| lo + (i as f64 + 0.5) * dz).collect();
    let bars: Vec<f64> = mids.iter().map(|&z| histogram.density_at(z)).collect();
    let fine = expansion_density(&mids, cfg.n, &functionals, &constants)?;
    let (l1_leading, sup_leading) = l1_sup(&bars, &fine.leading, dz);
    let (l1_corrected, sup_corrected) = l1_sup(&bars, &fine.corrected, dz);
    let ks_mixture = ks_statistic(&errors, |z| mixture_cdf(z, &functionals));

    let summary = Summary {
        version: version_string(),
        config: cfg.clone(),
        sampler,
        sampler_fallback: fallback,
        constants: ConstantsSummary {
            c2h: constants.c2h,
            c_hat: constants.c_hat,
            c_tilde: constants.c_tilde,
            c_inf: constants.c_inf,
            c_qtor: constants.c_qtor,
            g_coeff: constants.g_coeff,
            truncation_k: constants.truncation_k,
            tail_bound: constants.tail_bound,
        },
        histogram_paths: SampleSummary {
            requested: cfg.hist_paths,
            used: errors.len(),
            skipped: hist_sample.skipped,
            first_failure: hist_sample.first_failure,
            fine_grid: cfg.hist_grid(),
        },
        curve_paths: SampleSummary {
            requested: cfg.mc_paths,
            used: functionals.len(),
            skipped: mc_sample.skipped,
            first_failure: mc_sample.first_failure,
            fine_grid: cfg.mc_grid(),
        },
        moments: stats,
        histogram_bins: histogram.bins(),
        mean_g_inf,
        distances: Distances {
            l1_leading,
            l1_corrected,
            sup_leading,
            sup_corrected,
            grid_lo: lo,
            grid_hi: hi,
            cells: DISTANCE_CELLS,
        },
        ks_mixture,
        curve_mass_leading: trapezoid(&curves.z_grid, &curves.leading),
        curve_mass_corrected: trapezoid(&curves.z_grid, &curves.corrected),
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(ExperimentResult {
        summary,
        histogram,
        curves,
        errors,
        functionals,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(fs::File::create(path)?))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_histogram_csv(h: &Histogram, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["bin_left", "bin_right", "density"]).map_err(csv_err)?;
    for (e, d) in h.edges.windows(2).zip(&h.density) {
        w.write_record([format!("{:?}", e[0]), format!("{:?}", e[1]), format!("{d:?}")])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv(c: &DensityCurve, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["z", "leading", "corrected"]).map_err(csv_err)?;
    for ((z, a), b) in c.z_grid.iter().zip(&c.leading).zip(&c.corrected) {
        w.write_record([format!("{z:?}"), format!("{a:?}"), format!("{b:?}")])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

const PLOT_SCRIPT: &str = r#"# Renders hist.csv and curves.csv from this directory.
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent


def columns(name):
    with open(here / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


hist = columns("hist.csv")
curves = columns("curves.csv")
widths = [r - l for l, r in zip(hist["bin_left"], hist["bin_right"])]
fig, ax = plt.subplots(figsize=(6, 4))
ax.bar(hist["bin_left"], hist["density"], width=widths, align="edge",
       color="0.85", edgecolor="0.6", label="simulated")
ax.plot(curves["z"], curves["leading"], "k--", label="mixed normal")
ax.plot(curves["z"], curves["corrected"], "k-", label="expansion")
ax.set_xlabel(r"$\sqrt{n}(\hat H'_n - H)$")
ax.set_ylabel("density")
ax.legend()
fig.tight_layout()
fig.savefig(here / "density.png", dpi=150)
"#;

/// Writes `hist.csv`, `curves.csv`, `summary.json` and `plot.py` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hist = dir.join("hist.csv");
    let curves = dir.join("curves.csv");
    let summary = dir.join("summary.json");
    let plot = dir.join("plot.py");
    write_histogram_csv(&result.histogram, &hist)?;
    write_curves_csv(&result.curves, &curves)?;
    let mut f = fs::File::create(&summary)?;
    serde_json::to_writer_pretty(&mut f, &result.summary)?;
    f.write_all(b"\n")?;
    fs::write(&plot, PLOT_SCRIPT)?;
    Ok(vec![hist, curves, summary, plot])
}
