use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hurst_qv::estimator::estimate_from_path;
use hurst_qv::exponent::{catalog_entry, exact_l2_norm, exponent, mc_l2_norm, order_slope, WeightedGraph};
use hurst_qv::fbm::read_grid_csv;
use hurst_qv::harness::{run_experiment, version_string, write_outputs, ExperimentConfig};
use hurst_qv::interval::{series_constants, Hurst};

#[derive(Parser)]
#[command(name = "hurst-qv", about = "Hurst estimation by second-order quadratic variation")]
struct Cli {
    /// Worker threads for replica loops (default: all cores).
    #[arg(long, global = true, env = "HURST_QV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Series constants for a Hurst parameter in [1/2, 1).
    Constants {
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also print the truncated lag tables.
        #[arg(long)]
        tables: bool,
    },
    /// Run an experiment described by a TOML file and write its outputs.
    Simulate(SimulateArgs),
    /// Estimate H from a `t,value` CSV path with 2n + 1 rows.
    Estimate {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        n: usize,
        /// True Hurst parameter, to report the rescaled error.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Exponent of a weighted graph given as JSON, or of a catalog entry.
    Exponent {
        #[arg(long, conflicts_with = "name", required_unless_present = "name")]
        graph: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        /// Evaluate the exponent at this H.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Empirical decay order of a catalog functional.
    Ordercheck {
        #[arg(long)]
        name: String,
        #[arg(long)]
        h: f64,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024")]
        ns: Vec<usize>,
        /// Monte Carlo replicas per n; 0 computes the exact norms only.
        #[arg(long, default_value_t = 0)]
        reps: usize,
        #[arg(long, default_value_t = 911)]
        seed: u64,
    },
    Version,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Path counts of the published experiments.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, env = "HURST_QV_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

fn constants(h: f64, tol: f64, tables: bool) -> Result<Value> {
    let c = series_constants(Hurst::with_boundary(h)?, tol)?;
    let mut out = json!({
        "h": h,
        "c2h": c.c2h,
        "c_hat": c.c_hat,
        "c_tilde": c.c_tilde,
        "c_inf": c.c_inf,
        "c_qtor": c.c_qtor,
        "g_coeff": c.g_coeff,
        "truncation_k": c.truncation_k,
        "tol": c.tol,
        "tail_bound": c.tail_bound,
    });
    if tables {
        out["rho_hat"] = serde_json::to_value(&c.rho_hat)?;
        out["rho_tilde"] = serde_json::to_value(&c.rho_tilde)?;
    }
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<Value> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.clone();
    }
    let result = run_experiment(&cfg)?;
    let files = write_outputs(&result, &cfg.out_dir)?;
    Ok(json!({
        "out_dir": cfg.out_dir,
        "files": files,
        "summary": result.summary,
    }))
}

fn estimate(path: &PathBuf, n: usize, h: Option<f64>) -> Result<Value> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let values = read_grid_csv(file)?;
    let truth = h.map(Hurst::new).transpose()?.map(Hurst::value);
    Ok(serde_json::to_value(estimate_from_path(&values, n, truth)?)?)
}

fn exponent_cmd(graph: Option<&PathBuf>, name: Option<&str>, h: Option<f64>) -> Result<Value> {
    let g = match (graph, name) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            WeightedGraph::from_json(&text)?
        }
        (None, Some(name)) => match catalog_entry(name) {
            Some(e) => e.graph,
            None => bail!(hurst_qv::Error::UnsupportedEntry(name.to_string())),
        },
        (None, None) => unreachable!("clap requires one of --graph and --name"),
    };
    let report = exponent(&g, h)?;
    eprint!("{}", report.table());
    Ok(serde_json::to_value(report)?)
}

fn ordercheck(name: &str, h: f64, ns: &[usize], reps: usize, seed: u64) -> Result<Value> {
    let hurst = Hurst::new(h)?;
    let mut rows = Vec::with_capacity(ns.len());
    let mut exact = Vec::with_capacity(ns.len());
    for &n in ns {
        let norm = exact_l2_norm(name, n, hurst)?;
        exact.push(norm);
        let mc = if reps > 0 {
            Some(mc_l2_norm(name, n, hurst, reps, seed)?)
        } else {
            None
        };
        rows.push(json!({ "n": n, "exact": norm, "mc": mc }));
    }
    let slope = order_slope(ns, &exact)?;
    let expected = catalog_entry(name).map(|e| e.expected);
    Ok(json!({
        "name": name,
        "h": h,
        "norms": rows,
        "slope": slope,
        "expected": expected,
        "expected_value": expected.map(|e| e.eval(h)),
    }))
}

fn run(cli: Cli) -> Result<Value> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Constants { h, tol, tables } => constants(*h, *tol, *tables),
        Command::Simulate(args) => simulate(args),
        Command::Estimate { path, n, h } => estimate(path, *n, *h),
        Command::Exponent { graph, name, h } => exponent_cmd(graph.as_ref(), name.as_deref(), *h),
        Command::Ordercheck {
            name,
            h,
            ns,
            reps,
            seed,
        } => ordercheck(name, *h, ns, *reps, *seed),
        Command::Version => Ok(json!({ "version": version_string() })),
    }
}

fn error_object(err: &anyhow::Error) -> Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<hurst_qv::Error>())
        .map_or("cli", |e| e.kind());
    json!({ "error": { "kind": kind, "message": format!("{err:#}") } })
}

/// Ignores write errors so a closed pipe does not panic.
fn emit(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            emit(&json!({ "error": { "kind": "usage", "message": msg.trim_end() } }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit(&error_object(&e));
            ExitCode::FAILURE
        }
    }
}
