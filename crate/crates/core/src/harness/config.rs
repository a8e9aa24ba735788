use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coeff::{builtin, CoefficientSpec};
use crate::error::{Error, Result};
use crate::fbm::Method;
use crate::interval::Hurst;
use crate::sde::Integrator;

/// A builtin name (`"sde1"`) or an expression pair
/// (`{ v1 = "2+cos(x)", v2 = "sin(x)" }`, diffusion and drift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SdeChoice {
    Builtin(String),
    Expressions { v1: String, v2: String },
}

impl SdeChoice {
    pub fn coefficients(&self) -> Result<CoefficientSpec> {
        match self {
            SdeChoice::Builtin(name) => builtin(name),
            SdeChoice::Expressions { v1, v2 } => CoefficientSpec::from_exprs(v1, v2),
        }
    }
}

fn default_x0() -> f64 {
    1.0
}
fn default_hist_paths() -> usize {
    10_000
}
fn default_mc_paths() -> usize {
    2_000
}
fn default_oversample() -> usize {
    8
}
fn default_quad_n() -> usize {
    4096
}
fn default_seed() -> u64 {
    911
}
fn default_z_points() -> usize {
    401
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_tol() -> f64 {
    1e-10
}

/// One experiment: every field except `h`, `n` and `sde` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub h: Hurst,
    pub n: usize,
    pub sde: SdeChoice,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_hist_paths")]
    pub hist_paths: usize,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
    #[serde(default = "default_seed", alias = "seed")]
    pub master_seed: u64,
    #[serde(default = "default_z_points")]
    pub z_points: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub integrator: Integrator,
    /// Tolerance for the series constants.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    experiment: ExperimentConfig,
}

/// Path counts of the published experiments.
pub const FULL_HIST_PATHS: usize = 100_000;
pub const FULL_MC_PATHS: usize = 10_000;

impl ExperimentConfig {
    pub fn new(h: Hurst, n: usize, sde: SdeChoice) -> Self {
        ExperimentConfig {
            h,
            n,
            sde,
            x0: default_x0(),
            hist_paths: default_hist_paths(),
            mc_paths: default_mc_paths(),
            oversample: default_oversample(),
            quad_n: default_quad_n(),
            master_seed: default_seed(),
            z_points: default_z_points(),
            out_dir: default_out_dir(),
            method: Method::default(),
            integrator: Integrator::default(),
            tol: default_tol(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)?;
        file.experiment.validate()?;
        Ok(file.experiment)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn paper_scale(mut self) -> Self {
        self.hist_paths = FULL_HIST_PATHS;
        self.mc_paths = FULL_MC_PATHS;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        self.h.require_model()?;
        if self.n < 4 {
            return bad(format!("n must be at least 4, got {}", self.n));
        }
        if self.hist_paths == 0 || self.mc_paths == 0 {
            return bad("hist_paths and mc_paths must be at least 1".into());
        }
        if self.oversample == 0 || self.quad_n == 0 {
            return bad("oversample and quad_n must be at least 1".into());
        }
        if self.z_points < 2 {
            return bad(format!("z_points must be at least 2, got {}", self.z_points));
        }
        if !self.x0.is_finite() || !(self.tol > 0.0) {
            return bad("x0 must be finite and tol positive".into());
        }
        self.sde.coefficients()?;
        Ok(())
    }

    /// Fine grid for histogram paths: `oversample * 2n`.
    pub fn hist_grid(&self) -> usize {
        self.oversample * 2 * self.n
    }

    /// Fine grid for curve paths: a common multiple of the histogram grid and
    /// `quad_n`, so both the estimator points and the quadrature points lie on it.
    pub fn mc_grid(&self) -> usize {
        lcm(self.hist_grid(), self.quad_n)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml("[experiment]\nh = 0.55\nn = 16\nsde = \"sde1\"\n").unwrap();
        assert_eq!(cfg.hist_paths, 10_000);
        assert_eq!(cfg.mc_paths, 2_000);
        assert_eq!(cfg.master_seed, 911);
        assert_eq!(cfg.x0, 1.0);
        assert_eq!(cfg.method, Method::Circulant);
        assert_eq!(cfg.integrator, Integrator::Euler);
        assert_eq!(cfg.hist_grid(), 256);
        assert_eq!(cfg.mc_grid(), 4096);
        let p = cfg.paper_scale();
        assert_eq!((p.hist_paths, p.mc_paths), (100_000, 10_000));
    }

    #[test]
    fn expression_pairs_and_aliases() {
        let text = "[experiment]\nh = 0.85\nn = 32\nseed = 3\nsde = { v1 = \"2+cos(x)\", v2 = \"sin(x)\" }\nintegrator = \"heun\"\nmethod = \"cholesky\"\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.master_seed, 3);
        assert_eq!(cfg.integrator, Integrator::Heun);
        assert_eq!(cfg.method, Method::Cholesky);
        assert_eq!(cfg.sde.coefficients().unwrap().diffusion(0.0), 3.0);
    }

    #[test]
    fn invalid_configs() {
        let cases = [
            "[experiment]\nh = 0.5\nn = 16\nsde = \"sde1\"\n",
            "[experiment]\nh = 0.7\nn = 3\nsde = \"sde1\"\n",
            "[experiment]\nh = 0.7\nn = 16\nsde = \"sde9\"\n",
            "[experiment]\nh = 0.7\nn = 16\nsde = \"sde1\"\nhist_paths = 0\n",
            "[experiment]\nh = 0.7\nn = 16\nsde = \"sde1\"\nbogus = 1\n",
            "[experiment]\nn = 16\nsde = \"sde1\"\n",
        ];
        for c in cases {
            assert!(ExperimentConfig::from_toml(c).is_err(), "{c}");
        }
    }
}
