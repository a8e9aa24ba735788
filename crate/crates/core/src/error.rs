use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hurst parameter {h} outside the supported range {range}")]
    HurstRange { h: f64, range: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "series truncation needs K = {needed_k} > cap {cap}; tail bound at the cap is {achieved_bound:e} (requested {tol:e})"
    )]
    Truncation {
        tol: f64,
        needed_k: u64,
        cap: usize,
        achieved_bound: f64,
    },

    #[error("grid size {m} exceeds the Cholesky cap {cap}; use the circulant method")]
    CholeskyTooLarge { m: usize, cap: usize },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("coarsening factor {factor} does not divide the grid size {m}")]
    Coarsen { factor: usize, m: usize },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("expression `{expr}` is not finite at x = {x}")]
    NonFiniteCoefficient { expr: String, x: f64 },

    #[error("unknown builtin `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },

    #[error("solver produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("need at least 3 grid values for a second difference, got {0}")]
    TooFewPoints(usize),

    #[error("degenerate variation: V(n) = {v2_n:e}, V(2n) = {v2_2n:e}")]
    DegenerateVariation { v2_n: f64, v2_2n: f64 },

    #[error("degenerate coefficient: V_inf = {v_inf:e}")]
    DegenerateCoefficient { v_inf: f64 },

    #[error("non-positive asymptotic variance G_inf = {0:e}")]
    NonPositiveVariance(f64),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("catalog entry `{0}` is not supported by the chaos oracle")]
    UnsupportedEntry(String),

    #[error("{skipped} of {total} paths were degenerate (limit 1%); first failure: {first}")]
    TooManyDegenerate {
        skipped: usize,
        total: usize,
        first: String,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::HurstRange { .. } => "hurst_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Truncation { .. } => "truncation",
            Error::CholeskyTooLarge { .. } => "cholesky_too_large",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::Coarsen { .. } => "coarsen",
            Error::Parse { .. } => "parse",
            Error::NonFiniteCoefficient { .. } => "non_finite_coefficient",
            Error::UnknownBuiltin { .. } => "unknown_builtin",
            Error::NonFiniteState { .. } => "non_finite_state",
            Error::TooFewPoints(_) => "too_few_points",
            Error::DegenerateVariation { .. } => "degenerate_variation",
            Error::DegenerateCoefficient { .. } => "degenerate_coefficient",
            Error::NonPositiveVariance(_) => "non_positive_variance",
            Error::Graph(_) => "graph",
            Error::UnsupportedEntry(_) => "unsupported_entry",
            Error::TooManyDegenerate { .. } => "too_many_degenerate",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Toml(_) => "toml",
        }
    }
}
