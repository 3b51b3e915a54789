use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point (t={t}, y={y}) lies outside the drift domain: {reason}")]
    Domain { t: f64, y: f64, reason: String },

    #[error("mesh {delta} violates the mesh condition (largest admissible mesh {max})")]
    MeshCondition { delta: f64, max: f64 },

    #[error("grids are not nested: coarse N={coarse}, fine N={fine}")]
    NotNested { coarse: usize, fine: usize },

    #[error(
        "Cholesky factorization failed after {attempts} jitter attempts (smallest eigenvalue estimate: {})",
        min_eigenvalue.map_or_else(|| "unavailable".to_string(), |v| format!("{v:e}"))
    )]
    Cholesky {
        attempts: usize,
        min_eigenvalue: Option<f64>,
    },

    #[error("circulant embedding has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("bracket search exhausted: last bracket [{lo}, {hi}], target {target}")]
    Bracket { lo: f64, hi: f64, target: f64 },

    #[error("found {found} admissible roots in ({lower}, {upper}), expected exactly one")]
    RootSelection { found: usize, lower: f64, upper: f64 },

    #[error("step {step} failed from state y={state}: {source}")]
    Step {
        step: usize,
        state: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("step {step} residual {residual:e} exceeds tolerance {bound:e}")]
    Residual {
        step: usize,
        residual: f64,
        bound: f64,
    },

    #[error("path with seed {seed} at N={n} failed: {source}")]
    Path {
        seed: u64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("refused: {0}")]
    Refused(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
