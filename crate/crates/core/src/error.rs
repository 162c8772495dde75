use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient sample: need at least {needed} rows, got {found}")]
    InsufficientSample { needed: usize, found: usize },

    #[error("size mismatch: assignment distance needs n == m, got n={n}, m={m}")]
    SizeMismatch { n: usize, m: usize },

    #[error("covariance error: {0}")]
    Covariance(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("all importance weights are zero; raise epsilon")]
    EmptyAcceptance,

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate bandwidth: coordinate {coord} has zero sample variance")]
    DegenerateBandwidth { coord: usize },

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("record {k} failed (theta = {theta:?}): {source}")]
    Record {
        k: usize,
        theta: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
