use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate scaling: 4 + 2b + alpha = {sum} must be positive")]
    DegenerateScaling { sum: f64 },

    #[error("x_alpha is undefined for N = {n} (requires N >= 5)")]
    XAlphaUnsupported { n: u32 },

    #[error("admissibility window violated: {0}")]
    AdmissibleWindow(String),

    #[error("convolution exponent solve infeasible: {0}")]
    HlsInfeasible(String),

    #[error("weight-window constraint violated: {0}")]
    HlsWindow(String),

    #[error("infeasible theta = {theta}: denominator of r is {denom}")]
    InfeasibleTheta { theta: f64, denom: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape {got} does not match grid size {want}")]
    ShapeMismatch { got: usize, want: usize },

    #[error("virial radius {radius} must satisfy R < L/4 = {limit}")]
    DomainTooSmall { radius: f64, limit: f64 },

    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid evolution config: {0}")]
    InvalidEvolveConfig(String),

    #[error("non-finite field at t = {t}; last good sample at t = {last_good}")]
    NonFiniteState { t: f64, last_good: f64 },

    #[error("ground-state iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("renormalization factor became non-positive ({s}); seed incompatible with the fixed-point map")]
    SeedIncompatible { s: f64 },

    #[error("degenerate ground state: {0}")]
    DegenerateGroundState(String),

    #[error("critical index s_c = {s_c} outside (0, 2); thresholds undefined")]
    OutOfRegime { s_c: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config validation error: {0}")]
    ConfigValidation(String),

    #[error("checkpoint checksum mismatch in {path}: header {expected}, payload {actual}")]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("unsupported checkpoint format version {got} (reader supports {supported})")]
    VersionMismatch { got: u32, supported: u32 },

    #[error("malformed checkpoint {path}: {message}")]
    MalformedCheckpoint { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
