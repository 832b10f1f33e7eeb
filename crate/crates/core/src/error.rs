use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum SimError {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampling range is empty or reversed.
    #[error("invalid range: {0}")]
    InvalidRange(String),

    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} relative to norm)")]
    NotHermitian { asymmetry: f64 },

    #[error("eigensolver did not converge after {iterations} sweeps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The regularized beamformer removed all terrestrial gain.
    #[error("terrestrial link fully nulled (gain {gain:.3e}); gain loss is undefined")]
    DegenerateNull { gain: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Scenario configuration failed validation; `path` names the offending field.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
