use crate::tdse::SimulationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("grid too coarse or too small: {0}")]
    Grid(String),

    #[error("wavepacket is in the {found} representation, expected {expected}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    Singular { row: usize },

    #[error("norm drift {drift:.3e} exceeded tolerance {tolerance:.3e} at step {step} (t = {time:.6e} s)")]
    NormDrift {
        step: usize,
        time: f64,
        drift: f64,
        tolerance: f64,
        partial: Box<SimulationRecord>,
    },

    #[error("coupled-mode integration drifted by {drift:.3e} (tolerance {tolerance:.3e}); use more than {n_steps} steps")]
    StepTooLarge {
        drift: f64,
        tolerance: f64,
        n_steps: usize,
    },

    #[error("no peak found: {0}")]
    NoPeak(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
