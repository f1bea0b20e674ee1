use thiserror::Error;

/// Errors raised by graph construction, numerics and the learning procedures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex} is not primal fixable")]
    NotFixable { vertex: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("graph generation failed after {attempts} draws; lower the edge densities")]
    GenerationFailure { attempts: usize },

    #[error("optimization failed: {message}")]
    OptimizationFailure {
        message: String,
        last_state: Option<Box<crate::ricf::RicfState>>,
    },

    #[error("discovery failed: all {restarts} restarts diverged")]
    DiscoveryFailure {
        restarts: usize,
        traces: Vec<Vec<crate::discovery::DualRecord>>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::OptimizationFailure { .. }
                | Error::DiscoveryFailure { .. }
                | Error::GenerationFailure { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
