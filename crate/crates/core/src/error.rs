use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point off the model hypersurface (constraint violation {0:e})")]
    OffModel(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("center of mass iteration did not converge after {iterations} iterations (|Y|/area = {gradient:e})")]
    CenterNoConvergence { iterations: usize, gradient: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("focal point: Jacobi field vanishes at t = {0}")]
    FocalPoint(f64),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Stage name when the error was tagged by the report pipeline.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// True for errors caused by unreadable or malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io(_) | Error::Parse { .. } => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
