use thiserror::Error;

pub type Result<T> = std::result::Result<T, DrlsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrlsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rank error: requested {requested}, available {available}")]
    Rank { requested: usize, available: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no matrix with the requested structure exists: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}{}: {message}", col.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        col: Option<usize>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        source: Box<DrlsError>,
    },
}

impl From<std::io::Error> for DrlsError {
    fn from(err: std::io::Error) -> Self {
        DrlsError::Io(err.to_string())
    }
}

impl DrlsError {
    pub fn in_stage(self, stage: &str) -> Self {
        DrlsError::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> DrlsError {
    DrlsError::InvalidInput(msg.into())
}
