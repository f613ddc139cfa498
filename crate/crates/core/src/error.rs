use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    Cycle,

    #[error("invalid edge ({0}, {1}) for a graph on {2} variables")]
    InvalidEdge(usize, usize, usize),

    #[error("skeletons differ at pair ({0}, {1})")]
    SkeletonMismatch(usize, usize),

    #[error("enumeration needs {needed} undirected edges but the cap is {cap}")]
    EnumerationTooLarge { needed: usize, cap: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("singular design matrix for target {target}")]
    SingularDesign { target: usize },

    #[error("fits are not comparable: {0}")]
    Contract(String),

    #[error("zero residual variance, the variance ratio is undefined")]
    NoiselessFit,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("conflicting orientation of edge {0} - {1}")]
    OrientationConflict(usize, usize),

    #[error("{path}: {message}")]
    Data { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn data(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the numbers rather than the inputs' shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateModel(_) | Error::SingularDesign { .. } | Error::NoiselessFit
        )
    }
}
