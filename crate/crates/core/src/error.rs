use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient moments: index {required} is needed but the horizon is {horizon}")]
    InsufficientMoments { required: usize, horizon: usize },

    #[error("matrix is not square")]
    NotSquare,

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid moment sequence: {0}")]
    InvalidMoments(String),

    #[error("moment {index} is not strictly positive (a vanishing moment forces all later moments to vanish)")]
    NonPositiveMoment { index: usize },

    #[error("degenerate quadratic: leading coefficient is zero")]
    DegenerateQuadratic,

    #[error("nodes {0} and {1} coincide")]
    RepeatedNodes(usize, usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not Stieltjes-atomic: {0}")]
    NotStieltjesAtomic(String),

    #[error("densities not positive: density {index} is {value}")]
    DensitiesNotPositive { index: usize, value: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency incident: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
