use thiserror::Error;

use crate::domain::{NodeId, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("impact estimate {value} is outside [-1, 1]")]
    EstimateOutOfRange { value: f64 },

    #[error("cannot aggregate an empty list of estimates")]
    EmptyEstimates,

    #[error("project is invalid: {0}")]
    Validation(ValidationReport),

    #[error("series length must be at least 1")]
    ZeroSeriesLength,

    #[error("closed form requires spectral radius estimate < 1, got {radius}")]
    Convergence { radius: f64 },

    #[error("I - A is numerically singular")]
    Singular,

    #[error("unknown target indicator `{0}`")]
    UnknownTarget(NodeId),

    #[error("unknown indicator `{0}`")]
    UnknownIndicator(NodeId),

    #[error("`{0}` is a targeted indicator and cannot be shocked")]
    TargetShock(NodeId),

    #[error("shock for `{id}` is not finite")]
    NonFiniteShock { id: NodeId },

    #[error("indicator `{0}` and its permitted range have different kinds")]
    KindMismatch(NodeId),

    #[error("permitted range belongs to `{range}`, not `{indicator}`")]
    RangeOwner { indicator: NodeId, range: NodeId },

    #[error("matrix node order does not match the project")]
    DimensionMismatch,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("malformed semantic network: {0}")]
    MalformedNetwork(String),
}
