//! Goal-event ingestion and the signed sparse design.

mod event;
mod export;
mod matrix;
mod plusminus;

pub use event::{parse_goals, write_goals, GoalEvent, OnIce, Position, Side, SIDE_SIZE};
pub use export::{read_design, read_meta, write_meta, write_triplets, DesignMeta};
pub use matrix::{
    build_design, expand_interactions, BuildOptions, ColumnDirectory, ColumnKind, Compressed, PlayerInfo,
    SparseDesign, Triplet,
};
pub use plusminus::{plus_minus, PlusMinus};

#[derive(Debug, thiserror::Error)]
pub enum DesignError {
    #[error("malformed event at row {row}: {reason}")]
    MalformedEvent { row: usize, reason: String },
    #[error("no events supplied")]
    EmptyInput,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid column directory: {0}")]
    InvalidDirectory(String),
    #[error("design invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
