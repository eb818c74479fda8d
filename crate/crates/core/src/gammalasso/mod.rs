//! MAP estimation of team and player effects under mixed ridge and
//! gamma-lasso priors.

mod artifact;
mod objective;
mod path;
mod penalty;
mod solver;

pub use artifact::FitArtifact;
pub use objective::{kkt_violation, logistic_loss, loss_gradient, neg_log_posterior, predict_prob};
pub use path::{regularization_path, PathPoint};
pub use penalty::{
    prior_sd, Penalty, PenaltySpec, DEFAULT_EXPECTED_LAMBDA, DEFAULT_RATE, DEFAULT_SIGMA,
};
pub use solver::{fit_map, fit_map_from, FitConfig, FitResult};

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("invalid penalty grid: {0}")]
    InvalidGrid(String),
    #[error("no convergence after {sweeps} sweeps (KKT violation {kkt:e})")]
    NotConverged { sweeps: usize, kkt: f64 },
    #[error("invalid fit artifact: {0}")]
    Artifact(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
