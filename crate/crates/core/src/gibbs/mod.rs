//! Posterior simulation for the mixed ridge/Laplace logistic model through
//! normal scale-mixture latents, plus pairwise posterior comparisons.

mod draws;
mod latent;
mod sampler;

pub use draws::{better_than_matrix, decode_draws, BetterThan, DrawsMatrix, DrawsMeta, PosteriorDraws};
pub use latent::{
    draw_inverse_gaussian, draw_lambda, draw_omega, draw_truncated_normal_plus, OmegaProposal, OmegaSeries,
};
pub use sampler::{draw_beta_conditional, sample_posterior, Chain, FoldedRows, GibbsConfig, LatentState};

#[derive(Debug, thiserror::Error)]
pub enum GibbsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear solve failed at scan {scan}: {detail}")]
    SolverFailure { scan: usize, detail: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("invalid draws artifact: {0}")]
    Artifact(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
