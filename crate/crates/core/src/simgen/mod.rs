//! Synthetic leagues with known effects, and brute-force reference
//! computations used to check the estimators.

mod generate;
mod oracles;

pub use generate::{
    generate, player_id, synthetic_salary_usd, team_id, GroundTruth, PositionQuotas, SynthConfig, SynthPlayer,
    TruthSpec,
};
pub use oracles::{
    oracle_line_enumeration, oracle_map_grid, oracle_posterior_quadrature, GridMinimum, PosteriorMoments, QuadGrid,
    LINE_ORACLE_MAX_PLAYERS,
};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{got} coefficients exceed the oracle limit of {max}")]
    TooManyCoefficients { got: usize, max: usize },
    #[error("roster of {got} players exceeds the oracle limit of {max}")]
    RosterTooLarge { got: usize, max: usize },
}
