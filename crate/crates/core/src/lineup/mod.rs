//! Lines, matchups and salary-capped line selection on top of fitted or
//! sampled effects.

mod line;
mod optimize;
mod roster;
mod salary;
mod sweep;

pub use line::{
    extreme_line, line_vector, matchup_distribution, random_line, random_line_excluding, random_matchup,
    score_probability, Extreme, Line, Matchup, SLOTS,
};
pub use optimize::{cheapest_line_cost, optimize_line, LineChoice, LineQuery};
pub use roster::{format_usd, parse_roster, parse_usd, write_roster, Roster, RosterEntry, RosterRecord};
pub use salary::{salary_regression, OlsFit, SalaryRegression};
pub use sweep::{budget_label, budget_sweep, budget_sweep_draws, write_sweep_csv, SweepResult, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum LineupError {
    #[error("unknown player {0:?}")]
    UnknownPlayer(String),
    #[error("lines share player {0:?}")]
    OverlappingLines(String),
    #[error("roster cannot field a line: {0}")]
    InfeasibleRoster(String),
    #[error("no line satisfies the constraints")]
    Infeasible,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid line: {0}")]
    InvalidLine(String),
    #[error("invalid roster: {0}")]
    InvalidRoster(String),
    #[error("malformed roster at row {row}: {reason}")]
    MalformedRoster { row: usize, reason: String },
    #[error("degenerate regression: {0}")]
    DegenerateDesign(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
