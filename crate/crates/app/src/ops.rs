//! Decision operations shared by the CLI and the HTTP service.

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use icepm::design::{ColumnKind, Position};
use icepm::gibbs::{better_than_matrix, BetterThan};
use icepm::lineup::{
    budget_label, budget_sweep, format_usd, matchup_distribution, optimize_line, parse_usd, Line, LineQuery, Matchup,
    SweepRow, SLOTS,
};
use icepm::numeric::quantile_sorted;
use serde::{Deserialize, Serialize};

use crate::bundle::ModelBundle;
use crate::error::AppError;

pub const DEFAULT_BINS: usize = 20;
pub const MAX_BINS: usize = 1000;
const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Which effects a request is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The MAP point estimate.
    Map,
    /// Every retained posterior draw.
    Draws,
}

/// Dollar budget given as a decimal string, a JSON number, or `"inf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Text(String),
    Number(serde_json::Number),
}

impl Budget {
    pub fn cents(&self) -> Result<u64, AppError> {
        let text = match self {
            Budget::Text(s) => s.trim().to_string(),
            Budget::Number(n) => n.to_string(),
        };
        if text.eq_ignore_ascii_case("inf") {
            return Ok(u64::MAX);
        }
        parse_usd(&text).map_err(|e| AppError::query(format!("budget: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRating {
    pub id: String,
    pub position: Position,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salary_cents: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRating {
    pub id: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratings {
    /// `map` or `posterior_mean`.
    pub source: String,
    pub players: Vec<PlayerRating>,
    pub teams: Vec<TeamRating>,
}

/// Every player, sorted by effect descending and then id.
pub fn ratings(bundle: &ModelBundle) -> Ratings {
    let dir = bundle.directory();
    let coef = bundle.point_estimate();
    let source = if bundle.map_coefficients().is_some() { "map" } else { "posterior_mean" };
    let mut players = Vec::with_capacity(dir.players.len());
    let mut teams = Vec::with_capacity(dir.teams.len());
    for (j, &c) in coef.iter().enumerate() {
        match dir.kind(j) {
            ColumnKind::Team(t) => teams.push(TeamRating { id: dir.teams[t].clone(), alpha: c }),
            ColumnKind::Player(k) => {
                let info = &dir.players[k];
                let salary_cents = bundle.roster().and_then(|r| r.get(&info.id)).map(|e| e.salary_cents);
                players.push(PlayerRating { id: info.id.clone(), position: info.position, beta: c, salary_cents });
            }
            _ => {}
        }
    }
    players.sort_by(|a, b| b.beta.total_cmp(&a.beta).then_with(|| a.id.cmp(&b.id)));
    Ratings { source: source.into(), players, teams }
}

pub fn compare(bundle: &ModelBundle, ids: &[String]) -> Result<BetterThan, AppError> {
    let draws = bundle.require_draws()?;
    if ids.is_empty() {
        return Err(AppError::query("ids must name at least one player"));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(AppError::query(format!("duplicate id {dup:?}")));
    }
    Ok(better_than_matrix(draws, ids)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchupRequest {
    pub home: Line,
    pub away: Line,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

/// Equal-width bins over `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchupResponse {
    pub mode: Mode,
    pub n_draws: usize,
    pub prob_mean: f64,
    pub quantiles: Vec<Quantile>,
    pub histogram: Histogram,
}

pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    let edges = (0..=bins).map(|k| k as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let k = ((v * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Histogram { edges, counts }
}

/// Sorts the defense pair and checks slots against the directory.
fn normalize_line(line: &Line, bundle: &ModelBundle) -> Result<Line, AppError> {
    let line = Line::new(&line.g, &line.c, &line.l, &line.r, &line.d[0], &line.d[1]);
    let ids = line.ids();
    if ids.iter().collect::<HashSet<_>>().len() != 6 {
        return Err(AppError::query("line players must be distinct"));
    }
    for (id, slot) in ids.iter().zip(SLOTS) {
        let pos = bundle.player_position(id).ok_or_else(|| AppError::query(format!("unknown player {id:?}")))?;
        if pos != slot {
            return Err(AppError::query(format!("{id} is {pos} but fills a {slot} slot")));
        }
    }
    Ok(line)
}

fn resolve_mode(bundle: &ModelBundle, mode: Option<Mode>) -> Result<Mode, AppError> {
    match mode {
        Some(Mode::Map) if bundle.map_coefficients().is_none() => Err(AppError::query("model has no MAP fit")),
        Some(Mode::Draws) if bundle.draws().is_none() => Err(AppError::query("model has no posterior draws")),
        Some(m) => Ok(m),
        None if bundle.draws().is_some() => Ok(Mode::Draws),
        None => Ok(Mode::Map),
    }
}

pub fn matchup(bundle: &ModelBundle, req: &MatchupRequest) -> Result<MatchupResponse, AppError> {
    let bins = req.bins.unwrap_or(DEFAULT_BINS);
    if !(1..=MAX_BINS).contains(&bins) {
        return Err(AppError::query(format!("bins must be in 1..={MAX_BINS}")));
    }
    let home = normalize_line(&req.home, bundle)?;
    let away = normalize_line(&req.away, bundle)?;
    let mode = resolve_mode(bundle, req.mode)?;
    let probs = match mode {
        Mode::Map => {
            let m = Matchup::new(&home, &away, bundle.directory())?;
            vec![m.probability(bundle.map_coefficients().expect("resolved"))]
        }
        Mode::Draws => matchup_distribution(bundle.require_draws()?, &home, &away)?,
    };
    let mut sorted = probs.clone();
    sorted.sort_by(f64::total_cmp);
    let prob_mean = probs.iter().sum::<f64>() / probs.len() as f64;
    let quantiles = QUANTILE_LEVELS
        .iter()
        .map(|&level| Quantile { level, value: quantile_sorted(&sorted, level) })
        .collect();
    Ok(MatchupResponse { mode, n_draws: probs.len(), prob_mean, quantiles, histogram: histogram(&probs, bins) })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeRequest {
    /// Omitted means no cap.
    #[serde(default)]
    pub budget: Option<Budget>,
    #[serde(default)]
    pub pinned: BTreeSet<String>,
    #[serde(default)]
    pub excluded: BTreeSet<String>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Required in draws mode, where opponents are random lines.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Scoring probability of the chosen line against the stated reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    /// `zero_effect_line` in MAP mode, `random_line` in draws mode.
    pub reference: String,
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
    pub n_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResponse {
    pub mode: Mode,
    pub budget: String,
    pub line: Line,
    /// Sum of the line's effects under the point estimate used.
    pub value: f64,
    pub cost_cents: u64,
    pub cost_usd: String,
    pub score_prob_summary: ScoreSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn optimize(bundle: &ModelBundle, req: &OptimizeRequest) -> Result<OptimizeResponse, AppError> {
    let roster = bundle.require_roster()?;
    let budget = req.budget.as_ref().map(Budget::cents).transpose()?.unwrap_or(u64::MAX);
    let query = LineQuery { budget_cents: Some(budget), pinned: req.pinned.clone(), excluded: req.excluded.clone() };
    query.validate(roster)?;
    let mode = resolve_mode(bundle, req.mode)?;
    match mode {
        Mode::Map => {
            let beta = bundle.map_coefficients().expect("resolved");
            let choice = optimize_line(beta, roster, &query)?;
            // Against a line of zero effects the margin is the line's own value.
            let p = icepm::lineup::score_probability(choice.value);
            Ok(OptimizeResponse {
                mode,
                budget: budget_label(budget),
                line: choice.line,
                value: choice.value,
                cost_cents: choice.cost_cents,
                cost_usd: format_usd(choice.cost_cents),
                score_prob_summary: ScoreSummary { reference: "zero_effect_line".into(), mean: p, q05: p, q95: p, n_draws: 1 },
                seed: None,
            })
        }
        Mode::Draws => {
            let seed = req.seed.ok_or_else(|| AppError::query("draws mode requires an explicit seed"))?;
            let draws = bundle.require_draws()?;
            let mean = bundle.posterior_mean().expect("draws present");
            let choice = optimize_line(mean, roster, &query)?;
            let res = budget_sweep(draws.draws(), roster, &[budget], &query, seed)?;
            let row = &res.rows[0];
            let (Some(m), Some(lo), Some(hi)) = (row.mean, row.q05, row.q95) else {
                return Err(AppError::from(icepm::lineup::LineupError::Infeasible));
            };
            Ok(OptimizeResponse {
                mode,
                budget: budget_label(budget),
                line: choice.line,
                value: choice.value,
                cost_cents: choice.cost_cents,
                cost_usd: format_usd(choice.cost_cents),
                score_prob_summary: ScoreSummary {
                    reference: "random_line".into(),
                    mean: m,
                    q05: lo,
                    q95: hi,
                    n_draws: draws.n_draws(),
                },
                seed: Some(seed),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub budgets: Vec<Budget>,
    #[serde(default)]
    pub pinned: BTreeSet<String>,
    #[serde(default)]
    pub excluded: BTreeSet<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRowOut {
    pub budget: String,
    /// `None` for an unlimited budget.
    pub budget_cents: Option<u64>,
    pub mean: Option<f64>,
    pub q05: Option<f64>,
    pub q95: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub seed: u64,
    pub n_draws: usize,
    pub rows: Vec<SweepRowOut>,
}

impl SweepResponse {
    pub fn core_rows(&self) -> Vec<SweepRow> {
        self.rows
            .iter()
            .map(|r| SweepRow { budget_cents: r.budget_cents.unwrap_or(u64::MAX), mean: r.mean, q05: r.q05, q95: r.q95, feasible: r.feasible })
            .collect()
    }
}

/// Checked sweep inputs, ready to run.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub budgets: Vec<u64>,
    pub query: LineQuery,
    pub seed: u64,
}

pub fn plan_sweep(bundle: &ModelBundle, req: &SweepRequest) -> Result<SweepPlan, AppError> {
    let seed = req.seed.ok_or_else(|| AppError::query("sweep requires an explicit seed"))?;
    bundle.require_draws()?;
    let roster = bundle.require_roster()?;
    let budgets = req.budgets.iter().map(Budget::cents).collect::<Result<Vec<_>, _>>()?;
    if budgets.is_empty() || budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AppError::query("budgets must be non-empty and strictly ascending"));
    }
    let query = LineQuery { budget_cents: None, pinned: req.pinned.clone(), excluded: req.excluded.clone() };
    query.validate(roster)?;
    Ok(SweepPlan { budgets, query, seed })
}

/// Runs a planned sweep, counting finished draws in `progress`.
pub fn run_sweep(bundle: &ModelBundle, plan: &SweepPlan, progress: &AtomicUsize) -> Result<SweepResponse, AppError> {
    let draws = bundle.require_draws()?;
    let roster = bundle.require_roster()?;
    let iter = draws.draws().inspect(|_| {
        progress.fetch_add(1, Ordering::Relaxed);
    });
    let res = budget_sweep(iter, roster, &plan.budgets, &plan.query, plan.seed)?;
    let rows = res
        .rows
        .into_iter()
        .map(|r| SweepRowOut {
            budget: budget_label(r.budget_cents),
            budget_cents: (r.budget_cents != u64::MAX).then_some(r.budget_cents),
            mean: r.mean,
            q05: r.q05,
            q95: r.q95,
            feasible: r.feasible,
        })
        .collect();
    Ok(SweepResponse { seed: plan.seed, n_draws: draws.n_draws(), rows })
}

pub fn sweep(bundle: &ModelBundle, req: &SweepRequest) -> Result<SweepResponse, AppError> {
    let plan = plan_sweep(bundle, req)?;
    run_sweep(bundle, &plan, &AtomicUsize::new(0))
}
