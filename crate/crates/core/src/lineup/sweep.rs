use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::line::{random_line, score_probability};
use super::{format_usd, optimize_line, LineQuery, LineupError, Roster};
use crate::gibbs::PosteriorDraws;
use crate::numeric::quantile_sorted;

/// Summary across draws at one budget. Statistics are `None` when no line
/// fits the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub budget_cents: u64,
    pub mean: Option<f64>,
    pub q05: Option<f64>,
    pub q95: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `optima[b][t]`: optimal line value at budget `b` under draw `t`.
    pub optima: Vec<Vec<Option<f64>>>,
}

/// Per-draw optimization at each budget, scored against a random opponent
/// line. Draw `t` uses RNG stream `t` of `seed`, so its opponent is the same
/// at every budget and the per-draw probability cannot fall as the budget
/// rises. Players on both lines cancel in the margin.
pub fn budget_sweep<'a, I>(
    betas: I,
    roster: &Roster,
    budgets: &[u64],
    base: &LineQuery,
    seed: u64,
) -> Result<SweepResult, LineupError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    if budgets.is_empty() || budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LineupError::InvalidQuery("budgets must be non-empty and strictly ascending".into()));
    }
    base.validate(roster)?;
    let dir = roster_directory_width(roster);
    let mut probs: Vec<Vec<f64>> = vec![Vec::new(); budgets.len()];
    let mut optima: Vec<Vec<Option<f64>>> = vec![Vec::new(); budgets.len()];
    for (t, beta) in betas.into_iter().enumerate() {
        if beta.len() < dir {
            return Err(LineupError::DimensionMismatch(format!("draw has {} values, roster needs {dir}", beta.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let opponent = random_line(roster, &mut rng)?.value(beta, roster)?;
        for (b, &budget) in budgets.iter().enumerate() {
            let query = LineQuery { budget_cents: Some(budget), ..base.clone() };
            match optimize_line(beta, roster, &query) {
                Ok(choice) => {
                    probs[b].push(score_probability(choice.value - opponent));
                    optima[b].push(Some(choice.value));
                }
                Err(LineupError::Infeasible) => optima[b].push(None),
                Err(e) => return Err(e),
            }
        }
    }
    let rows = budgets
        .iter()
        .zip(probs)
        .map(|(&budget_cents, mut p)| {
            if p.is_empty() {
                return SweepRow { budget_cents, mean: None, q05: None, q95: None, feasible: false };
            }
            // Summed in draw order so that elementwise larger draws give a larger mean.
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            p.sort_by(f64::total_cmp);
            SweepRow {
                budget_cents,
                mean: Some(mean),
                q05: Some(quantile_sorted(&p, 0.05)),
                q95: Some(quantile_sorted(&p, 0.95)),
                feasible: true,
            }
        })
        .collect();
    Ok(SweepResult { rows, optima })
}

/// [`budget_sweep`] over every retained draw.
pub fn budget_sweep_draws(
    draws: &PosteriorDraws,
    roster: &Roster,
    budgets: &[u64],
    base: &LineQuery,
    seed: u64,
) -> Result<SweepResult, LineupError> {
    budget_sweep(draws.draws(), roster, budgets, base, seed)
}

fn roster_directory_width(roster: &Roster) -> usize {
    roster.entries().iter().map(|e| e.column + 1).max().unwrap_or(0)
}

/// Budget label used in sweep output; an unlimited budget prints as `inf`.
pub fn budget_label(cents: u64) -> String {
    if cents == u64::MAX {
        "inf".into()
    } else {
        format_usd(cents)
    }
}

/// Writes `budget,mean,q05,q95,feasible`; infeasible rows leave the
/// statistics empty.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<(), LineupError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["budget", "mean", "q05", "q95", "feasible"])?;
    let num = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in rows {
        wtr.write_record([
            budget_label(r.budget_cents),
            num(r.mean),
            num(r.q05),
            num(r.q95),
            r.feasible.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
