use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::line::{ranked, Extreme};
use super::{Line, LineupError, Roster, RosterEntry};
use crate::design::Position;

/// Budget and pin/exclude constraints for one optimization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineQuery {
    /// `None` means no salary cap.
    #[serde(default)]
    pub budget_cents: Option<u64>,
    #[serde(default)]
    pub pinned: BTreeSet<String>,
    #[serde(default)]
    pub excluded: BTreeSet<String>,
}

impl LineQuery {
    pub fn with_budget(budget_cents: u64) -> Self {
        LineQuery { budget_cents: Some(budget_cents), ..Default::default() }
    }

    pub fn validate(&self, roster: &Roster) -> Result<(), LineupError> {
        if let Some(id) = self.pinned.intersection(&self.excluded).next() {
            return Err(LineupError::InvalidQuery(format!("{id} is both pinned and excluded")));
        }
        let mut counts = [0usize; 5];
        for id in self.pinned.iter().chain(&self.excluded) {
            roster.get(id).ok_or_else(|| LineupError::UnknownPlayer(id.clone()))?;
        }
        for id in &self.pinned {
            let pos = roster.get(id).expect("checked").position;
            let k = Position::ALL.iter().position(|&p| p == pos).expect("known position");
            counts[k] += 1;
            let cap = if pos == Position::D { 2 } else { 1 };
            if counts[k] > cap {
                return Err(LineupError::InvalidQuery(format!("more than {cap} pinned {pos}")));
            }
        }
        Ok(())
    }

    pub fn budget(&self) -> u64 {
        self.budget_cents.unwrap_or(u64::MAX)
    }
}

/// Optimal line with its value `sum beta` and salary total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineChoice {
    pub line: Line,
    pub value: f64,
    pub cost_cents: u64,
}

struct Cand<'a> {
    id: &'a str,
    beta: f64,
    cost: u64,
}

struct Pair<'a> {
    lo: Cand<'a>,
    hi: Cand<'a>,
    bound: f64,
}

struct Search<'a> {
    singles: [Vec<Cand<'a>>; 4],
    pairs: Vec<Pair<'a>>,
    /// Upper bound on the value contributed by groups `k..`.
    rest_value: [f64; 6],
    /// Cheapest salary total for groups `k..`.
    rest_cost: [u64; 6],
    budget: u64,
    slack: f64,
    chosen: [&'a str; 4],
    best: Option<(f64, [&'a str; 6], u64)>,
}

impl<'a> Search<'a> {
    fn better(&self, value: f64, ids: &[&str; 6]) -> bool {
        match &self.best {
            None => true,
            Some((v, b, _)) => value > *v || (value == *v && ids < b),
        }
    }

    fn hopeless(&self, bound: f64) -> bool {
        matches!(self.best, Some((v, _, _)) if bound < v - self.slack)
    }

    fn run(&mut self, k: usize, value: f64, cost: u64) {
        if k == 4 {
            return self.pairs_level(value, cost);
        }
        for i in 0..self.singles[k].len() {
            let c = &self.singles[k][i];
            let v = value + c.beta;
            if self.hopeless(v + self.rest_value[k + 1]) {
                break;
            }
            let spent = cost.saturating_add(c.cost);
            if spent.saturating_add(self.rest_cost[k + 1]) > self.budget {
                continue;
            }
            self.chosen[k] = c.id;
            self.run(k + 1, v, spent);
        }
    }

    fn pairs_level(&mut self, value: f64, cost: u64) {
        for i in 0..self.pairs.len() {
            let p = &self.pairs[i];
            if self.hopeless(value + p.bound) {
                break;
            }
            let spent = cost.saturating_add(p.lo.cost).saturating_add(p.hi.cost);
            if spent > self.budget {
                continue;
            }
            let total = value + p.lo.beta + p.hi.beta;
            let ids = [self.chosen[0], self.chosen[1], self.chosen[2], self.chosen[3], p.lo.id, p.hi.id];
            if self.better(total, &ids) {
                self.best = Some((total, ids, spent));
            }
        }
    }
}

/// Exact maximizer of `sum beta` over position-legal lines within budget
/// that honour pins and excludes. Among equal values the lexicographically
/// smallest id sequence `(g, c, l, r, d1, d2)` wins.
pub fn optimize_line(beta: &[f64], roster: &Roster, query: &LineQuery) -> Result<LineChoice, LineupError> {
    query.validate(roster)?;
    let eligible = |e: &RosterEntry| !query.excluded.contains(&e.id);
    let group = |pos: Position| -> Vec<Cand> {
        let all = ranked(roster, beta, pos, Extreme::Best);
        let pinned: Vec<&RosterEntry> = all.iter().copied().filter(|e| query.pinned.contains(&e.id)).collect();
        let pool = if pinned.is_empty() || pos == Position::D { all } else { pinned };
        pool.into_iter()
            .filter(|e| eligible(e))
            .map(|e| Cand { id: &e.id, beta: beta[e.column], cost: e.salary_cents })
            .collect()
    };
    let singles = [group(Position::G), group(Position::C), group(Position::L), group(Position::R)];
    let ds = group(Position::D);
    let pinned_d: Vec<&str> = ds.iter().filter(|c| query.pinned.contains(c.id)).map(|c| c.id).collect();
    let mut pairs = Vec::new();
    for a in 0..ds.len() {
        for b in a + 1..ds.len() {
            if !pinned_d.iter().all(|&p| p == ds[a].id || p == ds[b].id) {
                continue;
            }
            let (x, y) = if ds[a].id < ds[b].id { (a, b) } else { (b, a) };
            let cand = |k: usize| Cand { id: ds[k].id, beta: ds[k].beta, cost: ds[k].cost };
            pairs.push(Pair { lo: cand(x), hi: cand(y), bound: ds[x].beta + ds[y].beta });
        }
    }
    pairs.sort_by(|p, q| q.bound.total_cmp(&p.bound));

    let mut rest_value = [0.0; 6];
    let mut rest_cost = [0u64; 6];
    rest_value[4] = pairs.first().map_or(f64::NEG_INFINITY, |p| p.bound);
    rest_cost[4] = pairs.iter().map(|p| p.lo.cost.saturating_add(p.hi.cost)).min().unwrap_or(u64::MAX);
    for k in (0..4).rev() {
        let best = singles[k].first().map_or(f64::NEG_INFINITY, |c| c.beta);
        let cheap = singles[k].iter().map(|c| c.cost).min().unwrap_or(u64::MAX);
        rest_value[k] = best + rest_value[k + 1];
        rest_cost[k] = cheap.saturating_add(rest_cost[k + 1]);
    }
    let scale = 1.0 + beta.iter().fold(0.0f64, |m, b| m.max(b.abs())) * 6.0;
    let mut search = Search {
        singles,
        pairs,
        rest_value,
        rest_cost,
        budget: query.budget(),
        slack: 1e-9 * scale,
        chosen: [""; 4],
        best: None,
    };
    if search.rest_cost[0] <= search.budget {
        search.run(0, 0.0, 0);
    }
    let (value, ids, cost_cents) = search.best.ok_or(LineupError::Infeasible)?;
    Ok(LineChoice { line: Line::new(ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]), value, cost_cents })
}

/// Cheapest salary total of any line satisfying the pins and excludes.
pub fn cheapest_line_cost(roster: &Roster, query: &LineQuery) -> Result<u64, LineupError> {
    // maximizing -salary over the same feasible set
    let width = roster.entries().iter().map(|e| e.column + 1).max().unwrap_or(0);
    let mut neg_cost = vec![0.0; width];
    for e in roster.entries() {
        neg_cost[e.column] = -(e.salary_cents as f64);
    }
    let q = LineQuery { budget_cents: None, ..query.clone() };
    optimize_line(&neg_cost, roster, &q).map(|c| c.cost_cents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineup::line::tests::roster;
    use crate::lineup::extreme_line;

    #[test]
    fn unlimited_budget_equals_best_line() {
        let (r, _) = roster(3);
        let beta: Vec<f64> = (0..r.len()).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
        let got = optimize_line(&beta, &r, &LineQuery::default()).unwrap();
        assert_eq!(got.line, extreme_line(&beta, &r, Extreme::Best).unwrap());
        assert_eq!(got.value, got.line.value(&beta, &r).unwrap());
        assert_eq!(got.cost_cents, got.line.cost(&r).unwrap());
    }

    #[test]
    fn budget_zero_is_infeasible() {
        let (r, _) = roster(2);
        let beta = vec![0.0; r.len()];
        assert!(matches!(optimize_line(&beta, &r, &LineQuery::with_budget(0)), Err(LineupError::Infeasible)));
        let floor = cheapest_line_cost(&r, &LineQuery::default()).unwrap();
        assert_eq!(floor, 100 * 5 + 200);
        assert!(optimize_line(&beta, &r, &LineQuery::with_budget(floor)).is_ok());
        assert!(optimize_line(&beta, &r, &LineQuery::with_budget(floor - 1)).is_err());
    }

    #[test]
    fn pins_and_excludes() {
        let (r, _) = roster(3);
        let beta: Vec<f64> = (0..r.len()).map(|k| k as f64).collect();
        let q = LineQuery {
            budget_cents: None,
            pinned: ["C0".to_string(), "D0".to_string()].into(),
            excluded: ["G2".to_string(), "D5".to_string()].into(),
        };
        let got = optimize_line(&beta, &r, &q).unwrap();
        assert_eq!(got.line.c, "C0");
        assert!(got.line.contains("D0"));
        assert!(!got.line.contains("G2") && !got.line.contains("D5"));
        assert_eq!(got.line.g, "G1");

        let clash = LineQuery { pinned: ["C0".into()].into(), excluded: ["C0".into()].into(), ..Default::default() };
        assert!(matches!(optimize_line(&beta, &r, &clash), Err(LineupError::InvalidQuery(_))));
        let two_c = LineQuery { pinned: ["C0".into(), "C1".into()].into(), ..Default::default() };
        assert!(matches!(optimize_line(&beta, &r, &two_c), Err(LineupError::InvalidQuery(_))));
        let ghost = LineQuery { pinned: ["Z9".into()].into(), ..Default::default() };
        assert!(matches!(optimize_line(&beta, &r, &ghost), Err(LineupError::UnknownPlayer(_))));
    }

    #[test]
    fn value_monotone_in_budget() {
        let (r, _) = roster(4);
        let beta: Vec<f64> = (0..r.len()).map(|k| (((k * 7919) % 13) as f64 - 6.0) / 3.0).collect();
        let mut last = f64::NEG_INFINITY;
        for b in (0..4000).step_by(50) {
            if let Ok(c) = optimize_line(&beta, &r, &LineQuery::with_budget(b)) {
                assert!(c.value >= last);
                assert!(c.cost_cents <= b);
                last = c.value;
            }
        }
        assert!(last > f64::NEG_INFINITY);
    }
}
