use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LineupError, Roster, RosterEntry};
use crate::design::{ColumnDirectory, Position};
use crate::gibbs::PosteriorDraws;

/// Six-player unit. The defense pair is kept in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub g: String,
    pub c: String,
    pub l: String,
    pub r: String,
    pub d: [String; 2],
}

/// Slot positions in line order.
pub const SLOTS: [Position; 6] = [Position::G, Position::C, Position::L, Position::R, Position::D, Position::D];

impl Line {
    pub fn new(g: &str, c: &str, l: &str, r: &str, d1: &str, d2: &str) -> Line {
        let (a, b) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        Line { g: g.into(), c: c.into(), l: l.into(), r: r.into(), d: [a.into(), b.into()] }
    }

    /// Ids in slot order `g, c, l, r, d1, d2`.
    pub fn ids(&self) -> [&str; 6] {
        [&self.g, &self.c, &self.l, &self.r, &self.d[0], &self.d[1]]
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids().contains(&id)
    }

    /// Checks distinctness, defense order, and positions against `roster`.
    pub fn validate(&self, roster: &Roster) -> Result<(), LineupError> {
        let ids = self.ids();
        if ids.iter().collect::<HashSet<_>>().len() != 6 {
            return Err(LineupError::InvalidLine("players must be distinct".into()));
        }
        if self.d[0] > self.d[1] {
            return Err(LineupError::InvalidLine("defense pair must be in ascending id order".into()));
        }
        for (id, pos) in ids.iter().zip(SLOTS) {
            let e = roster.get(id).ok_or_else(|| LineupError::UnknownPlayer(id.to_string()))?;
            if e.position != pos {
                return Err(LineupError::InvalidLine(format!("{id} is {} but fills a {pos} slot", e.position)));
            }
        }
        Ok(())
    }

    pub fn cost(&self, roster: &Roster) -> Result<u64, LineupError> {
        self.ids().iter().try_fold(0u64, |acc, id| {
            let e = roster.get(id).ok_or_else(|| LineupError::UnknownPlayer(id.to_string()))?;
            Ok(acc + e.salary_cents)
        })
    }

    /// `sum beta` over the six players, accumulated in slot order.
    pub fn value(&self, beta: &[f64], roster: &Roster) -> Result<f64, LineupError> {
        let mut v = 0.0;
        for id in self.ids() {
            v += beta[roster.get(id).ok_or_else(|| LineupError::UnknownPlayer(id.to_string()))?.column];
        }
        Ok(v)
    }
}

fn columns(line: &Line, directory: &ColumnDirectory) -> Result<[usize; 6], LineupError> {
    let mut out = [0; 6];
    for (slot, id) in line.ids().iter().enumerate() {
        out[slot] = directory.player_column(id).ok_or_else(|| LineupError::UnknownPlayer(id.to_string()))?;
    }
    Ok(out)
}

/// Lines must be disjoint unless identical; a line against itself cancels.
fn check_disjoint(home: &Line, away: &Line) -> Result<(), LineupError> {
    if home == away {
        return Ok(());
    }
    if let Some(id) = home.ids().iter().find(|id| away.contains(id)) {
        return Err(LineupError::OverlappingLines(id.to_string()));
    }
    Ok(())
}

/// `+1` on home-line player columns, `-1` on away-line columns. A line
/// against itself gives the zero vector.
pub fn line_vector(home: &Line, away: &Line, directory: &ColumnDirectory) -> Result<Vec<i8>, LineupError> {
    check_disjoint(home, away)?;
    let mut x = vec![0i8; directory.n_cols()];
    for j in columns(home, directory)? {
        x[j] += 1;
    }
    for j in columns(away, directory)? {
        x[j] -= 1;
    }
    Ok(x)
}

/// `P(home scores)` for margin `u`; `p(u) + p(-u) == 1` holds exactly.
pub fn score_probability(u: f64) -> f64 {
    let small = |u: f64| {
        let e = (-u.abs()).exp();
        e / (1.0 + e)
    };
    if u >= 0.0 {
        1.0 - small(u)
    } else {
        small(u)
    }
}

/// Bound matchup that evaluates margins without rebuilding the indicator vector.
#[derive(Debug, Clone)]
pub struct Matchup {
    home: [usize; 6],
    away: [usize; 6],
}

impl Matchup {
    pub fn new(home: &Line, away: &Line, directory: &ColumnDirectory) -> Result<Self, LineupError> {
        check_disjoint(home, away)?;
        Ok(Matchup { home: columns(home, directory)?, away: columns(away, directory)? })
    }

    /// Same as [`Matchup::new`] with columns taken from roster bindings.
    pub fn from_roster(home: &Line, away: &Line, roster: &Roster) -> Result<Self, LineupError> {
        check_disjoint(home, away)?;
        let cols = |line: &Line| -> Result<[usize; 6], LineupError> {
            let mut out = [0; 6];
            for (slot, id) in line.ids().iter().enumerate() {
                out[slot] = roster.get(id).ok_or_else(|| LineupError::UnknownPlayer(id.to_string()))?.column;
            }
            Ok(out)
        };
        Ok(Matchup { home: cols(home)?, away: cols(away)? })
    }

    /// Home-minus-away margin; each side summed in slot order so that
    /// swapping the lines negates it exactly.
    pub fn margin(&self, beta: &[f64]) -> f64 {
        let side = |cols: &[usize; 6]| cols.iter().fold(0.0, |acc, &j| acc + beta[j]);
        side(&self.home) - side(&self.away)
    }

    pub fn probability(&self, beta: &[f64]) -> f64 {
        score_probability(self.margin(beta))
    }
}

/// Scoring probability of `home` against `away` under each retained draw.
pub fn matchup_distribution(draws: &PosteriorDraws, home: &Line, away: &Line) -> Result<Vec<f64>, LineupError> {
    let m = Matchup::new(home, away, draws.directory())?;
    Ok(draws.draws().map(|b| m.probability(b)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extreme {
    Best,
    Worst,
}

/// Entries at `pos` ordered best-first under `mode`, ties by ascending id.
pub(crate) fn ranked<'a>(roster: &'a Roster, beta: &[f64], pos: Position, mode: Extreme) -> Vec<&'a RosterEntry> {
    let mut v: Vec<&RosterEntry> = roster.at(pos).collect();
    v.sort_by(|a, b| {
        let (x, y) = (beta[a.column], beta[b.column]);
        let ord = match mode {
            Extreme::Best => y.total_cmp(&x),
            Extreme::Worst => x.total_cmp(&y),
        };
        ord.then_with(|| a.id.cmp(&b.id))
    });
    v
}

/// Per-position argmax (`Best`) or argmin (`Worst`) of `beta`.
pub fn extreme_line(beta: &[f64], roster: &Roster, mode: Extreme) -> Result<Line, LineupError> {
    roster.check_feasible()?;
    let top = |pos| ranked(roster, beta, pos, mode);
    let d = top(Position::D);
    Ok(Line::new(
        &top(Position::G)[0].id,
        &top(Position::C)[0].id,
        &top(Position::L)[0].id,
        &top(Position::R)[0].id,
        &d[0].id,
        &d[1].id,
    ))
}

/// Uniform position-respecting line drawn without replacement from players
/// not in `taken`.
pub fn random_line_excluding<R: Rng + ?Sized>(
    roster: &Roster,
    taken: &HashSet<&str>,
    rng: &mut R,
) -> Result<Line, LineupError> {
    let pool = |pos| -> Vec<&RosterEntry> { roster.at(pos).filter(|e| !taken.contains(e.id.as_str())).collect() };
    let pick = |pos, rng: &mut R| -> Result<String, LineupError> {
        pool(pos)
            .choose(rng)
            .map(|e| e.id.clone())
            .ok_or_else(|| LineupError::InfeasibleRoster(format!("no free {pos}")))
    };
    let g = pick(Position::G, rng)?;
    let c = pick(Position::C, rng)?;
    let l = pick(Position::L, rng)?;
    let r = pick(Position::R, rng)?;
    let ds = pool(Position::D);
    if ds.len() < 2 {
        return Err(LineupError::InfeasibleRoster("fewer than two free D".into()));
    }
    let pair: Vec<&&RosterEntry> = ds.choose_multiple(rng, 2).collect();
    Ok(Line::new(&g, &c, &l, &r, &pair[0].id, &pair[1].id))
}

pub fn random_line<R: Rng + ?Sized>(roster: &Roster, rng: &mut R) -> Result<Line, LineupError> {
    random_line_excluding(roster, &HashSet::new(), rng)
}

/// Two disjoint random lines.
pub fn random_matchup<R: Rng + ?Sized>(roster: &Roster, rng: &mut R) -> Result<(Line, Line), LineupError> {
    let home = random_line(roster, rng)?;
    let taken: HashSet<&str> = home.ids().into_iter().collect();
    let away = random_line_excluding(roster, &taken, rng)?;
    Ok((home, away))
}
