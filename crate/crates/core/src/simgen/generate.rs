use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::design::{GoalEvent, OnIce, Position, Side, SIDE_SIZE};
use crate::numeric::inv_logit;

/// Players per position on every synthetic team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionQuotas {
    pub goalies: usize,
    pub centers: usize,
    pub left_wings: usize,
    pub right_wings: usize,
    pub defense: usize,
}

impl Default for PositionQuotas {
    fn default() -> Self {
        PositionQuotas { goalies: 2, centers: 4, left_wings: 4, right_wings: 4, defense: 6 }
    }
}

impl PositionQuotas {
    pub fn per_team(&self) -> usize {
        self.goalies + self.centers + self.left_wings + self.right_wings + self.defense
    }

    fn count(&self, pos: Position) -> usize {
        match pos {
            Position::G => self.goalies,
            Position::C => self.centers,
            Position::L => self.left_wings,
            Position::R => self.right_wings,
            Position::D => self.defense,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthSpec {
    /// `round(nonzero_fraction * n_players)` players get an effect with
    /// magnitude uniform in `magnitude` and a random sign; team effects are
    /// `N(0, team_sd^2)`.
    Random { nonzero_fraction: f64, magnitude: (f64, f64), team_sd: f64 },
    /// Explicit effects keyed by generated team / player id; missing ids are 0.
    Explicit { alpha: BTreeMap<String, f64>, beta: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_teams: usize,
    pub quotas: PositionQuotas,
    pub n_goals: usize,
    pub truth: TruthSpec,
    /// Probability that a forward line or defense pair is deployed as a unit.
    pub line_cohesion: f64,
    /// Probability that a team's first goalie is in net.
    pub starter_share: f64,
    /// Forces this team index to be the home side of every goal.
    #[serde(default)]
    pub fixed_home: Option<usize>,
    pub season: String,
    /// Goals are split evenly over this many seasons.
    #[serde(default = "one")]
    pub seasons: usize,
    /// Chance that a roster slot is swapped with the same slot of a random
    /// other team between seasons.
    #[serde(default)]
    pub trade_rate: f64,
}

fn one() -> usize {
    1
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_teams: 10,
            quotas: PositionQuotas::default(),
            n_goals: 5_000,
            truth: TruthSpec::Random { nonzero_fraction: 0.1, magnitude: (0.8, 1.5), team_sd: 0.2 },
            line_cohesion: 0.7,
            starter_share: 0.8,
            fixed_home: None,
            season: "synthetic".into(),
            seasons: 1,
            trade_rate: 0.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let q = &self.quotas;
        if self.n_teams < 2 {
            return bad(format!("need at least 2 teams, got {}", self.n_teams));
        }
        if q.goalies < 1 || q.centers < 1 || q.left_wings < 1 || q.right_wings < 1 || q.defense < 2 {
            return bad(format!("quotas {q:?} cannot field a G, C, L, R, D, D unit"));
        }
        if self.seasons == 0 {
            return bad("seasons must be >= 1".into());
        }
        for (name, p) in [
            ("line_cohesion", self.line_cohesion),
            ("starter_share", self.starter_share),
            ("trade_rate", self.trade_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if let Some(h) = self.fixed_home {
            if h >= self.n_teams {
                return bad(format!("fixed_home {h} >= n_teams {}", self.n_teams));
            }
        }
        match &self.truth {
            TruthSpec::Random { nonzero_fraction, magnitude, team_sd } => {
                if !(0.0..=1.0).contains(nonzero_fraction) {
                    return bad(format!("nonzero_fraction {nonzero_fraction} outside [0, 1]"));
                }
                if !(magnitude.0 >= 0.0 && magnitude.1 >= magnitude.0 && magnitude.1.is_finite()) {
                    return bad(format!("magnitude range {magnitude:?} invalid"));
                }
                if !(*team_sd >= 0.0 && team_sd.is_finite()) {
                    return bad(format!("team_sd {team_sd} invalid"));
                }
            }
            TruthSpec::Explicit { alpha, beta } => {
                if alpha.values().chain(beta.values()).any(|v| !v.is_finite()) {
                    return bad("non-finite explicit effect".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPlayer {
    pub id: String,
    /// Team in the first season.
    pub team: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub teams: Vec<String>,
    pub players: Vec<SynthPlayer>,
    pub alpha: BTreeMap<String, f64>,
    pub beta: BTreeMap<String, f64>,
    pub support: BTreeSet<String>,
}

impl GroundTruth {
    pub fn beta_of(&self, id: &str) -> f64 {
        self.beta.get(id).copied().unwrap_or(0.0)
    }
}

pub fn team_id(t: usize) -> String {
    format!("T{t:02}")
}

pub fn player_id(t: usize, pos: Position, k: usize) -> String {
    format!("T{t:02}{}{}", pos.as_char(), k + 1)
}

struct TeamSquad {
    id: String,
    by_pos: BTreeMap<Position, Vec<String>>,
}

impl TeamSquad {
    fn of(&self, pos: Position) -> &[String] {
        &self.by_pos[&pos]
    }

    fn on_ice<R: Rng + ?Sized>(&self, cfg: &SynthConfig, rng: &mut R) -> [OnIce; SIDE_SIZE] {
        let goalies = self.of(Position::G);
        let goalie = if goalies.len() == 1 || rng.random::<f64>() < cfg.starter_share {
            goalies[0].clone()
        } else {
            goalies[1..].choose(rng).expect("non-empty").clone()
        };
        let (cs, ls, rs) = (self.of(Position::C), self.of(Position::L), self.of(Position::R));
        let lines = cs.len().min(ls.len()).min(rs.len());
        let (c, l, r) = if rng.random::<f64>() < cfg.line_cohesion {
            let k = rng.random_range(0..lines);
            (cs[k].clone(), ls[k].clone(), rs[k].clone())
        } else {
            let pick = |v: &[String], rng: &mut R| v.choose(rng).expect("non-empty").clone();
            (pick(cs, rng), pick(ls, rng), pick(rs, rng))
        };
        let ds = self.of(Position::D);
        let (d1, d2) = if rng.random::<f64>() < cfg.line_cohesion {
            let k = rng.random_range(0..ds.len() / 2);
            (ds[2 * k].clone(), ds[2 * k + 1].clone())
        } else {
            let two: Vec<&String> = ds.choose_multiple(rng, 2).collect();
            (two[0].clone(), two[1].clone())
        };
        let mk = |id: String, position| OnIce { id, position };
        [
            mk(goalie, Position::G),
            mk(c, Position::C),
            mk(l, Position::L),
            mk(r, Position::R),
            mk(d1, Position::D),
            mk(d2, Position::D),
        ]
    }
}

fn build_truth<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> (Vec<TeamSquad>, GroundTruth) {
    let mut squads = Vec::with_capacity(cfg.n_teams);
    let mut players = Vec::new();
    for t in 0..cfg.n_teams {
        let mut by_pos = BTreeMap::new();
        for pos in Position::ALL {
            let ids: Vec<String> = (0..cfg.quotas.count(pos)).map(|k| player_id(t, pos, k)).collect();
            for id in &ids {
                players.push(SynthPlayer { id: id.clone(), team: team_id(t), position: pos });
            }
            by_pos.insert(pos, ids);
        }
        squads.push(TeamSquad { id: team_id(t), by_pos });
    }
    let teams: Vec<String> = squads.iter().map(|s| s.id.clone()).collect();
    let (alpha, beta) = match &cfg.truth {
        TruthSpec::Random { nonzero_fraction, magnitude, team_sd } => {
            let normal = Normal::new(0.0, *team_sd).expect("validated sd");
            let alpha = teams.iter().map(|t| (t.clone(), normal.sample(rng))).collect();
            let k = (nonzero_fraction * players.len() as f64).round() as usize;
            let mut order: Vec<usize> = (0..players.len()).collect();
            order.shuffle(rng);
            let mut beta = BTreeMap::new();
            for &idx in &order[..k] {
                let mag = if magnitude.1 > magnitude.0 { rng.random_range(magnitude.0..magnitude.1) } else { magnitude.0 };
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                beta.insert(players[idx].id.clone(), sign * mag);
            }
            (alpha, beta)
        }
        TruthSpec::Explicit { alpha, beta } => (alpha.clone(), beta.clone()),
    };
    let support = beta.iter().filter(|(_, v)| **v != 0.0).map(|(k, _)| k.clone()).collect();
    (squads, GroundTruth { teams, players, alpha, beta, support })
}

/// Swaps each roster slot, with probability `rate`, with the same slot on a
/// random other team.
fn trade<R: Rng + ?Sized>(squads: &mut [TeamSquad], rate: f64, rng: &mut R) {
    let n = squads.len();
    if rate == 0.0 {
        return;
    }
    for t in 0..n {
        for pos in Position::ALL {
            for k in 0..squads[t].by_pos[&pos].len() {
                if rng.random::<f64>() >= rate {
                    continue;
                }
                let mut u = rng.random_range(0..n - 1);
                if u >= t {
                    u += 1;
                }
                let mine = squads[t].by_pos[&pos][k].clone();
                let theirs = std::mem::replace(&mut squads[u].by_pos.get_mut(&pos).expect("all positions")[k], mine);
                squads[t].by_pos.get_mut(&pos).expect("all positions")[k] = theirs;
            }
        }
    }
}

/// Draws goal events from the logistic model with known effects.
pub fn generate<R: Rng + ?Sized>(cfg: &SynthConfig, rng: &mut R) -> Result<(Vec<GoalEvent>, GroundTruth), SimError> {
    cfg.validate()?;
    let (mut squads, truth) = build_truth(cfg, rng);
    let mut events = Vec::with_capacity(cfg.n_goals);
    let mut season = 0;
    for g in 0..cfg.n_goals {
        if g * cfg.seasons >= (season + 1) * cfg.n_goals {
            season += 1;
            trade(&mut squads, cfg.trade_rate, rng);
        }
        let home = match cfg.fixed_home {
            Some(h) => h,
            None => rng.random_range(0..cfg.n_teams),
        };
        let mut away = rng.random_range(0..cfg.n_teams - 1);
        if away >= home {
            away += 1;
        }
        let home_ice = squads[home].on_ice(cfg, rng);
        let away_ice = squads[away].on_ice(cfg, rng);
        let effect = |ice: &[OnIce; SIDE_SIZE]| ice.iter().map(|p| truth.beta_of(&p.id)).sum::<f64>();
        let alpha = |t: &str| truth.alpha.get(t).copied().unwrap_or(0.0);
        let eta = alpha(&squads[home].id) - alpha(&squads[away].id) + effect(&home_ice) - effect(&away_ice);
        let scoring_side = if rng.random::<f64>() < inv_logit(eta) { Side::Home } else { Side::Away };
        events.push(GoalEvent {
            goal_id: format!("G{g:06}"),
            season: if cfg.seasons == 1 { cfg.season.clone() } else { format!("{}-{}", cfg.season, season + 1) },
            home_team: squads[home].id.clone(),
            away_team: squads[away].id.clone(),
            scoring_side,
            home: home_ice,
            away: away_ice,
        });
    }
    Ok((events, truth))
}

/// Synthetic salary in whole dollars: a league-minimum floor plus a
/// lognormal spread that rises with the player's true effect.
pub fn synthetic_salary_usd<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> u64 {
    let noise: f64 = Normal::new(0.0, 0.5).expect("fixed sd").sample(rng);
    let dollars = 500_000.0 + 1_200_000.0 * (0.8 * beta + noise).exp();
    // Round to the nearest thousand.
    ((dollars / 1000.0).round() as u64) * 1000
}
