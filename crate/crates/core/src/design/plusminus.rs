use std::collections::BTreeMap;

use serde::Serialize;

use super::event::{GoalEvent, Side};

/// Goals for minus goals against, per player while on ice and per team.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PlusMinus {
    pub players: BTreeMap<String, i64>,
    pub teams: BTreeMap<String, i64>,
}

impl PlusMinus {
    /// Players that never appeared are 0.
    pub fn player(&self, id: &str) -> i64 {
        self.players.get(id).copied().unwrap_or(0)
    }

    pub fn team(&self, id: &str) -> i64 {
        self.teams.get(id).copied().unwrap_or(0)
    }
}

pub fn plus_minus(events: &[GoalEvent]) -> PlusMinus {
    let mut pm = PlusMinus::default();
    for e in events {
        let home_delta = match e.scoring_side {
            Side::Home => 1,
            Side::Away => -1,
        };
        *pm.teams.entry(e.home_team.clone()).or_default() += home_delta;
        *pm.teams.entry(e.away_team.clone()).or_default() -= home_delta;
        for p in &e.home {
            *pm.players.entry(p.id.clone()).or_default() += home_delta;
        }
        for p in &e.away {
            *pm.players.entry(p.id.clone()).or_default() -= home_delta;
        }
    }
    pm
}
