use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::event::{GoalEvent, OnIce, Position, SIDE_SIZE};
use super::DesignError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerInfo {
    pub id: String,
    pub position: Position,
}

/// What a design column encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Intercept,
    Team(usize),
    Player(usize),
    Interaction(usize),
}

/// Column layout: `[intercept? | teams | players | interactions]`.
///
/// Column ids are the strings `intercept`, `team:<id>`, `player:<id>` and
/// `pair:<a>|<b>` (with `a < b`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDirectory {
    #[serde(default)]
    pub intercept: bool,
    pub teams: Vec<String>,
    pub players: Vec<PlayerInfo>,
    #[serde(default)]
    pub interactions: Vec<(String, String)>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl ColumnDirectory {
    pub fn new(
        intercept: bool,
        teams: Vec<String>,
        players: Vec<PlayerInfo>,
        interactions: Vec<(String, String)>,
    ) -> Result<Self, DesignError> {
        let mut dir = ColumnDirectory { intercept, teams, players, interactions, index: HashMap::new() };
        dir.reindex()?;
        Ok(dir)
    }

    /// Rebuilds the id lookup; called after deserialization.
    pub fn reindex(&mut self) -> Result<(), DesignError> {
        let goalies: BTreeSet<&str> = self
            .players
            .iter()
            .filter(|p| p.position == Position::G)
            .map(|p| p.id.as_str())
            .collect();
        for (a, b) in &self.interactions {
            if a >= b {
                return Err(DesignError::InvalidDirectory(format!("pair ({a}, {b}) is not ordered")));
            }
            if goalies.contains(a.as_str()) || goalies.contains(b.as_str()) {
                return Err(DesignError::InvalidDirectory(format!("pair ({a}, {b}) contains a goalie")));
            }
        }
        let mut index = HashMap::with_capacity(self.n_cols());
        for j in 0..self.n_cols() {
            if index.insert(self.col_id(j), j).is_some() {
                return Err(DesignError::InvalidDirectory(format!("duplicate column {}", self.col_id(j))));
            }
        }
        self.index = index;
        Ok(())
    }

    pub fn n_cols(&self) -> usize {
        self.intercept as usize + self.teams.len() + self.players.len() + self.interactions.len()
    }

    pub fn team_offset(&self) -> usize {
        self.intercept as usize
    }

    pub fn player_offset(&self) -> usize {
        self.team_offset() + self.teams.len()
    }

    pub fn interaction_offset(&self) -> usize {
        self.player_offset() + self.players.len()
    }

    pub fn kind(&self, col: usize) -> ColumnKind {
        if self.intercept && col == 0 {
            ColumnKind::Intercept
        } else if col < self.player_offset() {
            ColumnKind::Team(col - self.team_offset())
        } else if col < self.interaction_offset() {
            ColumnKind::Player(col - self.player_offset())
        } else {
            ColumnKind::Interaction(col - self.interaction_offset())
        }
    }

    pub fn col_id(&self, col: usize) -> String {
        match self.kind(col) {
            ColumnKind::Intercept => "intercept".to_string(),
            ColumnKind::Team(t) => format!("team:{}", self.teams[t]),
            ColumnKind::Player(p) => format!("player:{}", self.players[p].id),
            ColumnKind::Interaction(k) => {
                let (a, b) = &self.interactions[k];
                format!("pair:{a}|{b}")
            }
        }
    }

    pub fn column(&self, col_id: &str) -> Option<usize> {
        self.index.get(col_id).copied()
    }

    pub fn team_column(&self, team: &str) -> Option<usize> {
        self.column(&format!("team:{team}"))
    }

    pub fn player_column(&self, player: &str) -> Option<usize> {
        self.column(&format!("player:{player}"))
    }

    /// Columns that carry a fixed-variance prior by default (intercept and teams).
    pub fn is_ridge_block(&self, col: usize) -> bool {
        matches!(self.kind(col), ColumnKind::Intercept | ColumnKind::Team(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub include_teams: bool,
    pub interactions: bool,
    /// Adds an always-on column (`+1` in every row), used by the player-only model.
    pub intercept: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { include_teams: true, interactions: false, intercept: false }
    }
}

/// Compressed view of one axis of the design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compressed {
    pub ptr: Vec<usize>,
    pub idx: Vec<usize>,
    pub val: Vec<i8>,
}

impl Compressed {
    fn build(n_outer: usize, items: impl Iterator<Item = (usize, usize, i8)> + Clone) -> Self {
        let mut counts = vec![0usize; n_outer + 1];
        for (o, _, _) in items.clone() {
            counts[o + 1] += 1;
        }
        for k in 0..n_outer {
            counts[k + 1] += counts[k];
        }
        let nnz = counts[n_outer];
        let mut idx = vec![0; nnz];
        let mut val = vec![0; nnz];
        let mut next = counts.clone();
        for (o, i, v) in items {
            idx[next[o]] = i;
            val[next[o]] = v;
            next[o] += 1;
        }
        Compressed { ptr: counts, idx, val }
    }

    pub fn outer(&self, k: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let span = self.ptr[k]..self.ptr[k + 1];
        self.idx[span.clone()].iter().copied().zip(self.val[span].iter().copied())
    }
}

/// Signed indicator design: home entries `+1`, away entries `-1`, response kept separate.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    n_rows: usize,
    entries: Vec<Triplet>,
    response: Vec<i8>,
    directory: ColumnDirectory,
    by_row: Compressed,
    by_col: Compressed,
}

impl SparseDesign {
    /// Assembles a design from raw parts. Entries are sorted into (row, col)
    /// order; zero values are dropped.
    pub fn from_parts(
        n_rows: usize,
        mut entries: Vec<Triplet>,
        response: Vec<i8>,
        directory: ColumnDirectory,
    ) -> Result<Self, DesignError> {
        if response.len() != n_rows {
            return Err(DesignError::DimensionMismatch(format!(
                "{} responses for {n_rows} rows",
                response.len()
            )));
        }
        if let Some(y) = response.iter().find(|y| !matches!(y, 1 | -1)) {
            return Err(DesignError::DimensionMismatch(format!("response value {y} not in {{-1, +1}}")));
        }
        let n_cols = directory.n_cols();
        entries.retain(|t| t.value != 0);
        entries.sort_by_key(|t| (t.row, t.col));
        for w in entries.windows(2) {
            if (w[0].row, w[0].col) == (w[1].row, w[1].col) {
                return Err(DesignError::DimensionMismatch(format!(
                    "duplicate entry at ({}, {})",
                    w[0].row, w[0].col
                )));
            }
        }
        for t in &entries {
            if t.row >= n_rows || t.col >= n_cols || !matches!(t.value, 1 | -1) {
                return Err(DesignError::DimensionMismatch(format!(
                    "entry ({}, {}, {}) outside {n_rows}x{n_cols} signed design",
                    t.row, t.col, t.value
                )));
            }
        }
        let by_row = Compressed::build(n_rows, entries.iter().map(|t| (t.row, t.col, t.value)));
        let by_col = Compressed::build(n_cols, entries.iter().map(|t| (t.col, t.row, t.value)));
        Ok(SparseDesign { n_rows, entries, response, directory, by_row, by_col })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.directory.n_cols()
    }

    pub fn entries(&self) -> &[Triplet] {
        &self.entries
    }

    pub fn response(&self) -> &[i8] {
        &self.response
    }

    pub fn directory(&self) -> &ColumnDirectory {
        &self.directory
    }

    /// `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.by_row.outer(i)
    }

    /// `(row, value)` pairs of column `j`.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.by_col.outer(j)
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.by_col.ptr[j + 1] - self.by_col.ptr[j]
    }

    /// Linear predictor `x_i' theta` for every row.
    pub fn margins(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(j, v)| v as f64 * coeffs[j]).sum())
            .collect()
    }

    /// Fraction of structural zeros.
    pub fn sparsity(&self) -> f64 {
        let cells = (self.n_rows * self.n_cols()) as f64;
        if cells == 0.0 {
            return 1.0;
        }
        1.0 - self.entries.len() as f64 / cells
    }

    /// Same design with every value and response negated.
    pub fn negated(&self) -> SparseDesign {
        let entries = self.entries.iter().map(|t| Triplet { value: -t.value, ..*t }).collect();
        let response = self.response.iter().map(|y| -y).collect();
        SparseDesign::from_parts(self.n_rows, entries, response, self.directory.clone())
            .expect("negation preserves validity")
    }

    /// Asserts the row-structure invariants of an event-built design.
    pub fn check_event_invariants(&self) -> Result<(), DesignError> {
        let dir = &self.directory;
        for i in 0..self.n_rows {
            let (mut team_n, mut team_sum, mut pl_n, mut pl_sum) = (0, 0i32, 0, 0i32);
            for (j, v) in self.row(i) {
                match dir.kind(j) {
                    ColumnKind::Team(_) => {
                        team_n += 1;
                        team_sum += v as i32;
                    }
                    ColumnKind::Player(_) => {
                        pl_n += 1;
                        pl_sum += v as i32;
                    }
                    _ => {}
                }
            }
            let teams_ok = dir.teams.is_empty() || (team_n == 2 && team_sum == 0);
            if !teams_ok || pl_n != 2 * SIDE_SIZE || pl_sum != 0 {
                return Err(DesignError::InvariantViolation(format!(
                    "row {i}: {team_n} team entries (sum {team_sum}), {pl_n} player entries (sum {pl_sum})"
                )));
            }
        }
        Ok(())
    }
}

fn directory_from_events(events: &[GoalEvent], opts: &BuildOptions) -> Result<ColumnDirectory, DesignError> {
    let mut teams = BTreeSet::new();
    let mut players: BTreeMap<&str, Position> = BTreeMap::new();
    for e in events {
        teams.insert(e.home_team.clone());
        teams.insert(e.away_team.clone());
        for p in e.home.iter().chain(e.away.iter()) {
            players.entry(p.id.as_str()).or_insert(p.position);
        }
    }
    let teams = if opts.include_teams { teams.into_iter().collect() } else { Vec::new() };
    let players = players
        .into_iter()
        .map(|(id, position)| PlayerInfo { id: id.to_string(), position })
        .collect();
    ColumnDirectory::new(opts.intercept, teams, players, Vec::new())
}

/// Builds the signed design for `events`. Interaction columns are appended when
/// `opts.interactions` is set.
pub fn build_design(events: &[GoalEvent], opts: BuildOptions) -> Result<SparseDesign, DesignError> {
    if events.is_empty() {
        return Err(DesignError::EmptyInput);
    }
    for (i, e) in events.iter().enumerate() {
        e.validate().map_err(|reason| DesignError::MalformedEvent { row: i + 1, reason })?;
    }
    let directory = directory_from_events(events, &opts)?;
    let mut entries = Vec::with_capacity(events.len() * 15);
    for (i, e) in events.iter().enumerate() {
        if directory.intercept {
            entries.push(Triplet { row: i, col: 0, value: 1 });
        }
        if opts.include_teams {
            let h = directory.team_column(&e.home_team).expect("team indexed");
            let a = directory.team_column(&e.away_team).expect("team indexed");
            entries.push(Triplet { row: i, col: h, value: 1 });
            entries.push(Triplet { row: i, col: a, value: -1 });
        }
        for (side, sign) in [(&e.home, 1i8), (&e.away, -1i8)] {
            for p in side {
                let col = directory.player_column(&p.id).expect("player indexed");
                entries.push(Triplet { row: i, col, value: sign });
            }
        }
    }
    let response = events.iter().map(GoalEvent::scoring_sign).collect();
    let design = SparseDesign::from_parts(events.len(), entries, response, directory)?;
    design.check_event_invariants()?;
    if opts.interactions {
        expand_interactions(&design, events)
    } else {
        Ok(design)
    }
}

fn skaters(side: &[OnIce; SIDE_SIZE], sign: i8) -> impl Iterator<Item = (&str, i8)> {
    side.iter().filter(|p| p.position != Position::G).map(move |p| (p.id.as_str(), sign))
}

/// Appends one column per skater pair observed together on ice, holding the
/// row-wise product of the two player entries.
pub fn expand_interactions(design: &SparseDesign, events: &[GoalEvent]) -> Result<SparseDesign, DesignError> {
    if events.len() != design.n_rows() {
        return Err(DesignError::DimensionMismatch(format!(
            "{} events for a {}-row design",
            events.len(),
            design.n_rows()
        )));
    }
    if design.directory().players.is_empty() {
        return Err(DesignError::InvalidDirectory("design has no player block".into()));
    }
    let mut row_pairs: Vec<Vec<((String, String), i8)>> = Vec::with_capacity(events.len());
    let mut observed = BTreeSet::new();
    for e in events {
        let on_ice: Vec<(&str, i8)> = skaters(&e.home, 1).chain(skaters(&e.away, -1)).collect();
        let mut pairs = Vec::with_capacity(on_ice.len() * (on_ice.len() - 1) / 2);
        for (k, &(a, sa)) in on_ice.iter().enumerate() {
            for &(b, sb) in &on_ice[k + 1..] {
                let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
                observed.insert(key.clone());
                pairs.push((key, sa * sb));
            }
        }
        row_pairs.push(pairs);
    }
    let old = design.directory();
    let goalies: BTreeSet<&str> =
        old.players.iter().filter(|p| p.position == Position::G).map(|p| p.id.as_str()).collect();
    // Players tagged G in the directory but skating in some event stay out of pairs.
    let pairs: Vec<(String, String)> = observed
        .into_iter()
        .filter(|(a, b)| !goalies.contains(a.as_str()) && !goalies.contains(b.as_str()))
        .collect();
    let directory = ColumnDirectory::new(old.intercept, old.teams.clone(), old.players.clone(), pairs)?;
    let offset = directory.interaction_offset();
    let mut entries: Vec<Triplet> = design.entries().to_vec();
    for (i, pairs) in row_pairs.into_iter().enumerate() {
        for ((a, b), value) in pairs {
            if let Some(col) = directory.column(&format!("pair:{a}|{b}")) {
                debug_assert!(col >= offset);
                entries.push(Triplet { row: i, col, value });
            }
        }
    }
    SparseDesign::from_parts(design.n_rows(), entries, design.response().to_vec(), directory)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::design::event::Side;

    pub(crate) fn event(id: &str, home: &str, away: &str, side: Side, h: [&str; 6], a: [&str; 6]) -> GoalEvent {
        let tags = [Position::G, Position::C, Position::L, Position::R, Position::D, Position::D];
        let mk = |ids: [&str; 6]| {
            let v: Vec<OnIce> =
                ids.iter().zip(tags).map(|(id, position)| OnIce { id: id.to_string(), position }).collect();
            v.try_into().unwrap()
        };
        GoalEvent {
            goal_id: id.into(),
            season: "2010".into(),
            home_team: home.into(),
            away_team: away.into(),
            scoring_side: side,
            home: mk(h),
            away: mk(a),
        }
    }

    pub(crate) fn one_goal(side: Side) -> GoalEvent {
        event(
            "g1",
            "DET",
            "PIT",
            side,
            ["hg", "hc", "hl", "hr", "hd1", "hd2"],
            ["ag", "ac", "al", "ar", "ad1", "ad2"],
        )
    }

    #[test]
    fn single_home_goal_row() {
        let d = build_design(&[one_goal(Side::Home)], BuildOptions::default()).unwrap();
        assert_eq!(d.response(), &[1]);
        assert_eq!(d.entries().len(), 14);
        let dir = d.directory();
        let row: BTreeMap<String, i8> = d.row(0).map(|(j, v)| (dir.col_id(j), v)).collect();
        assert_eq!(row["team:DET"], 1);
        assert_eq!(row["team:PIT"], -1);
        for p in ["hg", "hc", "hl", "hr", "hd1", "hd2"] {
            assert_eq!(row[&format!("player:{p}")], 1);
        }
        for p in ["ag", "ac", "al", "ar", "ad1", "ad2"] {
            assert_eq!(row[&format!("player:{p}")], -1);
        }
    }

    #[test]
    fn away_goal_has_identical_row() {
        let h = build_design(&[one_goal(Side::Home)], BuildOptions::default()).unwrap();
        let a = build_design(&[one_goal(Side::Away)], BuildOptions::default()).unwrap();
        assert_eq!(h.entries(), a.entries());
        assert_eq!(a.response(), &[-1]);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(build_design(&[], BuildOptions::default()), Err(DesignError::EmptyInput)));
    }

    #[test]
    fn column_order_is_team_player_interaction() {
        let opts = BuildOptions { include_teams: true, interactions: true, intercept: true };
        let d = build_design(&[one_goal(Side::Home)], opts).unwrap();
        let dir = d.directory();
        assert_eq!(dir.col_id(0), "intercept");
        assert!(dir.col_id(1).starts_with("team:"));
        assert!(dir.col_id(dir.player_offset()).starts_with("player:"));
        assert!(dir.col_id(dir.interaction_offset()).starts_with("pair:"));
        // 10 skaters -> 45 pairs.
        assert_eq!(dir.interactions.len(), 45);
        assert_eq!(d.entries().len(), 1 + 14 + 45);
    }

    #[test]
    fn interaction_signs() {
        let opts = BuildOptions { interactions: true, ..Default::default() };
        let d = build_design(&[one_goal(Side::Home)], opts).unwrap();
        let dir = d.directory();
        let val = |id: &str| d.row(0).find(|(j, _)| dir.col_id(*j) == id).map(|(_, v)| v);
        assert_eq!(val("pair:hc|hl"), Some(1));
        assert_eq!(val("pair:ac|al"), Some(1));
        assert_eq!(val("pair:ac|hc"), Some(-1));
        assert_eq!(val("pair:hc|hg"), None);
        assert!(dir.interactions.iter().all(|(a, b)| !a.ends_with('g') && !b.ends_with('g')));
    }

    #[test]
    fn interaction_entries_are_products_of_player_entries() {
        let events = vec![
            one_goal(Side::Home),
            event("g2", "PIT", "DET", Side::Away, ["ag", "ac", "al", "ar", "ad1", "ad2"], [
                "hg", "hc", "hl", "x1", "hd1", "x2",
            ]),
        ];
        let opts = BuildOptions { interactions: true, ..Default::default() };
        let d = build_design(&events, opts).unwrap();
        let dir = d.directory();
        for i in 0..d.n_rows() {
            let row: HashMap<usize, i8> = d.row(i).collect();
            for (k, (a, b)) in dir.interactions.iter().enumerate() {
                let ja = dir.player_column(a).unwrap();
                let jb = dir.player_column(b).unwrap();
                let expect = row.get(&ja).copied().unwrap_or(0) * row.get(&jb).copied().unwrap_or(0);
                let got = row.get(&(dir.interaction_offset() + k)).copied().unwrap_or(0);
                assert_eq!(got, expect, "row {i} pair {a}|{b}");
            }
        }
    }

    #[test]
    fn negated_flips_everything() {
        let d = build_design(&[one_goal(Side::Home)], BuildOptions::default()).unwrap();
        let n = d.negated();
        assert_eq!(n.response(), &[-1]);
        for (a, b) in d.entries().iter().zip(n.entries()) {
            assert_eq!(a.value, -b.value);
        }
    }

    #[test]
    fn from_parts_rejects_bad_entries() {
        let dir = ColumnDirectory::new(false, vec![], vec![PlayerInfo { id: "p".into(), position: Position::C }], vec![])
            .unwrap();
        let bad = vec![Triplet { row: 0, col: 3, value: 1 }];
        assert!(SparseDesign::from_parts(1, bad, vec![1], dir.clone()).is_err());
        let dup = vec![Triplet { row: 0, col: 0, value: 1 }, Triplet { row: 0, col: 0, value: 1 }];
        assert!(SparseDesign::from_parts(1, dup, vec![1], dir.clone()).is_err());
        assert!(SparseDesign::from_parts(1, vec![], vec![0], dir).is_err());
    }

    #[test]
    fn directory_rejects_goalie_pairs() {
        let players = vec![
            PlayerInfo { id: "a".into(), position: Position::G },
            PlayerInfo { id: "b".into(), position: Position::C },
        ];
        let err = ColumnDirectory::new(false, vec![], players, vec![("a".into(), "b".into())]);
        assert!(matches!(err, Err(DesignError::InvalidDirectory(_))));
    }
}
