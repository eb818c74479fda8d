use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DesignError;

/// Number of on-ice players recorded per side for an even-strength goal.
pub const SIDE_SIZE: usize = 6;

const HEADER: [&str; 19] = [
    "goal_id", "season", "home_team", "away_team", "side", "h1", "h2", "h3", "h4", "h5", "h6",
    "a1", "a2", "a3", "a4", "a5", "a6", "hpos", "apos",
];

/// Positional tag carried by every on-ice player.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    G,
    C,
    L,
    R,
    D,
}

impl Position {
    pub const ALL: [Position; 5] = [Position::G, Position::C, Position::L, Position::R, Position::D];

    pub fn from_char(c: char) -> Option<Position> {
        match c {
            'G' => Some(Position::G),
            'C' => Some(Position::C),
            'L' => Some(Position::L),
            'R' => Some(Position::R),
            'D' => Some(Position::D),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Position::G => 'G',
            Position::C => 'C',
            Position::L => 'L',
            Position::R => 'R',
            Position::D => 'D',
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Position::from_char(c).ok_or_else(|| format!("unknown position {s:?}")),
            _ => Err(format!("unknown position {s:?}")),
        }
    }
}

/// Which side scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Home,
    Away,
}

impl Side {
    /// `+1` for home, `-1` for away.
    pub fn sign(self) -> i8 {
        match self {
            Side::Home => 1,
            Side::Away => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnIce {
    pub id: String,
    pub position: Position,
}

/// One even-strength goal with the full six-player units on each side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalEvent {
    pub goal_id: String,
    pub season: String,
    pub home_team: String,
    pub away_team: String,
    pub scoring_side: Side,
    pub home: [OnIce; SIDE_SIZE],
    pub away: [OnIce; SIDE_SIZE],
}

impl GoalEvent {
    /// Checks the per-event invariants; returns a human readable reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        if self.home_team == self.away_team {
            return Err(format!("home and away team are both {:?}", self.home_team));
        }
        for (label, side) in [("home", &self.home), ("away", &self.away)] {
            let mut seen = HashSet::new();
            for p in side {
                if p.id.is_empty() {
                    return Err(format!("empty {label} player id"));
                }
                if !seen.insert(p.id.as_str()) {
                    return Err(format!("duplicate {label} player {:?}", p.id));
                }
            }
            let goalies = side.iter().filter(|p| p.position == Position::G).count();
            if goalies != 1 {
                return Err(format!("{label} side has {goalies} goalie tags, expected 1"));
            }
        }
        if let Some(p) = self.home.iter().find(|h| self.away.iter().any(|a| a.id == h.id)) {
            return Err(format!("player {:?} listed on both sides", p.id));
        }
        Ok(())
    }

    pub fn scoring_sign(&self) -> i8 {
        self.scoring_side.sign()
    }
}

fn parse_side(
    ids: &[&str],
    tags: &str,
    label: &str,
) -> Result<[OnIce; SIDE_SIZE], String> {
    let tags: Vec<char> = tags.chars().collect();
    if tags.len() != SIDE_SIZE {
        return Err(format!(
            "{label} position string has {} tags, expected {SIDE_SIZE}",
            tags.len()
        ));
    }
    let mut out = Vec::with_capacity(SIDE_SIZE);
    for (id, tag) in ids.iter().zip(tags) {
        let position = Position::from_char(tag)
            .ok_or_else(|| format!("unknown {label} position tag {tag:?}"))?;
        out.push(OnIce { id: id.trim().to_string(), position });
    }
    Ok(out.try_into().expect("length checked"))
}

fn record_to_event(rec: &csv::StringRecord) -> Result<GoalEvent, String> {
    if rec.len() != HEADER.len() {
        return Err(format!("expected {} fields, found {}", HEADER.len(), rec.len()));
    }
    let f = |i: usize| rec.get(i).unwrap_or("").trim();
    let scoring_side = match f(4) {
        "H" => Side::Home,
        "A" => Side::Away,
        other => return Err(format!("side must be H or A, found {other:?}")),
    };
    let home_ids: Vec<&str> = (5..11).map(f).collect();
    let away_ids: Vec<&str> = (11..17).map(f).collect();
    let event = GoalEvent {
        goal_id: f(0).to_string(),
        season: f(1).to_string(),
        home_team: f(2).to_string(),
        away_team: f(3).to_string(),
        scoring_side,
        home: parse_side(&home_ids, f(17), "home")?,
        away: parse_side(&away_ids, f(18), "away")?,
    };
    if event.goal_id.is_empty() {
        return Err("empty goal_id".into());
    }
    if event.home_team.is_empty() || event.away_team.is_empty() {
        return Err("empty team id".into());
    }
    event.validate()?;
    Ok(event)
}

/// Parses the goal-event CSV layout. Rows are numbered from 1 after the header.
pub fn parse_goals<R: Read>(reader: R) -> Result<Vec<GoalEvent>, DesignError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| DesignError::MalformedEvent {
        row: 0,
        reason: e.to_string(),
    })?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != HEADER {
        return Err(DesignError::MalformedEvent {
            row: 0,
            reason: format!("unexpected header {:?}", found.join(",")),
        });
    }
    let mut events = Vec::new();
    let mut ids = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| DesignError::MalformedEvent { row, reason: e.to_string() })?;
        let event = record_to_event(&rec).map_err(|reason| DesignError::MalformedEvent { row, reason })?;
        if !ids.insert(event.goal_id.clone()) {
            return Err(DesignError::MalformedEvent {
                row,
                reason: format!("duplicate goal_id {:?}", event.goal_id),
            });
        }
        events.push(event);
    }
    Ok(events)
}

/// Writes events in the same layout `parse_goals` reads.
pub fn write_goals<W: Write>(writer: W, events: &[GoalEvent]) -> Result<(), DesignError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    for e in events {
        let mut rec: Vec<String> = vec![
            e.goal_id.clone(),
            e.season.clone(),
            e.home_team.clone(),
            e.away_team.clone(),
            match e.scoring_side {
                Side::Home => "H".into(),
                Side::Away => "A".into(),
            },
        ];
        rec.extend(e.home.iter().map(|p| p.id.clone()));
        rec.extend(e.away.iter().map(|p| p.id.clone()));
        rec.push(e.home.iter().map(|p| p.position.as_char()).collect());
        rec.push(e.away.iter().map(|p| p.position.as_char()).collect());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HEADER_LINE: &str =
        "goal_id,season,home_team,away_team,side,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,hpos,apos\n";

    fn row(side: &str) -> String {
        format!("g1,2010,DET,PIT,{side},h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD\n")
    }

    #[test]
    fn header_only_is_empty() {
        let events = parse_goals(HEADER_LINE.as_bytes()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn home_goal_maps_to_plus_one() {
        let text = format!("{HEADER_LINE}{}", row("H"));
        let events = parse_goals(text.as_bytes()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].scoring_sign(), 1);
        assert_eq!(events[0].home[0].position, Position::G);
        assert_eq!(events[0].away[5].id, "a6");
    }

    #[test]
    fn away_goal_maps_to_minus_one() {
        let text = format!("{HEADER_LINE}{}", row("A"));
        assert_eq!(parse_goals(text.as_bytes()).unwrap()[0].scoring_sign(), -1);
    }

    fn expect_malformed(text: &str) -> (usize, String) {
        match parse_goals(text.as_bytes()) {
            Err(DesignError::MalformedEvent { row, reason }) => (row, reason),
            other => panic!("expected MalformedEvent, got {other:?}"),
        }
    }

    #[test]
    fn five_home_ids_is_malformed() {
        let text = format!(
            "{HEADER_LINE}g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,a1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD\n"
        );
        let (row, reason) = expect_malformed(&text);
        assert_eq!(row, 1);
        assert!(reason.contains("fields"), "{reason}");
    }

    #[test]
    fn bad_rows_are_rejected() {
        let cases = [
            ("g1,2010,DET,PIT,X,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD", "side"),
            ("g1,2010,DET,PIT,H,h1,h1,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD", "duplicate"),
            ("g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,CCLRDD,GCLRDD", "goalie"),
            ("g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GGLRDD,GCLRDD", "goalie"),
            ("g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRDX,GCLRDD", "position"),
            ("g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRD,GCLRDD", "tags"),
            ("g1,2010,DET,DET,H,h1,h2,h3,h4,h5,h6,a1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD", "team"),
            ("g1,2010,DET,PIT,H,h1,h2,h3,h4,h5,h6,h1,a2,a3,a4,a5,a6,GCLRDD,GCLRDD", "both sides"),
        ];
        for (line, needle) in cases {
            let (row, reason) = expect_malformed(&format!("{HEADER_LINE}{line}\n"));
            assert_eq!(row, 1);
            assert!(reason.contains(needle), "{line}: {reason}");
        }
    }

    #[test]
    fn error_row_points_at_offending_line() {
        let text = format!("{HEADER_LINE}{}{}", row("H"), row("Q").replace("g1", "g2"));
        assert_eq!(expect_malformed(&text).0, 2);
    }

    #[test]
    fn duplicate_goal_ids_rejected() {
        let text = format!("{HEADER_LINE}{}{}", row("H"), row("A"));
        assert!(expect_malformed(&text).1.contains("goal_id"));
    }

    #[test]
    fn wrong_header_rejected() {
        assert_eq!(expect_malformed("a,b,c\n").0, 0);
    }

    #[test]
    fn roundtrip() {
        let text = format!("{HEADER_LINE}{}{}", row("H"), row("A").replace("g1", "g2"));
        let events = parse_goals(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_goals(&mut buf, &events).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        assert_eq!(parse_goals(buf.as_slice()).unwrap(), events);
    }
}
