use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::LineupError;
use crate::design::{ColumnDirectory, PlayerInfo, Position};

const HEADER: [&str; 3] = ["player_id", "position", "salary_usd"];

/// Parses a non-negative dollar amount with at most two decimals into cents.
pub fn parse_usd(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (whole, frac) = match s.split_once('.') {
        Some((w, f)) => (w, f),
        None => (s, ""),
    };
    let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if whole.is_empty() || !digits(whole) || !digits(frac) || frac.len() > 2 || s.ends_with('.') {
        return Err(format!("invalid salary {s:?}"));
    }
    let dollars: u64 = whole.parse().map_err(|_| format!("salary {s:?} out of range"))?;
    let cents: u64 = match frac.len() {
        0 => 0,
        1 => frac.parse::<u64>().expect("digit") * 10,
        _ => frac.parse().expect("digits"),
    };
    dollars
        .checked_mul(100)
        .and_then(|c| c.checked_add(cents))
        .ok_or_else(|| format!("salary {s:?} out of range"))
}

/// Formats cents as a dollar amount with two decimals.
pub fn format_usd(cents: u64) -> String {
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// One row of the roster file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterRecord {
    pub id: String,
    pub position: Position,
    pub salary_cents: u64,
}

pub fn parse_roster<R: Read>(reader: R) -> Result<Vec<RosterRecord>, LineupError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let bad = |row: usize, reason: String| LineupError::MalformedRoster { row, reason };
    let header = rdr.headers().map_err(|e| bad(0, e.to_string()))?;
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != HEADER {
        return Err(bad(0, format!("unexpected header {:?}", found.join(","))));
    }
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(row, format!("expected 3 fields, found {}", rec.len())));
        }
        let id = rec[0].trim().to_string();
        if id.is_empty() {
            return Err(bad(row, "empty player_id".into()));
        }
        let position: Position = rec[1].trim().parse().map_err(|e| bad(row, e))?;
        let salary_cents = parse_usd(&rec[2]).map_err(|e| bad(row, e))?;
        if let Some(prev) = seen.insert(id.clone(), row) {
            return Err(bad(row, format!("duplicate player_id {id:?} (first at row {prev})")));
        }
        out.push(RosterRecord { id, position, salary_cents });
    }
    Ok(out)
}

pub fn write_roster<W: Write>(writer: W, records: &[RosterRecord]) -> Result<(), LineupError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(HEADER)?;
    for r in records {
        wtr.write_record([r.id.as_str(), &r.position.to_string(), &format_usd(r.salary_cents)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Roster entry bound to its design column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: String,
    pub position: Position,
    pub salary_cents: u64,
    pub column: usize,
}

/// Players eligible for lines, with salaries and design columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Roster {
    entries: Vec<RosterEntry>,
    index: HashMap<String, usize>,
}

impl Roster {
    /// Binds records to `directory`; every player must have a column.
    pub fn new(records: Vec<RosterRecord>, directory: &ColumnDirectory) -> Result<Self, LineupError> {
        let mut entries = Vec::with_capacity(records.len());
        for r in records {
            let column = directory.player_column(&r.id).ok_or_else(|| LineupError::UnknownPlayer(r.id.clone()))?;
            entries.push(RosterEntry { id: r.id, position: r.position, salary_cents: r.salary_cents, column });
        }
        Self::from_entries(entries)
    }

    /// Roster whose column `k` is the `k`-th record, with a matching
    /// player-only directory.
    pub fn standalone(records: Vec<RosterRecord>) -> Result<(Self, ColumnDirectory), LineupError> {
        let players = records.iter().map(|r| PlayerInfo { id: r.id.clone(), position: r.position }).collect();
        let dir = ColumnDirectory::new(false, vec![], players, vec![])
            .map_err(|e| LineupError::InvalidRoster(e.to_string()))?;
        Ok((Self::new(records, &dir)?, dir))
    }

    fn from_entries(entries: Vec<RosterEntry>) -> Result<Self, LineupError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            if index.insert(e.id.clone(), k).is_some() {
                return Err(LineupError::InvalidRoster(format!("duplicate player {:?}", e.id)));
            }
        }
        Ok(Roster { entries, index })
    }

    pub fn entries(&self) -> &[RosterEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RosterEntry> {
        self.index.get(id).map(|&k| &self.entries[k])
    }

    pub fn records(&self) -> Vec<RosterRecord> {
        self.entries
            .iter()
            .map(|e| RosterRecord { id: e.id.clone(), position: e.position, salary_cents: e.salary_cents })
            .collect()
    }

    /// Entries at one position.
    pub fn at(&self, position: Position) -> impl Iterator<Item = &RosterEntry> + '_ {
        self.entries.iter().filter(move |e| e.position == position)
    }

    /// Fails unless the roster can field G, C, L, R and two D.
    pub fn check_feasible(&self) -> Result<(), LineupError> {
        for pos in Position::ALL {
            let need = if pos == Position::D { 2 } else { 1 };
            let have = self.at(pos).count();
            if have < need {
                return Err(LineupError::InfeasibleRoster(format!("{have} {pos} for {need} slot(s)")));
            }
        }
        Ok(())
    }
}
