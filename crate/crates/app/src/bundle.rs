//! On-disk layout of design artifacts and model bundles.
//!
//! A design directory holds `triplets.csv` and `meta.json`. A model
//! directory holds any of `fit.json`, `draws.bin` + `draws.json`,
//! `roster.csv`, and always `provenance.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use icepm::design::{read_design, read_meta, write_meta, write_triplets, ColumnDirectory, Position, SparseDesign};
use icepm::gammalasso::FitArtifact;
use icepm::gibbs::PosteriorDraws;
use icepm::lineup::{parse_roster, write_roster, Roster, RosterRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppError;

pub const TRIPLETS_FILE: &str = "triplets.csv";
pub const META_FILE: &str = "meta.json";
pub const FIT_FILE: &str = "fit.json";
pub const DRAWS_BIN: &str = "draws.bin";
pub const DRAWS_META: &str = "draws.json";
pub const ROSTER_FILE: &str = "roster.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";

/// Input hashes and the settings that produced a bundle's members.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// File name to hex SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Step name (`fit`, `sample`) to its settings.
    pub config: BTreeMap<String, serde_json::Value>,
}

/// Everything the decision endpoints need about one model.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    directory: ColumnDirectory,
    fit: Option<FitArtifact>,
    coefficients: Option<Vec<f64>>,
    draws: Option<Arc<PosteriorDraws>>,
    posterior_mean: Option<Vec<f64>>,
    roster: Option<Roster>,
    provenance: Provenance,
}

impl ModelBundle {
    pub fn new(
        fit: Option<FitArtifact>,
        draws: Option<PosteriorDraws>,
        roster: Option<Vec<RosterRecord>>,
        provenance: Provenance,
    ) -> Result<Self, AppError> {
        let directory = match (&fit, &draws) {
            (Some(f), Some(d)) if &f.directory != d.directory() => {
                return Err(AppError::input("fit and draws were built on different column directories"))
            }
            (Some(f), _) => f.directory.clone(),
            (None, Some(d)) => d.directory().clone(),
            (None, None) => return Err(AppError::input("bundle has neither a fit nor posterior draws")),
        };
        let roster = roster.map(|r| Roster::new(r, &directory)).transpose()?;
        let coefficients = fit.as_ref().map(FitArtifact::coefficients);
        let posterior_mean = draws.as_ref().map(PosteriorDraws::mean);
        Ok(ModelBundle {
            directory,
            fit,
            coefficients,
            draws: draws.map(Arc::new),
            posterior_mean,
            roster,
            provenance,
        })
    }

    pub fn load(dir: &Path) -> Result<Self, AppError> {
        if !dir.is_dir() {
            return Err(AppError::not_found(format!("model directory {} does not exist", dir.display())));
        }
        let fit = match open_optional(&dir.join(FIT_FILE))? {
            Some(f) => Some(FitArtifact::read(BufReader::new(f))?),
            None => None,
        };
        let draws = match (open_optional(&dir.join(DRAWS_BIN))?, open_optional(&dir.join(DRAWS_META))?) {
            (Some(b), Some(m)) => Some(PosteriorDraws::read(BufReader::new(b), BufReader::new(m))?),
            (None, None) => None,
            _ => return Err(AppError::input(format!("{DRAWS_BIN} and {DRAWS_META} must be present together"))),
        };
        let roster = match open_optional(&dir.join(ROSTER_FILE))? {
            Some(f) => Some(parse_roster(BufReader::new(f))?),
            None => None,
        };
        let provenance = read_provenance(dir)?;
        Self::new(fit, draws, roster, provenance)
    }

    pub fn directory(&self) -> &ColumnDirectory {
        &self.directory
    }

    pub fn fit(&self) -> Option<&FitArtifact> {
        self.fit.as_ref()
    }

    /// Dense MAP coefficients.
    pub fn map_coefficients(&self) -> Option<&[f64]> {
        self.coefficients.as_deref()
    }

    pub fn draws(&self) -> Option<&PosteriorDraws> {
        self.draws.as_deref()
    }

    pub fn posterior_mean(&self) -> Option<&[f64]> {
        self.posterior_mean.as_deref()
    }

    /// MAP coefficients when fitted, else the posterior mean.
    pub fn point_estimate(&self) -> &[f64] {
        self.map_coefficients().or(self.posterior_mean()).expect("bundle holds a fit or draws")
    }

    pub fn roster(&self) -> Option<&Roster> {
        self.roster.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn require_roster(&self) -> Result<&Roster, AppError> {
        self.roster.as_ref().ok_or_else(|| AppError::query("model has no roster"))
    }

    pub fn require_draws(&self) -> Result<&PosteriorDraws, AppError> {
        self.draws().ok_or_else(|| AppError::query("model has no posterior draws"))
    }

    pub fn player_position(&self, id: &str) -> Option<Position> {
        let j = self.directory.player_column(id)?;
        Some(self.directory.players[j - self.directory.player_offset()].position)
    }
}

fn io_at(path: &Path, e: std::io::Error) -> AppError {
    let mut err = AppError::from(e);
    err.detail = format!("{}: {}", path.display(), err.detail);
    err
}

/// Opens a file, naming it in the error.
pub fn open(path: &Path) -> Result<File, AppError> {
    File::open(path).map_err(|e| io_at(path, e))
}

fn open_optional(path: &Path) -> Result<Option<File>, AppError> {
    match File::open(path) {
        Ok(f) => Ok(Some(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_at(path, e)),
    }
}

pub fn read_provenance(dir: &Path) -> Result<Provenance, AppError> {
    match open_optional(&dir.join(PROVENANCE_FILE))? {
        Some(f) => Ok(serde_json::from_reader(BufReader::new(f))?),
        None => Ok(Provenance::default()),
    }
}

pub fn write_provenance(dir: &Path, provenance: &Provenance) -> Result<(), AppError> {
    write_json_file(&dir.join(PROVENANCE_FILE), provenance)
}

pub fn sha256_file(path: &Path) -> Result<String, AppError> {
    let bytes = fs::read(path).map_err(|e| io_at(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Pretty JSON with a trailing newline.
pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_design(dir: &Path, design: &SparseDesign) -> Result<(), AppError> {
    fs::create_dir_all(dir)?;
    let mut t = BufWriter::new(File::create(dir.join(TRIPLETS_FILE))?);
    write_triplets(&mut t, design)?;
    t.flush()?;
    let mut m = BufWriter::new(File::create(dir.join(META_FILE))?);
    write_meta(&mut m, design)?;
    m.write_all(b"\n")?;
    m.flush()?;
    Ok(())
}

pub fn load_design(dir: &Path) -> Result<SparseDesign, AppError> {
    let meta = read_meta(BufReader::new(open(&dir.join(META_FILE))?))?;
    Ok(read_design(BufReader::new(open(&dir.join(TRIPLETS_FILE))?), meta)?)
}

pub fn read_roster_file(path: &Path) -> Result<Vec<RosterRecord>, AppError> {
    Ok(parse_roster(BufReader::new(open(path)?))?)
}

pub fn write_roster_file(path: &Path, records: &[RosterRecord]) -> Result<(), AppError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_roster(&mut w, records)?;
    w.flush()?;
    Ok(())
}
