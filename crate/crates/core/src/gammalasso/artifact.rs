use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::solver::FitResult;
use super::{FitError, PenaltySpec};
use crate::design::{ColumnDirectory, ColumnKind};

/// Serialized MAP fit.
///
/// `alpha` is dense over the team block; `beta` lists only the nonzero
/// player and pair coefficients keyed by column id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub directory: ColumnDirectory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    pub alpha: Vec<f64>,
    pub beta: BTreeMap<String, f64>,
    pub penalties: PenaltySpec,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl FitArtifact {
    pub fn new(directory: &ColumnDirectory, penalties: &PenaltySpec, fit: &FitResult) -> Result<Self, FitError> {
        if fit.coefficients.len() != directory.n_cols() || penalties.len() != directory.n_cols() {
            return Err(FitError::DimensionMismatch("fit, penalties and directory disagree".into()));
        }
        let mut intercept = None;
        let mut alpha = Vec::with_capacity(directory.teams.len());
        let mut beta = BTreeMap::new();
        for (j, &c) in fit.coefficients.iter().enumerate() {
            match directory.kind(j) {
                ColumnKind::Intercept => intercept = Some(c),
                ColumnKind::Team(_) => alpha.push(c),
                _ if c != 0.0 => {
                    beta.insert(directory.col_id(j), c);
                }
                _ => {}
            }
        }
        Ok(FitArtifact {
            directory: directory.clone(),
            intercept,
            alpha,
            beta,
            penalties: penalties.clone(),
            objective: fit.objective,
            sweeps: fit.sweeps,
            converged: fit.converged,
        })
    }

    /// Dense coefficient vector in directory order.
    pub fn coefficients(&self) -> Vec<f64> {
        let dir = &self.directory;
        let mut out = vec![0.0; dir.n_cols()];
        if let Some(c) = self.intercept {
            out[0] = c;
        }
        for (t, &a) in self.alpha.iter().enumerate() {
            out[dir.team_offset() + t] = a;
        }
        for (id, &b) in &self.beta {
            if let Some(j) = dir.column(id) {
                out[j] = b;
            }
        }
        out
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), FitError> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// Reads and validates an artifact.
    pub fn read<R: Read>(reader: R) -> Result<Self, FitError> {
        let mut art: FitArtifact = serde_json::from_reader(reader)?;
        art.directory.reindex().map_err(|e| FitError::Artifact(e.to_string()))?;
        art.validate()?;
        Ok(art)
    }

    fn validate(&self) -> Result<(), FitError> {
        let dir = &self.directory;
        if self.alpha.len() != dir.teams.len() {
            return Err(FitError::Artifact(format!("{} alpha values for {} teams", self.alpha.len(), dir.teams.len())));
        }
        if self.intercept.is_some() != dir.intercept {
            return Err(FitError::Artifact("intercept presence disagrees with directory".into()));
        }
        if self.penalties.len() != dir.n_cols() {
            return Err(FitError::Artifact(format!("{} penalties for {} columns", self.penalties.len(), dir.n_cols())));
        }
        for (id, b) in &self.beta {
            match dir.column(id).map(|j| dir.kind(j)) {
                Some(ColumnKind::Player(_) | ColumnKind::Interaction(_)) => {}
                _ => return Err(FitError::Artifact(format!("beta key {id:?} is not a player or pair column"))),
            }
            if !b.is_finite() {
                return Err(FitError::Artifact(format!("non-finite beta for {id}")));
            }
        }
        if self.alpha.iter().chain(self.intercept.iter()).any(|a| !a.is_finite()) {
            return Err(FitError::Artifact("non-finite team effect".into()));
        }
        Ok(())
    }
}
