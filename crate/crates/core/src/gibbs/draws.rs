use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{GibbsConfig, GibbsError};
use crate::design::ColumnDirectory;

const MAGIC: &[u8; 8] = b"ICEPMDRW";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;

/// Retained draws, row-major `n_draws x n_cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    directory: ColumnDirectory,
    beta: Vec<f64>,
    lambda: Vec<f64>,
    config: GibbsConfig,
    omega_acceptance: Option<f64>,
}

/// JSON side of the draws artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawsMeta {
    pub directory: ColumnDirectory,
    pub config: GibbsConfig,
    pub n_draws: usize,
    pub n_cols: usize,
    pub omega_acceptance: Option<f64>,
    pub lambda_mean: f64,
}

/// Matrix part of the binary artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawsMatrix {
    pub n_draws: usize,
    pub n_cols: usize,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl PosteriorDraws {
    pub fn new(
        directory: ColumnDirectory,
        beta: Vec<f64>,
        lambda: Vec<f64>,
        config: GibbsConfig,
        omega_acceptance: Option<f64>,
    ) -> Result<Self, GibbsError> {
        let p = directory.n_cols();
        if p == 0 || lambda.is_empty() || beta.len() != lambda.len() * p {
            return Err(GibbsError::DimensionMismatch(format!(
                "{} beta values for {} draws of {p} columns",
                beta.len(),
                lambda.len()
            )));
        }
        if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(GibbsError::InvalidParameter("lambda draws must be positive".into()));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(GibbsError::InvalidParameter("beta draws must be finite".into()));
        }
        Ok(PosteriorDraws { directory, beta, lambda, config, omega_acceptance })
    }

    pub fn n_draws(&self) -> usize {
        self.lambda.len()
    }

    pub fn n_cols(&self) -> usize {
        self.directory.n_cols()
    }

    pub fn directory(&self) -> &ColumnDirectory {
        &self.directory
    }

    pub fn config(&self) -> &GibbsConfig {
        &self.config
    }

    pub fn omega_acceptance(&self) -> Option<f64> {
        self.omega_acceptance
    }

    pub fn draw(&self, t: usize) -> &[f64] {
        let p = self.n_cols();
        &self.beta[t * p..(t + 1) * p]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.beta.chunks_exact(self.n_cols())
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws().map(|d| d[j]).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_cols()];
        for d in self.draws() {
            for (a, b) in m.iter_mut().zip(d) {
                *a += b;
            }
        }
        let t = self.n_draws() as f64;
        m.iter_mut().for_each(|a| *a /= t);
        m
    }

    pub fn meta(&self) -> DrawsMeta {
        DrawsMeta {
            directory: self.directory.clone(),
            config: self.config.clone(),
            n_draws: self.n_draws(),
            n_cols: self.n_cols(),
            omega_acceptance: self.omega_acceptance,
            lambda_mean: self.lambda.iter().sum::<f64>() / self.n_draws() as f64,
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), GibbsError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n_draws() as u64).to_le_bytes())?;
        w.write_all(&(self.n_cols() as u64).to_le_bytes())?;
        for v in self.beta.iter().chain(&self.lambda) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn write_meta<W: Write>(&self, w: W) -> Result<(), GibbsError> {
        serde_json::to_writer_pretty(w, &self.meta())?;
        Ok(())
    }

    /// Reads the binary matrix and JSON metadata and checks they agree.
    pub fn read<B: Read, M: Read>(mut binary: B, meta: M) -> Result<Self, GibbsError> {
        let mut meta: DrawsMeta = serde_json::from_reader(meta)?;
        meta.directory.reindex().map_err(|e| GibbsError::Artifact(e.to_string()))?;
        let mut bytes = Vec::new();
        binary.read_to_end(&mut bytes)?;
        let m = decode_draws(&bytes)?;
        if m.n_draws != meta.n_draws || m.n_cols != meta.n_cols || m.n_cols != meta.directory.n_cols() {
            return Err(GibbsError::Artifact("binary dimensions disagree with metadata".into()));
        }
        PosteriorDraws::new(meta.directory, m.beta, m.lambda, meta.config, meta.omega_acceptance)
    }
}

/// Decodes the binary draws layout: magic, version, draw and column counts,
/// the beta matrix, then the lambda vector, all little-endian.
pub fn decode_draws(bytes: &[u8]) -> Result<DrawsMatrix, GibbsError> {
    let bad = |m: &str| GibbsError::Artifact(m.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(GibbsError::Artifact(format!("unsupported version {version}")));
    }
    let t = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let p = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    let body = bytes.len() - HEADER_LEN;
    let values = t
        .checked_mul(p)
        .and_then(|tp| tp.checked_add(t))
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if values != body as u64 {
        return Err(GibbsError::Artifact(format!("expected {values} payload bytes, found {body}")));
    }
    let (t, p) = (t as usize, p as usize);
    if t == 0 {
        return Err(bad("no draws"));
    }
    let mut floats = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let beta: Vec<f64> = floats.by_ref().take(t * p).collect();
    let lambda: Vec<f64> = floats.collect();
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(bad("non-finite beta"));
    }
    if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(bad("lambda draws must be positive"));
    }
    Ok(DrawsMatrix { n_draws: t, n_cols: p, beta, lambda })
}

/// Pairwise `P(beta_i > beta_j)` over a subset of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetterThan {
    pub ids: Vec<String>,
    /// `probability[i][j]`: share of draws with `beta_i > beta_j`, ties ½.
    pub probability: Vec<Vec<f64>>,
}

pub fn better_than_matrix(draws: &PosteriorDraws, subset: &[String]) -> Result<BetterThan, GibbsError> {
    if subset.is_empty() {
        return Err(GibbsError::InvalidParameter("empty subset".into()));
    }
    let dir = draws.directory();
    let cols: Vec<usize> = subset
        .iter()
        .map(|id| {
            dir.column(id)
                .or_else(|| dir.player_column(id))
                .or_else(|| dir.team_column(id))
                .ok_or_else(|| GibbsError::UnknownColumn(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let k = cols.len();
    let t = draws.n_draws() as f64;
    let mut probability = vec![vec![0.5; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let mut half_units = 0u64;
            for d in draws.draws() {
                let (x, y) = (d[cols[a]], d[cols[b]]);
                half_units += if x > y { 2 } else if x == y { 1 } else { 0 };
            }
            let p = half_units as f64 / (2.0 * t);
            probability[a][b] = p;
            probability[b][a] = 1.0 - p;
        }
    }
    Ok(BetterThan { ids: subset.to_vec(), probability })
}
