//! Artifact-producing steps: simulate, ingest, fit, path, sample, pm.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use icepm::design::{build_design, parse_goals, plus_minus, write_goals, BuildOptions, GoalEvent, PlusMinus};
use icepm::gammalasso::{fit_map, regularization_path, FitArtifact, FitConfig, PenaltySpec};
use icepm::gibbs::{sample_posterior, GibbsConfig};
use icepm::lineup::RosterRecord;
use icepm::simgen::{generate, synthetic_salary_usd, SynthConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bundle::{
    load_design, open, read_provenance, read_roster_file, save_design, sha256_file, write_json_file, write_provenance,
    write_roster_file, ModelBundle, DRAWS_BIN, DRAWS_META, FIT_FILE, META_FILE, ROSTER_FILE, TRIPLETS_FILE,
};
use crate::error::AppError;

pub const GOALS_FILE: &str = "goals.csv";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub seed: u64,
    pub n_goals: usize,
    pub n_players: usize,
    pub n_teams: usize,
    pub support: usize,
    pub goals_sha256: String,
    pub roster_sha256: String,
}

/// Writes `goals.csv`, `roster.csv` and `truth.json` into `out`. Events use
/// stream 0 of `seed`, salaries stream 1.
pub fn simulate(cfg: &SynthConfig, seed: u64, out: &Path) -> Result<SimulateSummary, AppError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (events, truth) = generate(cfg, &mut rng)?;
    let mut salary_rng = ChaCha8Rng::seed_from_u64(seed);
    salary_rng.set_stream(1);
    let roster: Vec<RosterRecord> = truth
        .players
        .iter()
        .map(|p| RosterRecord {
            id: p.id.clone(),
            position: p.position,
            salary_cents: synthetic_salary_usd(truth.beta_of(&p.id), &mut salary_rng) * 100,
        })
        .collect();
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join(GOALS_FILE))?);
    write_goals(&mut w, &events)?;
    w.flush()?;
    write_roster_file(&out.join(ROSTER_FILE), &roster)?;
    write_json_file(&out.join(TRUTH_FILE), &truth)?;
    Ok(SimulateSummary {
        seed,
        n_goals: events.len(),
        n_players: truth.players.len(),
        n_teams: truth.teams.len(),
        support: truth.support.len(),
        goals_sha256: sha256_file(&out.join(GOALS_FILE))?,
        roster_sha256: sha256_file(&out.join(ROSTER_FILE))?,
    })
}

pub fn read_goals(path: &Path) -> Result<Vec<GoalEvent>, AppError> {
    Ok(parse_goals(BufReader::new(open(path)?))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_teams: usize,
    pub n_players: usize,
    pub n_interactions: usize,
    pub sparsity: f64,
    pub goals_sha256: String,
}

pub fn ingest(goals: &Path, opts: BuildOptions, out: &Path) -> Result<IngestSummary, AppError> {
    let events = read_goals(goals)?;
    let design = build_design(&events, opts)?;
    save_design(out, &design)?;
    let dir = design.directory();
    Ok(IngestSummary {
        n_rows: design.n_rows(),
        n_cols: design.n_cols(),
        n_teams: dir.teams.len(),
        n_players: dir.players.len(),
        n_interactions: dir.interactions.len(),
        sparsity: design.sparsity(),
        goals_sha256: sha256_file(goals)?,
    })
}

/// Hashes of the design files, keyed by file name.
fn design_hashes(design_dir: &Path) -> Result<Vec<(String, String)>, AppError> {
    [TRIPLETS_FILE, META_FILE]
        .iter()
        .map(|f| Ok((f.to_string(), sha256_file(&design_dir.join(f))?)))
        .collect()
}

/// Copies a roster into the model directory after checking it binds to the
/// model's columns.
fn attach_roster(roster: Option<&Path>, model: &Path, directory: &icepm::design::ColumnDirectory) -> Result<(), AppError> {
    if let Some(path) = roster {
        let records = read_roster_file(path)?;
        icepm::lineup::Roster::new(records.clone(), directory)?;
        write_roster_file(&model.join(ROSTER_FILE), &records)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub objective: f64,
    pub converged: bool,
    pub sweeps: usize,
    pub kkt_violation: f64,
    pub nonzero_fraction: f64,
    pub nonzero_players: usize,
    pub fit_sha256: String,
}

pub fn fit(
    design_dir: &Path,
    expected_lambda: f64,
    config: &FitConfig,
    roster: Option<&Path>,
    out: &Path,
) -> Result<FitSummary, AppError> {
    let design = load_design(design_dir)?;
    let penalties = PenaltySpec::standard(design.directory(), expected_lambda)?;
    let result = fit_map(&design, &penalties, config)?.into_converged()?;
    fs::create_dir_all(out)?;
    let artifact = FitArtifact::new(design.directory(), &penalties, &result)?;
    let mut w = BufWriter::new(File::create(out.join(FIT_FILE))?);
    artifact.write(&mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;
    attach_roster(roster, out, design.directory())?;

    let mut prov = read_provenance(out)?;
    prov.inputs.extend(design_hashes(design_dir)?);
    if roster.is_some() {
        prov.inputs.insert(ROSTER_FILE.into(), sha256_file(&out.join(ROSTER_FILE))?);
    }
    prov.config.insert(
        "fit".into(),
        json!({ "expected_lambda": expected_lambda, "tol": config.tol, "kkt_tol": config.kkt_tol, "max_sweeps": config.max_sweeps }),
    );
    write_provenance(out, &prov)?;
    Ok(FitSummary {
        objective: result.objective,
        converged: result.converged,
        sweeps: result.sweeps,
        kkt_violation: result.kkt_violation,
        nonzero_fraction: result.nonzero_fraction(),
        nonzero_players: result.beta_nonzero(&design).count(),
        fit_sha256: sha256_file(&out.join(FIT_FILE))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub expected_lambda: f64,
    pub nonzero_fraction: f64,
    pub objective: f64,
    pub converged: bool,
    pub sweeps: usize,
}

pub fn path(design_dir: &Path, grid: &[f64], config: &FitConfig) -> Result<Vec<PathRow>, AppError> {
    let design = load_design(design_dir)?;
    let first = grid.first().copied().ok_or_else(|| AppError::query("empty grid"))?;
    let template = PenaltySpec::standard(design.directory(), first)?;
    let points = regularization_path(&design, &template, grid, config)?;
    Ok(points
        .into_iter()
        .map(|p| PathRow {
            expected_lambda: p.expected_lambda,
            nonzero_fraction: p.nonzero_fraction,
            objective: p.fit.objective,
            converged: p.fit.converged,
            sweeps: p.fit.sweeps,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n_draws: usize,
    pub n_cols: usize,
    pub lambda_mean: f64,
    pub omega_acceptance: Option<f64>,
    pub draws_sha256: String,
}

/// Runs the sampler and stores the draws in `out`, next to any existing fit.
pub fn sample(
    design_dir: &Path,
    expected_lambda: f64,
    config: &GibbsConfig,
    roster: Option<&Path>,
    out: &Path,
) -> Result<SampleSummary, AppError> {
    let design = load_design(design_dir)?;
    if out.join(FIT_FILE).exists() {
        let fit = FitArtifact::read(BufReader::new(open(&out.join(FIT_FILE))?))?;
        if &fit.directory != design.directory() {
            return Err(AppError::input("existing fit in the model directory uses a different design"));
        }
    }
    let penalties = PenaltySpec::standard(design.directory(), expected_lambda)?;
    let draws = sample_posterior(&design, &penalties, config)?;
    fs::create_dir_all(out)?;
    let mut b = BufWriter::new(File::create(out.join(DRAWS_BIN))?);
    draws.write_binary(&mut b)?;
    b.flush()?;
    let mut m = BufWriter::new(File::create(out.join(DRAWS_META))?);
    draws.write_meta(&mut m)?;
    m.write_all(b"\n")?;
    m.flush()?;
    attach_roster(roster, out, design.directory())?;

    let mut prov = read_provenance(out)?;
    prov.inputs.extend(design_hashes(design_dir)?);
    if roster.is_some() {
        prov.inputs.insert(ROSTER_FILE.into(), sha256_file(&out.join(ROSTER_FILE))?);
    }
    prov.config.insert("sample".into(), json!({ "expected_lambda": expected_lambda, "gibbs": config }));
    write_provenance(out, &prov)?;
    // Load once to check the finished bundle is consistent.
    ModelBundle::load(out)?;
    let lambda_mean = draws.lambda().iter().sum::<f64>() / draws.n_draws() as f64;
    Ok(SampleSummary {
        n_draws: draws.n_draws(),
        n_cols: draws.n_cols(),
        lambda_mean,
        omega_acceptance: draws.omega_acceptance(),
        draws_sha256: sha256_file(&out.join(DRAWS_BIN))?,
    })
}

pub fn pm(goals: &Path) -> Result<PlusMinus, AppError> {
    Ok(plus_minus(&read_goals(goals)?))
}
