#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}\n{}", self.stdout, self.stderr))
    }

    pub fn error(&self) -> serde_json::Value {
        serde_json::from_str(self.stderr.trim()).unwrap_or_else(|e| panic!("{e}: {}", self.stderr))
    }

    pub fn ok(self) -> Self {
        assert_eq!(self.code, 0, "stderr: {}", self.stderr);
        self
    }
}

pub fn icepm<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_icepm")).args(args).output().expect("spawn icepm");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// simulate, ingest, fit and sample into `root`; returns the model directory.
pub fn build_model(root: &Path, seed: u64) -> PathBuf {
    let s = |p: PathBuf| p.to_str().unwrap().to_string();
    let sim = root.join("sim");
    let design = root.join("design");
    let model = root.join("model");
    let seed = seed.to_string();
    icepm(&["simulate", "--synth", &s(fixture("league.toml")), "--out", &s(sim.clone()), "--seed", &seed]).ok();
    icepm(&["ingest", "--goals", &s(sim.join("goals.csv")), "--out", &s(design.clone())]).ok();
    icepm(&[
        "fit", "--design", &s(design.clone()), "--elambda", "15", "--roster", &s(sim.join("roster.csv")), "--out",
        &s(model.clone()),
    ])
    .ok();
    icepm(&[
        "sample", "--design", &s(design), "--out", &s(model.clone()), "--samples", "400", "--burnin", "100",
        "--seed", &seed,
    ])
    .ok();
    model
}

/// Output of the golden pipeline run: the step summary and the fit artifact.
pub struct Pipeline {
    pub summary: String,
    pub fit: String,
    pub steps: BTreeMap<&'static str, Value>,
}

/// simulate -> ingest -> fit -> sample -> optimize at seed 7 under `root`.
pub fn golden_pipeline(root: &Path) -> Pipeline {
    let p = |s: &str| root.join(s).to_str().unwrap().to_string();
    let league = fixture("league.toml");
    let mut steps = BTreeMap::new();

    let sim = icepm(&["simulate", "--synth", league.to_str().unwrap(), "--out", &p("sim"), "--seed", "7"]).ok();
    steps.insert("simulate", sim.json());
    let ingest = icepm(&["ingest", "--goals", &p("sim/goals.csv"), "--out", &p("design")]).ok();
    steps.insert("ingest", ingest.json());
    let fit = icepm(&[
        "fit", "--design", &p("design"), "--elambda", "15", "--roster", &p("sim/roster.csv"), "--out", &p("model"),
    ])
    .ok();
    steps.insert("fit", fit.json());
    let sample = icepm(&[
        "sample", "--design", &p("design"), "--out", &p("model"), "--samples", "400", "--burnin", "100", "--seed", "7",
    ])
    .ok();
    steps.insert("sample", sample.json());
    for mode in ["map", "draws"] {
        let opt = icepm(&["optimize", "--model", &p("model"), "--budget", "8000000", "--mode", mode, "--seed", "7"]).ok();
        let key = if mode == "map" { "optimize_map" } else { "optimize_draws" };
        steps.insert(key, opt.json());
    }

    let mut files = BTreeMap::new();
    for f in [
        "sim/goals.csv",
        "sim/roster.csv",
        "sim/truth.json",
        "design/triplets.csv",
        "design/meta.json",
        "model/fit.json",
        "model/draws.bin",
        "model/draws.json",
        "model/roster.csv",
        "model/provenance.json",
    ] {
        files.insert(f, sha(&root.join(f)));
    }
    let summary = json!({ "steps": steps, "sha256": files });
    Pipeline {
        summary: serde_json::to_string_pretty(&summary).unwrap() + "\n",
        fit: fs::read_to_string(root.join("model/fit.json")).unwrap(),
        steps,
    }
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

/// Compares against the golden copy, or rewrites it under `UPDATE_GOLDEN`.
pub fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(expected == actual, "{name} differs from golden copy");
}

