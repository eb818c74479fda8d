//! `icepm` command line. Every command prints one JSON document on stdout;
//! failures print `{error, code, detail}` on stderr and exit nonzero.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use icepm::design::BuildOptions;
use icepm::gammalasso::FitConfig;
use icepm::gibbs::GibbsConfig;
use icepm::lineup::{write_sweep_csv, Line};
use icepm::simgen::SynthConfig;
use serde::Serialize;

use crate::bundle::ModelBundle;
use crate::config::{Config, PORT_ENV};
use crate::error::{AppError, ErrorKind};
use crate::ops::{self, Budget, MatchupRequest, Mode, OptimizeRequest, SweepRequest};
use crate::pipeline;
use crate::server::{self, AppState};

#[derive(Debug, Parser)]
#[command(name = "icepm", version, about = "Partial player effects, posterior draws and line decisions")]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// TOML settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = FitConfig::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = FitConfig::default().kkt_tol)]
    pub kkt_tol: f64,
    #[arg(long, default_value_t = FitConfig::default().max_sweeps)]
    pub max_sweeps: usize,
}

impl SolverArgs {
    fn config(&self) -> FitConfig {
        FitConfig { tol: self.tol, kkt_tol: self.kkt_tol, max_sweeps: self.max_sweeps }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic league: goals.csv, roster.csv and truth.json.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// TOML file with generator settings; flags below override it.
        #[arg(long)]
        synth: Option<PathBuf>,
        #[arg(long)]
        goals: Option<usize>,
        #[arg(long)]
        teams: Option<usize>,
        #[arg(long)]
        seasons: Option<usize>,
        #[arg(long)]
        trade_rate: Option<f64>,
    },
    /// Build the signed design from a goal CSV.
    Ingest {
        #[arg(long)]
        goals: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Switch::On)]
        teams: Switch,
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        interactions: Switch,
        #[arg(long)]
        intercept: bool,
    },
    /// MAP fit into a model directory.
    Fit {
        /// Design directory from `ingest`.
        #[arg(long, conflicts_with = "goals", required_unless_present = "goals")]
        design: Option<PathBuf>,
        /// Goal CSV to ingest on the fly; the design lands in `<out>/design`.
        #[arg(long)]
        goals: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "design")]
        teams: Option<Switch>,
        #[arg(long, value_enum, conflicts_with = "design")]
        interactions: Option<Switch>,
        #[arg(long)]
        elambda: Option<f64>,
        #[arg(long)]
        roster: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fits along an ascending grid of expected penalties.
    Path {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Posterior draws into a model directory.
    Sample {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        elambda: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        /// Terms in the omega proposal series.
        #[arg(long, default_value_t = GibbsConfig::default().k)]
        terms: usize,
        #[arg(long)]
        roster: Option<PathBuf>,
    },
    /// Plus-minus per player and team.
    Pm {
        #[arg(long)]
        goals: PathBuf,
    },
    /// Posterior better-than matrix for a set of ids.
    Compare {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<String>,
    },
    /// Scoring probability of one line against another.
    Matchup {
        #[arg(long)]
        model: PathBuf,
        /// `G,C,L,R,D,D` player ids.
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        home: Vec<String>,
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        away: Vec<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Best line under a salary cap.
    Optimize {
        #[arg(long)]
        model: PathBuf,
        /// Dollars, or `inf`.
        #[arg(long)]
        budget: Option<String>,
        #[arg(long = "pin")]
        pinned: Vec<String>,
        #[arg(long = "exclude")]
        excluded: Vec<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Per-draw optimization across budgets.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<String>,
        #[arg(long = "pin")]
        pinned: Vec<String>,
        #[arg(long = "exclude")]
        excluded: Vec<String>,
        /// Also write `budget,mean,q05,q95,feasible` here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// HTTP service over one or more model directories.
    Serve {
        /// `name=DIR`; adds to the models in the config file.
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn line_from(ids: &[String]) -> Result<Line, AppError> {
    match ids {
        [g, c, l, r, d1, d2] => Ok(Line::new(g, c, l, r, d1, d2)),
        _ => Err(AppError::query(format!("a line needs 6 ids (G,C,L,R,D,D), got {}", ids.len()))),
    }
}

fn to_value<T: Serialize>(v: T) -> Result<serde_json::Value, AppError> {
    Ok(serde_json::to_value(v)?)
}

fn load_config(cli: &Cli) -> Result<Config, AppError> {
    match &cli.config {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

/// Runs a parsed command and returns its JSON output. `serve` blocks until
/// shutdown.
pub fn execute(cli: Cli) -> Result<serde_json::Value, AppError> {
    let cfg = load_config(&cli)?;
    let d = &cfg.defaults;
    let seed = cli.seed;
    match cli.command {
        Command::Simulate { out, synth, goals, teams, seasons, trade_rate } => {
            let mut sc = match synth {
                Some(p) => toml::from_str::<SynthConfig>(&std::fs::read_to_string(p)?)
                    .map_err(|e| AppError::input(format!("synth config: {e}")))?,
                None => SynthConfig::default(),
            };
            if let Some(n) = goals {
                sc.n_goals = n;
            }
            if let Some(t) = teams {
                sc.n_teams = t;
            }
            if let Some(s) = seasons {
                sc.seasons = s;
            }
            if let Some(r) = trade_rate {
                sc.trade_rate = r;
            }
            to_value(pipeline::simulate(&sc, seed, &out)?)
        }
        Command::Ingest { goals, out, teams, interactions, intercept } => {
            let opts = BuildOptions { include_teams: teams.on(), interactions: interactions.on(), intercept };
            to_value(pipeline::ingest(&goals, opts, &out)?)
        }
        Command::Fit { design, goals, teams, interactions, elambda, roster, out, solver } => {
            let design_dir = match (design, goals) {
                (Some(dir), _) => dir,
                (None, Some(g)) => {
                    let opts = BuildOptions {
                        include_teams: teams.unwrap_or(Switch::On).on(),
                        interactions: interactions.unwrap_or(Switch::Off).on(),
                        intercept: false,
                    };
                    let dir = out.join("design");
                    pipeline::ingest(&g, opts, &dir)?;
                    dir
                }
                (None, None) => return Err(AppError::query("one of --design or --goals is required")),
            };
            let lam = elambda.unwrap_or(d.elambda);
            to_value(pipeline::fit(&design_dir, lam, &solver.config(), roster.as_deref(), &out)?)
        }
        Command::Path { design, grid, solver } => to_value(pipeline::path(&design, &grid, &solver.config())?),
        Command::Sample { design, out, elambda, samples, burnin, thin, terms, roster } => {
            let gc = GibbsConfig {
                n_samples: samples.unwrap_or(d.samples),
                burnin: burnin.unwrap_or(d.burnin),
                thin,
                k: terms,
                seed,
                ..GibbsConfig::default()
            };
            let lam = elambda.unwrap_or(d.elambda);
            to_value(pipeline::sample(&design, lam, &gc, roster.as_deref(), &out)?)
        }
        Command::Pm { goals } => to_value(pipeline::pm(&goals)?),
        Command::Compare { model, ids } => to_value(ops::compare(&ModelBundle::load(&model)?, &ids)?),
        Command::Matchup { model, home, away, mode, bins } => {
            let req = MatchupRequest { home: line_from(&home)?, away: line_from(&away)?, mode, bins: bins.or(Some(d.bins)) };
            to_value(ops::matchup(&ModelBundle::load(&model)?, &req)?)
        }
        Command::Optimize { model, budget, pinned, excluded, mode } => {
            let req = OptimizeRequest {
                budget: budget.map(Budget::Text),
                pinned: pinned.into_iter().collect(),
                excluded: excluded.into_iter().collect(),
                mode,
                seed: Some(seed),
            };
            to_value(ops::optimize(&ModelBundle::load(&model)?, &req)?)
        }
        Command::Sweep { model, budgets, pinned, excluded, csv } => {
            let req = SweepRequest {
                budgets: budgets.into_iter().map(Budget::Text).collect(),
                pinned: pinned.into_iter().collect(),
                excluded: excluded.into_iter().collect(),
                seed: Some(seed),
            };
            let res = ops::sweep(&ModelBundle::load(&model)?, &req)?;
            if let Some(path) = csv {
                let f = std::fs::File::create(path)?;
                write_sweep_csv(f, &res.core_rows())?;
            }
            to_value(res)
        }
        Command::Serve { models, host, port } => {
            let mut cfg = cfg;
            cfg.apply_env(std::env::var(PORT_ENV).ok().as_deref())?;
            for m in models {
                let (name, dir) =
                    m.split_once('=').ok_or_else(|| AppError::query(format!("--model expects NAME=DIR, got {m:?}")))?;
                cfg.models.insert(name.to_string(), PathBuf::from(dir));
            }
            if cfg.models.is_empty() {
                return Err(AppError::query("no models to serve"));
            }
            let bundles = cfg
                .models
                .iter()
                .map(|(k, dir)| Ok((k.clone(), ModelBundle::load(dir)?)))
                .collect::<Result<BTreeMap<_, _>, AppError>>()?;
            let host = host.unwrap_or(cfg.host.clone());
            let port = port.unwrap_or(cfg.port);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(Arc::new(AppState::new(bundles)), &host, port))?;
            Ok(serde_json::json!({ "status": "stopped" }))
        }
    }
}

/// Parses `args`, runs the command and prints its output; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = AppError::new(ErrorKind::Usage, "usage error", e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.kind.exit_code();
        }
    };
    match execute(cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("values serialize");
            // A closed pipe downstream is not a failure of the command.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(std::io::stderr().lock(), "{}", e.to_json());
            e.kind.exit_code()
        }
    }
}

