//! The `tiphase` command line: argument definitions, dispatch and exit
//! codes.
//!
//! Exit codes: 0 success, 2 bad input (parse errors, missing files, invalid
//! configuration), 3 integration failure, 4 calibration failure or a fit
//! that did not converge.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calibrate::{
    calibrate_cooling, calibrate_heating, calibrate_ttt, load_cooling_series, load_heating_series,
    load_ttt_observations, LmReport,
};
use crate::config::RunConfig;
use crate::diagrams::{critical_rates, generate_cct, generate_ttt, write_isolines_csv, write_terminal_csv, write_ttt_terminal_csv};
use crate::error::{Error, Result};
use crate::field::{evaluate_field, evaluate_history, history_file, load_points, write_field_csv, write_trajectory_csv};
use crate::integrator::Scheme;
use crate::output::write_json;
use crate::thermal::load_path_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tiphase", version, about = "Ti-6Al-4V phase-fraction simulation, diagrams and calibration")]
pub struct Cli {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Integrator step, s; overrides `step.dt`.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Time integration scheme; overrides `step.scheme`.
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Euler,
    Cn,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Euler => Scheme::ForwardEuler,
            SchemeArg::Cn => Scheme::CrankNicolson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationKind {
    Ttt,
    Heating,
    Cooling,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one point along a `time_s,temp_K` history; writes trajectory.csv.
    Simulate {
        /// Temperature history CSV.
        history: PathBuf,
    },
    /// TTT sweep; writes ttt_isolines.csv and ttt_terminal.csv.
    Ttt,
    /// CCT sweep; writes cct_isolines.csv, cct_terminal.csv and critical_rates.json.
    Cct,
    /// Fit parameters to observations; writes calibration_<kind>.json.
    Calibrate {
        #[arg(value_enum)]
        kind: CalibrationKind,
        /// Observation CSV.
        data: PathBuf,
    },
    /// Evaluate terminal phase fractions of many points; writes field.csv.
    Field {
        /// `point_id,x_mm,y_mm,z_mm` table.
        points: PathBuf,
        /// Directory holding one `<point_id>.csv` history per point.
        histories: PathBuf,
    },
}

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Integration { .. } | Error::Descriptor(_) => EXIT_INTEGRATION,
        Error::Calibration(_) => EXIT_CALIBRATION,
        Error::Parse { .. } | Error::Config(_) | Error::Missing(_) | Error::Io { .. } | Error::Domain(_) => EXIT_INPUT,
    }
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dt) = cli.dt {
        cfg.step.dt = dt;
    }
    if let Some(s) = cli.scheme {
        cfg.step.scheme = s.into();
    }
    if cli.threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    cfg.sync();
    cfg.validate()?;
    Ok(cfg)
}

/// Report written by `calibrate`.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationOutput<'a> {
    pub kind: &'a str,
    pub observations: String,
    #[serde(flatten)]
    pub report: &'a LmReport,
}

/// Runs a parsed command line and returns the process exit code. Errors are
/// reported on stderr.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tiphase: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve_config(cli)?;
    check_inputs(&cli.command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cfg, &cli.out))
}

/// Fails fast on input files that do not exist.
fn check_inputs(cmd: &Command) -> Result<()> {
    let files: Vec<&Path> = match cmd {
        Command::Simulate { history } => vec![history],
        Command::Calibrate { data, .. } => vec![data],
        Command::Field { points, histories } => {
            if !histories.is_dir() {
                return Err(Error::Missing(format!("{} is not a directory", histories.display())));
            }
            vec![points]
        }
        Command::Ttt | Command::Cct => vec![],
    };
    match files.iter().find(|f| !f.is_file()) {
        Some(f) => Err(Error::Missing(format!("{} does not exist", f.display()))),
        None => Ok(()),
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, out: &Path) -> Result<i32> {
    match cmd {
        Command::Simulate { history } => {
            let path = load_path_csv(history)?;
            let t0 = path.times()[0];
            let (_, traj) = evaluate_history(&path, t0, &cfg.step, &cfg.model, true)?;
            let traj = traj.expect("trajectory is recorded");
            write_trajectory_csv(&out.join("trajectory.csv"), &traj)?;
            Ok(EXIT_OK)
        }
        Command::Ttt => {
            let ttt = generate_ttt(&cfg.model, &cfg.ttt)?;
            write_isolines_csv(&out.join("ttt_isolines.csv"), &ttt.isolines)?;
            write_ttt_terminal_csv(&out.join("ttt_terminal.csv"), &ttt)?;
            Ok(EXIT_OK)
        }
        Command::Cct => {
            let cct = generate_cct(&cfg.model, &cfg.cct)?;
            let rates = critical_rates(&cct, &cfg.model, &cfg.cct)?;
            write_isolines_csv(&out.join("cct_isolines.csv"), &cct.isolines)?;
            write_terminal_csv(&out.join("cct_terminal.csv"), &cct)?;
            write_json(&out.join("critical_rates.json"), &rates)?;
            Ok(EXIT_OK)
        }
        Command::Calibrate { kind, data } => {
            let (name, report) = calibrate(*kind, data, cfg)?;
            let output = CalibrationOutput {
                kind: name,
                observations: data.display().to_string(),
                report: &report,
            };
            write_json(&out.join(format!("calibration_{name}.json")), &output)?;
            if report.converged {
                Ok(EXIT_OK)
            } else {
                eprintln!("tiphase: calibration did not converge in {} iterations", report.iterations);
                Ok(EXIT_CALIBRATION)
            }
        }
        Command::Field { points, histories } => {
            let pts = load_points(points)?;
            let records = evaluate_field(&pts, histories, &cfg.step, &cfg.model, cfg.field_trajectories)?;
            write_field_csv(&out.join("field.csv"), &records)?;
            for r in &records {
                if let Some(traj) = &r.trajectory {
                    write_trajectory_csv(&history_file(&out.join("trajectories"), &r.point.id), traj)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn start_vector(cfg: &RunConfig, default: Vec<f64>) -> Result<Vec<f64>> {
    match &cfg.calibration_start {
        None => Ok(default),
        Some(v) if v.len() == default.len() => Ok(v.clone()),
        Some(v) => Err(Error::Config(format!(
            "calibration.start has {} values, this fit needs {}",
            v.len(),
            default.len()
        ))),
    }
}

fn calibrate(kind: CalibrationKind, data: &Path, cfg: &RunConfig) -> Result<(&'static str, LmReport)> {
    let d = &cfg.model.diffusion;
    match kind {
        CalibrationKind::Ttt => {
            let obs = load_ttt_observations(data)?;
            let theta0 = start_vector(cfg, vec![d.c_alpha_s, d.k1, d.k2, d.k3])?;
            Ok(("ttt", calibrate_ttt(&obs, &cfg.model, &theta0, &cfg.ttt, &cfg.lm)?))
        }
        CalibrationKind::Heating => {
            let series = load_heating_series(data)?;
            let theta0 = start_vector(cfg, vec![d.c_beta, d.f])?;
            Ok(("heating", calibrate_heating(&series, &cfg.model, &theta0, &cfg.step, &cfg.lm)?))
        }
        CalibrationKind::Cooling => {
            let series = load_cooling_series(data)?;
            let s = &cfg.cct.sib;
            let theta0 = start_vector(cfg, vec![s.a_g, s.b_g, s.c_g])?;
            Ok(("cooling", calibrate_cooling(&series, s, &theta0, &cfg.lm)?))
        }
    }
}
