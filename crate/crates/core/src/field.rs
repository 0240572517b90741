//! Pointwise evaluation of part-scale thermal histories.
//!
//! A field is a list of points, each with its own `time_s,temp_K` history
//! file named `<point_id>.csv`. Points are integrated independently and in
//! parallel; the result keeps the order of the point list.

use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, MaterialPoint, StepConfig, Trajectory};
use crate::output::{fmt_f64, write_csv};
use crate::params::ModelParams;
use crate::phase_model::PhaseState;
use crate::table;
use crate::thermal::{load_path_csv, TemperaturePath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub id: String,
    /// Coordinates, mm.
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Terminal state of one point, with its trajectory when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub point: FieldPoint,
    pub terminal: PhaseState,
    pub trajectory: Option<Trajectory>,
}

/// Parses a `point_id,x_mm,y_mm,z_mm` table. Ids must be unique and usable
/// as file names.
pub fn read_points(reader: impl Read) -> Result<Vec<FieldPoint>> {
    let rows = table::read_columns(reader, &["point_id", "x_mm", "y_mm", "z_mm"])?;
    let mut points: Vec<FieldPoint> = Vec::with_capacity(rows.len());
    for row in &rows {
        let id = row.cells[0].clone();
        if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
            return Err(row.error(format!("invalid point id {id:?}")));
        }
        if points.iter().any(|p| p.id == id) {
            return Err(row.error(format!("point id {id} appears twice")));
        }
        points.push(FieldPoint {
            x: row.number(1, "x_mm")?,
            y: row.number(2, "y_mm")?,
            z: row.number(3, "z_mm")?,
            id,
        });
    }
    Ok(points)
}

pub fn load_points(file: impl AsRef<Path>) -> Result<Vec<FieldPoint>> {
    table::with_file(file.as_ref(), read_points)
}

/// History file of point `id` inside `dir`.
pub fn history_file(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.csv"))
}

/// Integrates one history from the equilibrium state at its first
/// temperature. The trajectory is kept only when `record` is set.
pub fn evaluate_history(
    path: &(impl TemperaturePath + ?Sized),
    t0: f64,
    step: &StepConfig,
    params: &ModelParams,
    record: bool,
) -> Result<(PhaseState, Option<Trajectory>)> {
    let temp0 = path.temperature(t0);
    let initial = PhaseState::equilibrium(temp0, &params.temps, &params.equilibrium)?;
    let end = path.end_time();
    if record {
        let traj = integrate(&initial, path, (t0, end), step, params)?;
        return Ok((traj.last().state, Some(traj)));
    }
    let mut point = MaterialPoint::new(initial, t0, temp0, params)?;
    let n = ((end - t0) / step.dt - 1e-9).ceil().max(0.0) as usize;
    for i in 1..=n {
        let t = if i == n { end } else { t0 + i as f64 * step.dt };
        point.advance(t, path.temperature(t), step, params)?;
    }
    Ok((point.state, None))
}

/// Evaluates every point. All history files are checked for existence
/// before any integration starts.
pub fn evaluate_field(
    points: &[FieldPoint],
    histories: &Path,
    step: &StepConfig,
    params: &ModelParams,
    record: bool,
) -> Result<Vec<FieldRecord>> {
    params.validate()?;
    step.validate()?;
    for p in points {
        if !history_file(histories, &p.id).is_file() {
            return Err(Error::Missing(format!(
                "no temperature history for point {} (expected {})",
                p.id,
                history_file(histories, &p.id).display()
            )));
        }
    }
    points
        .par_iter()
        .map(|p| {
            let path = load_path_csv(history_file(histories, &p.id))?;
            let t0 = path.times()[0];
            let (terminal, trajectory) = evaluate_history(&path, t0, step, params, record)
                .map_err(|e| e.context(format_args!("point {}", p.id)))?;
            Ok(FieldRecord {
                point: p.clone(),
                terminal,
                trajectory,
            })
        })
        .collect()
}

/// Writes `point_id,x_mm,y_mm,z_mm,x_beta,x_alpha_s,x_alpha_m`.
pub fn write_field_csv(path: &Path, records: &[FieldRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.point.id.clone(),
            fmt_f64(r.point.x),
            fmt_f64(r.point.y),
            fmt_f64(r.point.z),
            fmt_f64(r.terminal.x_beta),
            fmt_f64(r.terminal.x_alpha_s),
            fmt_f64(r.terminal.x_alpha_m),
        ]
    });
    write_csv(path, "point_id,x_mm,y_mm,z_mm,x_beta,x_alpha_s,x_alpha_m", rows)
}

/// Header of trajectory files.
pub const TRAJECTORY_HEADER: &str = "time_s,temp_K,x_beta,x_alpha_s,x_alpha_m,x_liq";

/// Writes a trajectory as `time_s,temp_K,x_beta,x_alpha_s,x_alpha_m,x_liq`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let rows = traj.samples().iter().map(|s| {
        vec![
            fmt_f64(s.t),
            fmt_f64(s.temp),
            fmt_f64(s.state.x_beta),
            fmt_f64(s.state.x_alpha_s),
            fmt_f64(s.state.x_alpha_m),
            fmt_f64(s.state.x_liq),
        ]
    });
    write_csv(path, TRAJECTORY_HEADER, rows)
}
