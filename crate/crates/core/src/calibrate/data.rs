//! Observation records and their CSV readers.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::table::{self, Row};

/// One point of an isothermal transformation measurement: the normalized
/// alpha_s fraction observed at `10^log10_time` seconds after the start of
/// the quench to `temp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TttObservation {
    pub temp: f64,
    pub log10_time: f64,
    pub frac: f64,
}

/// A measured temperature history with the beta fraction observed along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub temps: Vec<f64>,
    pub x_beta: Vec<f64>,
}

/// A measured cooling curve at a fixed depth below the quenched surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingSeries {
    pub label: String,
    /// Depth below the surface, mm.
    pub depth: f64,
    pub times: Vec<f64>,
    pub temps: Vec<f64>,
}

/// Thermocouple depths of the quench experiment, mm, by series letter.
pub const THERMOCOUPLE_DEPTHS: [(&str, f64); 4] = [("a", 3.2), ("b", 9.5), ("c", 12.0), ("d", 15.2)];

/// Depth of a cooling series: a letter from [`THERMOCOUPLE_DEPTHS`] or a
/// number in millimetres.
pub fn series_depth(label: &str) -> Option<f64> {
    THERMOCOUPLE_DEPTHS
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, d)| *d)
        .or_else(|| label.parse::<f64>().ok().filter(|d| d.is_finite() && *d >= 0.0))
}

pub fn read_ttt_observations(reader: impl Read) -> Result<Vec<TttObservation>> {
    let rows = table::read_columns(reader, &["temp_K", "log10_time_s", "frac_norm"])?;
    let obs = rows
        .iter()
        .map(|row| {
            Ok(TttObservation {
                temp: row.number(0, "temp_K")?,
                log10_time: row.number(1, "log10_time_s")?,
                frac: row.number(2, "frac_norm")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(obs)
}

pub fn load_ttt_observations(file: impl AsRef<Path>) -> Result<Vec<TttObservation>> {
    table::with_file(file.as_ref(), read_ttt_observations)
}

/// Groups rows by their first cell, keeping the order of first appearance,
/// and checks that times increase within each group.
fn group_series(rows: &[Row], time_col: usize) -> Result<Vec<(String, Vec<&Row>)>> {
    let mut groups: Vec<(String, Vec<&Row>)> = Vec::new();
    for row in rows {
        let label = row.cells[0].clone();
        if label.is_empty() {
            return Err(row.error("empty series label".into()));
        }
        let t = row.number(time_col, "time_s")?;
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, members)) => {
                let prev = members.last().expect("group is nonempty").number(time_col, "time_s")?;
                if t <= prev {
                    return Err(row.error(format!("time {t} does not increase within series {label}")));
                }
                members.push(row);
            }
            None => groups.push((label, vec![row])),
        }
    }
    Ok(groups)
}

pub fn read_heating_series(reader: impl Read) -> Result<Vec<HeatingSeries>> {
    let rows = table::read_columns(reader, &["series", "time_s", "temp_K", "x_beta"])?;
    group_series(&rows, 1)?
        .into_iter()
        .map(|(label, members)| {
            let mut s = HeatingSeries {
                label,
                times: Vec::new(),
                temps: Vec::new(),
                x_beta: Vec::new(),
            };
            for row in members {
                let temp = row.number(2, "temp_K")?;
                if temp <= 0.0 {
                    return Err(row.error(format!("temperature must be positive, got {temp}")));
                }
                s.times.push(row.number(1, "time_s")?);
                s.temps.push(temp);
                s.x_beta.push(row.number(3, "x_beta")?);
            }
            Ok(s)
        })
        .collect()
}

pub fn load_heating_series(file: impl AsRef<Path>) -> Result<Vec<HeatingSeries>> {
    table::with_file(file.as_ref(), read_heating_series)
}

pub fn read_cooling_series(reader: impl Read) -> Result<Vec<CoolingSeries>> {
    let rows = table::read_columns(reader, &["series", "time_s", "temp_K"])?;
    group_series(&rows, 1)?
        .into_iter()
        .map(|(label, members)| {
            let depth = series_depth(&label).ok_or_else(|| {
                members[0].error(format!("series `{label}` is neither a-d nor a depth in mm"))
            })?;
            let mut s = CoolingSeries {
                label,
                depth,
                times: Vec::new(),
                temps: Vec::new(),
            };
            for row in members {
                let t = row.number(1, "time_s")?;
                if t < 0.0 {
                    return Err(row.error(format!("time must be >= 0, got {t}")));
                }
                s.times.push(t);
                s.temps.push(row.number(2, "temp_K")?);
            }
            Ok(s)
        })
        .collect()
}

pub fn load_cooling_series(file: impl AsRef<Path>) -> Result<Vec<CoolingSeries>> {
    table::with_file(file.as_ref(), read_cooling_series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn ttt_rows() {
        let obs = read_ttt_observations("temp_K,log10_time_s,frac_norm\n800,1.5,0.25\n".as_bytes()).unwrap();
        assert_eq!(
            obs,
            vec![TttObservation {
                temp: 800.0,
                log10_time: 1.5,
                frac: 0.25
            }]
        );
    }

    #[test]
    fn heating_groups_by_series() {
        let text = "series,time_s,temp_K,x_beta\n4.5,0,300,0.1\n5.0,0,300,0.1\n4.5,1,500,0.1\n";
        let s = read_heating_series(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].label, "4.5");
        assert_eq!(s[0].times, vec![0.0, 1.0]);
        assert_eq!(s[1].temps, vec![300.0]);
    }

    #[test]
    fn heating_times_must_increase() {
        let text = "series,time_s,temp_K,x_beta\nx,1,300,0.1\nx,1,310,0.1\n";
        assert!(matches!(
            read_heating_series(text.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn cooling_depths() {
        let text = "series,time_s,temp_K\nb,0,1323\nB,1,1300\n7.5,0,1323\n";
        let s = read_cooling_series(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].depth, 9.5);
        assert_eq!(s[1].depth, 9.5);
        assert_eq!(s[2].depth, 7.5);
        let bad = "series,time_s,temp_K\nq,0,1323\n";
        assert!(matches!(read_cooling_series(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
