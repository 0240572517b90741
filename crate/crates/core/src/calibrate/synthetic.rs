//! Noiseless observation sets generated by the forward models, for
//! self-consistency checks of the fits and for demonstrations.

use super::data::{CoolingSeries, HeatingSeries, TttObservation, THERMOCOUPLE_DEPTHS};
use super::objectives::{cooling_prediction, heating_prediction, ttt_predictions};
use crate::diagrams::TttConfig;
use crate::error::Result;
use crate::integrator::StepConfig;
use crate::params::ModelParams;
use crate::thermal::{PiecewiseLinearPath, SibParams, TemperaturePath};

/// Hold temperatures of the synthetic TTT set, K.
pub const TTT_TEMPERATURES: [f64; 5] = [700.0, 800.0, 900.0, 1000.0, 1100.0];

/// Start vector 20% away from `theta`, alternating up and down.
pub fn perturbed(theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { v * 1.2 } else { v * 0.8 })
        .collect()
}

/// Normalized alpha_s at `log10(t) = -1, -0.75, ..., 4` for each of
/// [`TTT_TEMPERATURES`].
pub fn ttt_observations(params: &ModelParams, cfg: &TttConfig) -> Result<Vec<TttObservation>> {
    let mut obs: Vec<TttObservation> = TTT_TEMPERATURES
        .iter()
        .flat_map(|&temp| {
            (0..=20).map(move |k| TttObservation {
                temp,
                log10_time: -1.0 + 0.25 * k as f64,
                frac: 0.0,
            })
        })
        .collect();
    let sim = ttt_predictions(params, &obs, cfg)?;
    for (o, v) in obs.iter_mut().zip(sim) {
        o.frac = v;
    }
    Ok(obs)
}

/// Heating cycle: from room temperature at 50 K/s to `peak`, held for 15 s,
/// then cooled at 25 K/s to 700 K. Sampled every 0.1 s.
pub fn heating_history(peak: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let room = 293.15;
    let t_up = (peak - room) / 50.0;
    let t_hold = t_up + 15.0;
    let t_end = t_hold + (peak - 700.0) / 25.0;
    let path = PiecewiseLinearPath::new(vec![0.0, t_up, t_hold, t_end], vec![room, peak, peak, 700.0])?;
    let mut times: Vec<f64> = (0..).map(|i| i as f64 * 0.1).take_while(|t| *t < t_end - 1e-9).collect();
    times.push(t_end);
    let temps = times.iter().map(|&t| path.temperature(t)).collect();
    Ok((times, temps))
}

/// Three heating series with peaks of 1350, 1250 and 1150 K, labelled by
/// their distance from the heat source in mm.
pub fn heating_series(params: &ModelParams, step: &StepConfig) -> Result<Vec<HeatingSeries>> {
    [("4.5", 1350.0), ("5.0", 1250.0), ("5.5", 1150.0)]
        .iter()
        .map(|&(label, peak)| {
            let (times, temps) = heating_history(peak)?;
            let mut s = HeatingSeries {
                label: label.to_string(),
                x_beta: vec![0.0; times.len()],
                times,
                temps,
            };
            s.x_beta = heating_prediction(params, &s, step)?;
            Ok(s)
        })
        .collect()
}

/// Cooling curves at the four thermocouple depths, sampled each second up
/// to 60 s.
pub fn cooling_series(params: &SibParams) -> Result<Vec<CoolingSeries>> {
    let p = SibParams { s_g: 1.0, ..*params };
    THERMOCOUPLE_DEPTHS
        .iter()
        .map(|&(label, depth)| {
            let mut s = CoolingSeries {
                label: label.to_string(),
                depth,
                times: (0..=60).map(f64::from).collect(),
                temps: Vec::new(),
            };
            s.temps = cooling_prediction(&p, &s)?;
            Ok(s)
        })
        .collect()
}
