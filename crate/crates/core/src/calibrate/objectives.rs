//! Residual functions of the three identification problems and the fits
//! built on them.

use rayon::prelude::*;

use super::data::{CoolingSeries, HeatingSeries, TttObservation};
use super::lm::{levenberg_marquardt, LmConfig, LmReport, Parameter};
use crate::diagrams::{ttt_time_grid, TttConfig};
use crate::error::{Error, Result};
use crate::integrator::{MaterialPoint, StepConfig};
use crate::params::ModelParams;
use crate::phase_model::{alpha_equilibrium, PhaseState};
use crate::thermal::{sib_temperature, ttt_path, PiecewiseLinearPath, SibParams, TemperaturePath};

/// Hold temperatures accepted by the TTT objective, K.
pub const TTT_OBSERVATION_RANGE: (f64, f64) = (350.0, 1300.0);

/// Free parameters of the TTT fit: `[c_alpha_s, k1, k2, k3]`.
pub fn ttt_parameters() -> Vec<Parameter> {
    vec![
        Parameter::open_below("c_alpha_s", 1.0, 50.0),
        Parameter::open_below("k1", 0.0, 10.0),
        Parameter::closed("k2", 300.0, 2000.0),
        Parameter::open_below("k3", 0.0, 1.0),
    ]
}

/// Free parameters of the heating fit: `[c_beta, f]`.
pub fn heating_parameters() -> Vec<Parameter> {
    vec![
        Parameter::open_below("c_beta", 1.0, 50.0),
        Parameter::open_below("f", 0.0, 100.0),
    ]
}

/// Free parameters of the cooling fit: `[a_g, b_g, c_g]`.
pub fn cooling_parameters() -> Vec<Parameter> {
    vec![Parameter::free("a_g"), Parameter::free("b_g"), Parameter::free("c_g")]
}

fn expect_len(theta: &[f64], n: usize, what: &str) -> Result<()> {
    if theta.len() == n {
        Ok(())
    } else {
        Err(Error::Calibration(format!("{what} takes {n} parameters, got {}", theta.len())))
    }
}

/// Model parameters with `[c_alpha_s, k1, k2, k3]` replaced.
pub fn with_ttt_theta(base: &ModelParams, theta: &[f64]) -> Result<ModelParams> {
    expect_len(theta, 4, "the TTT objective")?;
    let mut p = *base;
    p.diffusion.c_alpha_s = theta[0];
    p.diffusion.k1 = theta[1];
    p.diffusion.k2 = theta[2];
    p.diffusion.k3 = theta[3];
    Ok(p)
}

/// Model parameters with `[c_beta, f]` replaced.
pub fn with_heating_theta(base: &ModelParams, theta: &[f64]) -> Result<ModelParams> {
    expect_len(theta, 2, "the heating objective")?;
    let mut p = *base;
    p.diffusion.c_beta = theta[0];
    p.diffusion.f = theta[1];
    Ok(p)
}

/// Cooling parameters with `[a_g, b_g, c_g]` replaced and `s_g = 1`.
pub fn with_cooling_theta(base: &SibParams, theta: &[f64]) -> Result<SibParams> {
    expect_len(theta, 3, "the cooling objective")?;
    Ok(SibParams {
        a_g: theta[0],
        b_g: theta[1],
        c_g: theta[2],
        s_g: 1.0,
        ..*base
    })
}

/// Linear interpolation of `values` over `x` at `xq`; `x` increases.
fn interpolate(x: &[f64], values: &[f64], xq: f64) -> f64 {
    if xq <= x[0] {
        return values[0];
    }
    let last = x.len() - 1;
    if xq >= x[last] {
        return values[last];
    }
    let i = x.partition_point(|&v| v <= xq) - 1;
    let w = (xq - x[i]) / (x[i + 1] - x[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// Normalized alpha_s fraction along a TTT row at `target`, on the row's
/// time grid up to `end`.
fn ttt_trace(target: f64, end: f64, params: &ModelParams, cfg: &TttConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let times = ttt_time_grid(target, end, cfg);
    let path = ttt_path(target, end)?;
    let alpha_eq = alpha_equilibrium(target, &params.equilibrium, &params.temps);
    let norm = |x: f64| if alpha_eq > 0.0 { x / alpha_eq } else { 0.0 };
    let mut point = MaterialPoint::new(PhaseState::pure_beta(), 0.0, path.temperature(0.0), params)?;
    let mut fracs = Vec::with_capacity(times.len());
    fracs.push(norm(point.state.x_alpha_s));
    for &t in &times[1..] {
        point
            .advance(t, path.temperature(t), &cfg.step, params)
            .map_err(|e| e.context(format_args!("TTT row at {target} K")))?;
        fracs.push(norm(point.state.x_alpha_s));
    }
    Ok((times, fracs))
}

/// Checks the observations and groups their indices by hold temperature.
fn group_ttt(obs: &[TttObservation]) -> Result<Vec<(f64, Vec<usize>)>> {
    if obs.is_empty() {
        return Err(Error::Calibration("no TTT observations".into()));
    }
    let (lo, hi) = TTT_OBSERVATION_RANGE;
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, o) in obs.iter().enumerate() {
        if !(lo..=hi).contains(&o.temp) {
            return Err(Error::Calibration(format!(
                "observation {i} at {} K lies outside the {lo}-{hi} K range",
                o.temp
            )));
        }
        if !o.log10_time.is_finite() || !o.frac.is_finite() {
            return Err(Error::Calibration(format!("observation {i} is not finite")));
        }
        match groups.iter_mut().find(|(t, _)| *t == o.temp) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((o.temp, vec![i])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(groups)
}

/// Model-predicted normalized alpha_s fractions at the observation
/// coordinates. One row is integrated per distinct temperature, and the
/// fraction is interpolated linearly in `log10(t)` between grid points.
pub fn ttt_predictions(params: &ModelParams, obs: &[TttObservation], cfg: &TttConfig) -> Result<Vec<f64>> {
    let groups = group_ttt(obs)?;
    let per_group = groups
        .par_iter()
        .map(|(temp, idx)| {
            let end = idx
                .iter()
                .map(|&i| 10f64.powf(obs[i].log10_time))
                .fold(0.0, f64::max);
            let (times, fracs) = ttt_trace(*temp, end, params, cfg)?;
            let log_times: Vec<f64> = times[1..].iter().map(|t| t.log10()).collect();
            Ok(idx
                .iter()
                .map(|&i| {
                    let lt = obs[i].log10_time;
                    if lt < log_times[0] {
                        // Before the first grid point: linear in t from t = 0.
                        let w = 10f64.powf(lt) / times[1];
                        (i, fracs[0] + w * (fracs[1] - fracs[0]))
                    } else {
                        (i, interpolate(&log_times, &fracs[1..], lt))
                    }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; obs.len()];
    for (i, v) in per_group.into_iter().flatten() {
        out[i] = v;
    }
    Ok(out)
}

/// Residuals `X_sim - X_obs` of the TTT fit at `theta = [c_alpha_s, k1, k2, k3]`.
pub fn ttt_objective(theta: &[f64], obs: &[TttObservation], base: &ModelParams, cfg: &TttConfig) -> Result<Vec<f64>> {
    let params = with_ttt_theta(base, theta)?;
    let sim = ttt_predictions(&params, obs, cfg)?;
    Ok(sim.iter().zip(obs).map(|(s, o)| s - o.frac).collect())
}

/// Fits `[c_alpha_s, k1, k2, k3]` to isothermal observations.
pub fn calibrate_ttt(
    obs: &[TttObservation],
    base: &ModelParams,
    theta0: &[f64],
    cfg: &TttConfig,
    lm: &LmConfig,
) -> Result<LmReport> {
    group_ttt(obs)?;
    levenberg_marquardt(|t| ttt_objective(t, obs, base, cfg), theta0, &ttt_parameters(), lm)
}

fn check_heating(series: &[HeatingSeries]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Calibration("no heating series".into()));
    }
    for s in series {
        let n = s.times.len();
        if n == 0 || s.temps.len() != n || s.x_beta.len() != n {
            return Err(Error::Calibration(format!("series {} has mismatched columns", s.label)));
        }
    }
    Ok(())
}

/// Beta fraction simulated along one measured history, at its sample times.
/// The point starts in equilibrium at the first temperature; steps between
/// samples are at most `step.dt`.
pub fn heating_prediction(params: &ModelParams, series: &HeatingSeries, step: &StepConfig) -> Result<Vec<f64>> {
    let path = PiecewiseLinearPath::new(series.times.clone(), series.temps.clone())
        .map_err(|e| e.context(format_args!("series {}", series.label)))?;
    let (t0, temp0) = (series.times[0], series.temps[0]);
    let start = PhaseState::equilibrium(temp0, &params.temps, &params.equilibrium)?;
    let mut point = MaterialPoint::new(start, t0, temp0, params)?;
    let mut out = Vec::with_capacity(series.times.len());
    out.push(point.state.x_beta);
    for w in series.times.windows(2) {
        let n = ((w[1] - w[0]) / step.dt).ceil().max(1.0) as usize;
        for k in 1..=n {
            let t = if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 };
            point
                .advance(t, path.temperature(t), step, params)
                .map_err(|e| e.context(format_args!("series {}", series.label)))?;
        }
        out.push(point.state.x_beta);
    }
    Ok(out)
}

/// Trapezoidal quadrature weights of a sample grid; a single sample gets
/// weight one.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
            let right = if i + 1 < n { times[i + 1] - times[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Residuals of the heating fit at `theta = [c_beta, f]`: beta-fraction
/// differences weighted by the square root of their trapezoidal time
/// weight, so the sum of squares approximates the time integral of the
/// squared mismatch.
pub fn heating_objective(theta: &[f64], series: &[HeatingSeries], base: &ModelParams, step: &StepConfig) -> Result<Vec<f64>> {
    check_heating(series)?;
    let params = with_heating_theta(base, theta)?;
    let parts = series
        .par_iter()
        .map(|s| {
            let sim = heating_prediction(&params, s, step)?;
            let w = trapezoid_weights(&s.times);
            Ok(sim
                .iter()
                .zip(&s.x_beta)
                .zip(&w)
                .map(|((a, b), w)| w.sqrt() * (a - b))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Fits `[c_beta, f]` to beta fractions measured along heating histories.
pub fn calibrate_heating(
    series: &[HeatingSeries],
    base: &ModelParams,
    theta0: &[f64],
    step: &StepConfig,
    lm: &LmConfig,
) -> Result<LmReport> {
    check_heating(series)?;
    levenberg_marquardt(|t| heating_objective(t, series, base, step), theta0, &heating_parameters(), lm)
}

fn check_cooling(series: &[CoolingSeries]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Calibration("no cooling series".into()));
    }
    for s in series {
        if s.times.is_empty() || s.times.len() != s.temps.len() {
            return Err(Error::Calibration(format!("series {} has mismatched columns", s.label)));
        }
    }
    Ok(())
}

/// Semi-infinite-body temperatures at the sample times of one series.
pub fn cooling_prediction(params: &SibParams, series: &CoolingSeries) -> Result<Vec<f64>> {
    let p = SibParams {
        depth: series.depth,
        ..*params
    };
    series.times.iter().map(|&t| sib_temperature(t, &p)).collect()
}

/// Residuals `T_obs - T_model` of the cooling fit at `theta = [a_g, b_g, c_g]`,
/// concatenated over the series.
pub fn cooling_objective(theta: &[f64], series: &[CoolingSeries], base: &SibParams) -> Result<Vec<f64>> {
    check_cooling(series)?;
    let params = with_cooling_theta(base, theta)?;
    let parts = series
        .par_iter()
        .map(|s| {
            let sim = cooling_prediction(&params, s)?;
            Ok(s.temps.iter().zip(&sim).map(|(o, m)| o - m).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Fits `[a_g, b_g, c_g]` to measured cooling curves with `s_g = 1`.
pub fn calibrate_cooling(series: &[CoolingSeries], base: &SibParams, theta0: &[f64], lm: &LmConfig) -> Result<LmReport> {
    check_cooling(series)?;
    levenberg_marquardt(|t| cooling_objective(t, series, base), theta0, &cooling_parameters(), lm)
}
