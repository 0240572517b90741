//! Time-discrete evolution of a material point.
//!
//! One step runs a fixed pipeline: the diffusional update with the rates of
//! the previous step, clipping to the admissible fraction box, seeding of a
//! vanishing stable-alpha fraction, the martensite formation and dissolution
//! projections at the new temperature, and finally the rates for the next
//! step. Above the solidus the state follows the solid fraction instead.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{k_alpha_s, k_beta, transformation_rates, DiffusionParams, TransformationRates};
use crate::params::ModelParams;
use crate::phase_model::{
    alpha_equilibrium, beta_equilibrium, check_temperature, martensite_pseudo_eq_unchecked, solid_fraction_unchecked,
    PhaseState, MAX_ALPHA,
};
use crate::thermal::TemperaturePath;

/// Beta fraction below which the dissolution law has no interface to grow on.
const RESIDUAL_BETA: f64 = 0.1;

/// Smallest dissolved fraction that is handed to the explicit update. Below
/// it the increment would vanish against the 0.1 residual beta in floating
/// point, so the onset is followed analytically instead.
const NUCLEATION_FLOOR: f64 = 1e-10;

/// Relaxation factor of the Crank-Nicolson fixed-point iteration.
const CN_DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    ForwardEuler,
    CrankNicolson,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" | "forward-euler" | "forward_euler" => Ok(Scheme::ForwardEuler),
            "cn" | "crank-nicolson" | "crank_nicolson" => Ok(Scheme::CrankNicolson),
            other => Err(Error::Config(format!("unknown scheme `{other}` (expected euler or cn)"))),
        }
    }
}

/// Settings of the time stepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Step size, s.
    pub dt: f64,
    pub scheme: Scheme,
    /// Absolute tolerance of the implicit stage.
    pub cn_tolerance: f64,
    pub cn_max_iters: usize,
    /// Keep every n-th step in the trajectory (the last step is always kept).
    pub record_every: usize,
    /// When false, the martensite formation projection is skipped.
    pub martensite: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::ForwardEuler,
            cn_tolerance: 1e-10,
            cn_max_iters: 50,
            record_every: 1,
            martensite: true,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cn_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "cn_tolerance must be positive, got {}",
                self.cn_tolerance
            )));
        }
        if self.cn_max_iters == 0 || self.record_every == 0 {
            return Err(Error::Config("cn_max_iters and record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded instant of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub temp: f64,
    pub state: PhaseState,
    pub rates: TransformationRates,
}

/// Time-ordered samples of an integration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Final sample. Every trajectory holds at least its initial sample.
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }

    pub(crate) fn push(&mut self, s: Sample) {
        self.samples.push(s);
    }
}

/// State of one material point between steps: fractions plus the rates
/// cached for the next diffusional update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialPoint {
    pub state: PhaseState,
    pub rates: TransformationRates,
    pub time: f64,
    pub temp: f64,
    steps: usize,
    /// Accumulated `k_beta * driving force * dt` while alpha dissolution is
    /// still below [`NUCLEATION_FLOOR`].
    dissolution_clock: f64,
}

impl MaterialPoint {
    pub fn new(state: PhaseState, time: f64, temp: f64, params: &ModelParams) -> Result<Self> {
        state.validate()?;
        check_temperature(temp)?;
        Ok(Self {
            state,
            rates: rates_at(&state, temp, params),
            time,
            temp,
            steps: 0,
            dissolution_clock: 0.0,
        })
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sample(&self) -> Sample {
        Sample {
            t: self.time,
            temp: self.temp,
            state: self.state,
            rates: self.rates,
        }
    }

    /// One step of size `cfg.dt` along `path`.
    pub fn step(&mut self, path: &(impl TemperaturePath + ?Sized), cfg: &StepConfig, params: &ModelParams) -> Result<()> {
        let t = self.time + cfg.dt;
        self.advance(t, path.temperature(t), cfg, params)
    }

    /// Advances to time `t_next` where the temperature is `temp_next`.
    pub fn advance(&mut self, t_next: f64, temp_next: f64, cfg: &StepConfig, params: &ModelParams) -> Result<()> {
        let step = self.steps + 1;
        let fail = |message: String| Error::Integration {
            step,
            time: t_next,
            message,
        };
        let dt = t_next - self.time;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(fail(format!("non-positive step {dt} s")));
        }
        check_temperature(temp_next).map_err(|e| fail(e.to_string()))?;

        let temps = &params.temps;
        if temp_next >= temps.solidus {
            let solid = solid_fraction_unchecked(temp_next, temps);
            self.state = PhaseState {
                x_alpha_s: 0.0,
                x_alpha_m: 0.0,
                x_beta: solid,
                x_liq: 1.0 - solid,
            };
            self.rates = TransformationRates::ZERO;
            self.dissolution_clock = 0.0;
        } else {
            if self.state.x_liq > 0.0 {
                self.state = PhaseState::pure_beta();
                self.rates = TransformationRates::ZERO;
                self.dissolution_clock = 0.0;
            }
            self.nucleate_beta(temp_next, dt, params);

            let predicted = seed_alpha_s(diffusional_update(&self.state, &self.rates, dt), temp_next, dt, params);
            let solved = match cfg.scheme {
                Scheme::ForwardEuler => predicted,
                Scheme::CrankNicolson => self.solve_implicit(predicted, temp_next, dt, cfg, params).map_err(fail)?,
            };
            let mut s = solved;
            if cfg.martensite {
                s = project_martensite_formation(&s, temp_next, params);
            }
            s = project_martensite_dissolution(&s, temp_next, params);
            self.rates = rates_at(&s, temp_next, params);
            self.state = s;
        }
        self.time = t_next;
        self.temp = temp_next;
        self.steps = step;
        Ok(())
    }

    /// Starts alpha dissolution once its analytic onset becomes resolvable.
    ///
    /// The dissolution law vanishes with the beta excess over 0.1, so a state
    /// sitting exactly at 10 % beta never dissolves under a pure explicit
    /// update. The onset follows the isothermal closed form
    /// `d / (1 + (c / tau)^c)` in the accumulated kinetic time `tau`.
    fn nucleate_beta(&mut self, temp: f64, dt: f64, params: &ModelParams) {
        let s = &mut self.state;
        let driving = s.alpha() - alpha_equilibrium(temp, &params.equilibrium, &params.temps);
        if s.x_beta - RESIDUAL_BETA >= NUCLEATION_FLOOR || driving <= 0.0 || s.x_alpha_s <= 0.0 {
            self.dissolution_clock = 0.0;
            return;
        }
        let p = &params.diffusion;
        self.dissolution_clock += k_beta(temp, p) * driving * dt;
        let onset = logistic_onset(driving, self.dissolution_clock, p.c_beta);
        if onset >= NUCLEATION_FLOOR {
            let moved = onset.min(s.x_alpha_s);
            s.x_alpha_s -= moved;
            s.x_beta = 1.0 - s.x_alpha_s - s.x_alpha_m;
            self.rates = rates_at(s, self.temp, params);
            self.dissolution_clock = 0.0;
        }
    }

    /// Damped fixed-point solve of the trapezoidal stage
    /// `x = x_n + dt/2 (R_n + R(x))` for the two alpha fractions.
    fn solve_implicit(
        &self,
        guess: PhaseState,
        temp: f64,
        dt: f64,
        cfg: &StepConfig,
        params: &ModelParams,
    ) -> std::result::Result<PhaseState, String> {
        let xa_eq = alpha_equilibrium(temp, &params.equilibrium, &params.temps);
        let mut x = guess;
        let mut change = f64::INFINITY;
        for _ in 0..cfg.cn_max_iters {
            let r = transformation_rates(&x, temp, &params.diffusion, xa_eq);
            let g = diffusional_update(&self.state, &self.rates.midpoint(&r), dt);
            let xs = x.x_alpha_s + CN_DAMPING * (g.x_alpha_s - x.x_alpha_s);
            let xm = x.x_alpha_m + CN_DAMPING * (g.x_alpha_m - x.x_alpha_m);
            change = (xs - x.x_alpha_s).abs().max((xm - x.x_alpha_m).abs());
            x = solid_state(xs, xm);
            if change < cfg.cn_tolerance {
                return Ok(x);
            }
        }
        Err(format!(
            "implicit stage did not converge in {} iterations (last change {change:e})",
            cfg.cn_max_iters
        ))
    }
}

fn solid_state(x_alpha_s: f64, x_alpha_m: f64) -> PhaseState {
    PhaseState {
        x_alpha_s,
        x_alpha_m,
        x_beta: 1.0 - x_alpha_s - x_alpha_m,
        x_liq: 0.0,
    }
}

/// Rates of the three diffusional transformations at `temp`; zero while any
/// liquid is present.
pub fn rates_at(s: &PhaseState, temp: f64, params: &ModelParams) -> TransformationRates {
    if s.x_liq > 0.0 || temp >= params.temps.solidus {
        return TransformationRates::ZERO;
    }
    let xa_eq = alpha_equilibrium(temp, &params.equilibrium, &params.temps);
    transformation_rates(s, temp, &params.diffusion, xa_eq)
}

/// Explicit diffusional increment followed by clipping: each alpha fraction
/// is limited to `[0, 0.9]`, an overfull alpha total is scaled back to 0.9
/// with the ratio of the two kept, and beta takes the remainder.
pub fn diffusional_update(state: &PhaseState, rates: &TransformationRates, dt: f64) -> PhaseState {
    let mut xs = (state.x_alpha_s + dt * rates.alpha_s_rate()).clamp(0.0, MAX_ALPHA);
    let mut xm = (state.x_alpha_m + dt * rates.alpha_m_rate()).clamp(0.0, MAX_ALPHA);
    let total = xs + xm;
    if total > MAX_ALPHA {
        let scale = MAX_ALPHA / total;
        xs *= scale;
        xm *= scale;
    }
    PhaseState {
        x_alpha_s: xs,
        x_alpha_m: xm,
        x_beta: 1.0 - xs - xm - state.x_liq,
        x_liq: state.x_liq,
    }
}

/// Instantaneous martensite formation: lifts `x_alpha_m` to its
/// pseudo-equilibrium at `temp`, taking the difference from beta.
pub fn project_martensite_formation(state: &PhaseState, temp: f64, params: &ModelParams) -> PhaseState {
    let target = martensite_pseudo_eq_unchecked(temp, state.x_alpha_s, &params.equilibrium, &params.temps);
    if state.x_alpha_m >= target {
        return *state;
    }
    let moved = (target - state.x_alpha_m).min(state.x_beta).max(0.0);
    PhaseState {
        x_alpha_m: state.x_alpha_m + moved,
        x_beta: state.x_beta - moved,
        ..*state
    }
}

/// Instantaneous martensite dissolution: while beta is below its
/// equilibrium, martensite reverts to beta, at most all of it.
pub fn project_martensite_dissolution(state: &PhaseState, temp: f64, params: &ModelParams) -> PhaseState {
    let beta_eq = beta_equilibrium(temp, &params.equilibrium, &params.temps);
    if state.x_beta >= beta_eq || state.x_alpha_m <= 0.0 {
        return *state;
    }
    let moved = (beta_eq - state.x_beta).min(state.x_alpha_m);
    PhaseState {
        x_alpha_m: state.x_alpha_m - moved,
        x_beta: state.x_beta + moved,
        ..*state
    }
}

/// `x_eq / (1 + (c / tau)^c)`: the isothermal closed-form solution of the
/// modified logistic law after kinetic time `tau = k * x_eq * t`.
fn logistic_onset(x_eq: f64, tau: f64, c: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    x_eq / (1.0 + (c / tau).powf(c))
}

/// Stable-alpha fraction after the first explicit step of size `dt` from
/// zero, taken from the isothermal closed-form solution.
pub fn initialize_alpha_s(temp: f64, dt: f64, p: &DiffusionParams, x_alpha_eq: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    check_temperature(temp)?;
    let k_tilde = k_alpha_s(temp, p) * x_alpha_eq;
    Ok(logistic_onset(x_alpha_eq, k_tilde * dt, p.c_alpha_s))
}

/// Seeds stable alpha when it is exactly zero but beta exceeds its
/// equilibrium, since the formation law has no interface to grow from.
fn seed_alpha_s(mut s: PhaseState, temp: f64, dt: f64, params: &ModelParams) -> PhaseState {
    if s.x_alpha_s != 0.0 || s.x_liq > 0.0 {
        return s;
    }
    let xa_eq = alpha_equilibrium(temp, &params.equilibrium, &params.temps);
    let excess = s.x_beta - (1.0 - xa_eq);
    if xa_eq <= 0.0 || excess <= 0.0 {
        return s;
    }
    let k_tilde = k_alpha_s(temp, &params.diffusion) * xa_eq;
    let seed = logistic_onset(xa_eq, k_tilde * dt, params.diffusion.c_alpha_s).min(excess);
    s.x_alpha_s = seed;
    s.x_beta = 1.0 - seed - s.x_alpha_m;
    s
}

/// Integrates from `t_span.0` to `t_span.1` with the fixed step of `cfg`
/// (the last step is shortened to land on the end time).
pub fn integrate(
    initial: &PhaseState,
    path: &(impl TemperaturePath + ?Sized),
    t_span: (f64, f64),
    cfg: &StepConfig,
    params: &ModelParams,
) -> Result<Trajectory> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::domain(format!("invalid time span [{t0}, {t1}]")));
    }
    let n = ((t1 - t0) / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let times = (0..n).map(|i| if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * cfg.dt });
    run(initial, path, t0, times, cfg, params)
}

/// Integrates over an explicit, strictly increasing time grid.
pub fn integrate_on_grid(
    initial: &PhaseState,
    path: &(impl TemperaturePath + ?Sized),
    times: &[f64],
    cfg: &StepConfig,
    params: &ModelParams,
) -> Result<Trajectory> {
    cfg.validate()?;
    let (&t0, rest) = times
        .split_first()
        .ok_or_else(|| Error::domain("empty time grid"))?;
    run(initial, path, t0, rest.iter().copied(), cfg, params)
}

fn run(
    initial: &PhaseState,
    path: &(impl TemperaturePath + ?Sized),
    t0: f64,
    times: impl ExactSizeIterator<Item = f64>,
    cfg: &StepConfig,
    params: &ModelParams,
) -> Result<Trajectory> {
    params.validate()?;
    let mut point = MaterialPoint::new(*initial, t0, path.temperature(t0), params)?;
    let n = times.len();
    let mut traj = Trajectory::default();
    traj.push(point.sample());
    for (i, t) in times.enumerate() {
        point.advance(t, path.temperature(t), cfg, params)?;
        if (i + 1) % cfg.record_every == 0 || i + 1 == n {
            traj.push(point.sample());
        }
    }
    Ok(traj)
}
