//! TTT and CCT diagram sweeps.
//!
//! Every row (TTT hold temperature) or curve (CCT cooling rate) is an
//! independent integration. Rows run in parallel and are collected in input
//! order, so results do not depend on the thread count. Threshold crossings
//! are extracted while integrating; full trajectories are never kept.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{MaterialPoint, Sample, StepConfig, Trajectory};
use crate::output::{fmt_f64, write_csv};
use crate::params::ModelParams;
use crate::phase_model::{alpha_equilibrium, PhaseState};
use crate::thermal::{
    sib_cct_rate, ttt_path, ttt_quench_duration, SibCurve, SibParams, TemperaturePath, SIB_DEFAULT_CUTOFF,
    TTT_START_TEMPERATURE,
};

/// Isoline levels drawn in the diagrams.
pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.01, 0.05, 0.45, 0.55, 0.95, 0.99];

/// Terminal fraction below which a phase counts as absent.
pub const ABSENT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AlphaS,
    AlphaM,
    Beta,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::AlphaS, Phase::AlphaM, Phase::Beta];

    pub fn fraction(self, s: &PhaseState) -> f64 {
        match self {
            Phase::AlphaS => s.x_alpha_s,
            Phase::AlphaM => s.x_alpha_m,
            Phase::Beta => s.x_beta,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::AlphaS => "alpha_s",
            Phase::AlphaM => "alpha_m",
            Phase::Beta => "beta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divided by the equilibrium alpha fraction at the hold temperature.
    NormalizedByAlphaEq,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

/// A monitored value passing a threshold between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub level: f64,
    pub t: f64,
    pub temp: f64,
    pub direction: Direction,
}

/// Streaming crossing detector for one monitored value.
#[derive(Debug, Clone)]
pub struct CrossingTracker {
    thresholds: Vec<f64>,
    prev: Option<(f64, f64, f64)>,
    crossings: Vec<Crossing>,
}

impl CrossingTracker {
    pub fn new(thresholds: &[f64]) -> Self {
        Self {
            thresholds: thresholds.to_vec(),
            prev: None,
            crossings: Vec::new(),
        }
    }

    /// Feeds the value `v` observed at time `t` and temperature `temp`.
    pub fn observe(&mut self, t: f64, temp: f64, v: f64) {
        if let Some((t0, temp0, v0)) = self.prev {
            for &level in &self.thresholds {
                let direction = if v0 < level && v >= level {
                    Direction::Up
                } else if v0 >= level && v < level {
                    Direction::Down
                } else {
                    continue;
                };
                let w = (level - v0) / (v - v0);
                self.crossings.push(Crossing {
                    level,
                    t: t0 + w * (t - t0),
                    temp: temp0 + w * (temp - temp0),
                    direction,
                });
            }
        }
        self.prev = Some((t, temp, v));
    }

    /// Crossings ordered by level, then time.
    pub fn finish(mut self) -> Vec<Crossing> {
        self.crossings
            .sort_by(|a, b| a.level.total_cmp(&b.level).then(a.t.total_cmp(&b.t)));
        self.crossings
    }
}

/// All crossings of `value` through `thresholds` along a trajectory, located
/// by linear interpolation between samples.
pub fn extract_crossings(traj: &Trajectory, value: impl Fn(&Sample) -> f64, thresholds: &[f64]) -> Vec<Crossing> {
    let mut tracker = CrossingTracker::new(thresholds);
    for s in traj.samples() {
        tracker.observe(s.t, s.temp, value(s));
    }
    tracker.finish()
}

/// One point of an isoline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolinePoint {
    pub t: f64,
    pub temp: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Isoline {
    pub level: f64,
    pub points: Vec<IsolinePoint>,
}

/// Isolines of one phase across a diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolineSet {
    pub phase: Phase,
    pub normalization: Normalization,
    pub entries: Vec<Isoline>,
}

impl IsolineSet {
    fn assemble(
        phase: Phase,
        normalization: Normalization,
        thresholds: &[f64],
        rows: impl Iterator<Item = (f64, Vec<Crossing>)>,
        row_temperature: bool,
    ) -> Self {
        let mut entries: Vec<Isoline> = thresholds
            .iter()
            .map(|&level| Isoline {
                level,
                points: Vec::new(),
            })
            .collect();
        for (row_temp, crossings) in rows {
            for c in crossings {
                if let Some(line) = entries.iter_mut().find(|l| l.level == c.level) {
                    line.points.push(IsolinePoint {
                        t: c.t,
                        temp: if row_temperature { row_temp } else { c.temp },
                        direction: c.direction,
                    });
                }
            }
        }
        for line in &mut entries {
            line.points
                .sort_by(|a, b| b.temp.total_cmp(&a.temp).then(a.t.total_cmp(&b.t)));
        }
        Self {
            phase,
            normalization,
            entries,
        }
    }

    pub fn level(&self, level: f64) -> Option<&Isoline> {
        self.entries.iter().find(|l| l.level == level)
    }
}

/// Writes isolines as `phase,level,time_s,temp_K,direction`.
pub fn write_isolines_csv(path: &Path, sets: &[IsolineSet]) -> Result<()> {
    let rows = sets.iter().flat_map(|set| {
        set.entries.iter().flat_map(move |line| {
            line.points.iter().map(move |p| {
                vec![
                    set.phase.to_string(),
                    fmt_f64(line.level),
                    fmt_f64(p.t),
                    fmt_f64(p.temp),
                    p.direction.to_string(),
                ]
            })
        })
    });
    write_csv(path, "phase,level,time_s,temp_K,direction", rows)
}

/// Settings of the TTT sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TttConfig {
    /// Hold temperatures, K.
    pub targets: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Hold duration after the quench, s.
    pub hold: f64,
    /// Step during the quench and at the start of the hold, s.
    pub ramp_dt: f64,
    /// Per-step growth factor of the hold step.
    pub growth: f64,
    /// Largest hold step, s.
    pub max_dt: f64,
    /// A row stops early once the normalized fractions are this close to
    /// their asymptote (alpha_s at 1, alpha_m at 0).
    pub settle_tol: f64,
    pub step: StepConfig,
}

impl Default for TttConfig {
    fn default() -> Self {
        Self {
            targets: default_ttt_targets(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            hold: 1e6,
            ramp_dt: 1e-3,
            growth: 1.05,
            max_dt: 10.0,
            settle_tol: 1e-4,
            step: StepConfig::default(),
        }
    }
}

impl TttConfig {
    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.targets.is_empty() || self.targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config("TTT targets must be finite, positive and nonempty".into()));
        }
        validate_thresholds(&self.thresholds)?;
        let ok = self.hold > 0.0 && self.ramp_dt > 0.0 && self.growth >= 1.0 && self.max_dt >= self.ramp_dt;
        if !ok || self.settle_tol < 0.0 {
            return Err(Error::Config(format!(
                "invalid TTT stepping: hold {}, ramp_dt {}, growth {}, max_dt {}, settle_tol {}",
                self.hold, self.ramp_dt, self.growth, self.max_dt, self.settle_tol
            )));
        }
        Ok(())
    }
}

fn validate_thresholds(levels: &[f64]) -> Result<()> {
    if levels.is_empty() || levels.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::Config("thresholds must be positive and nonempty".into()));
    }
    Ok(())
}

/// The 95 hold temperatures 350, 360, ..., 1290 K.
pub fn default_ttt_targets() -> Vec<f64> {
    (0..95).map(|i| 350.0 + 10.0 * i as f64).collect()
}

/// Time grid of a TTT row: uniform steps through the quench, then steps
/// growing geometrically up to `max_dt` until `end`.
pub fn ttt_time_grid(target: f64, end: f64, cfg: &TttConfig) -> Vec<f64> {
    let t_ramp = ttt_quench_duration(target).min(end);
    let mut times = vec![0.0];
    let n_ramp = (t_ramp / cfg.ramp_dt - 1e-9).ceil().max(0.0) as usize;
    for i in 1..=n_ramp {
        times.push(if i == n_ramp { t_ramp } else { i as f64 * cfg.ramp_dt });
    }
    let mut t = t_ramp;
    let mut dt = cfg.ramp_dt;
    while t < end {
        t = (t + dt).min(end);
        times.push(t);
        dt = (dt * cfg.growth).min(cfg.max_dt);
    }
    times
}

/// Result of one TTT hold temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TttRow {
    pub target: f64,
    /// Equilibrium alpha fraction used for normalization.
    pub alpha_eq: f64,
    pub alpha_s: Vec<Crossing>,
    pub alpha_m: Vec<Crossing>,
    pub beta: Vec<Crossing>,
    /// State at the end of the row.
    pub terminal: PhaseState,
    pub end_time: f64,
}

impl TttRow {
    pub fn crossings(&self, phase: Phase) -> &[Crossing] {
        match phase {
            Phase::AlphaS => &self.alpha_s,
            Phase::AlphaM => &self.alpha_m,
            Phase::Beta => &self.beta,
        }
    }

    /// Time of the first upward crossing of `level`, measured from the start
    /// of the quench.
    pub fn first_up(&self, phase: Phase, level: f64) -> Option<f64> {
        self.crossings(phase)
            .iter()
            .find(|c| c.level == level && c.direction == Direction::Up)
            .map(|c| c.t)
    }
}

/// Normalized alpha fractions: divided by `alpha_eq`, or zero when no alpha
/// is stable at the hold temperature.
fn normalized(x: f64, alpha_eq: f64) -> f64 {
    if alpha_eq > 0.0 {
        x / alpha_eq
    } else {
        0.0
    }
}

/// Simulates one TTT row: quench from 1400 K to `target` and hold.
pub fn simulate_ttt_row(target: f64, params: &ModelParams, cfg: &TttConfig) -> Result<TttRow> {
    let path = ttt_path(target, cfg.hold)?;
    let alpha_eq = alpha_equilibrium(target, &params.equilibrium, &params.temps);
    let times = ttt_time_grid(target, path.end_time(), cfg);
    let t_ramp = ttt_quench_duration(target);
    let mut point = MaterialPoint::new(PhaseState::pure_beta(), 0.0, TTT_START_TEMPERATURE, params)?;
    let mut trackers = [
        CrossingTracker::new(&cfg.thresholds),
        CrossingTracker::new(&cfg.thresholds),
        CrossingTracker::new(&cfg.thresholds),
    ];
    let observe = |trackers: &mut [CrossingTracker; 3], p: &MaterialPoint| {
        trackers[0].observe(p.time, p.temp, normalized(p.state.x_alpha_s, alpha_eq));
        trackers[1].observe(p.time, p.temp, normalized(p.state.x_alpha_m, alpha_eq));
        trackers[2].observe(p.time, p.temp, p.state.x_beta);
    };
    observe(&mut trackers, &point);
    for &t in &times[1..] {
        point
            .advance(t, path.temperature(t), &cfg.step, params)
            .map_err(|e| e.context(format_args!("TTT target {target} K")))?;
        observe(&mut trackers, &point);
        if t > t_ramp && settled(&point.state, alpha_eq, cfg.settle_tol) {
            break;
        }
    }
    let [a, m, b] = trackers;
    Ok(TttRow {
        target,
        alpha_eq,
        alpha_s: a.finish(),
        alpha_m: m.finish(),
        beta: b.finish(),
        terminal: point.state,
        end_time: point.time,
    })
}

fn settled(s: &PhaseState, alpha_eq: f64, tol: f64) -> bool {
    if alpha_eq <= 0.0 {
        return s.alpha() == 0.0;
    }
    (s.x_alpha_s / alpha_eq - 1.0).abs() < tol && s.x_alpha_m / alpha_eq < tol
}

/// Full TTT sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TttDiagram {
    pub rows: Vec<TttRow>,
    pub isolines: Vec<IsolineSet>,
}

impl TttDiagram {
    pub fn row(&self, target: f64) -> Option<&TttRow> {
        self.rows.iter().find(|r| r.target == target)
    }
}

/// Runs every TTT row in parallel. Alpha isolines are normalized by the
/// equilibrium alpha fraction of the row; beta is absolute. Isoline points
/// are placed at the hold temperature of their row.
pub fn generate_ttt(params: &ModelParams, cfg: &TttConfig) -> Result<TttDiagram> {
    params.validate()?;
    cfg.validate()?;
    let rows = cfg
        .targets
        .par_iter()
        .map(|&target| simulate_ttt_row(target, params, cfg))
        .collect::<Result<Vec<_>>>()?;
    let isolines = Phase::ALL
        .iter()
        .map(|&phase| {
            let norm = if phase == Phase::Beta {
                Normalization::Absolute
            } else {
                Normalization::NormalizedByAlphaEq
            };
            IsolineSet::assemble(
                phase,
                norm,
                &cfg.thresholds,
                rows.iter().map(|r| (r.target, r.crossings(phase).to_vec())),
                true,
            )
        })
        .collect();
    Ok(TttDiagram { rows, isolines })
}

/// Writes `target_K,alpha_eq,x_alpha_s,x_alpha_m,x_beta,end_time_s` per row.
pub fn write_ttt_terminal_csv(path: &Path, ttt: &TttDiagram) -> Result<()> {
    let rows = ttt.rows.iter().map(|r| {
        vec![
            fmt_f64(r.target),
            fmt_f64(r.alpha_eq),
            fmt_f64(r.terminal.x_alpha_s),
            fmt_f64(r.terminal.x_alpha_m),
            fmt_f64(r.terminal.x_beta),
            fmt_f64(r.end_time),
        ]
    });
    write_csv(path, "target_K,alpha_eq,x_alpha_s,x_alpha_m,x_beta,end_time_s", rows)
}

/// Settings of the CCT sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CctConfig {
    /// Target cooling rates at 1173.15 K, K/s (negative).
    pub rates: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Base cooling parameters; `s_g` is replaced per curve.
    pub sib: SibParams,
    /// Temperature where the analytic curve hands over to its linear tail.
    pub cutoff: f64,
    /// Step size is `dt_factor / |rate|`, clamped to `[dt_min, dt_max]`.
    pub dt_factor: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Search interval of the heat-transfer scale.
    pub s_g_bracket: (f64, f64),
    /// Bisection steps used to refine critical rates.
    pub refine_iters: usize,
    pub step: StepConfig,
}

impl Default for CctConfig {
    fn default() -> Self {
        Self {
            rates: default_cct_rates(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            sib: SibParams::default(),
            cutoff: SIB_DEFAULT_CUTOFF,
            dt_factor: 0.25,
            dt_min: 1e-4,
            dt_max: 0.25,
            s_g_bracket: (1e-3, 1e4),
            refine_iters: 20,
            step: StepConfig::default(),
        }
    }
}

impl CctConfig {
    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        self.sib.validate()?;
        validate_thresholds(&self.thresholds)?;
        if self.rates.is_empty() || self.rates.iter().any(|r| !(r.is_finite() && *r < 0.0)) {
            return Err(Error::Config("CCT rates must be negative, finite and nonempty".into()));
        }
        let (lo, hi) = self.s_g_bracket;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!("invalid s_g bracket ({lo}, {hi})")));
        }
        if !(self.dt_factor > 0.0 && self.dt_min > 0.0 && self.dt_max >= self.dt_min) {
            return Err(Error::Config("invalid CCT step settings".into()));
        }
        Ok(())
    }

    fn dt_for(&self, rate: f64) -> f64 {
        (self.dt_factor / rate.abs()).clamp(self.dt_min, self.dt_max)
    }
}

/// 150 equidistant rates from -1 to -600 K/s.
pub fn default_cct_rates() -> Vec<f64> {
    let n = 150;
    (0..n).map(|i| -1.0 - 599.0 * i as f64 / (n - 1) as f64).collect()
}

/// Heat-transfer scale whose curve cools at `rate` through 1173.15 K, found
/// by bisection on `log(s_g)`.
pub fn solve_s_g(rate: f64, cfg: &CctConfig) -> Result<f64> {
    let rate_of = |s_g: f64| sib_cct_rate(&SibParams { s_g, ..cfg.sib });
    let (mut lo, mut hi) = (cfg.s_g_bracket.0.ln(), cfg.s_g_bracket.1.ln());
    let (r_lo, r_hi) = (rate_of(lo.exp())?, rate_of(hi.exp())?);
    if !(r_hi <= rate && rate <= r_lo) {
        return Err(Error::Descriptor(format!(
            "rate {rate} K/s outside the reachable range [{r_hi}, {r_lo}] K/s"
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // faster cooling (more negative) for larger s_g
        if rate_of(mid.exp())? > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// One CCT curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CctCurve {
    pub rate: f64,
    pub s_g: f64,
    pub alpha_s: Vec<Crossing>,
    pub alpha_m: Vec<Crossing>,
    pub beta: Vec<Crossing>,
    /// State at room temperature.
    pub terminal: PhaseState,
}

impl CctCurve {
    pub fn crossings(&self, phase: Phase) -> &[Crossing] {
        match phase {
            Phase::AlphaS => &self.alpha_s,
            Phase::AlphaM => &self.alpha_m,
            Phase::Beta => &self.beta,
        }
    }
}

/// Cooling curve with the given CCT rate.
pub fn cct_curve_path(rate: f64, cfg: &CctConfig) -> Result<SibCurve> {
    let s_g = solve_s_g(rate, cfg)?;
    SibCurve::new(SibParams { s_g, ..cfg.sib }, cfg.cutoff)
}

/// Integrates one CCT curve from pure beta down to room temperature.
pub fn simulate_cct_curve(rate: f64, params: &ModelParams, cfg: &CctConfig) -> Result<CctCurve> {
    let path = cct_curve_path(rate, cfg)?;
    let step = StepConfig {
        dt: cfg.dt_for(rate),
        ..cfg.step
    };
    let end = path.end_time();
    let n = (end / step.dt - 1e-9).ceil().max(1.0) as usize;
    let mut point = MaterialPoint::new(PhaseState::pure_beta(), 0.0, path.temperature(0.0), params)?;
    let mut trackers = [
        CrossingTracker::new(&cfg.thresholds),
        CrossingTracker::new(&cfg.thresholds),
        CrossingTracker::new(&cfg.thresholds),
    ];
    let observe = |trackers: &mut [CrossingTracker; 3], p: &MaterialPoint| {
        for (tr, phase) in trackers.iter_mut().zip(Phase::ALL) {
            tr.observe(p.time, p.temp, phase.fraction(&p.state));
        }
    };
    observe(&mut trackers, &point);
    for i in 1..=n {
        let t = if i == n { end } else { i as f64 * step.dt };
        point
            .advance(t, path.temperature(t), &step, params)
            .map_err(|e| e.context(format_args!("CCT rate {rate} K/s")))?;
        observe(&mut trackers, &point);
    }
    let [a, m, b] = trackers;
    Ok(CctCurve {
        rate,
        s_g: path.params().s_g,
        alpha_s: a.finish(),
        alpha_m: m.finish(),
        beta: b.finish(),
        terminal: point.state,
    })
}

/// Full CCT sweep with absolute fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CctDiagram {
    pub curves: Vec<CctCurve>,
    pub isolines: Vec<IsolineSet>,
}

pub fn generate_cct(params: &ModelParams, cfg: &CctConfig) -> Result<CctDiagram> {
    params.validate()?;
    cfg.validate()?;
    let curves = cfg
        .rates
        .par_iter()
        .map(|&rate| simulate_cct_curve(rate, params, cfg))
        .collect::<Result<Vec<_>>>()?;
    let isolines = Phase::ALL
        .iter()
        .map(|&phase| {
            IsolineSet::assemble(
                phase,
                Normalization::Absolute,
                &cfg.thresholds,
                curves.iter().map(|c| (c.rate, c.crossings(phase).to_vec())),
                false,
            )
        })
        .collect();
    Ok(CctDiagram { curves, isolines })
}

/// Writes `rate_K_per_s,x_alpha_s,x_alpha_m,x_beta` per curve.
pub fn write_terminal_csv(path: &Path, cct: &CctDiagram) -> Result<()> {
    let rows = cct.curves.iter().map(|c| {
        vec![
            fmt_f64(c.rate),
            fmt_f64(c.terminal.x_alpha_s),
            fmt_f64(c.terminal.x_alpha_m),
            fmt_f64(c.terminal.x_beta),
        ]
    });
    write_csv(path, "rate_K_per_s,x_alpha_s,x_alpha_m,x_beta", rows)
}

/// Critical cooling rates of a CCT family, K/s. `None` when no curve of the
/// family meets the condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRates {
    /// Slowest rate whose terminal stable alpha stays below 1 %.
    pub rate_pure_martensite: Option<f64>,
    /// Fastest rate whose terminal martensite stays below 1 %.
    pub rate_pure_diffusional: Option<f64>,
}

/// Locates both critical rates: the grid boundary is found on the sweep,
/// then refined by bisection between the neighbouring rates.
pub fn critical_rates(cct: &CctDiagram, params: &ModelParams, cfg: &CctConfig) -> Result<CriticalRates> {
    let mut curves: Vec<(f64, PhaseState)> = cct.curves.iter().map(|c| (c.rate, c.terminal)).collect();
    // slow to fast
    curves.sort_by(|a, b| b.0.total_cmp(&a.0));
    let no_alpha_s = |s: &PhaseState| s.x_alpha_s < ABSENT_FRACTION;
    let no_alpha_m = |s: &PhaseState| s.x_alpha_m < ABSENT_FRACTION;
    let terminal = |rate: f64| simulate_cct_curve(rate, params, cfg).map(|c| c.terminal);

    // first index from which every faster curve is free of stable alpha
    let i = curves.iter().rposition(|(_, s)| !no_alpha_s(s)).map_or(0, |k| k + 1);
    let rate_pure_martensite = if i == curves.len() {
        None
    } else if i == 0 {
        Some(curves[0].0)
    } else {
        Some(refine(curves[i - 1].0, curves[i].0, cfg.refine_iters, |r| {
            terminal(r).map(|s| no_alpha_s(&s))
        })?)
    };

    // last index up to which every slower curve is free of martensite
    let j = curves.iter().position(|(_, s)| !no_alpha_m(s)).unwrap_or(curves.len());
    let rate_pure_diffusional = if j == 0 {
        None
    } else if j == curves.len() {
        Some(curves[j - 1].0)
    } else {
        Some(refine(curves[j].0, curves[j - 1].0, cfg.refine_iters, |r| {
            terminal(r).map(|s| no_alpha_m(&s))
        })?)
    };
    Ok(CriticalRates {
        rate_pure_martensite,
        rate_pure_diffusional,
    })
}

/// Bisects between `fails` (condition false) and `holds` (condition true)
/// and returns the end of the bracket where the condition holds.
fn refine(mut fails: f64, mut holds: f64, iters: usize, cond: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..iters {
        let mid = 0.5 * (fails + holds);
        if cond(mid)? {
            holds = mid;
        } else {
            fails = mid;
        }
    }
    Ok(holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::PiecewiseLinearPath;
    use approx::assert_abs_diff_eq;

    fn trace(values: &[f64]) -> Trajectory {
        let mut traj = Trajectory::default();
        for (i, &v) in values.iter().enumerate() {
            traj.push(Sample {
                t: i as f64,
                temp: 1000.0 - i as f64,
                state: PhaseState {
                    x_alpha_s: v,
                    x_alpha_m: 0.0,
                    x_beta: 1.0 - v,
                    x_liq: 0.0,
                },
                rates: Default::default(),
            });
        }
        traj
    }

    #[test]
    fn crossings_of_monotone_trace() {
        let traj = trace(&[0.0, 0.2, 0.4, 0.6, 0.9]);
        let c = extract_crossings(&traj, |s| s.state.x_alpha_s, &[0.45]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].direction, Direction::Up);
        assert_abs_diff_eq!(c[0].t, 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].temp, 997.75, epsilon = 1e-12);
    }

    #[test]
    fn flat_trace_has_no_crossings() {
        let traj = trace(&[0.1; 10]);
        assert!(extract_crossings(&traj, |s| s.state.x_alpha_s, &[0.45]).is_empty());
    }

    #[test]
    fn rise_and_fall() {
        let traj = trace(&[0.0, 0.6, 0.8, 0.3]);
        let c = extract_crossings(&traj, |s| s.state.x_alpha_s, &[0.5]);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].direction, Direction::Up);
        assert_eq!(c[1].direction, Direction::Down);
        assert!(c[0].t < c[1].t);
    }

    #[test]
    fn default_grids() {
        let targets = default_ttt_targets();
        assert_eq!(targets.len(), 95);
        assert_eq!(targets[0], 350.0);
        assert_eq!(targets[94], 1290.0);
        let rates = default_cct_rates();
        assert_eq!(rates.len(), 150);
        assert_eq!(rates[0], -1.0);
        assert_abs_diff_eq!(rates[149], -600.0, epsilon = 1e-12);
    }

    #[test]
    fn ttt_grid_lands_on_quench_end() {
        let cfg = TttConfig::default();
        let grid = ttt_time_grid(900.0, 101.0, &cfg);
        assert!(grid.contains(&1.0));
        assert_eq!(*grid.last().unwrap(), 101.0);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(grid.windows(2).all(|w| w[1] - w[0] <= 10.0 + 1e-9));
    }

    #[test]
    fn ttt_row_above_martensite_start_has_no_martensite() {
        let p = ModelParams::default();
        let cfg = TttConfig {
            hold: 1e4,
            ..Default::default()
        };
        let row = simulate_ttt_row(1000.0, &p, &cfg).unwrap();
        assert!(row.alpha_m.is_empty());
        assert!(row.first_up(Phase::AlphaS, 0.01).is_some());
        assert!(row.first_up(Phase::AlphaS, 0.99).is_some());
    }

    #[test]
    fn ttt_row_at_400_k_is_martensitic() {
        let p = ModelParams::default();
        let cfg = TttConfig {
            hold: 1e3,
            ..Default::default()
        };
        let row = simulate_ttt_row(400.0, &p, &cfg).unwrap();
        let t45 = row.first_up(Phase::AlphaM, 0.45).unwrap();
        assert!(t45 < 2.1, "martensite forms during the quench, t = {t45}");
        assert!(row.terminal.x_alpha_m / row.alpha_eq > 0.9);
        assert!(row.first_up(Phase::AlphaS, 0.01).is_none());
    }

    #[test]
    fn ttt_is_deterministic_across_threads() {
        let p = ModelParams::default();
        let cfg = TttConfig {
            targets: vec![700.0, 900.0, 1100.0],
            hold: 200.0,
            ..Default::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| generate_ttt(&p, &cfg)).unwrap();
        let b = four.install(|| generate_ttt(&p, &cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn s_g_hits_target_rate() {
        let cfg = CctConfig::default();
        for rate in [-1.0, -4.0, -100.0, -600.0] {
            let s_g = solve_s_g(rate, &cfg).unwrap();
            let got = sib_cct_rate(&SibParams { s_g, ..cfg.sib }).unwrap();
            assert!((got - rate).abs() < 1e-6 * rate.abs(), "{rate}: {got}");
        }
        assert!(solve_s_g(-1e6, &cfg).is_err());
    }

    #[test]
    fn cct_curve_ends_at_room_temperature() {
        let p = ModelParams::default();
        let cfg = CctConfig::default();
        let curve = simulate_cct_curve(-500.0, &p, &cfg).unwrap();
        assert!(curve.terminal.validate().is_ok());
        assert!(curve.terminal.x_alpha_m > 0.85);
        let path = cct_curve_path(-500.0, &cfg).unwrap();
        assert_abs_diff_eq!(path.temperature(path.end_time()), 293.15, epsilon = 1e-9);
    }

    #[test]
    fn frozen_diffusion_is_martensitic_everywhere() {
        let mut p = ModelParams::default();
        p.diffusion.k1 = 1e-12;
        let cfg = CctConfig {
            rates: vec![-1.0, -20.0, -300.0],
            ..Default::default()
        };
        let cct = generate_cct(&p, &cfg).unwrap();
        let crit = critical_rates(&cct, &p, &cfg).unwrap();
        assert_eq!(crit.rate_pure_martensite, Some(-1.0));
        assert_eq!(crit.rate_pure_diffusional, None);
    }

    #[test]
    fn refine_brackets_step() {
        let r = refine(-100.0, -200.0, 40, |r| Ok(r < -150.0)).unwrap();
        assert_abs_diff_eq!(r, -150.0, epsilon = 1e-9);
    }

    #[test]
    fn linear_quench_through_a_ttt_path() {
        let p = ModelParams::default();
        let path = PiecewiseLinearPath::ramp(1400.0, 293.15, -500.0, 0.0).unwrap();
        let cfg = StepConfig::default();
        let traj = crate::integrate(&PhaseState::pure_beta(), &path, (0.0, path.end_time()), &cfg, &p).unwrap();
        let c = extract_crossings(&traj, |s| s.state.x_alpha_m, &DEFAULT_THRESHOLDS);
        assert!(c.iter().all(|c| c.direction == Direction::Up));
        assert!(c.iter().all(|c| c.temp < 848.0));
    }
}
