//! Temperature histories: the TTT quench-and-hold protocol, sampled
//! piecewise-linear paths, and semi-infinite-body cooling curves with a
//! temperature-dependent heat-transfer coefficient.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::erfcx;
use crate::table;

/// Temperature at which the CCT cooling rate of a curve is measured, K.
pub const CCT_REFERENCE_TEMPERATURE: f64 = 1173.15;

/// Step of the central difference used by [`cct_rate_of`], s.
pub const RATE_FD_STEP: f64 = 1e-4;

/// Start temperature of the TTT protocol, K.
pub const TTT_START_TEMPERATURE: f64 = 1400.0;

/// Quench rate of the TTT protocol, K/s.
pub const TTT_QUENCH_RATE: f64 = -500.0;

/// A temperature history `T(t)` defined on `[0, end_time]`.
pub trait TemperaturePath: Send + Sync {
    /// Temperature in kelvin at time `t` (seconds).
    fn temperature(&self, t: f64) -> f64;

    /// Last time covered by the path; integrations stop here.
    fn end_time(&self) -> f64;

    /// `dT/dt` at `t`, K/s. The default is a central difference.
    fn rate(&self, t: f64) -> f64 {
        let h = RATE_FD_STEP;
        let lo = (t - h).max(0.0);
        (self.temperature(t + h) - self.temperature(lo)) / (t + h - lo)
    }

    /// First time at which the path falls through `level`, if any.
    fn first_downward_crossing(&self, level: f64) -> Option<f64> {
        let end = self.end_time();
        let n = 100_000;
        let h = end / n as f64;
        let mut prev = self.temperature(0.0);
        if prev == level && self.temperature(h.min(end)) < level {
            return Some(0.0);
        }
        for i in 1..=n {
            let t = i as f64 * h;
            let cur = self.temperature(t);
            if prev > level && cur <= level {
                return Some(bisect_crossing(|s| self.temperature(s), level, t - h, t));
            }
            prev = cur;
        }
        None
    }
}

/// Bisects for the time in `[lo, hi]` where a falling `f` passes `level`.
fn bisect_crossing(f: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sampled path with linear interpolation between strictly increasing times.
/// Outside the sampled range the end temperatures are held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearPath {
    times: Vec<f64>,
    temps: Vec<f64>,
}

impl PiecewiseLinearPath {
    pub fn new(times: Vec<f64>, temps: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != temps.len() {
            return Err(Error::domain(format!(
                "path needs matching, nonempty time and temperature columns ({} vs {})",
                times.len(),
                temps.len()
            )));
        }
        for (i, (&t, &temp)) in times.iter().zip(&temps).enumerate() {
            if !t.is_finite() || !temp.is_finite() || temp <= 0.0 {
                return Err(Error::domain(format!(
                    "path sample {i} is invalid: t = {t}, T = {temp}"
                )));
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "path times must increase strictly (sample {})",
                i + 1
            )));
        }
        Ok(Self { times, temps })
    }

    /// Path that stays at `temp` until `end`.
    pub fn constant(temp: f64, end: f64) -> Result<Self> {
        if end > 0.0 {
            Self::new(vec![0.0, end], vec![temp, temp])
        } else {
            Self::new(vec![0.0], vec![temp])
        }
    }

    /// Linear ramp from `start` at `rate` K/s down (or up) to `stop`, then
    /// held at `stop` for `hold` seconds.
    pub fn ramp(start: f64, stop: f64, rate: f64, hold: f64) -> Result<Self> {
        if rate == 0.0 || !rate.is_finite() {
            return Err(Error::domain(format!("ramp rate must be nonzero, got {rate}")));
        }
        let t_ramp = ((stop - start) / rate).abs();
        let mut times = vec![0.0];
        let mut temps = vec![start];
        if t_ramp > 0.0 {
            times.push(t_ramp);
            temps.push(stop);
        }
        if hold > 0.0 {
            times.push(t_ramp + hold);
            temps.push(stop);
        }
        Self::new(times, temps)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temps
    }

    fn segment(&self, t: f64) -> Option<usize> {
        if self.times.len() < 2 || t < self.times[0] || t >= self.times[self.times.len() - 1] {
            return None;
        }
        Some(self.times.partition_point(|&x| x <= t) - 1)
    }
}

impl TemperaturePath for PiecewiseLinearPath {
    fn temperature(&self, t: f64) -> f64 {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.temps[0];
        }
        if t >= self.times[last] {
            return self.temps[last];
        }
        let i = self.times.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        self.temps[i] + w * (self.temps[i + 1] - self.temps[i])
    }

    fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn rate(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some(i) => (self.temps[i + 1] - self.temps[i]) / (self.times[i + 1] - self.times[i]),
            None => 0.0,
        }
    }

    fn first_downward_crossing(&self, level: f64) -> Option<f64> {
        for i in 0..self.times.len().saturating_sub(1) {
            let (a, b) = (self.temps[i], self.temps[i + 1]);
            if a >= level && b < level || a > level && b <= level {
                let w = (a - level) / (a - b);
                return Some(self.times[i] + w * (self.times[i + 1] - self.times[i]));
            }
        }
        None
    }
}

/// TTT protocol path: start at 1400 K, quench at 500 K/s to `target`, hold
/// for `hold` seconds.
pub fn ttt_path(target: f64, hold: f64) -> Result<PiecewiseLinearPath> {
    if !(350.0..=1300.0).contains(&target) {
        log::warn!("TTT target {target} K lies outside the usual 350-1300 K range");
    }
    PiecewiseLinearPath::ramp(TTT_START_TEMPERATURE, target, TTT_QUENCH_RATE, hold)
}

/// Time at which the TTT quench reaches `target`.
pub fn ttt_quench_duration(target: f64) -> f64 {
    ((target - TTT_START_TEMPERATURE) / TTT_QUENCH_RATE).abs()
}

/// Parameters of the semi-infinite-body cooling solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SibParams {
    /// Initial body temperature, K.
    pub t0: f64,
    /// Ambient temperature, K.
    pub t_inf: f64,
    /// Thermal diffusivity, mm^2/s.
    pub diffusivity: f64,
    /// Heat-transfer polynomial coefficients, 1/m.
    pub a_g: f64,
    pub b_g: f64,
    pub c_g: f64,
    /// Dimensionless scale of the heat-transfer coefficient.
    pub s_g: f64,
    /// Depth below the cooled surface, mm.
    pub depth: f64,
}

impl Default for SibParams {
    fn default() -> Self {
        Self {
            t0: 1323.0,
            t_inf: 293.15,
            diffusivity: 10.0,
            a_g: 73.8,
            b_g: -39.3,
            c_g: 6.3,
            s_g: 1.0,
            depth: 3.2,
        }
    }
}

impl SibParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.t0,
            self.t_inf,
            self.diffusivity,
            self.a_g,
            self.b_g,
            self.c_g,
            self.s_g,
            self.depth,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("cooling parameters must be finite".into()));
        }
        if self.diffusivity <= 0.0 {
            return Err(Error::Config(format!(
                "diffusivity must be positive, got {}",
                self.diffusivity
            )));
        }
        if self.depth < 0.0 {
            return Err(Error::Config(format!("depth must be >= 0, got {}", self.depth)));
        }
        if self.t0 <= self.t_inf || self.t_inf <= 0.0 {
            return Err(Error::Config(format!(
                "need 0 < t_inf < t0, got t_inf = {}, t0 = {}",
                self.t_inf, self.t0
            )));
        }
        if self.s_g < 0.0 {
            return Err(Error::Config(format!("s_g must be >= 0, got {}", self.s_g)));
        }
        Ok(())
    }
}

/// Heat-transfer coefficient `g(T)` in 1/m, quadratic in the reduced
/// temperature `(T - T_inf) / T_inf`.
pub fn g_of_t(temp: f64, p: &SibParams) -> f64 {
    let theta = (temp - p.t_inf) / p.t_inf;
    p.s_g * (p.a_g + p.b_g * theta + p.c_g * theta * theta)
}

/// Constant-g solution at depth `p.depth` and time `t > 0`, with `g` in 1/m.
fn sib_constant_g(t: f64, g: f64, p: &SibParams) -> f64 {
    let g_mm = g.max(0.0) * 1e-3;
    let s = (p.diffusivity * t).sqrt();
    let z = p.depth / (2.0 * s);
    let w = z + g_mm * s;
    // exp(g x + g^2 a t) erfc(w) == erfcx(w) exp(-z^2)
    let surface = erfcx(w) * (-z * z).exp();
    p.t0 + (p.t_inf - p.t0) * (libm::erfc(z) - surface)
}

/// Temperature of the semi-infinite body at time `t`.
///
/// `g` is taken at the temperature being computed: the returned value solves
/// `T = F(t, g(T))`, where `F` is the constant-coefficient solution.
pub fn sib_temperature(t: f64, p: &SibParams) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(sib_temperature_unchecked(t, p))
}

fn sib_temperature_unchecked(t: f64, p: &SibParams) -> f64 {
    if t == 0.0 {
        return p.t0;
    }
    let (mut lo, mut hi) = (p.t_inf, p.t0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid > sib_constant_g(t, g_of_t(mid, p), p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A semi-infinite-body cooling curve followed down to `cutoff`, then closed
/// by a linear tail to the ambient temperature.
///
/// The analytic curve approaches ambient only asymptotically; the tail keeps
/// the slope of the curve at the cutoff (at least 1 K/s) so every curve ends
/// at room temperature in finite time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SibCurve {
    params: SibParams,
    cutoff: f64,
    t_cutoff: f64,
    tail_rate: f64,
}

/// Default temperature at which [`SibCurve`] switches to its linear tail, K.
pub const SIB_DEFAULT_CUTOFF: f64 = 400.0;

impl SibCurve {
    pub fn new(params: SibParams, cutoff: f64) -> Result<Self> {
        params.validate()?;
        if !(cutoff > params.t_inf && cutoff < params.t0) {
            return Err(Error::domain(format!(
                "cutoff {cutoff} K must lie between {} K and {} K",
                params.t_inf, params.t0
            )));
        }
        let f = |t: f64| sib_temperature_unchecked(t, &params);
        let mut hi = 1.0;
        while f(hi) > cutoff {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Descriptor(format!(
                    "cooling curve never reaches {cutoff} K (s_g = {})",
                    params.s_g
                )));
            }
        }
        let t_cutoff = bisect_crossing(f, cutoff, 0.0, hi);
        let h = RATE_FD_STEP;
        let slope = (f(t_cutoff + h) - f((t_cutoff - h).max(0.0))) / (t_cutoff + h - (t_cutoff - h).max(0.0));
        Ok(Self {
            params,
            cutoff,
            t_cutoff,
            tail_rate: slope.abs().max(1.0),
        })
    }

    pub fn params(&self) -> &SibParams {
        &self.params
    }

    /// Time at which the analytic part ends.
    pub fn cutoff_time(&self) -> f64 {
        self.t_cutoff
    }
}

impl TemperaturePath for SibCurve {
    fn temperature(&self, t: f64) -> f64 {
        if t <= self.t_cutoff {
            sib_temperature_unchecked(t.max(0.0), &self.params)
        } else {
            (self.cutoff - self.tail_rate * (t - self.t_cutoff)).max(self.params.t_inf)
        }
    }

    fn end_time(&self) -> f64 {
        self.t_cutoff + (self.cutoff - self.params.t_inf) / self.tail_rate
    }

    fn first_downward_crossing(&self, level: f64) -> Option<f64> {
        if level >= self.params.t0 || level <= self.params.t_inf {
            return None;
        }
        if level >= self.cutoff {
            Some(bisect_crossing(|t| self.temperature(t), level, 0.0, self.t_cutoff))
        } else {
            Some(self.t_cutoff + (self.cutoff - level) / self.tail_rate)
        }
    }
}

/// CCT cooling rate of a path: `dT/dt` at its first downward crossing of
/// 1173.15 K, by central difference.
pub fn cct_rate_of(path: &(impl TemperaturePath + ?Sized)) -> Result<f64> {
    let tc = path
        .first_downward_crossing(CCT_REFERENCE_TEMPERATURE)
        .ok_or_else(|| Error::Descriptor(format!("path never cools through {CCT_REFERENCE_TEMPERATURE} K")))?;
    let h = RATE_FD_STEP;
    let lo = (tc - h).max(0.0);
    Ok((path.temperature(tc + h) - path.temperature(lo)) / (tc + h - lo))
}

/// CCT rate of the pure analytic curve for the given parameters.
pub fn sib_cct_rate(p: &SibParams) -> Result<f64> {
    p.validate()?;
    if CCT_REFERENCE_TEMPERATURE >= p.t0 || CCT_REFERENCE_TEMPERATURE <= p.t_inf {
        return Err(Error::Descriptor(format!(
            "cooling from {} K to {} K never passes {CCT_REFERENCE_TEMPERATURE} K",
            p.t0, p.t_inf
        )));
    }
    let curve = SibCurve::new(*p, (CCT_REFERENCE_TEMPERATURE + p.t_inf) / 2.0)?;
    cct_rate_of(&curve)
}

/// Reads a `time_s,temp_K` CSV history.
pub fn load_path_csv(file: impl AsRef<Path>) -> Result<PiecewiseLinearPath> {
    table::with_file(file.as_ref(), read_path_csv)
}

/// Parses a `time_s,temp_K` CSV history from any reader.
pub fn read_path_csv(reader: impl Read) -> Result<PiecewiseLinearPath> {
    let rows = table::read_columns(reader, &["time_s", "temp_K"])?;
    let mut times = Vec::with_capacity(rows.len());
    let mut temps = Vec::with_capacity(rows.len());
    for row in &rows {
        let t = row.number(0, "time_s")?;
        let temp = row.number(1, "temp_K")?;
        if temp <= 0.0 {
            return Err(row.error(format!("temperature must be positive, got {temp}")));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(row.error(format!("time {t} does not increase (previous {prev})")));
            }
        }
        times.push(t);
        temps.push(temp);
    }
    if times.is_empty() {
        return Err(Error::Parse {
            file: None,
            line: 1,
            message: "no samples".into(),
        });
    }
    PiecewiseLinearPath::new(times, temps)
}
