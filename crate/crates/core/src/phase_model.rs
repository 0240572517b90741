//! Characteristic temperatures, the phase-fraction state and the algebraic
//! equilibrium / pseudo-equilibrium laws.
//!
//! All laws are pure functions of temperature (and, for martensite, of the
//! current stable-alpha fraction). Temperatures are in kelvin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound of the total alpha fraction (stable + martensite). The
/// remaining 10 % is beta at equilibrium below the alpha-transus end.
pub const MAX_ALPHA: f64 = 0.9;

/// Slack allowed when validating sums and bounds.
pub const FRACTION_TOL: f64 = 1e-12;

/// Transformation temperatures of the alloy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTemperatures {
    /// Martensite end.
    pub martensite_end: f64,
    /// Martensite start.
    pub martensite_start: f64,
    /// Alpha-transus end; below it the equilibrium alpha fraction is 0.9.
    pub alpha_transus_end: f64,
    /// Alpha-transus start; above it the equilibrium alpha fraction is 0.
    pub alpha_transus_start: f64,
    pub solidus: f64,
    pub liquidus: f64,
    /// Room temperature, also the lower cap of the martensite law.
    pub room: f64,
}

impl Default for CharacteristicTemperatures {
    fn default() -> Self {
        Self {
            martensite_end: 293.0,
            martensite_start: 848.0,
            alpha_transus_end: 935.0,
            alpha_transus_start: 1273.0,
            solidus: 1878.0,
            liquidus: 1928.0,
            room: 293.15,
        }
    }
}

impl CharacteristicTemperatures {
    pub fn validate(&self) -> Result<()> {
        let chain = [
            ("martensite_end", self.martensite_end),
            ("martensite_start", self.martensite_start),
            ("alpha_transus_end", self.alpha_transus_end),
            ("alpha_transus_start", self.alpha_transus_start),
            ("solidus", self.solidus),
            ("liquidus", self.liquidus),
        ];
        for (name, v) in chain.iter().chain(std::iter::once(&("room", self.room))) {
            if !v.is_finite() || *v <= 0.0 {
                return Err(Error::Config(format!(
                    "temperature {name} must be finite and positive, got {v}"
                )));
            }
        }
        for w in chain.windows(2) {
            if w[0].1 >= w[1].1 {
                return Err(Error::Config(format!(
                    "characteristic temperatures must increase: {} ({}) >= {} ({})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(())
    }
}

/// Exponents of the two Koistinen-Marburger type laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumParams {
    /// Per kelvin, stable alpha law.
    pub k_alpha_eq: f64,
    /// Per kelvin, martensite law.
    pub k_alpham_eq: f64,
    pub x_max: f64,
}

impl Default for EquilibriumParams {
    fn default() -> Self {
        Self {
            k_alpha_eq: 0.0068,
            k_alpham_eq: 0.00415,
            x_max: MAX_ALPHA,
        }
    }
}

impl EquilibriumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_alpha_eq > 0.0 && self.k_alpha_eq.is_finite()) {
            return Err(Error::Config(format!(
                "k_alpha_eq must be positive, got {}",
                self.k_alpha_eq
            )));
        }
        if !(self.k_alpham_eq > 0.0 && self.k_alpham_eq.is_finite()) {
            return Err(Error::Config(format!(
                "k_alpham_eq must be positive, got {}",
                self.k_alpham_eq
            )));
        }
        if !(self.x_max > 0.0 && self.x_max <= 1.0) {
            return Err(Error::Config(format!(
                "x_max must lie in (0, 1], got {}",
                self.x_max
            )));
        }
        Ok(())
    }
}

/// Volume-averaged phase fractions at one material point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x_alpha_s: f64,
    pub x_alpha_m: f64,
    pub x_beta: f64,
    pub x_liq: f64,
}

impl PhaseState {
    /// Validated constructor.
    pub fn new(x_alpha_s: f64, x_alpha_m: f64, x_beta: f64, x_liq: f64) -> Result<Self> {
        let s = Self {
            x_alpha_s,
            x_alpha_m,
            x_beta,
            x_liq,
        };
        s.validate()?;
        Ok(s)
    }

    pub const fn pure_beta() -> Self {
        Self {
            x_alpha_s: 0.0,
            x_alpha_m: 0.0,
            x_beta: 1.0,
            x_liq: 0.0,
        }
    }

    pub const fn liquid() -> Self {
        Self {
            x_alpha_s: 0.0,
            x_alpha_m: 0.0,
            x_beta: 0.0,
            x_liq: 1.0,
        }
    }

    /// Solid state made of the two given alpha fractions and the beta complement.
    pub fn solid(x_alpha_s: f64, x_alpha_m: f64) -> Result<Self> {
        Self::new(x_alpha_s, x_alpha_m, 1.0 - x_alpha_s - x_alpha_m, 0.0)
    }

    /// Slow-cooling equilibrium composition at `temp` (no martensite).
    pub fn equilibrium(temp: f64, temps: &CharacteristicTemperatures, eq: &EquilibriumParams) -> Result<Self> {
        let solid = solid_fraction(temp, temps)?;
        if solid < 1.0 {
            return Ok(Self {
                x_alpha_s: 0.0,
                x_alpha_m: 0.0,
                x_beta: solid,
                x_liq: 1.0 - solid,
            });
        }
        let a = alpha_equilibrium(temp, eq, temps);
        Ok(Self {
            x_alpha_s: a,
            x_alpha_m: 0.0,
            x_beta: 1.0 - a,
            x_liq: 0.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.x_alpha_s + self.x_alpha_m
    }

    pub fn sum(&self) -> f64 {
        self.x_alpha_s + self.x_alpha_m + self.x_beta + self.x_liq
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("x_alpha_s", self.x_alpha_s),
            ("x_alpha_m", self.x_alpha_m),
            ("x_beta", self.x_beta),
            ("x_liq", self.x_liq),
        ];
        for (name, v) in fields {
            if !v.is_finite() || !(-FRACTION_TOL..=1.0 + FRACTION_TOL).contains(&v) {
                return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.x_alpha_s > MAX_ALPHA + FRACTION_TOL || self.x_alpha_m > MAX_ALPHA + FRACTION_TOL {
            return Err(Error::domain(format!(
                "alpha fractions exceed {MAX_ALPHA}: alpha_s = {}, alpha_m = {}",
                self.x_alpha_s, self.x_alpha_m
            )));
        }
        if self.alpha() > MAX_ALPHA + FRACTION_TOL {
            return Err(Error::domain(format!(
                "total alpha {} exceeds {MAX_ALPHA}",
                self.alpha()
            )));
        }
        if (self.sum() - 1.0).abs() > FRACTION_TOL {
            return Err(Error::domain(format!(
                "phase fractions sum to {}, expected 1",
                self.sum()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_temperature(temp: f64) -> Result<f64> {
    if temp.is_finite() && temp > 0.0 {
        Ok(temp)
    } else {
        Err(Error::domain(format!(
            "temperature must be finite and positive, got {temp}"
        )))
    }
}

/// Solid phase fraction: 1 below the solidus, 0 above the liquidus, linear in between.
pub fn solid_fraction(temp: f64, temps: &CharacteristicTemperatures) -> Result<f64> {
    let temp = check_temperature(temp)?;
    Ok(solid_fraction_unchecked(temp, temps))
}

pub(crate) fn solid_fraction_unchecked(temp: f64, temps: &CharacteristicTemperatures) -> f64 {
    if temp <= temps.solidus {
        1.0
    } else if temp >= temps.liquidus {
        0.0
    } else {
        1.0 - (temp - temps.solidus) / (temps.liquidus - temps.solidus)
    }
}

/// Stable equilibrium alpha fraction.
///
/// The exponential branch is clamped to `x_max` so the plateau below the
/// alpha-transus end joins it without exceeding 0.9.
pub fn alpha_equilibrium(temp: f64, p: &EquilibriumParams, temps: &CharacteristicTemperatures) -> f64 {
    if temp > temps.alpha_transus_start {
        0.0
    } else if temp < temps.alpha_transus_end {
        p.x_max
    } else {
        let v = -(-p.k_alpha_eq * (temps.alpha_transus_start - temp)).exp_m1();
        v.min(p.x_max)
    }
}

/// Equilibrium beta fraction, the complement of [`alpha_equilibrium`].
pub fn beta_equilibrium(temp: f64, p: &EquilibriumParams, temps: &CharacteristicTemperatures) -> f64 {
    1.0 - alpha_equilibrium(temp, p, temps)
}

/// Martensite pseudo-equilibrium in the absence of stable alpha.
pub fn martensite_pseudo_eq_base(temp: f64, p: &EquilibriumParams, temps: &CharacteristicTemperatures) -> f64 {
    if temp > temps.martensite_start {
        0.0
    } else if temp < temps.room {
        p.x_max
    } else {
        let v = -(-p.k_alpham_eq * (temps.martensite_start - temp)).exp_m1();
        v.min(p.x_max)
    }
}

/// Martensite pseudo-equilibrium reduced by the beta already consumed by
/// stable alpha.
pub fn martensite_pseudo_eq(
    temp: f64,
    x_alpha_s: f64,
    p: &EquilibriumParams,
    temps: &CharacteristicTemperatures,
) -> Result<f64> {
    if !(x_alpha_s >= -FRACTION_TOL && x_alpha_s <= p.x_max + FRACTION_TOL) {
        return Err(Error::domain(format!(
            "x_alpha_s = {x_alpha_s} outside [0, {}]",
            p.x_max
        )));
    }
    Ok(martensite_pseudo_eq_unchecked(temp, x_alpha_s, p, temps))
}

pub(crate) fn martensite_pseudo_eq_unchecked(
    temp: f64,
    x_alpha_s: f64,
    p: &EquilibriumParams,
    temps: &CharacteristicTemperatures,
) -> f64 {
    let free = (p.x_max - x_alpha_s).clamp(0.0, p.x_max) / p.x_max;
    martensite_pseudo_eq_base(temp, p, temps) * free
}

/// The equilibrium values needed by one integration step, evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibria {
    pub alpha: f64,
    pub beta: f64,
    pub martensite: f64,
}

impl Equilibria {
    pub fn at(temp: f64, x_alpha_s: f64, p: &EquilibriumParams, temps: &CharacteristicTemperatures) -> Self {
        let alpha = alpha_equilibrium(temp, p, temps);
        Self {
            alpha,
            beta: 1.0 - alpha,
            martensite: martensite_pseudo_eq_unchecked(temp, x_alpha_s, p, temps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn d() -> (EquilibriumParams, CharacteristicTemperatures) {
        (EquilibriumParams::default(), CharacteristicTemperatures::default())
    }

    #[test]
    fn solid_fraction_ramp() {
        let t = CharacteristicTemperatures::default();
        assert_eq!(solid_fraction(1878.0, &t).unwrap(), 1.0);
        assert_abs_diff_eq!(solid_fraction(1903.0, &t).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(solid_fraction(1928.0, &t).unwrap(), 0.0);
        assert_eq!(solid_fraction(300.0, &t).unwrap(), 1.0);
        assert_eq!(solid_fraction(2500.0, &t).unwrap(), 0.0);
        assert!(solid_fraction(f64::NAN, &t).is_err());
        assert!(solid_fraction(f64::INFINITY, &t).is_err());
        assert!(solid_fraction(-5.0, &t).is_err());
    }

    #[test]
    fn alpha_equilibrium_values() {
        let (p, t) = d();
        assert_eq!(alpha_equilibrium(1273.0, &p, &t), 0.0);
        // the exponential branch reaches 0.8996 at the transus end, the plateau is 0.9
        assert_abs_diff_eq!(alpha_equilibrium(935.0, &p, &t), 0.9, epsilon = 5e-4);
        assert_eq!(alpha_equilibrium(934.999, &p, &t), 0.9);
        assert_eq!(alpha_equilibrium(500.0, &p, &t), 0.9);
        assert_eq!(alpha_equilibrium(1400.0, &p, &t), 0.0);
        // 1 - exp(-0.0068 * 173), high-precision reference
        assert_abs_diff_eq!(alpha_equilibrium(1100.0, &p, &t), 0.691_613_064_382_127, epsilon = 1e-14);
    }

    #[test]
    fn beta_equilibrium_values() {
        let (p, t) = d();
        assert_abs_diff_eq!(beta_equilibrium(935.0, &p, &t), 0.1, epsilon = 5e-4);
        assert_abs_diff_eq!(beta_equilibrium(900.0, &p, &t), 0.1, epsilon = 1e-15);
        assert_eq!(beta_equilibrium(1273.0, &p, &t), 1.0);
        assert_abs_diff_eq!(beta_equilibrium(1100.0, &p, &t), 0.308_386_935_617_873, epsilon = 1e-14);
    }

    #[test]
    fn martensite_base_values() {
        let (p, t) = d();
        assert_eq!(martensite_pseudo_eq_base(848.0, &p, &t), 0.0);
        assert_abs_diff_eq!(martensite_pseudo_eq_base(293.15, &p, &t), 0.9, epsilon = 1e-3);
        assert_abs_diff_eq!(martensite_pseudo_eq_base(500.0, &p, &t), 0.764_065_251_124_026, epsilon = 1e-14);
        assert_eq!(martensite_pseudo_eq_base(200.0, &p, &t), 0.9);
    }

    #[test]
    fn martensite_scaled_values() {
        let (p, t) = d();
        assert_eq!(martensite_pseudo_eq(293.15, 0.9, &p, &t).unwrap(), 0.0);
        assert_abs_diff_eq!(martensite_pseudo_eq(293.15, 0.0, &p, &t).unwrap(), 0.9, epsilon = 1e-3);
        assert_abs_diff_eq!(
            martensite_pseudo_eq(500.0, 0.45, &p, &t).unwrap(),
            0.382_032_625_562_013,
            epsilon = 1e-14
        );
        assert!(martensite_pseudo_eq(500.0, 0.95, &p, &t).is_err());
    }

    #[test]
    fn continuity_across_breakpoints() {
        let (p, t) = d();
        let eps = 1e-6;
        for bp in [t.alpha_transus_end, t.alpha_transus_start, t.martensite_start, t.room, t.solidus, t.liquidus] {
            let fa = |x| alpha_equilibrium(x, &p, &t);
            let fm = |x| martensite_pseudo_eq_base(x, &p, &t);
            let fs = |x| solid_fraction(x, &t).unwrap();
            // the alpha plateau meets the exponential branch with a 4.2e-4 step at the
            // transus end; every other breakpoint is continuous
            let tol = if bp == t.alpha_transus_end { 5e-4 } else { 1e-7 };
            for f in [&fa as &dyn Fn(f64) -> f64, &fm, &fs] {
                assert!((f(bp + eps) - f(bp - eps)).abs() < tol, "jump at {bp}");
            }
        }
    }

    #[test]
    fn monotone_nonincreasing() {
        let (p, t) = d();
        let grid: Vec<f64> = (0..=18000).map(|i| 200.0 + 0.1 * i as f64).collect();
        for w in grid.windows(2) {
            assert!(alpha_equilibrium(w[1], &p, &t) <= alpha_equilibrium(w[0], &p, &t));
            assert!(martensite_pseudo_eq_base(w[1], &p, &t) <= martensite_pseudo_eq_base(w[0], &p, &t));
        }
    }

    #[test]
    fn state_validation() {
        assert!(PhaseState::new(0.5, 0.3, 0.2, 0.0).is_ok());
        assert!(PhaseState::new(0.6, 0.4, 0.0, 0.0).is_err());
        assert!(PhaseState::new(0.5, 0.3, 0.3, 0.0).is_err());
        assert!(PhaseState::new(-0.1, 0.3, 0.8, 0.0).is_err());
        assert!(PhaseState::pure_beta().validate().is_ok());
        assert!(PhaseState::liquid().validate().is_ok());
    }

    #[test]
    fn equilibrium_state() {
        let (p, t) = d();
        let s = PhaseState::equilibrium(300.0, &t, &p).unwrap();
        assert_abs_diff_eq!(s.x_alpha_s, 0.9);
        assert_abs_diff_eq!(s.x_beta, 0.1, epsilon = 1e-15);
        let m = PhaseState::equilibrium(1903.0, &t, &p).unwrap();
        assert_abs_diff_eq!(m.x_liq, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.x_beta, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn defaults_are_ordered() {
        CharacteristicTemperatures::default().validate().unwrap();
        let mut bad = CharacteristicTemperatures::default();
        bad.martensite_start = 1000.0;
        assert!(bad.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn martensite_never_overfills(temp in 200.0f64..2000.0, xs in 0.0f64..=0.9) {
                let (p, t) = d();
                let m = martensite_pseudo_eq(temp, xs, &p, &t).unwrap();
                prop_assert!(m + xs < 0.9 + 1e-12);
                prop_assert!(m >= 0.0);
            }

            #[test]
            fn solid_and_liquid_complement(temp in 200.0f64..2500.0) {
                let t = CharacteristicTemperatures::default();
                let s = solid_fraction(temp, &t).unwrap();
                prop_assert_eq!(s + (1.0 - s), 1.0);
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }
}
