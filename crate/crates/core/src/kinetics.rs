//! Diffusion-rate laws and the three diffusional transformation rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_model::PhaseState;

/// Beta left over at equilibrium; the alpha dissolution rate grows from the
/// beta fraction in excess of it.
const RESIDUAL_BETA: f64 = 0.1;

/// Parameters of the logistic diffusion rate and the modified logistic
/// transformation laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// Exponent of the beta -> alpha_s and alpha_m -> alpha_s laws.
    pub c_alpha_s: f64,
    /// Saturation rate, 1/s.
    pub k1: f64,
    /// Logistic midpoint, K.
    pub k2: f64,
    /// Logistic steepness, 1/K.
    pub k3: f64,
    /// Exponent of the alpha_s -> beta law.
    pub c_beta: f64,
    /// Dissolution speed-up factor.
    pub f: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            c_alpha_s: 2.51,
            k1: 0.294,
            k2: 850.0,
            k3: 0.0337,
            c_beta: 11.0,
            f: 3.8,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, ok: bool, v: f64| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("invalid kinetics.{name} = {v}")))
            }
        };
        check("c_alpha_s", self.c_alpha_s > 1.0, self.c_alpha_s)?;
        check("c_beta", self.c_beta > 1.0, self.c_beta)?;
        check("k1", self.k1 >= 0.0, self.k1)?;
        check("k2", true, self.k2)?;
        check("k3", self.k3 > 0.0, self.k3)?;
        check("f", self.f >= 0.0, self.f)?;
        Ok(())
    }
}

/// Rates of the three diffusion-controlled transformations, all per second
/// and nonnegative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformationRates {
    pub beta_to_as: f64,
    pub am_to_as: f64,
    pub as_to_beta: f64,
}

impl TransformationRates {
    pub const ZERO: Self = Self {
        beta_to_as: 0.0,
        am_to_as: 0.0,
        as_to_beta: 0.0,
    };

    /// Net rate of change of the stable alpha fraction.
    pub fn alpha_s_rate(&self) -> f64 {
        self.beta_to_as + self.am_to_as - self.as_to_beta
    }

    /// Net rate of change of martensite due to diffusion.
    pub fn alpha_m_rate(&self) -> f64 {
        -self.am_to_as
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        Self {
            beta_to_as: 0.5 * (self.beta_to_as + other.beta_to_as),
            am_to_as: 0.5 * (self.am_to_as + other.am_to_as),
            as_to_beta: 0.5 * (self.as_to_beta + other.as_to_beta),
        }
    }
}

/// Logistic diffusion rate `k1 / (1 + exp(-k3 (T - k2)))`, evaluated so that
/// neither branch can overflow.
pub fn k_alpha_s(temp: f64, p: &DiffusionParams) -> f64 {
    let z = p.k3 * (temp - p.k2);
    if z >= 0.0 {
        p.k1 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        p.k1 * e / (1.0 + e)
    }
}

/// Diffusion rate of alpha_s dissolution, `f` times [`k_alpha_s`].
pub fn k_beta(temp: f64, p: &DiffusionParams) -> f64 {
    p.f * k_alpha_s(temp, p)
}

/// `k * a^((c-1)/c) * b^((c+1)/c)` with both bases clamped at zero.
fn modified_logistic(k: f64, interface: f64, driving: f64, c: f64) -> f64 {
    if driving <= 0.0 || interface <= 0.0 || k <= 0.0 {
        return 0.0;
    }
    k * interface.powf((c - 1.0) / c) * driving.powf((c + 1.0) / c)
}

/// Diffusional beta -> alpha_s formation. `x_beta_eq` is the equilibrium beta
/// fraction at the current temperature.
pub fn rate_beta_to_alpha_s(s: &PhaseState, temp: f64, p: &DiffusionParams, x_beta_eq: f64) -> f64 {
    modified_logistic(k_alpha_s(temp, p), s.x_alpha_s, s.x_beta - x_beta_eq, p.c_alpha_s)
}

/// Diffusional alpha_m -> alpha_s conversion towards zero martensite.
pub fn rate_am_to_alpha_s(s: &PhaseState, temp: f64, p: &DiffusionParams) -> f64 {
    modified_logistic(k_alpha_s(temp, p), s.x_alpha_s, s.x_alpha_m, p.c_alpha_s)
}

/// Diffusional alpha_s -> beta dissolution. `x_alpha_eq` is the equilibrium
/// alpha fraction at the current temperature.
pub fn rate_alpha_s_to_beta(s: &PhaseState, temp: f64, p: &DiffusionParams, x_alpha_eq: f64) -> f64 {
    let corrected_beta = (s.x_beta - RESIDUAL_BETA).max(0.0);
    modified_logistic(k_beta(temp, p), corrected_beta, s.alpha() - x_alpha_eq, p.c_beta)
}

/// All three rates at once.
pub fn transformation_rates(s: &PhaseState, temp: f64, p: &DiffusionParams, x_alpha_eq: f64) -> TransformationRates {
    TransformationRates {
        beta_to_as: rate_beta_to_alpha_s(s, temp, p, 1.0 - x_alpha_eq),
        am_to_as: rate_am_to_alpha_s(s, temp, p),
        as_to_beta: rate_alpha_s_to_beta(s, temp, p, x_alpha_eq),
    }
}
