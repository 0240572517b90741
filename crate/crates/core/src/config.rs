//! Run configuration read from flat `section.key = value` files.
//!
//! ```text
//! # comments start with '#'
//! kinetics.k1 = 0.294
//! step.scheme = cn
//! ttt.targets = 400, 800, 1200
//! ```
//!
//! Every key overrides one default; unknown or repeated keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::LmConfig;
use crate::diagrams::{CctConfig, TttConfig};
use crate::error::{Error, Result};
use crate::integrator::{Scheme, StepConfig};
use crate::params::ModelParams;
use crate::table;

/// Everything a CLI run can be configured with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunConfig {
    pub model: ModelParams,
    /// Stepper used by `simulate`, `field` and the heating fit. Its scheme is
    /// shared with the diagram sweeps.
    pub step: StepConfig,
    pub ttt: TttConfig,
    pub cct: CctConfig,
    pub lm: LmConfig,
    /// Start vector of a fit; the model defaults when absent.
    pub calibration_start: Option<Vec<f64>>,
    /// Whether `field` also writes one trajectory file per point.
    pub field_trajectories: bool,
}

/// Every key understood by [`RunConfig::set`].
pub const KEYS: &[&str] = &[
    "temps.martensite_end",
    "temps.martensite_start",
    "temps.alpha_transus_end",
    "temps.alpha_transus_start",
    "temps.solidus",
    "temps.liquidus",
    "temps.room",
    "equilibrium.k_alpha_eq",
    "equilibrium.k_alpham_eq",
    "equilibrium.x_max",
    "kinetics.c_alpha_s",
    "kinetics.k1",
    "kinetics.k2",
    "kinetics.k3",
    "kinetics.c_beta",
    "kinetics.f",
    "step.dt",
    "step.scheme",
    "step.cn_tolerance",
    "step.cn_max_iters",
    "step.record_every",
    "step.martensite",
    "ttt.targets",
    "ttt.thresholds",
    "ttt.hold",
    "ttt.ramp_dt",
    "ttt.growth",
    "ttt.max_dt",
    "ttt.settle_tol",
    "cct.rates",
    "cct.thresholds",
    "cct.cutoff",
    "cct.dt_factor",
    "cct.dt_min",
    "cct.dt_max",
    "cct.s_g_min",
    "cct.s_g_max",
    "cct.refine_iters",
    "sib.t0",
    "sib.t_inf",
    "sib.diffusivity",
    "sib.a_g",
    "sib.b_g",
    "sib.c_g",
    "sib.s_g",
    "sib.depth",
    "calibration.initial_damping",
    "calibration.damping_up",
    "calibration.damping_down",
    "calibration.max_iters",
    "calibration.grad_tol",
    "calibration.step_tol",
    "calibration.fd_rel_step",
    "calibration.start",
    "field.trajectories",
];

fn number(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{key}` expects a number, got {value:?}"))
}

fn count(key: &str, value: &str) -> std::result::Result<usize, String> {
    value
        .parse::<usize>()
        .map_err(|_| format!("`{key}` expects a nonnegative integer, got {value:?}"))
}

fn flag(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{key}` expects true or false, got {value:?}")),
    }
}

fn list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    value.split(',').map(|v| number(key, v.trim())).collect()
}

impl RunConfig {
    /// Overrides the setting `key` with the text `value`.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let m = &mut self.model;
        let num = |target: &mut f64| -> std::result::Result<(), String> {
            *target = number(key, value)?;
            Ok(())
        };
        match key {
            "temps.martensite_end" => num(&mut m.temps.martensite_end),
            "temps.martensite_start" => num(&mut m.temps.martensite_start),
            "temps.alpha_transus_end" => num(&mut m.temps.alpha_transus_end),
            "temps.alpha_transus_start" => num(&mut m.temps.alpha_transus_start),
            "temps.solidus" => num(&mut m.temps.solidus),
            "temps.liquidus" => num(&mut m.temps.liquidus),
            "temps.room" => num(&mut m.temps.room),
            "equilibrium.k_alpha_eq" => num(&mut m.equilibrium.k_alpha_eq),
            "equilibrium.k_alpham_eq" => num(&mut m.equilibrium.k_alpham_eq),
            "equilibrium.x_max" => num(&mut m.equilibrium.x_max),
            "kinetics.c_alpha_s" => num(&mut m.diffusion.c_alpha_s),
            "kinetics.k1" => num(&mut m.diffusion.k1),
            "kinetics.k2" => num(&mut m.diffusion.k2),
            "kinetics.k3" => num(&mut m.diffusion.k3),
            "kinetics.c_beta" => num(&mut m.diffusion.c_beta),
            "kinetics.f" => num(&mut m.diffusion.f),
            "step.dt" => num(&mut self.step.dt),
            "step.scheme" => {
                self.step.scheme = value.parse::<Scheme>().map_err(|e| e.to_string())?;
                Ok(())
            }
            "step.cn_tolerance" => num(&mut self.step.cn_tolerance),
            "step.cn_max_iters" => count(key, value).map(|v| self.step.cn_max_iters = v),
            "step.record_every" => count(key, value).map(|v| self.step.record_every = v),
            "step.martensite" => flag(key, value).map(|v| self.step.martensite = v),
            "ttt.targets" => list(key, value).map(|v| self.ttt.targets = v),
            "ttt.thresholds" => list(key, value).map(|v| self.ttt.thresholds = v),
            "ttt.hold" => num(&mut self.ttt.hold),
            "ttt.ramp_dt" => num(&mut self.ttt.ramp_dt),
            "ttt.growth" => num(&mut self.ttt.growth),
            "ttt.max_dt" => num(&mut self.ttt.max_dt),
            "ttt.settle_tol" => num(&mut self.ttt.settle_tol),
            "cct.rates" => list(key, value).map(|v| self.cct.rates = v),
            "cct.thresholds" => list(key, value).map(|v| self.cct.thresholds = v),
            "cct.cutoff" => num(&mut self.cct.cutoff),
            "cct.dt_factor" => num(&mut self.cct.dt_factor),
            "cct.dt_min" => num(&mut self.cct.dt_min),
            "cct.dt_max" => num(&mut self.cct.dt_max),
            "cct.s_g_min" => num(&mut self.cct.s_g_bracket.0),
            "cct.s_g_max" => num(&mut self.cct.s_g_bracket.1),
            "cct.refine_iters" => count(key, value).map(|v| self.cct.refine_iters = v),
            "sib.t0" => num(&mut self.cct.sib.t0),
            "sib.t_inf" => num(&mut self.cct.sib.t_inf),
            "sib.diffusivity" => num(&mut self.cct.sib.diffusivity),
            "sib.a_g" => num(&mut self.cct.sib.a_g),
            "sib.b_g" => num(&mut self.cct.sib.b_g),
            "sib.c_g" => num(&mut self.cct.sib.c_g),
            "sib.s_g" => num(&mut self.cct.sib.s_g),
            "sib.depth" => num(&mut self.cct.sib.depth),
            "calibration.initial_damping" => num(&mut self.lm.initial_damping),
            "calibration.damping_up" => num(&mut self.lm.damping_up),
            "calibration.damping_down" => num(&mut self.lm.damping_down),
            "calibration.max_iters" => count(key, value).map(|v| self.lm.max_iters = v),
            "calibration.grad_tol" => num(&mut self.lm.grad_tol),
            "calibration.step_tol" => num(&mut self.lm.step_tol),
            "calibration.fd_rel_step" => num(&mut self.lm.fd_rel_step),
            "calibration.start" => list(key, value).map(|v| self.calibration_start = Some(v)),
            "field.trajectories" => flag(key, value).map(|v| self.field_trajectories = v),
            _ => Err(format!("unknown key `{key}`")),
        }
    }

    /// Parses configuration text on top of the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = (i + 1) as u64;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                file: None,
                line,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("`{key}` is set twice")));
            }
            cfg.set(key, value).map_err(err)?;
            seen.push(key.to_string());
        }
        cfg.sync();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a configuration file.
    pub fn load(file: impl AsRef<Path>) -> Result<Self> {
        table::with_file(file.as_ref(), |mut f| {
            let mut text = String::new();
            std::io::Read::read_to_string(&mut f, &mut text).map_err(|e| Error::io(file.as_ref(), e))?;
            Self::parse(&text)
        })
    }

    /// Copies the shared stepper settings into the diagram configurations.
    pub fn sync(&mut self) {
        self.ttt.step = StepConfig { dt: self.ttt.ramp_dt, ..self.step };
        self.cct.step = self.step;
    }

    /// Checks every section; called before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.step.validate()?;
        self.ttt.validate()?;
        self.cct.validate()?;
        self.lm.validate()?;
        if let Some(start) = &self.calibration_start {
            if start.is_empty() {
                return Err(Error::Config("calibration.start is empty".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_keys() {
        let cfg = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg.model, ModelParams::default());
        assert_eq!(cfg.ttt.targets.len(), 95);
    }

    #[test]
    fn overrides() {
        let text = "kinetics.k1 = 0.5 # faster\nstep.scheme = cn\nttt.targets = 400, 800\nstep.martensite=false\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.model.diffusion.k1, 0.5);
        assert_eq!(cfg.step.scheme, Scheme::CrankNicolson);
        assert_eq!(cfg.ttt.step.scheme, Scheme::CrankNicolson);
        assert_eq!(cfg.cct.step.scheme, Scheme::CrankNicolson);
        assert_eq!(cfg.ttt.targets, vec![400.0, 800.0]);
        assert!(!cfg.step.martensite);
    }

    #[test]
    fn every_listed_key_is_accepted() {
        for key in KEYS {
            let mut cfg = RunConfig::default();
            let value = match *key {
                "step.scheme" => "euler",
                "step.martensite" | "field.trajectories" => "true",
                k if k.ends_with("iters") || k.ends_with("every") => "3",
                _ => "1.5",
            };
            cfg.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        match RunConfig::parse("kinetics.k1 = 0.3\nkinetics.k4 = 1\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("kinetics.k4"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(RunConfig::parse("kinetics.k1 0.3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("kinetics.k1 = x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            RunConfig::parse("kinetics.k1 = 1\nkinetics.k1 = 2"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn validation_runs_after_parsing() {
        assert!(matches!(RunConfig::parse("kinetics.c_beta = 0.5"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("step.dt = -1"), Err(Error::Config(_))));
    }
}
