//! Phase-fraction kinetics for Ti-6Al-4V.
//!
//! The crate tracks the volume fractions of beta, stable alpha (`alpha_s`)
//! and martensite (`alpha_m`) at a material point driven by an arbitrary
//! temperature history. Diffusional transformations follow modified logistic
//! rate laws; martensite forms and dissolves instantaneously through
//! projections onto its pseudo-equilibrium.
//!
//! On top of the single-point integrator sit TTT and CCT diagram sweeps,
//! Levenberg-Marquardt calibration of the kinetic and heat-transfer
//! parameters, and a pointwise field post-processor for part-scale thermal
//! histories.
//!
//! ```
//! use tiphase::{integrate, ModelParams, PhaseState, StepConfig};
//! use tiphase::thermal::PiecewiseLinearPath;
//!
//! let params = ModelParams::default();
//! let quench = PiecewiseLinearPath::ramp(1400.0, 293.15, -500.0, 1.0).unwrap();
//! let traj = integrate(&PhaseState::pure_beta(), &quench, (0.0, 3.3), &StepConfig::default(), &params).unwrap();
//! assert!(traj.last().state.x_alpha_m > 0.85);
//! ```

pub mod calibrate;
pub mod cli;
pub mod config;
pub mod diagrams;
pub mod error;
pub mod field;
pub mod integrator;
pub mod kinetics;
pub mod output;
pub mod params;
pub mod phase_model;
pub mod special;
pub mod table;
pub mod thermal;

pub use error::{Error, Result};
pub use integrator::{integrate, integrate_on_grid, MaterialPoint, Sample, Scheme, StepConfig, Trajectory};
pub use kinetics::{DiffusionParams, TransformationRates};
pub use params::ModelParams;
pub use phase_model::{CharacteristicTemperatures, EquilibriumParams, PhaseState};
pub use thermal::{PiecewiseLinearPath, SibCurve, SibParams, TemperaturePath};
