//! Parameter identification: a bounded Levenberg-Marquardt engine and the
//! isothermal (TTT), heating and cooling-curve objectives.
//!
//! Each objective turns a parameter vector into a residual vector; the
//! `calibrate_*` functions run the engine on it with the parameter bounds
//! from [`ttt_parameters`], [`heating_parameters`] and
//! [`cooling_parameters`].

mod data;
mod lm;
mod objectives;
pub mod synthetic;

pub use data::{
    load_cooling_series, load_heating_series, load_ttt_observations, read_cooling_series, read_heating_series,
    read_ttt_observations, series_depth, CoolingSeries, HeatingSeries, TttObservation, THERMOCOUPLE_DEPTHS,
};
pub use lm::{central_jacobian, forward_jacobian, levenberg_marquardt, LmConfig, LmReport, Parameter};
pub use objectives::{
    calibrate_cooling, calibrate_heating, calibrate_ttt, cooling_objective, cooling_parameters, cooling_prediction,
    heating_objective, heating_parameters, heating_prediction, trapezoid_weights, ttt_objective, ttt_parameters,
    ttt_predictions, with_cooling_theta, with_heating_theta, with_ttt_theta, TTT_OBSERVATION_RANGE,
};
