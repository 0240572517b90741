//! The full parameter record of the microstructure model.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kinetics::DiffusionParams;
use crate::phase_model::{CharacteristicTemperatures, EquilibriumParams};

/// Characteristic temperatures, equilibrium exponents and diffusion
/// parameters. `Default` gives the calibrated Ti-6Al-4V set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub temps: CharacteristicTemperatures,
    pub equilibrium: EquilibriumParams,
    pub diffusion: DiffusionParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.temps.validate()?;
        self.equilibrium.validate()?;
        self.diffusion.validate()
    }
}
