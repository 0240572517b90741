//! Prints the equilibrium and martensite pseudo-equilibrium fractions and the
//! diffusional rate constants from room temperature to the liquidus.
//!
//!     cargo run --example equilibrium_curves

use tiphase::kinetics::{k_alpha_s, k_beta};
use tiphase::phase_model::{alpha_equilibrium, martensite_pseudo_eq_base};
use tiphase::{ModelParams, PhaseState};

fn main() -> tiphase::Result<()> {
    let p = ModelParams::default();
    println!("temp_K,alpha_eq,alpha_m_eq,beta,liquid,k_alpha_s,k_beta");
    for i in 0..=33 {
        let temp = 293.15 + 50.0 * i as f64;
        let state = PhaseState::equilibrium(temp, &p.temps, &p.equilibrium)?;
        println!(
            "{temp:.2},{:.4},{:.4},{:.4},{:.4},{:.4e},{:.4e}",
            alpha_equilibrium(temp, &p.equilibrium, &p.temps),
            martensite_pseudo_eq_base(temp, &p.equilibrium, &p.temps),
            state.x_beta,
            state.x_liq,
            k_alpha_s(temp, &p.diffusion),
            k_beta(temp, &p.diffusion),
        );
    }
    Ok(())
}
