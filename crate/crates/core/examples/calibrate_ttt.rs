//! Generates a noiseless isothermal data set from the default parameters and
//! fits the stable-alpha kinetics back from a perturbed start.
//!
//!     cargo run --release --example calibrate_ttt

use tiphase::calibrate::{calibrate_ttt, synthetic, LmConfig};
use tiphase::diagrams::TttConfig;
use tiphase::ModelParams;

fn main() -> tiphase::Result<()> {
    let params = ModelParams::default();
    let cfg = TttConfig::default();
    let obs = synthetic::ttt_observations(&params, &cfg)?;
    let d = params.diffusion;
    let truth = [d.c_alpha_s, d.k1, d.k2, d.k3];
    let start = synthetic::perturbed(&truth);

    let report = calibrate_ttt(&obs, &params, &start, &cfg, &LmConfig::default())?;
    println!("{} observations, {} iterations, converged: {}", obs.len(), report.iterations, report.converged);
    println!("name        start        fitted       true");
    for (i, name) in report.names.iter().enumerate() {
        println!("{name:10}  {:11.6}  {:11.6}  {:11.6}", start[i], report.theta[i], truth[i]);
    }
    println!("final cost {:.3e}", report.cost);
    Ok(())
}
