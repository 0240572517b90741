//! Fits the beta growth parameters to three synthetic heating cycles with
//! peaks of 1350, 1250 and 1150 K.
//!
//!     cargo run --release --example calibrate_heating

use tiphase::calibrate::{calibrate_heating, synthetic, LmConfig};
use tiphase::{ModelParams, StepConfig};

fn main() -> tiphase::Result<()> {
    let params = ModelParams::default();
    let step = StepConfig::default();
    let series = synthetic::heating_series(&params, &step)?;
    for s in &series {
        let peak = s.temps.iter().copied().fold(f64::MIN, f64::max);
        let top = s.x_beta.iter().copied().fold(0.0, f64::max);
        println!("series {}: {} samples, peak {peak:.0} K, max x_beta {top:.3}", s.label, s.times.len());
    }
    let truth = [params.diffusion.c_beta, params.diffusion.f];
    let start = synthetic::perturbed(&truth);
    let report = calibrate_heating(&series, &params, &start, &step, &LmConfig::default())?;
    println!("converged: {} after {} iterations", report.converged, report.iterations);
    for (i, name) in report.names.iter().enumerate() {
        println!("{name:7} start {:8.4}  fitted {:8.4}  true {:8.4}", start[i], report.theta[i], truth[i]);
    }
    Ok(())
}
