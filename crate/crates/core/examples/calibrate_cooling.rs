//! Fits the temperature-dependent conduction factor of the semi-infinite-body
//! cooling model to thermocouple curves at four depths.
//!
//!     cargo run --release --example calibrate_cooling

use tiphase::calibrate::{calibrate_cooling, synthetic, LmConfig};
use tiphase::SibParams;

fn main() -> tiphase::Result<()> {
    let sib = SibParams::default();
    let curves = synthetic::cooling_series(&sib)?;
    for c in &curves {
        println!(
            "thermocouple {} at {} mm: {:.1} K after 1 s, {:.1} K after 60 s",
            c.label,
            c.depth,
            c.temps[1],
            c.temps.last().unwrap()
        );
    }
    let truth = [sib.a_g, sib.b_g, sib.c_g];
    let start = synthetic::perturbed(&truth);
    let report = calibrate_cooling(&curves, &sib, &start, &LmConfig::default())?;
    println!("converged: {} after {} iterations", report.converged, report.iterations);
    for (i, name) in report.names.iter().enumerate() {
        println!("{name:4} start {:9.4}  fitted {:9.4}  true {:9.4}", start[i], report.theta[i], truth[i]);
    }
    Ok(())
}
