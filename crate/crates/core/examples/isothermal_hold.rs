//! Quenches pure beta to a hold temperature and follows the growth of stable
//! alpha with both integration schemes.
//!
//!     cargo run --release --example isothermal_hold -- 900

use tiphase::{integrate, ModelParams, PhaseState, PiecewiseLinearPath, Scheme, StepConfig};

fn main() -> tiphase::Result<()> {
    let temp: f64 = std::env::args().nth(1).map_or(Ok(900.0), |a| a.parse()).expect("hold temperature in K");
    let params = ModelParams::default();
    let path = PiecewiseLinearPath::constant(temp, 100.0)?;
    for scheme in [Scheme::ForwardEuler, Scheme::CrankNicolson] {
        let cfg = StepConfig {
            dt: 1e-3,
            scheme,
            record_every: 10_000,
            ..StepConfig::default()
        };
        let traj = integrate(&PhaseState::pure_beta(), &path, (0.0, 100.0), &cfg, &params)?;
        println!("{scheme:?} at {temp} K");
        println!("  time_s  x_alpha_s  x_alpha_m  x_beta");
        for s in traj.samples() {
            println!(
                "  {:6.1}  {:9.5}  {:9.5}  {:6.5}",
                s.t, s.state.x_alpha_s, s.state.x_alpha_m, s.state.x_beta
            );
        }
    }
    Ok(())
}
