//! Builds the isothermal transformation diagram, writes its isolines and
//! terminal states, and prints the 1 % stable-alpha start curve.
//!
//!     cargo run --release --example ttt_diagram -- out/ttt

use std::path::PathBuf;

use tiphase::diagrams::{generate_ttt, write_isolines_csv, write_ttt_terminal_csv, Phase, TttConfig};
use tiphase::ModelParams;

fn main() -> tiphase::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/ttt".into()));
    std::fs::create_dir_all(&out).expect("create output directory");

    let ttt = generate_ttt(&ModelParams::default(), &TttConfig::default())?;
    write_isolines_csv(&out.join("ttt_isolines.csv"), &ttt.isolines)?;
    write_ttt_terminal_csv(&out.join("ttt_terminal.csv"), &ttt)?;

    println!("target_K  t(1% alpha_s)_s  terminal x_alpha_m");
    for row in ttt.rows.iter().step_by(5) {
        let onset = row.first_up(Phase::AlphaS, 0.01);
        let onset = onset.map_or("never".to_string(), |t| format!("{t:.3}"));
        println!("{:8.0}  {onset:>15}  {:.4}", row.target, row.terminal.x_alpha_m);
    }
    println!("wrote {}", out.display());
    Ok(())
}
