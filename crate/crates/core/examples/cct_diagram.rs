//! Sweeps cooling rates along semi-infinite-body cooling curves, writes the
//! continuous cooling diagram and reports the critical rates.
//!
//!     cargo run --release --example cct_diagram -- out/cct

use std::path::PathBuf;

use tiphase::diagrams::{critical_rates, generate_cct, write_isolines_csv, write_terminal_csv, CctConfig};
use tiphase::output::write_json;
use tiphase::ModelParams;

fn main() -> tiphase::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/cct".into()));
    std::fs::create_dir_all(&out).expect("create output directory");

    let params = ModelParams::default();
    let cfg = CctConfig::default();
    let cct = generate_cct(&params, &cfg)?;
    let rates = critical_rates(&cct, &params, &cfg)?;
    write_isolines_csv(&out.join("cct_isolines.csv"), &cct.isolines)?;
    write_terminal_csv(&out.join("cct_terminal.csv"), &cct)?;
    write_json(&out.join("critical_rates.json"), &rates)?;

    println!("rate_K/s   s_g     x_alpha_s  x_alpha_m  x_beta");
    for c in cct.curves.iter().step_by(10) {
        let s = c.terminal;
        println!(
            "{:9.2}  {:6.3}  {:9.4}  {:9.4}  {:6.4}",
            c.rate, c.s_g, s.x_alpha_s, s.x_alpha_m, s.x_beta
        );
    }
    println!("slowest fully martensitic rate: {:?} K/s", rates.rate_pure_martensite);
    println!("fastest fully diffusional rate: {:?} K/s", rates.rate_pure_diffusional);
    Ok(())
}
