//! Evaluates a small build: a column of points whose histories cool faster
//! the further they sit from a preheated base plate. Histories are written
//! to a scratch directory and evaluated in parallel.
//!
//!     cargo run --release --example part_field

use tiphase::field::{evaluate_field, write_field_csv, FieldPoint};
use tiphase::{ModelParams, StepConfig};

fn main() -> tiphase::Result<()> {
    let dir = std::env::temp_dir().join("tiphase_part_field");
    let histories = dir.join("histories");
    std::fs::create_dir_all(&histories).expect("create scratch directory");

    let mut points = Vec::new();
    for i in 0..8 {
        let z = 2.0 * i as f64;
        let id = format!("z{i}");
        // Points near the plate cool slowly and stay hot; points higher up
        // are quenched.
        let rate = 5.0 * 2f64.powi(i);
        let floor = if i < 2 { 900.0 } else { 293.15 };
        let t_cool = (1400.0 - floor) / rate;
        let csv = format!("time_s,temp_K\n0,1400\n{t_cool},{floor}\n{},{floor}\n", t_cool + 5.0);
        std::fs::write(histories.join(format!("{id}.csv")), csv).expect("write history");
        points.push(FieldPoint { id, x: 0.0, y: 0.0, z });
    }

    let records = evaluate_field(&points, &histories, &StepConfig::default(), &ModelParams::default(), false)?;
    println!("point  z_mm  x_beta  x_alpha_s  x_alpha_m");
    for r in &records {
        let s = r.terminal;
        println!(
            "{:5}  {:4.1}  {:6.4}  {:9.4}  {:9.4}",
            r.point.id, r.point.z, s.x_beta, s.x_alpha_s, s.x_alpha_m
        );
    }
    write_field_csv(&dir.join("field.csv"), &records)?;
    println!("wrote {}", dir.join("field.csv").display());
    Ok(())
}
