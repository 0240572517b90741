//! End-to-end runs of the `tiphase` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tiphase::calibrate::synthetic;
use tiphase::SibParams;

fn tiphase(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiphase"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_above_transus_stays_beta() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.csv");
    fs::write(&hist, "time_s,temp_K\n0,1400\n5,1400\n").unwrap();
    let out = dir.path().join("out");
    let o = tiphase(&["simulate", hist.to_str().unwrap(), "--scheme", "cn"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_s,temp_K,x_beta,x_alpha_s,x_alpha_m,x_liq"));
    let mut n = 0;
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[2], 1.0, "{line}");
        n += 1;
    }
    assert!(n > 1);
}

#[test]
fn malformed_history_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.csv");
    fs::write(&hist, "time_s,temp_K\n0,1400\n1,hot\n").unwrap();
    let o = tiphase(&["simulate", hist.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_observations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = tiphase(&["calibrate", "ttt", "nowhere.csv"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.csv"));
}

#[test]
fn bad_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# run\nkinetics.k1 = 0.294\nkinetics.k9 = 1\n").unwrap();
    let o = tiphase(&["--config", cfg.to_str().unwrap(), "ttt"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_history_names_point() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist");
    fs::create_dir(&hist).unwrap();
    fs::write(hist.join("a.csv"), "time_s,temp_K\n0,900\n1,900\n").unwrap();
    let pts = dir.path().join("points.csv");
    fs::write(&pts, "point_id,x_mm,y_mm,z_mm\na,0,0,0\nb7,0,0,1\n").unwrap();
    let o = tiphase(&["field", pts.to_str().unwrap(), hist.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b7"), "{}", stderr(&o));
}

#[test]
fn small_cct_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "cct.rates = -800, -300, -50, -5\ncct.refine_iters = 4\n").unwrap();
    let run = |threads: &str| {
        let out = dir.path().join(format!("out{threads}"));
        let o = tiphase(&["--config", cfg.to_str().unwrap(), "--threads", threads, "cct"], &out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        ["cct_isolines.csv", "cct_terminal.csv", "critical_rates.json"]
            .map(|f| fs::read_to_string(out.join(f)).unwrap())
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn cooling_calibration_recovers_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let sib = SibParams::default();
    let mut csv = String::from("series,time_s,temp_K\n");
    for s in synthetic::cooling_series(&sib).unwrap() {
        for (t, temp) in s.times.iter().zip(&s.temps) {
            csv.push_str(&format!("{},{t},{temp:.12}\n", s.label));
        }
    }
    let data = dir.path().join("cooling.csv");
    fs::write(&data, csv).unwrap();
    let cfg = dir.path().join("run.cfg");
    let start = synthetic::perturbed(&[sib.a_g, sib.b_g, sib.c_g]);
    fs::write(&cfg, format!("calibration.start = {}, {}, {}\n", start[0], start[1], start[2])).unwrap();
    let out = dir.path().join("out");
    let o = tiphase(
        &["--config", cfg.to_str().unwrap(), "calibrate", "cooling", data.to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("calibration_cooling.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "cooling");
    assert_eq!(report["converged"], true);
    let theta: Vec<f64> = report["theta"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (found, truth) in theta.iter().zip([sib.a_g, sib.b_g, sib.c_g]) {
        assert!(((found - truth) / truth).abs() < 1e-6, "{found} vs {truth}");
    }
}

#[test]
fn unconverged_calibration_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let sib = SibParams::default();
    let mut csv = String::from("series,time_s,temp_K\n");
    for s in synthetic::cooling_series(&sib).unwrap() {
        for (t, temp) in s.times.iter().zip(&s.temps) {
            csv.push_str(&format!("{},{t},{temp}\n", s.label));
        }
    }
    let data = dir.path().join("cooling.csv");
    fs::write(&data, csv).unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "calibration.max_iters = 1\ncalibration.start = 1e-3, 1e-6, 1e-9\n").unwrap();
    let out = dir.path().join("out");
    let o = tiphase(
        &["--config", cfg.to_str().unwrap(), "calibrate", "cooling", data.to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(out.join("calibration_cooling.json").is_file());
}
