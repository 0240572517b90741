//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line with
//! the measured quantities, then asserts the criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::fs;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tiphase::calibrate::{calibrate_cooling, calibrate_heating, calibrate_ttt, synthetic, LmConfig};
use tiphase::diagrams::{cct_curve_path, critical_rates, generate_cct, generate_ttt, CctConfig, Phase, TttConfig};
use tiphase::kinetics::k_alpha_s;
use tiphase::phase_model::{martensite_pseudo_eq, martensite_pseudo_eq_base};
use tiphase::{
    integrate, MaterialPoint, ModelParams, PhaseState, PiecewiseLinearPath, Scheme, SibParams, StepConfig,
    TemperaturePath,
};

fn verdict(n: u32, pass: bool, detail: &str) -> bool {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn criterion_1_martensite_room_temperature() {
    let p = ModelParams::default();
    let v = martensite_pseudo_eq_base(293.15, &p.equilibrium, &p.temps);
    let pass = (v - 0.9).abs() <= 1e-3 && p.equilibrium.k_alpham_eq == 0.00415;
    assert!(verdict(1, pass, &format!("X_am_eq(293.15 K) = {v}")));
}

#[test]
fn criterion_2_isothermal_closed_form() {
    let p = ModelParams::default();
    let temp = 800.0;
    let path = PiecewiseLinearPath::constant(temp, 1e3).unwrap();
    let cfg = StepConfig {
        dt: 1e-3,
        martensite: false,
        record_every: 10,
        ..StepConfig::default()
    };
    let traj = integrate(&PhaseState::pure_beta(), &path, (0.0, 1e3), &cfg, &p).unwrap();
    let x_eq = 0.9;
    let c = p.diffusion.c_alpha_s;
    let k_tilde = k_alpha_s(temp, &p.diffusion) * x_eq;
    let closed = |t: f64| if t > 0.0 { x_eq / (1.0 + (c / (k_tilde * t)).powf(c)) } else { 0.0 };
    let mut worst: f64 = 0.0;
    let mut martensite_free = true;
    for s in traj.samples() {
        worst = worst.max((s.state.x_alpha_s - closed(s.t)).abs());
        martensite_free &= s.state.x_alpha_m == 0.0;
    }
    let pass = worst < 1e-4 && martensite_free;
    assert!(verdict(2, pass, &format!("max |X_as - g(t)| = {worst:.3e} over {} samples", traj.len())));
}

#[test]
fn criterion_3_conservation_and_feasibility() {
    let p = ModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst_sum: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut bounds_ok = true;
    for i in 0..10_000 {
        let xs = rng.random_range(0.0..=0.9);
        let xm = rng.random_range(0.0..=(0.9 - xs));
        let state = PhaseState::new(xs, xm, 1.0 - xs - xm, 0.0).unwrap();
        let t_prev = rng.random_range(250.0..=2000.0);
        let temp = rng.random_range(250.0..=2000.0);
        let dt = rng.random_range(1e-4..=1.0);
        let cfg = StepConfig {
            dt,
            scheme: if i % 2 == 0 { Scheme::ForwardEuler } else { Scheme::CrankNicolson },
            cn_max_iters: 10_000,
            ..StepConfig::default()
        };
        let mut point = MaterialPoint::new(state, 0.0, t_prev, &p).unwrap();
        point.advance(dt, temp, &cfg, &p).unwrap();
        let s = point.state;
        worst_sum = worst_sum.max((s.x_alpha_s + s.x_alpha_m + s.x_beta + s.x_liq - 1.0).abs());
        bounds_ok &= [s.x_alpha_s, s.x_alpha_m, s.x_beta, s.x_liq]
            .iter()
            .all(|v| (0.0..=1.0).contains(v));
        if temp < p.temps.martensite_start {
            let eq = martensite_pseudo_eq(temp, s.x_alpha_s, &p.equilibrium, &p.temps).unwrap();
            worst_kkt = worst_kkt.max(eq - s.x_alpha_m);
        }
    }
    let pass = worst_sum < 1e-12 && bounds_ok && worst_kkt <= 1e-10;
    assert!(verdict(
        3,
        pass,
        &format!("max |sum - 1| = {worst_sum:.1e}, bounds ok = {bounds_ok}, max KKT violation = {worst_kkt:.1e}")
    ));
}

#[test]
fn criterion_4_cct_critical_rates() {
    let p = ModelParams::default();
    let cfg = CctConfig::default();
    let cct = generate_cct(&p, &cfg).unwrap();
    let rates = critical_rates(&cct, &p, &cfg).unwrap();
    let martensite = rates.rate_pure_martensite;
    let diffusional = rates.rate_pure_diffusional;
    let m_ok = martensite.is_some_and(|r| (-470.0..=-350.0).contains(&r));
    let d_ok = diffusional.is_some_and(|r| (-40.0..=-10.0).contains(&r));
    let detail = format!(
        "{} curves; slowest rate with x_as < 0.01: {martensite:?} K/s (need -470..-350); \
         fastest rate with x_am < 0.01: {diffusional:?} K/s (need -40..-10)",
        cct.curves.len()
    );
    assert!(verdict(4, m_ok && d_ok, &detail));
}

#[test]
fn criterion_5_ttt_c_shape() {
    let p = ModelParams::default();
    let cfg = TttConfig::default();
    let ttt = generate_ttt(&p, &cfg).unwrap();
    let onset = |target: f64| ttt.row(target).and_then(|r| r.first_up(Phase::AlphaS, 0.01));
    let (nose_temp, nose_time) = ttt
        .rows
        .iter()
        .filter_map(|r| r.first_up(Phase::AlphaS, 0.01).map(|t| (r.target, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("some row forms stable alpha");
    let low = onset(400.0);
    let high = onset(1250.0);
    let ratio = |t: Option<f64>| t.map_or(f64::INFINITY, |t| t / nose_time);
    let interior = nose_temp > 600.0 && nose_temp < 1200.0;
    let pass = ttt.rows.len() == 95 && interior && ratio(low) > 10.0 && ratio(high) > 10.0;
    let detail = format!(
        "{} rows; nose at {nose_temp} K, t = {nose_time:.4} s; t(400 K) = {low:?} s, ratio {:.2}; \
         t(1250 K) = {high:?} s, ratio {:.2}",
        ttt.rows.len(),
        ratio(low),
        ratio(high)
    );
    assert!(verdict(5, pass, &detail));
}

#[test]
fn criterion_6_martensite_metastability() {
    let p = ModelParams::default();
    let start = PhaseState::new(0.0, 0.9, 0.1, 0.0).unwrap();
    let path = PiecewiseLinearPath::constant(293.15, 1e4).unwrap();
    let cfg = StepConfig {
        record_every: 1_000_000,
        ..StepConfig::default()
    };
    let traj = integrate(&start, &path, (0.0, 1e4), &cfg, &p).unwrap();
    let change = (traj.last().state.x_alpha_m - 0.9).abs();
    assert!(verdict(6, change < 1e-4, &format!("|delta x_am| after 1e4 s = {change:.3e}")));
}

#[test]
fn criterion_7_calibration_self_consistency() {
    let base = ModelParams::default();
    let lm = LmConfig::default();
    let d = base.diffusion;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, truth: &[f64], found: &[f64], converged: bool| {
        let worst = truth.iter().zip(found).map(|(t, f)| rel_err(*f, *t)).fold(0.0, f64::max);
        pass &= worst < 0.01 && converged;
        lines.push(format!("{name}: max rel err {worst:.2e}"));
    };

    let ttt_cfg = TttConfig::default();
    let obs = synthetic::ttt_observations(&base, &ttt_cfg).unwrap();
    let truth = [d.c_alpha_s, d.k1, d.k2, d.k3];
    for (label, start) in [
        ("ttt (+-20%)", synthetic::perturbed(&truth)),
        ("ttt (2.0, 0.2, 800, 0.02)", vec![2.0, 0.2, 800.0, 0.02]),
    ] {
        let rep = calibrate_ttt(&obs, &base, &start, &ttt_cfg, &lm).unwrap();
        check(label, &truth, &rep.theta, rep.converged);
    }

    let step = StepConfig::default();
    let series = synthetic::heating_series(&base, &step).unwrap();
    let truth = [d.c_beta, d.f];
    let rep = calibrate_heating(&series, &base, &synthetic::perturbed(&truth), &step, &lm).unwrap();
    check("heating", &truth, &rep.theta, rep.converged);

    let sib = SibParams::default();
    let curves = synthetic::cooling_series(&sib).unwrap();
    let truth = [sib.a_g, sib.b_g, sib.c_g];
    let rep = calibrate_cooling(&curves, &sib, &synthetic::perturbed(&truth), &lm).unwrap();
    check("cooling", &truth, &rep.theta, rep.converged);

    assert!(verdict(7, pass, &lines.join("; ")));
}

#[test]
fn criterion_8_preheating_field() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("histories");
    fs::create_dir(&hist).unwrap();
    fs::write(
        dir.path().join("points.csv"),
        "point_id,x_mm,y_mm,z_mm\npreheated,0,0,0\nquenched,0,0,1\n",
    )
    .unwrap();
    fs::write(hist.join("preheated.csv"), "time_s,temp_K\n0,900\n10,900\n").unwrap();
    let t_cool = (1400.0 - 293.15) / 500.0;
    fs::write(
        hist.join("quenched.csv"),
        format!("time_s,temp_K\n0,1400\n{t_cool},293.15\n{},293.15\n", t_cool + 1.0),
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_tiphase"))
        .arg("field")
        .arg(dir.path().join("points.csv"))
        .arg(&hist)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let text = fs::read_to_string(out.join("field.csv")).unwrap_or_default();
    let x_am = |id: &str| -> Option<f64> {
        text.lines()
            .find(|l| l.starts_with(&format!("{id},")))
            .and_then(|l| l.split(',').nth(6))
            .and_then(|v| v.parse().ok())
    };
    let (a, b) = (x_am("preheated"), x_am("quenched"));
    let pass = status.success() && a == Some(0.0) && b.is_some_and(|v| v > 0.85);
    assert!(verdict(
        8,
        pass,
        &format!("exit {:?}; x_am(900 K hold) = {a:?}, x_am(-500 K/s quench) = {b:?}", status.code())
    ));
}

#[test]
fn criterion_9_scheme_agreement() {
    let p = ModelParams::default();
    let path = cct_curve_path(-410.0, &CctConfig::default()).unwrap();
    let end = path.end_time();
    let run = |scheme, dt| {
        let cfg = StepConfig {
            dt,
            scheme,
            record_every: 1_000_000,
            ..StepConfig::default()
        };
        integrate(&PhaseState::pure_beta(), &path, (0.0, end), &cfg, &p).unwrap().last().state
    };
    let euler = run(Scheme::ForwardEuler, 1e-4);
    let cn = run(Scheme::CrankNicolson, 1e-3);
    let diffs = [
        (euler.x_alpha_s - cn.x_alpha_s).abs(),
        (euler.x_alpha_m - cn.x_alpha_m).abs(),
        (euler.x_beta - cn.x_beta).abs(),
        (euler.x_liq - cn.x_liq).abs(),
    ];
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    let detail = format!(
        "euler {:.5}/{:.5}/{:.5}, cn {:.5}/{:.5}/{:.5} (as/am/beta), max diff {worst:.2e}",
        euler.x_alpha_s, euler.x_alpha_m, euler.x_beta, cn.x_alpha_s, cn.x_alpha_m, cn.x_beta
    );
    assert!(verdict(9, worst < 1e-3, &detail));
}
