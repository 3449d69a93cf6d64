//! Macro hierarchy evolution on the three-wave configuration.

use std::f64::consts::PI;
use std::path::PathBuf;

use modlat::config::ExperimentConfig;
use modlat::macro_solver::{MacroState, Profile};
use modlat::spectral::sup_norm;
use modlat::validation::prepare;
use num_complex::Complex64;

fn config() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/three_wave.toml");
    ExperimentConfig::load(&path).unwrap()
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn without_couplings_evolution_is_translation() {
    let mut cfg = config();
    cfg.model.a[1] = 0.0;
    cfg.model.a[2] = 0.0;
    cfg.model.b[1] = 0.0;
    cfg.model.b[2] = 0.0;
    cfg.sweep.points = 128;
    let exp = prepare(&cfg, 0.05, 2).unwrap();
    let h = &exp.hierarchy;
    let tau = 1.37;
    let out = h.evolve(&exp.init, &[tau], 0.01).unwrap();
    for j in 0..3 {
        let v = h.velocity(j + 1);
        let shifted = h.spectral().translate(&exp.init.a1[j], &[v[0] * tau]);
        let e = sup_diff(&out[0].a1[j], &shifted);
        assert!(e < 1e-8, "pulse {}: {e:e}", j + 1);
    }
}

#[test]
fn doubling_resolution_converges_spectrally() {
    let base = config();
    let run = |points: usize| {
        let mut cfg = base.clone();
        cfg.sweep.points = points;
        let exp = prepare(&cfg, 0.05, 2).unwrap();
        let grid = exp.hierarchy.grid().clone();
        let len = grid.length();
        let mut s = MacroState::zero(&exp.hierarchy);
        for (j, a) in s.a1.iter_mut().enumerate() {
            let c = len * (0.3 + 0.15 * j as f64);
            let amp = Complex64::new(0.3, 0.1 * j as f64);
            *a = grid.sample(|y| amp * (8.0 * ((2.0 * PI * (y[0] - c) / len).cos() - 1.0)).exp());
        }
        exp.hierarchy.evolve(&s, &[1.0], 0.01).unwrap().pop().unwrap()
    };
    let coarse = run(128);
    let fine = run(256);
    let mut worst = 0.0f64;
    for j in 0..3 {
        for (i, c) in coarse.a1[j].iter().enumerate() {
            worst = worst.max((c - fine.a1[j][2 * i]).norm());
        }
    }
    assert!(worst < 1e-10, "P = 128 vs 256: {worst:e}");
}

#[test]
fn self_conjugate_second_order_fields_are_real() {
    let cfg = config();
    let exp = prepare(&cfg, 0.05, 2).unwrap();
    let h = &exp.hierarchy;
    let fields = h.second_order_fields(&exp.init.a1).unwrap();
    let mut found = 0;
    for (mode, f) in h.t2_modes().iter().zip(&fields) {
        if mode.rep.is_self_conjugate() {
            found += 1;
            let im = f.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(im <= 1e-14, "{:?}: {im:e}", mode.rep.indices);
            assert!(sup_norm(f) > 0.0);
        }
    }
    assert_eq!(found, 1);
}

#[test]
fn second_amplitude_appears_only_once_supports_meet() {
    let cfg = config();
    let exp = prepare(&cfg, 0.05, 2).unwrap();
    let h = &exp.hierarchy;
    let grid = h.grid().clone();
    let (v1, v3) = (h.velocity(1)[0], h.velocity(3)[0]);
    let rel = v1 - v3;
    assert!(rel.abs() > 1e-3);
    // Centres move as c - vτ; the gap closes at rate |v1 - v3|.
    let width = 1.5;
    let gap = 10.0 * width;
    let c1 = grid.length() / 2.0;
    let c3 = c1 - rel.signum() * gap;
    let bump = |amplitude: Complex64, centre: f64| Profile::Gaussian {
        amplitude,
        center: vec![centre],
        width,
    };
    let mut s = MacroState::zero(h);
    s.a1[0] = bump(Complex64::new(0.3, 0.0), c1).sample(&grid);
    s.a1[2] = bump(Complex64::new(0.0, 0.3), c3).sample(&grid);
    let early = width / rel.abs();
    let meet = gap / rel.abs();
    let out = h.evolve(&s, &[early, meet], 0.01).unwrap();
    let before = sup_norm(&out[0].a1[1]);
    let after = sup_norm(&out[1].a1[1]);
    assert!(before < 1e-8, "before contact {before:e}");
    assert!(after > 1e-4, "after contact {after:e}");
}

#[test]
fn blow_up_guard_reports_reached_time() {
    let cfg = config();
    let exp = prepare(&cfg, 0.05, 2).unwrap();
    let mut s = exp.init.clone();
    for a in &mut s.a1 {
        for z in a.iter_mut() {
            *z *= 40.0;
        }
    }
    let h = exp.hierarchy.with_blowup_factor(2.0);
    match h.evolve(&s, &[5.0], 0.002) {
        Err(modlat::error::Error::BlowUp { tau }) => assert!(tau > 0.0 && tau < 5.0),
        other => panic!("expected blow-up, got {:?}", other.map(|v| v.len())),
    }
}
