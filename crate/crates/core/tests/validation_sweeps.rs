//! End-to-end sweeps: reproducibility, symmetry and degenerate models.

use std::path::PathBuf;

use modlat::config::ExperimentConfig;
use modlat::error::Error;
use modlat::validation::{
    effective_order, report_csv, run_residual_sweep, run_validation, summary, write_reports,
};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

const LINEAR: &str = r#"
[model]
kind = "nn-chain"
a = [1.0]
b = [1.0]

[pulses]
denominator = 10
indices = [[3]]

[sweep]
order = 2
eps = [0.1, 0.05, 0.025]
length = 20.0
points = 64

[[sweep.profile]]
kind = "gaussian"
amplitude = [0.4, 0.1]
center = [10.0]
width = 1.0e6
"#;

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = config("three_wave.toml");
    let a = vec![run_residual_sweep(&cfg, false).unwrap(), run_validation(&cfg, false).unwrap()];
    let b = vec![run_residual_sweep(&cfg, false).unwrap(), run_validation(&cfg, false).unwrap()];
    assert_eq!(report_csv(&a).unwrap(), report_csv(&b).unwrap());
}

#[test]
fn swapping_the_first_two_pulses_leaves_the_report_unchanged() {
    let cfg = config("three_wave.toml");
    let mut swapped = cfg.clone();
    swapped.pulses.indices.swap(0, 1);
    swapped.sweep.profile.swap(0, 1);
    for (x, y) in [
        (run_residual_sweep(&cfg, false).unwrap(), run_residual_sweep(&swapped, false).unwrap()),
        (run_validation(&cfg, false).unwrap(), run_validation(&swapped, false).unwrap()),
    ] {
        for (r, s) in x.runs.iter().zip(&y.runs) {
            assert!((r.value - s.value).abs() <= 1e-9 * r.value, "{} vs {}", r.value, s.value);
        }
        assert!((x.fit.slope - y.fit.slope).abs() < 1e-8);
    }
}

#[test]
fn linear_model_is_flagged_integrator_limited() {
    let cfg = ExperimentConfig::from_toml_str(LINEAR).unwrap();
    let report = run_validation(&cfg, false).unwrap();
    assert!(report.integrator_limited, "{:?}", report.notes);
    assert!(!report.passed());
}

#[test]
fn linear_model_residual_is_round_off() {
    let cfg = ExperimentConfig::from_toml_str(LINEAR).unwrap();
    let report = run_residual_sweep(&cfg, false).unwrap();
    for r in &report.runs {
        assert!(r.value < 1e-12, "eps {}: {:e}", r.eps, r.value);
    }
}

#[test]
fn two_dimensional_third_order_residual_slope() {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
[model]
kind = "nn-chain"
dim = 2
a = [1.0, 0.3, 0.2]
b = [1.0, 0.4, 0.3]

[pulses]
denominator = 10
indices = [[2, 1]]

[sweep]
order = 3
eps = [0.2, 0.1, 0.05]
length = 8.0
points = 32
beta = 2.0

[[sweep.profile]]
kind = "gaussian"
amplitude = [0.5, 0.0]
center = [4.0, 4.0]
width = 1.0
"#,
    )
    .unwrap();
    let report = run_residual_sweep(&cfg, false).unwrap();
    assert!((report.fit.slope - 3.0).abs() <= 0.4, "slope {}", report.fit.slope);
}

#[test]
fn blow_up_lowers_tau0() {
    let mut cfg = config("three_wave.toml");
    for p in &mut cfg.sweep.profile {
        p.amplitude = [40.0 * p.amplitude[0], 40.0 * p.amplitude[1]];
    }
    cfg.sweep.tau0 = 5.0;
    cfg.sweep.macro_dt = 0.002;
    cfg.sweep.blowup_factor = 2.0;
    let report = run_residual_sweep(&cfg, false).unwrap();
    assert!(report.tau0 > 0.0 && report.tau0 < 5.0, "tau0 {}", report.tau0);
    assert!(report.notes.iter().any(|n| n.contains("blow up")), "{:?}", report.notes);
    assert!(summary(&[report]).contains("residual.tau0 = "));
}

#[test]
fn unclosed_system_is_refused_unless_forced() {
    let mut cfg = config("three_wave.toml");
    cfg.pulses.indices.pop();
    cfg.sweep.profile.pop();
    assert!(matches!(
        run_residual_sweep(&cfg, false),
        Err(Error::NotClosed { required: 2, reached: 1 })
    ));
    let mut notes = Vec::new();
    assert_eq!(effective_order(&cfg, true, &mut notes).unwrap(), 1);
    assert_eq!(notes.len(), 1);
}

#[test]
fn invalid_configurations_are_rejected() {
    let base = config("three_wave.toml");
    let mut c = base.clone();
    c.sweep.eps = vec![0.05, 0.1, 0.025];
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.sweep.beta = 1.6;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.sweep.beta = 1.0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.sweep.profile.pop();
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.sweep.blowup_factor = 1.0;
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.sweep.length = 71.0;
    assert!(c.validate().is_err());
    let text = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/three_wave.toml"),
    )
    .unwrap();
    assert!(ExperimentConfig::from_toml_str(&text.replace("tau0", "tau_zero")).is_err());
}

#[test]
fn reports_are_not_overwritten_without_force() {
    let cfg = config("three_wave.toml");
    let dir = tempfile::tempdir().unwrap();
    let reports = vec![run_residual_sweep(&cfg, false).unwrap()];
    write_reports(dir.path(), &reports, false).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("sweep,eps,cells,metric,t,value,slope"));
    assert!(std::fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("PASS"));
    assert!(write_reports(dir.path(), &reports, false).is_err());
    write_reports(dir.path(), &reports, true).unwrap();
}
