//! ε-sweeps of the ansatz residual and of the approximation error, with
//! log-log slope fits and report files.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::ansatz::Ansatz;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::macro_solver::{Hierarchy, MacroState};
use crate::micro::{self, MicroState, NormSuite};
use crate::spectral::MacroGrid;

/// Relative change of the error under `dt → dt/2` above which a sweep counts
/// as integrator-limited.
pub const INTEGRATOR_TOL: f64 = 0.1;
/// Allowed factor between a measured error and the fitted prediction.
pub const PREDICTION_FACTOR: f64 = 3.0;

/// Least-squares fit of `ln v = slope·ln ε + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_deviation: f64,
    /// Standard error of the slope.
    pub std_error: f64,
}

impl SlopeFit {
    pub fn predict(&self, eps: f64) -> f64 {
        (self.intercept + self.slope * eps.ln()).exp()
    }
}

/// Fit a power law to `(ε, value)` pairs.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Config(format!(
            "slope fit needs three points, got {}",
            points.len()
        )));
    }
    for (i, &(e, v)) in points.iter().enumerate() {
        if !(e > 0.0) {
            return Err(Error::NonPositiveValue { index: i, value: e });
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue { index: i, value: v });
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("slope fit needs distinct eps values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let max_deviation = res.iter().fold(0.0, |a: f64, r| a.max(r.abs()));
    let std_error = (res.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        max_deviation,
        std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Residual,
    Error,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Residual => "residual",
            SweepKind::Error => "error",
        }
    }
}

/// Measurements of one `ε`.
#[derive(Debug, Clone)]
pub struct EpsRun {
    pub eps: f64,
    pub cells: usize,
    /// Fitted quantity: largest sample.
    pub value: f64,
    /// `(t, value)` per observation time.
    pub samples: Vec<(f64, f64)>,
    /// Same supremum in `ℓ² × ℓ²`, error sweeps only.
    pub l2_value: Option<f64>,
    /// Largest relative energy change of the micro run.
    pub energy_drift: Option<f64>,
    pub wall_seconds: f64,
}

/// A named pass/fail check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub order: usize,
    /// Final macro time actually used.
    pub tau0: f64,
    pub runs: Vec<EpsRun>,
    pub fit: SlopeFit,
    pub checks: Vec<Check>,
    pub integrator_limited: bool,
    pub notes: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Model, hierarchy and initial macro state of one `ε`.
pub struct Experiment {
    pub model: crate::lattice::LatticeModel,
    pub hierarchy: Hierarchy,
    pub init: MacroState,
    pub cells: usize,
}

/// Configured order, or the reached closedness order when `force` is set.
pub fn effective_order(cfg: &ExperimentConfig, force: bool, notes: &mut Vec<String>) -> Result<usize> {
    let n = cfg.sweep.order;
    let eps = cfg.sweep.eps[0];
    let model = cfg.model_for(eps)?;
    let sys = cfg.pulses.build(&model)?;
    let reached = sys.closedness_order(&model, n);
    if reached >= n {
        return Ok(n);
    }
    if !force {
        return Err(Error::NotClosed {
            required: n,
            reached,
        });
    }
    notes.push(format!(
        "pulse system is only {reached}-closed; order lowered from {n} to {reached}"
    ));
    Ok(reached)
}

/// Build the experiment for one `ε` with the configured initial profiles.
pub fn prepare(cfg: &ExperimentConfig, eps: f64, order: usize) -> Result<Experiment> {
    let cells = cfg.cells_for(eps)?;
    let model = cfg.model_for(eps)?;
    let sys = cfg.pulses.build(&model)?;
    let grid = MacroGrid::new(model.dim(), cfg.sweep.points, cfg.sweep.length)?;
    let hierarchy = Hierarchy::new(&model, &sys, order, grid.clone())?.with_blowup_factor(cfg.sweep.blowup_factor);
    let mut init = MacroState::zero(&hierarchy);
    for (a, p) in init.a1.iter_mut().zip(cfg.profiles()) {
        *a = p.sample(&grid);
    }
    Ok(Experiment {
        model,
        hierarchy,
        init,
        cells,
    })
}

/// The configured `τ₀`, or the last macro time before the amplitude equations
/// blow up if that comes first.
pub fn reachable_tau0(cfg: &ExperimentConfig, order: usize, notes: &mut Vec<String>) -> Result<f64> {
    let su = prepare(cfg, cfg.sweep.eps[0], order)?;
    let (tau0, dt) = (cfg.sweep.tau0, cfg.sweep.macro_dt);
    match su.hierarchy.evolve(&su.init, &[tau0], dt) {
        Ok(_) => Ok(tau0),
        Err(Error::BlowUp { tau }) if tau > dt => {
            let reached = tau - dt;
            notes.push(format!(
                "amplitude equations blow up at tau = {tau:.4}; tau0 lowered from {tau0} to {reached:.4}"
            ));
            Ok(reached)
        }
        Err(e) => Err(e),
    }
}

fn with_tau0(cfg: &ExperimentConfig, tau0: f64) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.sweep.tau0 = tau0;
    c
}

fn parallel_runs<F>(eps: &[f64], f: F) -> Result<Vec<EpsRun>>
where
    F: Fn(f64) -> Result<EpsRun> + Sync,
{
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = eps.iter().map(|&e| s.spawn(move || f(e))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

fn residual_run(cfg: &ExperimentConfig, eps: f64, order: usize) -> Result<EpsRun> {
    let start = Instant::now();
    let su = prepare(cfg, eps, order)?;
    let tau0 = cfg.sweep.tau0;
    let states = su
        .hierarchy
        .evolve(&su.init, &[0.5 * tau0, tau0], cfg.sweep.macro_dt)?;
    let ansatz = Ansatz::new(&su.model, &su.hierarchy, eps)?;
    let mut samples = Vec::new();
    for st in std::iter::once(&su.init).chain(&states) {
        let s = ansatz.assemble(st, order)?;
        samples.push((s.t, ansatz.residual_norm(&s)));
    }
    Ok(EpsRun {
        eps,
        cells: su.cells,
        value: samples.iter().map(|s| s.1).fold(0.0, f64::max),
        samples,
        l2_value: None,
        energy_drift: None,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Residual `‖ẍ - force(x)‖_{ℓ²}` of `X_N` at `t ∈ {0, τ₀/(2ε), τ₀/ε}`, fitted on the
/// largest of the three values per `ε`.
pub fn run_residual_sweep(cfg: &ExperimentConfig, force: bool) -> Result<SweepReport> {
    let mut notes = Vec::new();
    let order = effective_order(cfg, force, &mut notes)?;
    let tau0 = reachable_tau0(cfg, order, &mut notes)?;
    let cfg = &with_tau0(cfg, tau0);
    let runs = parallel_runs(&cfg.sweep.eps, |e| residual_run(cfg, e, order))?;
    let fit = fit_slope(&runs.iter().map(|r| (r.eps, r.value)).collect::<Vec<_>>())?;
    let expected = order as f64 + 1.0 - cfg.model.dim as f64 / 2.0;
    let window = cfg.sweep.residual_window.unwrap_or_else(|| {
        let half = 0.3 + 0.1 * (order as f64 - 2.0).max(0.0);
        [expected - half, expected + half]
    });
    let checks = vec![Check {
        name: "residual_slope".into(),
        pass: fit.slope >= window[0] && fit.slope <= window[1],
        detail: format!(
            "slope {:.4} in [{:.2}, {:.2}] (expected {expected:.2})",
            fit.slope, window[0], window[1]
        ),
    }];
    Ok(SweepReport {
        kind: SweepKind::Residual,
        order,
        tau0,
        runs,
        fit,
        checks,
        integrator_limited: false,
        notes,
    })
}

fn error_run(cfg: &ExperimentConfig, eps: f64, order: usize, dt_scale: f64) -> Result<EpsRun> {
    let s = &cfg.sweep;
    error_trace(cfg, eps, order, s.tau0, s.checkpoints, dt_scale)
}

/// Lattice solution seeded with `X_{N-1}(0)` compared with `X_{N-1}` at
/// `checkpoints` equally spaced macro times up to `tau_end`, with micro step
/// `dt_scale · micro_dt_factor / μ₊`.
pub fn error_trace(
    cfg: &ExperimentConfig,
    eps: f64,
    order: usize,
    tau_end: f64,
    checkpoints: usize,
    dt_scale: f64,
) -> Result<EpsRun> {
    let start = Instant::now();
    let su = prepare(cfg, eps, order)?;
    let s = &cfg.sweep;
    let nck = checkpoints.max(1);
    let taus: Vec<f64> = (1..=nck).map(|i| tau_end * i as f64 / nck as f64).collect();
    let states = su.hierarchy.evolve(&su.init, &taus, s.macro_dt)?;
    let ansatz = Ansatz::new(&su.model, &su.hierarchy, eps)?;
    let norms = NormSuite::new(&su.model)?;
    let level = order.saturating_sub(1).max(1);
    let seed = ansatz.initial_state(&su.init)?;
    let h0 = seed.energy(&su.model);
    let times: Vec<f64> = taus.iter().map(|t| t / eps).collect();
    let dt = dt_scale * s.micro_dt_factor / norms.mu_plus;
    let mut samples = Vec::with_capacity(nck + 1);
    let mut l2 = 0.0f64;
    let mut drift = 0.0f64;
    let mut k = 0usize;
    let observe = |m: &MicroState| -> Result<()> {
        let st = if k == 0 { &su.init } else { &states[k - 1] };
        k += 1;
        let a = ansatz.assemble(st, level)?;
        samples.push((m.t, norms.y_distance(&m.x, &m.v, &a.x, &a.xdot)));
        l2 = l2.max(norms.l2_distance(&m.x, &m.v, &a.x, &a.xdot));
        let rel = (m.energy(&su.model) - h0).abs() / h0.abs().max(f64::MIN_POSITIVE);
        drift = drift.max(rel);
        if rel > s.energy_drift_bound {
            return Err(Error::MicroInstability(format!(
                "relative energy drift {rel:.3e} at t = {} exceeds {:.1e}; reduce micro_dt_factor",
                m.t, s.energy_drift_bound
            )));
        }
        Ok(())
    };
    micro::simulate(&su.model, seed, &times, dt, observe)?;
    Ok(EpsRun {
        eps,
        cells: su.cells,
        value: samples.iter().map(|s| s.1).fold(0.0, f64::max),
        samples,
        l2_value: Some(l2),
        energy_drift: Some(drift),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Supremum over `[0, τ₀/ε]` of `‖x(t) - X_{N-1}(t)‖_Y`, where the lattice solution
/// starts from `X_{N-1}(0)`.
pub fn run_validation(cfg: &ExperimentConfig, force: bool) -> Result<SweepReport> {
    let mut notes = Vec::new();
    let order = effective_order(cfg, force, &mut notes)?;
    let tau0 = reachable_tau0(cfg, order, &mut notes)?;
    let cfg = &with_tau0(cfg, tau0);
    let runs = parallel_runs(&cfg.sweep.eps, |e| error_run(cfg, e, order, 1.0))?;
    let fit = fit_slope(&runs.iter().map(|r| (r.eps, r.value)).collect::<Vec<_>>())?;

    let smallest = *cfg.sweep.eps.last().expect("validated eps list");
    let base = runs.last().expect("non-empty runs").value;
    let half = error_run(cfg, smallest, order, 0.5)?.value;
    let change = (base - half).abs() / base.max(f64::MIN_POSITIVE);
    let integrator_limited = change >= INTEGRATOR_TOL;
    if integrator_limited {
        notes.push(format!(
            "error at eps = {smallest} changes by {:.1}% under dt/2; integrator-limited",
            100.0 * change
        ));
    }

    let beta = cfg.sweep.beta;
    let worst = runs
        .iter()
        .map(|r| {
            let p = fit.predict(r.eps);
            (r.value / p).max(p / r.value)
        })
        .fold(0.0, f64::max);
    let checks = vec![
        Check {
            name: "error_slope".into(),
            pass: fit.slope >= beta - 0.1,
            detail: format!("slope {:.4} >= {:.2}", fit.slope, beta - 0.1),
        },
        Check {
            name: "error_prediction".into(),
            pass: worst <= PREDICTION_FACTOR,
            detail: format!("worst ratio to fit {worst:.3} <= {PREDICTION_FACTOR}"),
        },
        Check {
            name: "integrator_subdominant".into(),
            pass: !integrator_limited,
            detail: format!("relative change under dt/2 {change:.3e} < {INTEGRATOR_TOL}"),
        },
    ];
    Ok(SweepReport {
        kind: SweepKind::Error,
        order,
        tau0,
        runs,
        fit,
        checks,
        integrator_limited,
        notes,
    })
}

/// `sweep,eps,cells,metric,t,value,slope` rows: every sample, then the fitted
/// supremum per `ε`.
pub fn report_csv(reports: &[SweepReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sweep", "eps", "cells", "metric", "t", "value", "slope"])?;
    for r in reports {
        let slope = format!("{:.6}", r.fit.slope);
        for run in &r.runs {
            let mut row = |metric: &str, t: String, v: f64| {
                w.write_record([
                    r.kind.name().to_string(),
                    run.eps.to_string(),
                    run.cells.to_string(),
                    metric.to_string(),
                    t,
                    format!("{v:.9e}"),
                    slope.clone(),
                ])
            };
            for (t, v) in &run.samples {
                row("sample", format!("{t:.6}"), *v)?;
            }
            row("sup", String::new(), run.value)?;
            if let Some(v) = run.l2_value {
                row("sup_l2", String::new(), v)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `key = value` lines with one `PASS`/`FAIL` per check.
pub fn summary(reports: &[SweepReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let k = r.kind.name();
        let _ = writeln!(s, "{k}.order = {}", r.order);
        let _ = writeln!(s, "{k}.tau0 = {}", r.tau0);
        let _ = writeln!(s, "{k}.slope = {:.6}", r.fit.slope);
        let _ = writeln!(s, "{k}.intercept = {:.6}", r.fit.intercept);
        let _ = writeln!(s, "{k}.slope_std_error = {:.6}", r.fit.std_error);
        let _ = writeln!(s, "{k}.max_log_deviation = {:.6}", r.fit.max_deviation);
        for run in &r.runs {
            let _ = writeln!(s, "{k}.value[eps={}] = {:.9e}", run.eps, run.value);
            if let Some(v) = run.l2_value {
                let _ = writeln!(s, "{k}.l2_value[eps={}] = {v:.9e}", run.eps);
            }
            if let Some(v) = run.energy_drift {
                let _ = writeln!(s, "{k}.energy_drift[eps={}] = {v:.3e}", run.eps);
            }
            let _ = writeln!(s, "{k}.wall_seconds[eps={}] = {:.3}", run.eps, run.wall_seconds);
        }
        if r.kind == SweepKind::Error {
            let _ = writeln!(s, "{k}.integrator_limited = {}", r.integrator_limited);
        }
        for n in &r.notes {
            let _ = writeln!(s, "{k}.note = {n}");
        }
        for c in &r.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{k}.{} = {verdict} ({})", c.name, c.detail);
        }
    }
    s
}

/// Write `report.csv` and `summary.txt` into `dir`; refuses to overwrite unless `force`.
pub fn write_reports(dir: &Path, reports: &[SweepReport], force: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("report.csv");
    let sum_path = dir.join("summary.txt");
    if !force && (csv_path.exists() || sum_path.exists()) {
        return Err(Error::Config(format!(
            "{} already holds a report; pass force to overwrite",
            dir.display()
        )));
    }
    std::fs::write(csv_path, report_csv(reports)?)?;
    std::fs::write(sum_path, summary(reports))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.02].iter().map(|&e| (e, 3.0 * e * e)).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(f.std_error < 1e-12);
        assert!((f.predict(0.01) - 3e-4).abs() < 1e-15);
    }

    #[test]
    fn constant_values_have_zero_slope() {
        let f = fit_slope(&[(0.1, 2.0), (0.05, 2.0), (0.02, 2.0)]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(f.max_deviation < 1e-12);
    }

    #[test]
    fn seven_eps_cubed() {
        let pts: Vec<(f64, f64)> = [0.1, 0.07, 0.05, 0.035, 0.025]
            .iter()
            .map(|&e| (e, 7.0 * e * e * e))
            .collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.max_deviation <= 1e-12);
    }

    #[test]
    fn perturbed_power_law_stays_near_exponent() {
        let pts: Vec<(f64, f64)> = (0..8)
            .map(|i| 0.1 * 0.7f64.powi(i))
            .map(|e| (e, e.powf(2.5) * (1.0 + 0.1 * e)))
            .collect();
        let f = fit_slope(&pts).unwrap();
        assert!(f.slope > 2.45 && f.slope < 2.55, "{}", f.slope);
    }

    #[test]
    fn two_points_are_rejected() {
        assert!(matches!(fit_slope(&[(0.1, 1.0), (0.05, 0.5)]), Err(Error::Config(_))));
    }

    #[test]
    fn non_positive_values_are_rejected() {
        let pts = [(0.1, 1.0), (0.05, 0.0), (0.02, 0.1)];
        assert!(matches!(
            fit_slope(&pts),
            Err(Error::NonPositiveValue { index: 1, .. })
        ));
    }

    #[test]
    fn fit_statistics_match_hand_computation() {
        // ln ε = 0, 1, 2; ln v = 0, 1, 3: slope 1.5, intercept -1/6, residuals 1/6, -1/3, 1/6.
        let e = std::f64::consts::E;
        let pts = [(1.0, 1.0), (e, e), (e * e, e.powi(3))];
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept + 1.0 / 6.0).abs() < 1e-12);
        assert!((f.max_deviation - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.std_error - (1.0f64 / 6.0 / 2.0).sqrt()).abs() < 1e-12);
    }
}
