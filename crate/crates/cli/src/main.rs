//! `modlat`: classify pulse systems, integrate amplitude equations, run lattice
//! simulations, search resonances and validate approximation orders.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use modlat::config::ExperimentConfig;
use modlat::coupling::CouplingTable;
use modlat::pulse::Representant;
use modlat::resonance::{snap_to_grid, ResonanceProblem, MARGIN_THRESHOLD};
use modlat::validation::{self, SweepReport};

#[derive(Parser)]
#[command(name = "modlat", version, about = "Modulated pulses on nonlinear lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepArg {
    Residual,
    Error,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the pulse system: resonances, closedness order, margins.
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Lattice size is `length / eps`; defaults to the first sweep value.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        /// Write the coupling coefficients to this CSV file.
        #[arg(long)]
        with_couplings: Option<PathBuf>,
    },
    /// Integrate the amplitude equations and write field snapshots.
    Macro {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        /// Final macro time; defaults to `tau0`.
        #[arg(long)]
        tau_end: Option<f64>,
        #[arg(long, default_value_t = 10)]
        snapshots: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the lattice from the ansatz and record its distance to the ansatz.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        tau_end: Option<f64>,
        #[arg(long)]
        checkpoints: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search three-wave resonances of a nearest-neighbour chain with `b1 = 1`, `a1 = -1/(4 phi)`.
    Resonance {
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = MARGIN_THRESHOLD)]
        threshold: f64,
        /// Lattice sizes to snap accepted triples onto.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the residual and/or error sweep and write `report.csv` and `summary.txt`.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepArg::Both)]
        sweep: SweepArg,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite existing reports and lower the order of insufficiently closed systems.
        #[arg(long)]
        force: bool,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn label(r: &Representant) -> String {
    let idx: Vec<String> = r.indices.iter().map(|i| i.to_string()).collect();
    format!("[{}]", idx.join(","))
}

fn classify(config: &Path, eps: Option<f64>, max_order: usize, couplings: Option<&Path>) -> Result<()> {
    let cfg = load(config)?;
    let eps = eps.unwrap_or(cfg.sweep.eps[0]);
    let model = cfg.model_for(eps)?;
    let sys = cfg.pulses.build(&model)?;
    let c = sys.classify(&model, max_order);
    println!("pulses = {}", sys.nu());
    for (j, p) in sys.pulses().iter().enumerate() {
        println!("pulse[{}] = theta {:?}, omega {:.12}", j + 1, p.theta.components(), p.omega);
    }
    println!("case = {}", c.case);
    for r in &c.resonances {
        println!("resonance = {} + {} -> {}", r.p, r.q, r.r);
    }
    println!("closedness_order = {}", c.closedness_order);
    println!("margin = {:.6e}", c.margin);
    for v in &c.violations {
        println!("violation = {} delta {:.3e}", label(&v.representant), v.delta);
    }
    for (a, b) in &c.merges {
        println!("merge = {a:?} ~ {b:?}");
    }
    if let Some(path) = couplings {
        if c.closedness_order < 2 {
            bail!("coupling table needs a 2-closed system");
        }
        let table = CouplingTable::new(&model, &sys)?;
        let mut w = csv::Writer::from_writer(File::create(path)?);
        w.write_record(["kind", "label", "component", "re", "im"])?;
        for e in table.entries() {
            for (k, v) in e.value.iter().enumerate() {
                w.write_record([
                    e.kind.to_string(),
                    e.label.clone(),
                    k.to_string(),
                    format!("{:.15e}", v.re),
                    format!("{:.15e}", v.im),
                ])?;
            }
        }
        w.flush()?;
        println!("couplings = {}", path.display());
    }
    Ok(())
}

fn write_fields(
    w: &mut csv::Writer<File>,
    grid: &modlat::spectral::MacroGrid,
    tau: f64,
    name: &str,
    fields: &[(String, &[Complex64])],
) -> Result<()> {
    for (lab, f) in fields {
        for (i, v) in f.iter().enumerate() {
            let y: Vec<String> = grid.coords(i).iter().map(|c| format!("{c:.9}")).collect();
            w.write_record([
                format!("{tau:.9}"),
                name.to_string(),
                lab.clone(),
                y.join(" "),
                format!("{:.12e}", v.re),
                format!("{:.12e}", v.im),
            ])?;
        }
    }
    Ok(())
}

fn run_macro(config: &Path, eps: Option<f64>, tau_end: Option<f64>, snapshots: usize, out: &Path) -> Result<()> {
    let cfg = load(config)?;
    let eps = eps.unwrap_or(cfg.sweep.eps[0]);
    let order = cfg.sweep.order;
    let ex = validation::prepare(&cfg, eps, order)?;
    let h = &ex.hierarchy;
    let tau_end = tau_end.unwrap_or(cfg.sweep.tau0);
    let n = snapshots.max(1);
    let taus: Vec<f64> = (1..=n).map(|i| tau_end * i as f64 / n as f64).collect();
    let states = h.evolve(&ex.init, &taus, cfg.sweep.macro_dt)?;
    let mut w = csv::Writer::from_writer(File::create(out)?);
    w.write_record(["tau", "family", "label", "y", "re", "im"])?;
    for st in std::iter::once(&ex.init).chain(&states) {
        let pulses: Vec<(String, &[Complex64])> = st
            .a1
            .iter()
            .enumerate()
            .map(|(j, f)| (format!("[{}]", j + 1), f.as_slice()))
            .collect();
        write_fields(&mut w, h.grid(), st.tau, "A1", &pulses)?;
        if order >= 2 {
            let alg = h.second_order_fields(&st.a1)?;
            let fields: Vec<(String, &[Complex64])> = h
                .t2_modes()
                .iter()
                .zip(&alg)
                .map(|(m, f)| (label(&m.rep), f.as_slice()))
                .collect();
            write_fields(&mut w, h.grid(), st.tau, "A2", &fields)?;
        }
        if order >= 3 {
            let fields: Vec<(String, &[Complex64])> = st
                .a2
                .iter()
                .enumerate()
                .map(|(j, f)| (format!("[{}]", j + 1), f.as_slice()))
                .collect();
            write_fields(&mut w, h.grid(), st.tau, "A2", &fields)?;
        }
        println!("tau = {:.6}, sup = {:.6e}", st.tau, st.sup());
    }
    w.flush()?;
    Ok(())
}

fn simulate(config: &Path, eps: f64, tau_end: Option<f64>, checkpoints: Option<usize>, out: &Path) -> Result<()> {
    let cfg = load(config)?;
    let tau_end = tau_end.unwrap_or(cfg.sweep.tau0);
    let n = checkpoints.unwrap_or(cfg.sweep.checkpoints);
    let run = validation::error_trace(&cfg, eps, cfg.sweep.order, tau_end, n, 1.0)?;
    let mut w = csv::Writer::from_writer(File::create(out)?);
    w.write_record(["t", "y_distance"])?;
    for (t, v) in &run.samples {
        w.write_record([format!("{t:.9}"), format!("{v:.12e}")])?;
    }
    w.flush()?;
    println!("cells = {}", run.cells);
    println!("sup_y_distance = {:.6e}", run.value);
    if let Some(v) = run.l2_value {
        println!("sup_l2_distance = {v:.6e}");
    }
    if let Some(v) = run.energy_drift {
        println!("energy_drift = {v:.3e}");
    }
    Ok(())
}

fn resonance(phi: f64, samples: usize, threshold: f64, grid: &[usize], out: Option<&Path>) -> Result<()> {
    let p = ResonanceProblem::from_phi(phi);
    let res = p.search(samples, threshold)?;
    println!("phi = {phi}, a1 = {:.15}", p.a1);
    println!("accepted = {}, rejected = {}", res.accepted.len(), res.rejected.len());
    let mut w = match out {
        Some(path) => {
            let mut w = csv::Writer::from_writer(File::create(path)?);
            w.write_record([
                "chi", "psi", "zeta", "theta1", "theta2", "theta3", "omega1", "omega2", "omega3",
                "min_margin", "cells", "k1", "k2", "detuning",
            ])?;
            Some(w)
        }
        None => None,
    };
    for t in &res.accepted {
        let snap = snap_to_grid(&p, t, grid);
        if let Some(w) = w.as_mut() {
            let mut rec: Vec<String> = [t.chi, t.psi, t.zeta]
                .iter()
                .chain(&t.theta)
                .chain(&t.omega)
                .map(|v| format!("{v:.15e}"))
                .collect();
            rec.push(format!("{:.6e}", t.min_margin()));
            match &snap {
                Some(s) => rec.extend([
                    s.cells.to_string(),
                    s.k1.to_string(),
                    s.k2.to_string(),
                    format!("{:.6e}", s.detuning),
                ]),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
            w.write_record(&rec)?;
        }
    }
    if let Some(t) = res.accepted.first() {
        println!(
            "first = theta ({:.6}, {:.6}, {:.6}), margin {:.3e}",
            t.theta[0],
            t.theta[1],
            t.theta[2],
            t.min_margin()
        );
    }
    if let Some(mut w) = w {
        w.flush()?;
    }
    Ok(())
}

fn validate(config: &Path, sweep: SweepArg, out: &Path, force: bool) -> Result<bool> {
    let cfg = load(config)?;
    let mut reports: Vec<SweepReport> = Vec::new();
    if sweep != SweepArg::Error {
        reports.push(validation::run_residual_sweep(&cfg, force)?);
    }
    if sweep != SweepArg::Residual {
        reports.push(validation::run_validation(&cfg, force)?);
    }
    validation::write_reports(out, &reports, force)?;
    print!("{}", validation::summary(&reports));
    Ok(reports.iter().all(SweepReport::passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify {
            config,
            eps,
            max_order,
            with_couplings,
        } => classify(config, *eps, *max_order, with_couplings.as_deref()).map(|_| true),
        Command::Macro {
            config,
            eps,
            tau_end,
            snapshots,
            out,
        } => run_macro(config, *eps, *tau_end, *snapshots, out).map(|_| true),
        Command::Simulate {
            config,
            eps,
            tau_end,
            checkpoints,
            out,
        } => simulate(config, *eps, *tau_end, *checkpoints, out).map(|_| true),
        Command::Resonance {
            phi,
            samples,
            threshold,
            grid,
            out,
        } => resonance(*phi, *samples, *threshold, grid, out.as_deref()).map(|_| true),
        Command::Validate {
            config,
            sweep,
            out,
            force,
        } => validate(config, *sweep, out, *force),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
