//! Velocity-Verlet integration of the lattice equations and lattice norms.

use crate::error::{Error, Result};
use crate::lattice::LatticeModel;

/// Default step rule `dt ≤ DT_FACTOR_MAX / μ₊`.
pub const DT_FACTOR_MAX: f64 = 0.1;

/// Positions, velocities and cached accelerations at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    acc: Vec<f64>,
}

impl MicroState {
    pub fn new(model: &LatticeModel, x: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != model.sites() || v.len() != model.sites() {
            return Err(Error::InvalidLattice(format!(
                "state has {} / {} entries, lattice has {} sites",
                x.len(),
                v.len(),
                model.sites()
            )));
        }
        let mut acc = vec![0.0; x.len()];
        model.force(&x, &mut acc);
        Ok(MicroState { x, v, t, acc })
    }

    pub fn zero(model: &LatticeModel) -> Self {
        let n = model.sites();
        MicroState {
            x: vec![0.0; n],
            v: vec![0.0; n],
            t: 0.0,
            acc: vec![0.0; n],
        }
    }

    /// Accelerations at the current positions.
    pub fn acceleration(&self) -> &[f64] {
        &self.acc
    }

    pub fn energy(&self, model: &LatticeModel) -> f64 {
        model.energy(&self.x, &self.v)
    }
}

/// Fail unless `|dt| ≤ factor / μ₊`.
pub fn check_dt(model: &LatticeModel, dt: f64, factor: f64) -> Result<()> {
    let limit = factor / model.omega_max();
    if !(dt.abs() > 0.0) || dt.abs() > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

/// One velocity-Verlet step; negative `dt` integrates backwards.
pub fn step(model: &LatticeModel, s: &mut MicroState, dt: f64) {
    let h = 0.5 * dt;
    for ((x, v), a) in s.x.iter_mut().zip(s.v.iter_mut()).zip(&s.acc) {
        *v += h * a;
        *x += dt * *v;
    }
    model.force(&s.x, &mut s.acc);
    for (v, a) in s.v.iter_mut().zip(&s.acc) {
        *v += h * a;
    }
    s.t += dt;
}

/// Integrate through the ascending checkpoint times with steps no larger than
/// `dt`, calling `observe` at the start and at every checkpoint.
pub fn simulate(
    model: &LatticeModel,
    mut s: MicroState,
    checkpoints: &[f64],
    dt: f64,
    mut observe: impl FnMut(&MicroState) -> Result<()>,
) -> Result<MicroState> {
    check_dt(model, dt, DT_FACTOR_MAX)?;
    observe(&s)?;
    for &target in checkpoints {
        let span = target - s.t;
        let n = (span / dt - 1e-9).ceil().max(0.0) as usize;
        if n > 0 {
            let h = span / n as f64;
            for _ in 0..n {
                step(model, &mut s, h);
            }
            if s.x.iter().chain(&s.v).any(|v| !v.is_finite()) {
                return Err(Error::MicroInstability(format!("non-finite state at t = {}", s.t)));
            }
        }
        s.t = target;
        observe(&s)?;
    }
    Ok(s)
}

/// `Σ_γ (x_γ)²`, square-rooted.
pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn linf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// `res = ẍ - force(x)` for a candidate with analytic second derivative.
pub fn residual(model: &LatticeModel, x: &[f64], xdd: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; x.len()];
    model.force(x, &mut f);
    xdd.iter().zip(&f).map(|(a, b)| a - b).collect()
}

/// Norms on the lattice together with the equivalence constants `μ₋ ≤ Ω ≤ μ₊`.
#[derive(Debug, Clone)]
pub struct NormSuite<'a> {
    model: &'a LatticeModel,
    pub mu_minus: f64,
    pub mu_plus: f64,
}

impl<'a> NormSuite<'a> {
    pub fn new(model: &'a LatticeModel) -> Result<Self> {
        let (mu_minus, mu_plus) = model.omega_range()?;
        Ok(NormSuite {
            model,
            mu_minus,
            mu_plus,
        })
    }

    pub fn energy_norm(&self, x: &[f64]) -> f64 {
        self.model.energy_norm_sq(x).max(0.0).sqrt()
    }

    /// `(‖x‖²_E + ‖v‖²_{ℓ²})^{1/2}`.
    pub fn y_norm(&self, x: &[f64], v: &[f64]) -> f64 {
        (self.model.energy_norm_sq(x).max(0.0) + v.iter().map(|a| a * a).sum::<f64>()).sqrt()
    }

    /// `‖(x₁ - x₂, v₁ - v₂)‖_Y`.
    pub fn y_distance(&self, x1: &[f64], v1: &[f64], x2: &[f64], v2: &[f64]) -> f64 {
        let dx: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a - b).collect();
        let dv: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| a - b).collect();
        self.y_norm(&dx, &dv)
    }

    /// `(‖x₁ - x₂‖² + ‖v₁ - v₂‖²)^{1/2}` in `ℓ² × ℓ²`.
    pub fn l2_distance(&self, x1: &[f64], v1: &[f64], x2: &[f64], v2: &[f64]) -> f64 {
        let sx: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b).powi(2)).sum();
        let sv: f64 = v1.iter().zip(v2).map(|(a, b)| (a - b).powi(2)).sum();
        (sx + sv).sqrt()
    }
}
