//! The multiscale approximation on the lattice and its time derivatives.
//!
//! `x_γ(t) = Σ_k ε^k Σ_J A_{k,J}(εt, εγ) e^{i(ω_J t + θ_J·γ)}` summed over signed
//! representants, i.e. `2 Re(A E)` for stored conjugate pairs and `Re(A E)` for
//! self-conjugate representants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, WaveVector};
use crate::macro_solver::{Hierarchy, HierarchyJets, MacroState};
use crate::micro::{self, MicroState, NormSuite};
use crate::pulse::Representant;
use crate::spectral::{Jet, LatticeSampler, Spectral};

/// `x`, `ẋ`, `ẍ` of the ansatz at microscopic time `t`.
#[derive(Debug, Clone)]
pub struct AnsatzSample {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub xddot: Vec<f64>,
    pub t: f64,
    /// Largest imaginary part of self-conjugate contributions.
    pub imag_residue: f64,
}

struct Carrier {
    omega: f64,
    weight: f64,
    phase: Vec<Complex64>,
}

/// Evaluates the ansatz of a [`Hierarchy`] on a lattice of matching period.
pub struct Ansatz<'a> {
    model: &'a LatticeModel,
    hierarchy: &'a Hierarchy,
    eps: f64,
    sampler: LatticeSampler,
    pulses: Vec<Carrier>,
    t2: Vec<Carrier>,
    t3: Vec<Carrier>,
}

fn carrier(model: &LatticeModel, rep: &Representant) -> Result<Carrier> {
    let m = model.cells();
    let k = grid_index(&rep.theta, m)?;
    let spec = model.spec();
    let phase = (0..model.sites())
        .map(|s| {
            let c = spec.coords(s);
            let n: i64 = c.iter().zip(&k).map(|(a, b)| a * b).sum::<i64>().rem_euclid(m as i64);
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 / m as f64)
        })
        .collect();
    Ok(Carrier {
        omega: rep.omega,
        weight: if rep.is_self_conjugate() { 1.0 } else { 2.0 },
        phase,
    })
}

fn grid_index(theta: &WaveVector, m: usize) -> Result<Vec<i64>> {
    theta
        .grid_index(m, 1e-9)
        .ok_or_else(|| Error::IncommensurateWaveVector {
            theta: theta.components().to_vec(),
            m,
        })
}

impl<'a> Ansatz<'a> {
    /// The macro period must equal `εM`.
    pub fn new(model: &'a LatticeModel, hierarchy: &'a Hierarchy, eps: f64) -> Result<Self> {
        let grid = hierarchy.grid().clone();
        let period = eps * model.cells() as f64;
        if (grid.length() - period).abs() > 1e-9 * period {
            return Err(Error::Config(format!(
                "macro period {} differs from εM = {period}",
                grid.length()
            )));
        }
        let make = |modes: &[crate::macro_solver::Mode]| -> Result<Vec<Carrier>> {
            modes.iter().map(|m| carrier(model, &m.rep)).collect()
        };
        Ok(Ansatz {
            model,
            hierarchy,
            eps,
            sampler: LatticeSampler::new(grid, model.cells()),
            pulses: make(hierarchy.pulses())?,
            t2: make(hierarchy.t2_modes())?,
            t3: make(hierarchy.t3_modes())?,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn spectral(&self) -> &Spectral {
        self.hierarchy.spectral()
    }

    fn add(&self, out: &mut AnsatzSample, jet: &Jet, c: &Carrier, scale: f64, t: f64) {
        let eps = self.eps;
        let sample = |k: usize| -> Vec<Complex64> {
            if k > jet.order() {
                return vec![Complex64::new(0.0, 0.0); out.x.len()];
            }
            self.sampler.sample_spectrum(&self.spectral().to_spectrum(&jet.0[k]))
        };
        let (a0, a1, a2) = (sample(0), sample(1), sample(2));
        let iw = Complex64::new(0.0, c.omega);
        let time = Complex64::from_polar(1.0, c.omega * t);
        let w = c.weight * scale;
        for s in 0..out.x.len() {
            let e = c.phase[s] * time;
            let x = a0[s] * e;
            let xd = (eps * a1[s] + iw * a0[s]) * e;
            let xdd = (eps * eps * 2.0 * a2[s] + 2.0 * iw * eps * a1[s] + iw * iw * a0[s]) * e;
            out.x[s] += w * x.re;
            out.xdot[s] += w * xd.re;
            out.xddot[s] += w * xdd.re;
            if c.weight == 1.0 {
                out.imag_residue = out.imag_residue.max(x.im.abs());
            }
        }
    }

    /// Assemble levels `k ≤ level` from precomputed jets (order ≥ 2 for `ẍ`).
    /// Undetermined top-order pulse amplitudes are zero.
    pub fn assemble_jets(&self, jets: &HierarchyJets, t: f64, level: usize) -> AnsatzSample {
        let n = self.model.sites();
        let mut out = AnsatzSample {
            x: vec![0.0; n],
            xdot: vec![0.0; n],
            xddot: vec![0.0; n],
            t,
            imag_residue: 0.0,
        };
        let e = self.eps;
        if level >= 1 {
            for (j, c) in jets.a1.iter().zip(&self.pulses) {
                self.add(&mut out, j, c, e, t);
            }
        }
        if level >= 2 {
            for (j, c) in jets.a2_alg.iter().zip(&self.t2) {
                self.add(&mut out, j, c, e * e, t);
            }
            for (j, c) in jets.a2_pulse.iter().zip(&self.pulses) {
                self.add(&mut out, j, c, e * e, t);
            }
        }
        if level >= 3 {
            for (j, c) in jets.a3.iter().zip(&self.t3) {
                self.add(&mut out, j, c, e * e * e, t);
            }
        }
        out
    }

    /// Ansatz `X_level` at `t = τ/ε` for the macro state at `τ`.
    pub fn assemble(&self, state: &MacroState, level: usize) -> Result<AnsatzSample> {
        if level > self.hierarchy.order() {
            return Err(Error::OrderOutOfRange {
                n: level,
                max: self.hierarchy.order(),
            });
        }
        let jets = self.hierarchy.jets(state, 2)?;
        Ok(self.assemble_jets(&jets, state.tau / self.eps, level))
    }

    /// Micro state seeded with `X_{N-1}` where `N` is the hierarchy order.
    pub fn initial_state(&self, state: &MacroState) -> Result<MicroState> {
        let level = self.hierarchy.order().saturating_sub(1).max(1);
        let s = self.assemble(state, level)?;
        MicroState::new(self.model, s.x, s.xdot, s.t)
    }

    /// `‖ẍ - force(x)‖_{ℓ²}` of a sample.
    pub fn residual_norm(&self, s: &AnsatzSample) -> f64 {
        micro::l2_norm(&micro::residual(self.model, &s.x, &s.xddot))
    }

    /// `‖X_N - X_{N-1}‖_Y` at the given state.
    pub fn level_gap(&self, state: &MacroState, norms: &NormSuite) -> Result<f64> {
        let n = self.hierarchy.order();
        let jets = self.hierarchy.jets(state, 2)?;
        let t = state.tau / self.eps;
        let hi = self.assemble_jets(&jets, t, n);
        let lo = self.assemble_jets(&jets, t, n.saturating_sub(1));
        Ok(norms.y_distance(&hi.x, &hi.xdot, &lo.x, &lo.xdot))
    }
}
