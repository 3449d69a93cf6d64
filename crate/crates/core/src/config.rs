//! TOML configuration of models, pulse systems and experiments.
//!
//! ```toml
//! [model]
//! kind = "nn-chain"        # nn-chain | fpu | kg | explicit
//! dim = 1
//! a = [-0.23, 0.3, 0.2]    # a_{n,e_i} along every unit offset
//! b = [1.0, 0.4, 0.3]      # b_n
//!
//! [pulses]
//! denominator = 100        # θ_j = 2π k_j / denominator per component
//! indices = [[36], [65], [101]]
//! tune_a1 = true           # solve a₁ so that pulse 3 = pulse 1 + pulse 2 resonates
//!
//! [sweep]
//! order = 2
//! eps = [0.1, 0.07, 0.05, 0.035, 0.025]
//! length = 70.0
//!
//! [[sweep.profile]]
//! kind = "gaussian"
//! amplitude = [0.3, 0.0]
//! center = [25.0]
//! width = 4.0
//! ```

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ExactFunction, ExactPotentials, LatticeModel, LatticeSpec, PotentialSpec, WaveVector};
use crate::macro_solver::Profile;
use crate::pulse::PulseSystem;
use crate::resonance::tune_a1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Interactions along every unit offset with coefficients `a`, on-site `b`.
    NnChain,
    /// One-dimensional chain without on-site potential.
    Fpu,
    /// One-dimensional chain with harmonic interaction and anharmonic on-site potential.
    Kg,
    /// Offsets listed in `interaction`.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnsiteExact {
    /// `W(x) = b₁(1 - cos x)`; `b` must hold its Taylor data.
    SineGordon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub alpha: Vec<i64>,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Rows are the basis vectors; identity when absent.
    #[serde(default)]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub interaction: Vec<InteractionConfig>,
    #[serde(default)]
    pub onsite_exact: Option<OnsiteExact>,
    /// Defaults to `false` for `fpu`, `true` otherwise.
    #[serde(default)]
    pub stability_check: Option<bool>,
    /// Taylor order `N_max`; defaults to the longest coefficient list.
    #[serde(default)]
    pub order: Option<usize>,
}

fn default_dim() -> usize {
    1
}

impl ModelConfig {
    fn taylor_order(&self) -> usize {
        let longest = self
            .interaction
            .iter()
            .map(|i| i.a.len())
            .chain([self.a.len(), self.b.len()])
            .max()
            .unwrap_or(1);
        self.order.unwrap_or(longest).max(1)
    }

    /// Build the model on `M^d` cells.
    pub fn build(&self, cells: usize) -> Result<LatticeModel> {
        let d = self.dim;
        let order = self.taylor_order();
        let mut pot = PotentialSpec::new(d, order);
        match self.kind {
            ModelKind::NnChain | ModelKind::Fpu | ModelKind::Kg => {
                if self.kind != ModelKind::NnChain && d != 1 {
                    return Err(Error::Config(format!("{:?} is one-dimensional", self.kind)));
                }
                if self.kind == ModelKind::Kg && self.a.iter().skip(1).any(|&v| v != 0.0) {
                    return Err(Error::Config("kg interaction must be harmonic".into()));
                }
                for i in 0..d {
                    let mut alpha = vec![0; d];
                    alpha[i] = 1;
                    pot.add_interaction(alpha, self.a.clone())?;
                }
            }
            ModelKind::Explicit => {
                for inter in &self.interaction {
                    pot.add_interaction(inter.alpha.clone(), inter.a.clone())?;
                }
            }
        }
        if self.kind == ModelKind::Fpu {
            if self.b.iter().any(|&v| v != 0.0) {
                return Err(Error::Config("fpu has no on-site potential".into()));
            }
        } else {
            pot.set_onsite(self.b.clone())?;
        }
        if let Some(OnsiteExact::SineGordon) = self.onsite_exact {
            let beta = self.b.first().copied().unwrap_or(0.0);
            let mut exact = ExactPotentials::new().with_onsite(ExactFunction {
                value: Arc::new(move |x: f64| beta * (1.0 - x.cos())),
                derivative: Arc::new(move |x: f64| beta * x.sin()),
            });
            for inter in pot.interactions().to_vec() {
                if inter.alpha.iter().any(|&c| c < 0) {
                    continue;
                }
                let a = inter.a.clone();
                let da = a.clone();
                exact = exact.with_interaction(
                    inter.alpha.clone(),
                    ExactFunction {
                        value: Arc::new(move |u: f64| {
                            a.iter()
                                .enumerate()
                                .map(|(i, c)| c * u.powi(i as i32 + 2) / (i as f64 + 2.0))
                                .sum()
                        }),
                        derivative: Arc::new(move |u: f64| {
                            da.iter()
                                .enumerate()
                                .map(|(i, c)| c * u.powi(i as i32 + 1))
                                .sum()
                        }),
                    },
                );
            }
            pot.set_exact(exact);
        }
        let spec = match &self.basis {
            Some(b) => LatticeSpec::new(d, b.clone(), cells)?,
            None => LatticeSpec::cubic(d, cells)?,
        };
        let check = self.stability_check.unwrap_or(self.kind != ModelKind::Fpu);
        if check {
            LatticeModel::new(spec, pot)
        } else {
            LatticeModel::new_unchecked(spec, pot)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsesConfig {
    pub denominator: usize,
    /// Per pulse, the integer numerators of `θ_j` per component.
    pub indices: Vec<Vec<i64>>,
    /// Solve for `a₁` making pulse 3 resonate with pulses 1 and 2 (1-D `nn-chain` only).
    #[serde(default)]
    pub tune_a1: bool,
    #[serde(default)]
    pub delta_tol: Option<f64>,
}

impl PulsesConfig {
    pub fn wave_vectors(&self) -> Vec<WaveVector> {
        self.indices
            .iter()
            .map(|k| {
                WaveVector::new(
                    k.iter()
                        .map(|&ki| 2.0 * PI * ki as f64 / self.denominator as f64)
                        .collect(),
                )
            })
            .collect()
    }

    pub fn build(&self, model: &LatticeModel) -> Result<PulseSystem> {
        let sys = PulseSystem::on_shell(model, self.wave_vectors())?;
        Ok(match self.delta_tol {
            Some(t) => sys.with_delta_tol(t),
            None => sys,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Gaussian,
    Sech,
    Bump,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: ProfileKind,
    /// `[re, im]`.
    #[serde(default)]
    pub amplitude: [f64; 2],
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_width() -> f64 {
    1.0
}

impl ProfileConfig {
    pub fn profile(&self) -> Profile {
        let amplitude = Complex64::new(self.amplitude[0], self.amplitude[1]);
        let center = self.center.clone();
        let width = self.width;
        match self.kind {
            ProfileKind::Gaussian => Profile::Gaussian {
                amplitude,
                center,
                width,
            },
            ProfileKind::Sech => Profile::Sech {
                amplitude,
                center,
                width,
            },
            ProfileKind::Bump => Profile::Bump {
                amplitude,
                center,
                width,
            },
            ProfileKind::Zero => Profile::Zero,
        }
    }
}

/// Parameters of an ε-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Order `N` of the ansatz.
    pub order: usize,
    /// Descending, at least three values.
    pub eps: Vec<f64>,
    /// Macroscopic period `L = εM`.
    pub length: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_tau0")]
    pub tau0: f64,
    /// Claimed error exponent.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_macro_dt")]
    pub macro_dt: f64,
    /// Micro step `dt = micro_dt_factor / μ₊`.
    #[serde(default = "default_micro_dt_factor")]
    pub micro_dt_factor: f64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Relative energy drift beyond which a micro run is refused.
    #[serde(default = "default_drift_bound")]
    pub energy_drift_bound: f64,
    /// Growth of the amplitude sup-norm over its initial value that counts as blow-up.
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
    /// Accepted residual slope window; `N + 1 - d/2 ± (0.3 + 0.1(N-2))` when absent.
    #[serde(default)]
    pub residual_window: Option<[f64; 2]>,
    /// One initial profile of `A_{1,j}` per pulse.
    #[serde(default)]
    pub profile: Vec<ProfileConfig>,
}

fn default_points() -> usize {
    256
}
fn default_tau0() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.5
}
fn default_macro_dt() -> f64 {
    0.02
}
fn default_micro_dt_factor() -> f64 {
    0.05
}
fn default_checkpoints() -> usize {
    50
}
fn default_drift_bound() -> f64 {
    1e-2
}
fn default_blowup_factor() -> f64 {
    1e6
}

/// Model, pulses and sweep parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub pulses: PulsesConfig,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.eps.len() < 3 {
            return Err(Error::Config(format!(
                "at least three eps values required, got {}",
                s.eps.len()
            )));
        }
        if s.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Config("eps values must lie in (0, 1)".into()));
        }
        if s.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps list must be strictly descending".into()));
        }
        if !(1..=3).contains(&s.order) {
            return Err(Error::Config(format!("order {} not in 1..=3", s.order)));
        }
        let d = self.model.dim as f64;
        let beta_max = s.order as f64 - d / 2.0;
        if s.order >= 2 && !(s.beta > 1.0 && s.beta <= beta_max + 1e-12) {
            return Err(Error::Config(format!(
                "beta = {} outside (1, {beta_max}]",
                s.beta
            )));
        }
        if s.checkpoints < 1 {
            return Err(Error::Config("checkpoints must be positive".into()));
        }
        if !(s.blowup_factor > 1.0) {
            return Err(Error::Config("blowup_factor must exceed 1".into()));
        }
        if !s.profile.is_empty() && s.profile.len() != self.pulses.indices.len() {
            return Err(Error::Config(format!(
                "{} profiles for {} pulses",
                s.profile.len(),
                self.pulses.indices.len()
            )));
        }
        for e in &s.eps {
            self.cells_for(*e)?;
        }
        Ok(())
    }

    /// `M = L/ε`, required to be an integer multiple of the pulse denominator.
    pub fn cells_for(&self, eps: f64) -> Result<usize> {
        let m = self.sweep.length / eps;
        let mr = m.round();
        if (m - mr).abs() > 1e-6 * m || mr < 2.0 {
            return Err(Error::Config(format!(
                "L/eps = {m} is not an integer for eps = {eps}"
            )));
        }
        let m = mr as usize;
        if !m.is_multiple_of(self.pulses.denominator) {
            return Err(Error::Config(format!(
                "M = {m} is not a multiple of the pulse denominator {}",
                self.pulses.denominator
            )));
        }
        Ok(m)
    }

    /// Model configuration after optional tuning of `a₁`.
    pub fn resolved_model(&self) -> Result<ModelConfig> {
        let mut model = self.model.clone();
        if self.pulses.tune_a1 {
            if model.kind != ModelKind::NnChain || model.dim != 1 || self.pulses.indices.len() < 2 {
                return Err(Error::Config(
                    "tune_a1 needs a 1-D nn-chain and at least two pulses".into(),
                ));
            }
            let th = self.pulses.wave_vectors();
            let b1 = model.b.first().copied().unwrap_or(0.0);
            let a1 = tune_a1(b1, th[0].components()[0], th[1].components()[0])?;
            if model.a.is_empty() {
                model.a.push(a1);
            } else {
                model.a[0] = a1;
            }
        }
        Ok(model)
    }

    pub fn model_for(&self, eps: f64) -> Result<LatticeModel> {
        self.resolved_model()?.build(self.cells_for(eps)?)
    }

    /// Profiles per pulse; zero when none are configured.
    pub fn profiles(&self) -> Vec<Profile> {
        if self.sweep.profile.is_empty() {
            vec![Profile::Zero; self.pulses.indices.len()]
        } else {
            self.sweep.profile.iter().map(ProfileConfig::profile).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
kind = "nn-chain"
a = [-0.2, 0.3, 0.2]
b = [1.0, 0.4, 0.3]

[pulses]
denominator = 100
indices = [[36], [65], [101]]
tune_a1 = true

[sweep]
order = 2
eps = [0.1, 0.05, 0.025]
length = 70.0

[[sweep.profile]]
kind = "gaussian"
amplitude = [0.3, 0.0]
center = [25.0]
width = 4.0

[[sweep.profile]]
kind = "sech"
amplitude = [0.3, 0.1]
center = [35.0]
width = 4.0

[[sweep.profile]]
kind = "zero"
"#;

    #[test]
    fn parses_and_tunes() {
        let cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.cells_for(0.05).unwrap(), 1400);
        let m = cfg.resolved_model().unwrap();
        assert!((m.a[0] + 0.232_572_837).abs() < 1e-8);
        let model = cfg.model_for(0.1).unwrap();
        let sys = cfg.pulses.build(&model).unwrap();
        assert_eq!(sys.pulse_resonances().len(), 1);
    }

    #[test]
    fn short_eps_list_is_rejected() {
        let s = BASE.replace("eps = [0.1, 0.05, 0.025]", "eps = [0.1, 0.05]");
        assert!(matches!(ExperimentConfig::from_toml_str(&s), Err(Error::Config(_))));
    }

    #[test]
    fn incommensurate_length_is_rejected() {
        let s = BASE.replace("length = 70.0", "length = 71.0");
        assert!(ExperimentConfig::from_toml_str(&s).is_err());
    }

    #[test]
    fn fpu_skips_stability_scan() {
        let m = ModelConfig {
            kind: ModelKind::Fpu,
            dim: 1,
            basis: None,
            a: vec![1.0, 0.5, 0.25],
            b: vec![],
            interaction: vec![],
            onsite_exact: None,
            stability_check: None,
            order: None,
        };
        assert!(m.build(64).is_ok());
        let mut checked = m.clone();
        checked.stability_check = Some(true);
        assert!(checked.build(64).is_err());
    }

    #[test]
    fn sine_gordon_callbacks_match_taylor_data() {
        let m = ModelConfig {
            kind: ModelKind::Kg,
            dim: 1,
            basis: None,
            a: vec![1.0],
            b: vec![1.0, 0.0, -1.0 / 6.0],
            interaction: vec![],
            onsite_exact: Some(OnsiteExact::SineGordon),
            stability_check: None,
            order: None,
        };
        let model = m.build(32).unwrap();
        let mut bad = m.clone();
        bad.b[2] = 0.5;
        assert!(matches!(bad.build(32), Err(Error::TaylorMismatch { .. })));
        let x: Vec<f64> = (0..32).map(|i| 0.4 * (i as f64).sin()).collect();
        let mut f = vec![0.0; 32];
        model.force(&x, &mut f);
        assert!((f[3] - (-(x[3].sin()) + x[4] + x[2] - 2.0 * x[3])).abs() < 1e-14);
    }
}
