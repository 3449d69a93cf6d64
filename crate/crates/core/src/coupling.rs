//! Nonlinear coupling coefficients and the second-order algebraic fields.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, WaveVector};
use crate::pulse::{PulseSystem, Representant};
use crate::spectral::Jet;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `c = Σ_α a_{n,α} Π_i (e^{iθ_i·α} - 1) - b_n` with `n` the number of wave vectors.
pub fn coupling_c(model: &LatticeModel, thetas: &[&WaveVector]) -> Result<Complex64> {
    let n = thetas.len();
    let pot = model.potential();
    if n == 0 || n > pot.order() {
        return Err(Error::OrderOutOfRange {
            n,
            max: pot.order(),
        });
    }
    let mut c = Complex64::new(-pot.b(n), 0.0);
    for inter in pot.interactions() {
        let a = inter.a[n - 1];
        if a == 0.0 {
            continue;
        }
        let prod: Complex64 = thetas
            .iter()
            .map(|t| Complex64::from_polar(1.0, t.dot(&inter.alpha)) - 1.0)
            .product();
        c += a * prod;
    }
    Ok(c)
}

/// Sine form of the quadratic coefficient,
/// `-4i Σ_α a_{2,α} sin(θ_m·α/2) sin(θ_μ·α/2) sin((θ_m+θ_μ)·α/2) - b₂`.
///
/// The half angles are taken from the unreduced sum `θ_m + θ_μ`.
pub fn coupling_c2_sine(model: &LatticeModel, tm: &WaveVector, tmu: &WaveVector) -> Result<Complex64> {
    let pot = model.potential();
    if pot.order() < 2 {
        return Err(Error::OrderOutOfRange {
            n: 2,
            max: pot.order(),
        });
    }
    let s: f64 = pot
        .interactions()
        .iter()
        .map(|i| {
            let (x, y) = (tm.dot(&i.alpha), tmu.dot(&i.alpha));
            i.a[1] * (x / 2.0).sin() * (y / 2.0).sin() * ((x + y) / 2.0).sin()
        })
        .sum();
    Ok(-4.0 * I * s - pot.b(2))
}

/// `γ_{(p,q)} = 2 Σ_α a_{2,α} (cos((θ_p+θ_q)·α) - cos(θ_q·α)) α`, in lattice coordinates.
pub fn coupling_gamma(model: &LatticeModel, tp: &WaveVector, tq: &WaveVector) -> Vec<f64> {
    let mut g = vec![0.0; model.dim()];
    for inter in model.potential().interactions() {
        if model.potential().order() < 2 {
            break;
        }
        let w = 2.0 * inter.a[1] * ((tp.dot(&inter.alpha) + tq.dot(&inter.alpha)).cos()
            - tq.dot(&inter.alpha).cos());
        for (gi, &ai) in g.iter_mut().zip(&inter.alpha) {
            *gi += w * ai as f64;
        }
    }
    g
}

/// `β_{(p,q)} = Σ_α a_{2,α} (e^{iθ_p·α} - 1) e^{iθ_q·α} α`: the coefficient of
/// `A_p ∇A_q` produced by the quadratic Taylor term.
pub fn gradient_coefficient(model: &LatticeModel, tp: &WaveVector, tq: &WaveVector) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); model.dim()];
    if model.potential().order() < 2 {
        return g;
    }
    for inter in model.potential().interactions() {
        let w = inter.a[1]
            * (Complex64::from_polar(1.0, tp.dot(&inter.alpha)) - 1.0)
            * Complex64::from_polar(1.0, tq.dot(&inter.alpha));
        for (gi, &ai) in g.iter_mut().zip(&inter.alpha) {
            *gi += w * ai as f64;
        }
    }
    g
}

/// `η_{(j,p)} = 2b₂²/b₁ + 2|c_{(j,p)}|²/δ_{(j,p)} + 3c_{(j,p,-p)}` for signed pulses.
pub fn coupling_eta(model: &LatticeModel, sys: &PulseSystem, j: i32, p: i32) -> Result<Complex64> {
    let pot = model.potential();
    let (tj, _) = sys.pulse(j)?;
    let (tp, _) = sys.pulse(p)?;
    let tm = tp.neg();
    let rep = sys.canonicalize(&[j, p])?;
    let delta = sys.defect(model, &rep);
    if delta.abs() <= sys.delta_tol() {
        return Err(Error::ResonantDenominator {
            what: format!("eta_({j},{p})"),
            delta,
        });
    }
    let c2 = coupling_c(model, &[&tj, &tp])?;
    let c3 = if pot.order() >= 3 {
        coupling_c(model, &[&tj, &tp, &tm])?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let b1 = pot.b(1);
    let b2 = pot.b(2);
    Ok(2.0 * b2 * b2 / b1 + 2.0 * c2.norm_sqr() / delta + 3.0 * c3)
}

/// Coefficient of `A_p A_q` (signed pulses, conjugate for negative indices).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTerm {
    pub coef: Complex64,
    pub p: i32,
    pub q: i32,
}

/// One labelled entry of the coefficient dump.
#[derive(Debug, Clone)]
pub struct CouplingEntry {
    pub kind: &'static str,
    pub label: String,
    pub value: Vec<Complex64>,
}

/// Coefficients of the first- and second-order amplitude equations of a pulse system.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    /// For each pulse `j = 1..ν`: terms of `(1/(2iω_j)) Σ_{(p,q)=j} c_{(p,q)} A_p A_q`.
    pub first_order: Vec<Vec<QuadTerm>>,
    /// Stored representants of `T₂ \ N`.
    pub t2: Vec<Representant>,
    /// `δ_J` for each entry of `t2`.
    pub t2_delta: Vec<f64>,
    /// For each entry of `t2`: terms of `Σ_{(p,q)=J} c_{(p,q)} A_p A_q` (not yet divided by `δ_J`).
    pub second_order: Vec<Vec<QuadTerm>>,
    delta_tol: f64,
    entries: Vec<CouplingEntry>,
}

fn signed(nu: usize) -> Vec<i32> {
    (1..=nu as i32).flat_map(|j| [j, -j]).collect()
}

impl CouplingTable {
    pub fn new(model: &LatticeModel, sys: &PulseSystem) -> Result<Self> {
        let nu = sys.nu();
        let idx = signed(nu);
        let mut entries = Vec::new();
        let mut pair_c = Vec::new();
        for &p in &idx {
            for &q in &idx {
                let (tp, _) = sys.pulse(p)?;
                let (tq, _) = sys.pulse(q)?;
                let c = if model.potential().order() >= 2 {
                    coupling_c(model, &[&tp, &tq])?
                } else {
                    Complex64::new(0.0, 0.0)
                };
                pair_c.push((p, q, c));
                if p > 0 && (q > 0 && q >= p || q < 0 && -q > p) {
                    entries.push(CouplingEntry {
                        kind: "c",
                        label: format!("({p},{q})"),
                        value: vec![c],
                    });
                    entries.push(CouplingEntry {
                        kind: "gamma",
                        label: format!("({p},{q})"),
                        value: coupling_gamma(model, &tp, &tq)
                            .into_iter()
                            .map(|g| Complex64::new(g, 0.0))
                            .collect(),
                    });
                    if p != -q {
                        if let Ok(eta) = coupling_eta(model, sys, p, q) {
                            entries.push(CouplingEntry {
                                kind: "eta",
                                label: format!("({p},{q})"),
                                value: vec![eta],
                            });
                        }
                    }
                }
            }
        }

        let mut first_order = vec![Vec::new(); nu];
        for &(p, q, c) in &pair_c {
            let (t, w) = sys.aggregate(&[p, q])?;
            for j in 1..=nu as i32 {
                let (tj, wj) = sys.pulse(j)?;
                if t.distance(&tj) <= crate::pulse::AGGREGATE_TOL
                    && (w - wj).abs() <= crate::pulse::AGGREGATE_TOL * wj.abs().max(1.0)
                {
                    first_order[(j - 1) as usize].push(QuadTerm {
                        coef: c / (2.0 * I * wj),
                        p,
                        q,
                    });
                }
            }
        }

        let t2: Vec<Representant> = sys
            .stored_representants(2)
            .into_iter()
            .filter(|r| !r.is_pulse())
            .collect();
        let t2_delta: Vec<f64> = t2.iter().map(|r| sys.defect(model, r)).collect();
        let mut second_order = vec![Vec::new(); t2.len()];
        for &(p, q, c) in &pair_c {
            let (t, w) = sys.aggregate(&[p, q])?;
            for (k, r) in t2.iter().enumerate() {
                if t.distance(&r.theta) <= crate::pulse::AGGREGATE_TOL
                    && (w - r.omega).abs() <= crate::pulse::AGGREGATE_TOL * r.omega.abs().max(1.0)
                {
                    second_order[k].push(QuadTerm { coef: c, p, q });
                }
            }
        }
        for (r, d) in t2.iter().zip(&t2_delta) {
            entries.push(CouplingEntry {
                kind: "delta",
                label: r.to_string(),
                value: vec![Complex64::new(*d, 0.0)],
            });
        }
        Ok(CouplingTable {
            first_order,
            t2,
            t2_delta,
            second_order,
            delta_tol: sys.delta_tol(),
            entries,
        })
    }

    /// Labelled coefficients for reporting.
    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// `A_{2,J} = (1/δ_J) Σ_{(p,q)=J} c_{(p,q)} A_{1,p} A_{1,q}` for every stored
    /// `J ∈ T₂ \ N`, given jets of `A_{1,j}` for `j = 1..ν`. Merged
    /// representants collect all contributing pairs.
    pub fn second_order_fields(&self, a1: &[Jet]) -> Result<Vec<Jet>> {
        let mut out = Vec::with_capacity(self.t2.len());
        for ((rep, &delta), terms) in self.t2.iter().zip(&self.t2_delta).zip(&self.second_order) {
            if delta.abs() <= self.delta_tol {
                return Err(Error::ResonantDenominator {
                    what: format!("A_2,{rep}"),
                    delta,
                });
            }
            out.push(quadratic_sum(terms, a1, 1.0 / delta));
        }
        Ok(out)
    }
}

/// Jet of a signed pulse amplitude.
pub fn signed_jet(a: &[Jet], j: i32) -> Jet {
    let jet = &a[(j.unsigned_abs() - 1) as usize];
    if j > 0 {
        jet.clone()
    } else {
        jet.conj()
    }
}

/// `scale · Σ coef A_p A_q`.
pub fn quadratic_sum(terms: &[QuadTerm], a: &[Jet], scale: f64) -> Jet {
    let order = a.iter().map(Jet::order).min().unwrap_or(0);
    let len = a.first().map_or(0, |j| j.value().len());
    let mut acc = Jet::zero(len, order);
    for t in terms {
        let prod = signed_jet(a, t.p).mul(&signed_jet(a, t.q));
        acc.axpy(t.coef * scale, &prod);
    }
    acc
}
