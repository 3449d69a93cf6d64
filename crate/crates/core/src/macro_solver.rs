//! The macroscopic amplitude hierarchy up to third order.
//!
//! Amplitudes live on a periodic [`MacroGrid`] in cell coordinates. Pulse
//! amplitudes `A_{1,j}` (and `A_{2,j}` for `N = 3`) evolve by transport
//! equations; the remaining fields are algebraic. Time derivatives of every
//! field are obtained as Taylor jets by differentiating the equations along
//! the flow, so they are consistent with the instantaneous state.

use num_complex::Complex64;

use crate::coupling::{self, coupling_c, gradient_coefficient, CouplingTable};
use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, WaveVector};
use crate::pulse::{PulseSystem, Representant, AGGREGATE_TOL};
use crate::spectral::{sup_norm, Field, Jet, MacroGrid, Spectral};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which stored family a field reference points into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `A_{1,j}`, indexed by pulse.
    A1,
    /// `A_{2,j}` for pulses (evolving).
    A2Pulse,
    /// `A_{2,J}` for stored `J ∈ T₂ \ N` (algebraic).
    A2Alg,
}

/// A stored field, possibly conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldRef {
    pub family: Family,
    pub index: usize,
    pub conj: bool,
}

/// One source term of a higher-order equation.
#[derive(Debug, Clone)]
pub enum Term {
    /// `coef · a · b`.
    Quad { coef: Complex64, a: FieldRef, b: FieldRef },
    /// `a · (coef·∇b)` with complex direction `coef`.
    Grad {
        coef: Vec<Complex64>,
        a: FieldRef,
        b: FieldRef,
    },
    /// `coef · a · b · c`.
    Cubic {
        coef: Complex64,
        a: FieldRef,
        b: FieldRef,
        c: FieldRef,
    },
}

/// A stored representant with the data its equation needs.
#[derive(Debug, Clone)]
pub struct Mode {
    pub rep: Representant,
    /// `δ_J` (zero for pulses).
    pub delta: f64,
    /// `Σ_α a_{1,α} e^{iθ_J·α} α`.
    pub transport: Vec<Complex64>,
}

/// Evolving part of the hierarchy at one macroscopic time.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub tau: f64,
    /// `A_{1,j}` for `j = 1..ν`.
    pub a1: Vec<Field>,
    /// `A_{2,j}` for `j = 1..ν` when `N = 3`, empty otherwise.
    pub a2: Vec<Field>,
}

impl MacroState {
    pub fn zero(h: &Hierarchy) -> Self {
        let len = h.grid().len();
        let nu = h.pulses.len();
        let zero = vec![Complex64::new(0.0, 0.0); len];
        MacroState {
            tau: 0.0,
            a1: vec![zero.clone(); nu],
            a2: if h.order >= 3 { vec![zero; nu] } else { Vec::new() },
        }
    }

    /// Largest modulus over all evolving fields.
    pub fn sup(&self) -> f64 {
        self.a1
            .iter()
            .chain(&self.a2)
            .map(|f| sup_norm(f))
            .fold(0.0, f64::max)
    }
}

/// Taylor jets in `τ` of every field of the ansatz.
#[derive(Debug, Clone)]
pub struct HierarchyJets {
    pub a1: Vec<Jet>,
    pub a2_pulse: Vec<Jet>,
    pub a2_alg: Vec<Jet>,
    pub a3: Vec<Jet>,
}

/// Initial amplitude profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `a·e^{-|y-c|²/(2w²)}`.
    Gaussian { amplitude: Complex64, center: Vec<f64>, width: f64 },
    /// `a·Π_i sech((y_i-c_i)/w)`.
    Sech { amplitude: Complex64, center: Vec<f64>, width: f64 },
    /// `a·e^{1-1/(1-r²)}` for `r = |y-c|/w < 1`, zero outside.
    Bump { amplitude: Complex64, center: Vec<f64>, width: f64 },
    Zero,
}

impl Profile {
    pub fn sample(&self, grid: &MacroGrid) -> Field {
        grid.sample(|y| match self {
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r2: f64 = y.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Profile::Sech {
                amplitude,
                center,
                width,
            } => {
                let p: f64 = y
                    .iter()
                    .zip(center)
                    .map(|(a, b)| 1.0 / ((a - b) / width).cosh())
                    .product();
                amplitude * p
            }
            Profile::Bump {
                amplitude,
                center,
                width,
            } => {
                let r2: f64 = y
                    .iter()
                    .zip(center)
                    .map(|(a, b)| ((a - b) / width).powi(2))
                    .sum();
                if r2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Profile::Zero => Complex64::new(0.0, 0.0),
        })
    }
}

fn transport_vector(model: &LatticeModel, theta: &WaveVector) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); model.dim()];
    for inter in model.potential().interactions() {
        let w = Complex64::from_polar(inter.a[0], theta.dot(&inter.alpha));
        for (vi, &ai) in v.iter_mut().zip(&inter.alpha) {
            *vi += w * ai as f64;
        }
    }
    v
}

fn same(t1: &WaveVector, w1: f64, t2: &WaveVector, w2: f64) -> bool {
    t1.distance(t2) <= AGGREGATE_TOL
        && (w1 - w2).abs() <= AGGREGATE_TOL * w1.abs().max(w2.abs()).max(1.0)
}

fn coupling_or_zero(model: &LatticeModel, thetas: &[&WaveVector]) -> Result<Complex64> {
    if thetas.len() > model.potential().order() {
        Ok(Complex64::new(0.0, 0.0))
    } else {
        coupling_c(model, thetas)
    }
}

/// Jets referenced by [`FieldRef`]s during one evaluation.
struct JetSet<'a> {
    a1: &'a [Jet],
    a1_grad: &'a [Vec<Jet>],
    a2p: &'a [Jet],
    a2a: &'a [Jet],
}

impl JetSet<'_> {
    fn get(&self, r: FieldRef) -> Jet {
        let j = match r.family {
            Family::A1 => &self.a1[r.index],
            Family::A2Pulse => &self.a2p[r.index],
            Family::A2Alg => &self.a2a[r.index],
        };
        if r.conj {
            j.conj()
        } else {
            j.clone()
        }
    }

    /// `coef·∇b` for an `A1` reference.
    fn grad(&self, coef: &[Complex64], r: FieldRef) -> Jet {
        assert_eq!(r.family, Family::A1, "gradient terms act on first-order fields");
        let partials = &self.a1_grad[r.index];
        let len = partials[0].value().len();
        let mut acc = Jet::zero(len, partials[0].order());
        for (c, p) in coef.iter().zip(partials) {
            if r.conj {
                acc.axpy(*c, &p.conj());
            } else {
                acc.axpy(*c, p);
            }
        }
        acc
    }
}

/// The amplitude hierarchy of order `N ∈ {1, 2, 3}` for a pulse system.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    order: usize,
    spectral: Spectral,
    table: CouplingTable,
    pulses: Vec<Mode>,
    hessians: Vec<Vec<Vec<f64>>>,
    t2: Vec<Mode>,
    t3: Vec<Mode>,
    /// Position of each `t3` entry among the `t2` fields.
    t3_in_t2: Vec<Option<FieldRef>>,
    second_pulse: Vec<Vec<Term>>,
    third: Vec<Vec<Term>>,
    blowup_factor: f64,
}

impl Hierarchy {
    /// Assemble the equations; the system must be `N`-closed.
    pub fn new(model: &LatticeModel, sys: &PulseSystem, order: usize, grid: MacroGrid) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::OrderOutOfRange { n: order, max: 3 });
        }
        if grid.dim() != model.dim() {
            return Err(Error::InvalidLattice("macro grid dimension differs from lattice".into()));
        }
        sys.require_closed(model, order)?;
        let table = CouplingTable::new(model, sys)?;
        let nu = sys.nu();
        let mut pulses = Vec::with_capacity(nu);
        let mut hessians = Vec::with_capacity(nu);
        for j in 1..=nu as i32 {
            let rep = sys.canonicalize(&[j])?;
            hessians.push(model.second_moment(&rep.theta));
            pulses.push(Mode {
                transport: transport_vector(model, &rep.theta),
                delta: 0.0,
                rep,
            });
        }
        let t2: Vec<Mode> = table
            .t2
            .iter()
            .zip(&table.t2_delta)
            .map(|(rep, &delta)| Mode {
                transport: transport_vector(model, &rep.theta),
                delta,
                rep: rep.clone(),
            })
            .collect();
        let t2_reps: Vec<Representant> = t2.iter().map(|m| m.rep.clone()).collect();

        let mut h = Hierarchy {
            order,
            spectral: Spectral::new(grid),
            table,
            pulses,
            hessians,
            t2,
            t3: Vec::new(),
            t3_in_t2: Vec::new(),
            second_pulse: Vec::new(),
            third: Vec::new(),
            blowup_factor: 1e6,
        };
        if order < 3 {
            return Ok(h);
        }

        let t3: Vec<Mode> = sys
            .stored_representants(3)
            .into_iter()
            .filter(|r| !r.is_pulse())
            .map(|rep| Mode {
                transport: transport_vector(model, &rep.theta),
                delta: sys.defect(model, &rep),
                rep,
            })
            .collect();
        h.t3_in_t2 = t3
            .iter()
            .map(|m| {
                PulseSystem::locate(&t2_reps, &m.rep.theta, m.rep.omega).map(|(index, conj)| {
                    FieldRef {
                        family: Family::A2Alg,
                        index,
                        conj,
                    }
                })
            })
            .collect();

        let signed: Vec<i32> = (1..=nu as i32).flat_map(|j| [j, -j]).collect();
        let a1_ref = |p: i32| FieldRef {
            family: Family::A1,
            index: (p.unsigned_abs() - 1) as usize,
            conj: p < 0,
        };
        // Signed second-order fields with their wave data.
        let mut t2_signed: Vec<(FieldRef, WaveVector, f64)> = Vec::new();
        for rep in sys.representant_table(2) {
            let r = if rep.is_pulse() {
                let q = rep.indices[0];
                FieldRef {
                    family: Family::A2Pulse,
                    index: (q.unsigned_abs() - 1) as usize,
                    conj: q < 0,
                }
            } else {
                let (index, conj) = PulseSystem::locate(&t2_reps, &rep.theta, rep.omega)
                    .ok_or_else(|| Error::InvalidPulseSystem(format!("{rep} not stored")))?;
                FieldRef {
                    family: Family::A2Alg,
                    index,
                    conj,
                }
            };
            t2_signed.push((r, rep.theta.clone(), rep.omega));
        }

        let targets: Vec<(WaveVector, f64)> = h
            .pulses
            .iter()
            .chain(&t3)
            .map(|m| (m.rep.theta.clone(), m.rep.omega))
            .collect();
        let mut terms: Vec<Vec<Term>> = vec![Vec::new(); targets.len()];
        let find = |theta: &WaveVector, omega: f64| {
            targets
                .iter()
                .position(|(t, w)| same(t, *w, theta, omega))
        };

        for &p in &signed {
            let (tp, wp) = sys.pulse(p)?;
            for (r, tj, wj) in &t2_signed {
                if let Some(k) = find(&tp.add(tj), wp + wj) {
                    let c = coupling_or_zero(model, &[&tp, tj])?;
                    terms[k].push(Term::Quad {
                        coef: 2.0 * c,
                        a: a1_ref(p),
                        b: *r,
                    });
                }
            }
            for &q in &signed {
                let (tq, wq) = sys.pulse(q)?;
                if let Some(k) = find(&tp.add(&tq), wp + wq) {
                    let beta = gradient_coefficient(model, &tp, &tq);
                    if beta.iter().any(|b| b.norm() > 0.0) {
                        terms[k].push(Term::Grad {
                            coef: beta.iter().map(|b| 2.0 * b).collect(),
                            a: a1_ref(p),
                            b: a1_ref(q),
                        });
                    }
                }
                if model.potential().order() < 3 {
                    continue;
                }
                for &r in &signed {
                    let (tr, wr) = sys.pulse(r)?;
                    if let Some(k) = find(&tp.add(&tq).add(&tr), wp + wq + wr) {
                        let c = coupling_c(model, &[&tp, &tq, &tr])?;
                        terms[k].push(Term::Cubic {
                            coef: c,
                            a: a1_ref(p),
                            b: a1_ref(q),
                            c: a1_ref(r),
                        });
                    }
                }
            }
        }
        h.third = terms.split_off(nu);
        h.second_pulse = terms;
        h.t3 = t3;
        Ok(h)
    }

    /// Guard threshold relative to the initial sup-norm (default `1e6`).
    pub fn with_blowup_factor(mut self, factor: f64) -> Self {
        self.blowup_factor = factor;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &MacroGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn table(&self) -> &CouplingTable {
        &self.table
    }

    pub fn pulses(&self) -> &[Mode] {
        &self.pulses
    }

    /// Stored `T₂ \ N` modes, in the order of [`HierarchyJets::a2_alg`].
    pub fn t2_modes(&self) -> &[Mode] {
        &self.t2
    }

    /// Stored `T₃ \ N` modes, in the order of [`HierarchyJets::a3`] (empty for `N < 3`).
    pub fn t3_modes(&self) -> &[Mode] {
        &self.t3
    }

    /// Source terms of the second-order pulse equations (without the linear parts).
    pub fn second_order_terms(&self) -> &[Vec<Term>] {
        &self.second_pulse
    }

    /// Group velocity `(1/(2iω_j)) Σ_α a_{1,α} e^{iθ_j·α} α` of pulse `j` (1-based).
    pub fn velocity(&self, j: usize) -> Vec<f64> {
        let m = &self.pulses[j - 1];
        m.transport
            .iter()
            .map(|v| (v / (2.0 * I * m.rep.omega)).re)
            .collect()
    }

    fn grad_dot(&self, f: &[Complex64], coef: &[Complex64]) -> Field {
        self.spectral
            .apply_symbol(f, |k| I * k.iter().zip(coef).map(|(a, c)| c * a).sum::<Complex64>())
    }

    fn a1_gradients(&self, a1: &[Jet]) -> Vec<Vec<Jet>> {
        a1.iter()
            .map(|j| {
                (0..self.grid().dim())
                    .map(|axis| j.map(|f| self.spectral.partial(f, axis)))
                    .collect()
            })
            .collect()
    }

    fn eval_terms(&self, terms: &[Term], js: &JetSet, order: usize) -> Jet {
        let len = self.grid().len();
        let mut acc = Jet::zero(len, order);
        for t in terms {
            match t {
                Term::Quad { coef, a, b } => {
                    acc.axpy(*coef, &js.get(*a).truncate(order).mul(&js.get(*b)));
                }
                Term::Grad { coef, a, b } => {
                    acc.axpy(Complex64::new(1.0, 0.0), &js.get(*a).truncate(order).mul(&js.grad(coef, *b)));
                }
                Term::Cubic { coef, a, b, c } => {
                    let p = js.get(*a).truncate(order).mul(&js.get(*b)).mul(&js.get(*c));
                    acc.axpy(*coef, &p);
                }
            }
        }
        acc
    }

    /// Jet of `∂_τA_{1,j}` from jets of `A_{1,·}` (same order).
    fn first_order_jet(&self, a1: &[Jet]) -> Vec<Jet> {
        self.pulses
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let coef: Vec<Complex64> =
                    m.transport.iter().map(|v| v / (2.0 * I * m.rep.omega)).collect();
                let mut out = a1[j].map(|f| self.grad_dot(f, &coef));
                out.axpy(
                    Complex64::new(1.0, 0.0),
                    &coupling::quadratic_sum(&self.table.first_order[j], a1, 1.0),
                );
                out
            })
            .collect()
    }

    /// Jets of `A_{1,·}` of the given order from their values.
    pub fn a1_jets(&self, a1: &[Field], order: usize) -> Vec<Jet> {
        let mut jets: Vec<Jet> = a1.iter().map(|f| Jet::constant(f.clone())).collect();
        for n in 0..order {
            let f = self.first_order_jet(&jets);
            let s = 1.0 / (n + 1) as f64;
            for (jet, fj) in jets.iter_mut().zip(f) {
                jet.0.push(fj.0[n].iter().map(|v| v * s).collect());
            }
        }
        jets
    }

    /// Jet of `∂_τA_{2,j}` given the jets of all lower fields.
    fn second_order_jet(&self, a1: &[Jet], a1_tt: &[Jet], js: &JetSet, order: usize) -> Vec<Jet> {
        self.pulses
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let mut acc = js.a2p[j].map(|f| self.grad_dot(f, &m.transport)).truncate(order);
                acc.axpy(Complex64::new(1.0, 0.0), &self.eval_terms(&self.second_pulse[j], js, order));
                let h = &self.hessians[j];
                acc.axpy(
                    Complex64::new(0.5, 0.0),
                    &a1[j].truncate(order).map(|f| self.spectral.second_order(f, h)),
                );
                acc.axpy(Complex64::new(-1.0, 0.0), &a1_tt[j]);
                acc.scale(1.0 / (2.0 * I * m.rep.omega))
            })
            .collect()
    }

    /// `∂_τA_{1,j}`: transport at the group velocity plus the quadratic couplings.
    pub fn first_order_rhs(&self, a1: &[Field]) -> Vec<Field> {
        let jets: Vec<Jet> = a1.iter().map(|f| Jet::constant(f.clone())).collect();
        self.first_order_jet(&jets)
            .into_iter()
            .map(|j| j.0.into_iter().next().expect("order zero"))
            .collect()
    }

    /// `A_{2,J}` for stored `J ∈ T₂ \ N`.
    pub fn second_order_fields(&self, a1: &[Field]) -> Result<Vec<Field>> {
        let jets: Vec<Jet> = a1.iter().map(|f| Jet::constant(f.clone())).collect();
        Ok(self
            .table
            .second_order_fields(&jets)?
            .into_iter()
            .map(|j| j.0.into_iter().next().expect("order zero"))
            .collect())
    }

    fn require_order(&self, n: usize) -> Result<()> {
        if self.order < n {
            return Err(Error::OrderOutOfRange { n, max: self.order });
        }
        Ok(())
    }

    /// `∂_τA_{2,j}` for the pulses; requires `N = 3`.
    pub fn second_order_rhs(&self, a1: &[Field], a2: &[Field]) -> Result<Vec<Field>> {
        self.require_order(3)?;
        let a1j = self.a1_jets(a1, 2);
        let a1_tt: Vec<Jet> = a1j
            .iter()
            .map(|j| j.tau_derivative().tau_derivative())
            .collect();
        let a2a = self.table.second_order_fields(&a1j)?;
        let a2p: Vec<Jet> = a2.iter().map(|f| Jet::constant(f.clone())).collect();
        let a1c: Vec<Jet> = a1j.iter().map(|j| j.truncate(0)).collect();
        let grads = self.a1_gradients(&a1c);
        let a2a0: Vec<Jet> = a2a.iter().map(|j| j.truncate(0)).collect();
        let js = JetSet {
            a1: &a1c,
            a1_grad: &grads,
            a2p: &a2p,
            a2a: &a2a0,
        };
        Ok(self
            .second_order_jet(&a1c, &a1_tt, &js, 0)
            .into_iter()
            .map(|j| j.0.into_iter().next().expect("order zero"))
            .collect())
    }

    /// `A_{3,J}` for stored `J ∈ T₃ \ N`; requires `N = 3`.
    pub fn third_order_fields(&self, a1: &[Field], a2: &[Field]) -> Result<Vec<Field>> {
        self.require_order(3)?;
        let state = MacroState {
            tau: 0.0,
            a1: a1.to_vec(),
            a2: a2.to_vec(),
        };
        Ok(self
            .jets(&state, 0)?
            .a3
            .into_iter()
            .map(|j| j.0.into_iter().next().expect("order zero"))
            .collect())
    }

    /// Jets of all ansatz fields, each of at least the requested order.
    pub fn jets(&self, state: &MacroState, order: usize) -> Result<HierarchyJets> {
        let k = if self.order >= 3 { order + 1 } else { order };
        let a1 = self.a1_jets(&state.a1, k);
        let a2_alg = if self.order >= 2 {
            self.table.second_order_fields(&a1)?
        } else {
            Vec::new()
        };
        if self.order < 3 {
            return Ok(HierarchyJets {
                a1,
                a2_pulse: Vec::new(),
                a2_alg,
                a3: Vec::new(),
            });
        }
        let a1_tt: Vec<Jet> = a1
            .iter()
            .map(|j| j.tau_derivative().tau_derivative())
            .collect();
        let grads = self.a1_gradients(&a1);
        let mut a2p: Vec<Jet> = state.a2.iter().map(|f| Jet::constant(f.clone())).collect();
        for n in 0..order {
            let a1n: Vec<Jet> = a1.iter().map(|j| j.truncate(n)).collect();
            let gn: Vec<Vec<Jet>> = grads
                .iter()
                .map(|g| g.iter().map(|j| j.truncate(n)).collect())
                .collect();
            let an: Vec<Jet> = a2_alg.iter().map(|j| j.truncate(n)).collect();
            let ttn: Vec<Jet> = a1_tt.iter().map(|j| j.truncate(n)).collect();
            let js = JetSet {
                a1: &a1n,
                a1_grad: &gn,
                a2p: &a2p,
                a2a: &an,
            };
            let f = self.second_order_jet(&a1n, &ttn, &js, n);
            let s = 1.0 / (n + 1) as f64;
            for (jet, fj) in a2p.iter_mut().zip(f) {
                jet.0.push(fj.0[n].iter().map(|v| v * s).collect());
            }
        }

        let a1o: Vec<Jet> = a1.iter().map(|j| j.truncate(order)).collect();
        let go: Vec<Vec<Jet>> = grads
            .iter()
            .map(|g| g.iter().map(|j| j.truncate(order)).collect())
            .collect();
        let ao: Vec<Jet> = a2_alg.iter().map(|j| j.truncate(order)).collect();
        let js = JetSet {
            a1: &a1o,
            a1_grad: &go,
            a2p: &a2p,
            a2a: &ao,
        };
        let mut a3 = Vec::with_capacity(self.t3.len());
        for ((m, terms), in_t2) in self.t3.iter().zip(&self.third).zip(&self.t3_in_t2) {
            if m.delta.abs() <= f64::EPSILON {
                return Err(Error::ResonantDenominator {
                    what: format!("A_3,{}", m.rep),
                    delta: m.delta,
                });
            }
            let mut acc = self.eval_terms(terms, &js, order);
            if let Some(r) = in_t2 {
                let a2 = {
                    let j = &a2_alg[r.index];
                    if r.conj {
                        j.conj()
                    } else {
                        j.clone()
                    }
                };
                acc.axpy(-2.0 * I * m.rep.omega, &a2.tau_derivative().truncate(order));
                acc.axpy(
                    Complex64::new(1.0, 0.0),
                    &a2.truncate(order).map(|f| self.grad_dot(f, &m.transport)),
                );
            }
            a3.push(acc.scale(Complex64::new(1.0 / m.delta, 0.0)));
        }
        Ok(HierarchyJets {
            a1: a1.into_iter().map(|j| j.truncate(order)).collect(),
            a2_pulse: a2p,
            a2_alg: a2_alg.into_iter().map(|j| j.truncate(order)).collect(),
            a3,
        })
    }

    fn rhs(&self, s: &MacroState) -> Result<(Vec<Field>, Vec<Field>)> {
        let d1 = self.first_order_rhs(&s.a1);
        let d2 = if self.order >= 3 {
            self.second_order_rhs(&s.a1, &s.a2)?
        } else {
            Vec::new()
        };
        Ok((d1, d2))
    }

    /// Largest stable step of the classical RK4 scheme for the transport part.
    pub fn dt_limit(&self) -> f64 {
        let vmax = (1..=self.pulses.len())
            .map(|j| self.velocity(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let k = self.spectral.max_wavenumber();
        if vmax * k == 0.0 {
            f64::INFINITY
        } else {
            2.8 / (vmax * k)
        }
    }

    /// One classical RK4 step of the evolving fields.
    pub fn step(&self, s: &MacroState, dt: f64) -> Result<MacroState> {
        let comb = |base: &MacroState, k: &(Vec<Field>, Vec<Field>), h: f64| MacroState {
            tau: base.tau + h,
            a1: axpy_fields(&base.a1, &k.0, h),
            a2: axpy_fields(&base.a2, &k.1, h),
        };
        let k1 = self.rhs(s)?;
        let k2 = self.rhs(&comb(s, &k1, dt / 2.0))?;
        let k3 = self.rhs(&comb(s, &k2, dt / 2.0))?;
        let k4 = self.rhs(&comb(s, &k3, dt))?;
        let sum = |i: usize| -> Vec<Field> {
            let pick = |k: &(Vec<Field>, Vec<Field>)| if i == 0 { k.0.clone() } else { k.1.clone() };
            let (a, b, c, d) = (pick(&k1), pick(&k2), pick(&k3), pick(&k4));
            a.iter()
                .zip(&b)
                .zip(&c)
                .zip(&d)
                .map(|(((a, b), c), d)| {
                    a.iter()
                        .zip(b)
                        .zip(c)
                        .zip(d)
                        .map(|(((a, b), c), d)| (a + 2.0 * b + 2.0 * c + d) / 6.0)
                        .collect()
                })
                .collect()
        };
        Ok(MacroState {
            tau: s.tau + dt,
            a1: axpy_fields(&s.a1, &sum(0), dt),
            a2: axpy_fields(&s.a2, &sum(1), dt),
        })
    }

    /// Integrate to each checkpoint `τ` (ascending) with steps no larger than `dt`;
    /// returns the state at every checkpoint.
    pub fn evolve(&self, init: &MacroState, checkpoints: &[f64], dt: f64) -> Result<Vec<MacroState>> {
        let limit = self.dt_limit();
        if !(dt > 0.0) || dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        let bound = self.blowup_factor * init.sup();
        let mut state = init.clone();
        let mut out = Vec::with_capacity(checkpoints.len());
        for &target in checkpoints {
            let span = target - state.tau;
            if span < -1e-12 {
                return Err(Error::Config(format!(
                    "checkpoint {target} precedes current time {}",
                    state.tau
                )));
            }
            let n = (span / dt - 1e-9).ceil().max(0.0) as usize;
            if n > 0 {
                let h = span / n as f64;
                for _ in 0..n {
                    state = self.step(&state, h)?;
                    let sup = state.sup();
                    if !sup.is_finite() || (bound > 0.0 && sup > bound) {
                        return Err(Error::BlowUp { tau: state.tau });
                    }
                }
            }
            state.tau = target;
            out.push(state.clone());
        }
        Ok(out)
    }
}

fn axpy_fields(base: &[Field], k: &[Field], h: f64) -> Vec<Field> {
    base.iter()
        .zip(k)
        .map(|(b, k)| b.iter().zip(k).map(|(x, y)| x + h * y).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeSpec, PotentialSpec};

    fn chain() -> LatticeModel {
        let mut pot = PotentialSpec::new(1, 3);
        pot.add_interaction(vec![1], vec![1.0, 0.3, 0.2]).unwrap();
        pot.set_onsite(vec![1.0, 0.1, 0.05]).unwrap();
        LatticeModel::new(LatticeSpec::cubic(1, 100).unwrap(), pot).unwrap()
    }

    fn setup(order: usize) -> (LatticeModel, Hierarchy) {
        let m = chain();
        let sys = PulseSystem::on_shell(&m, vec![WaveVector::from_grid(&[13], 100)]).unwrap();
        let grid = MacroGrid::new(1, 64, 20.0).unwrap();
        let h = Hierarchy::new(&m, &sys, order, grid).unwrap();
        (m, h)
    }

    #[test]
    fn zero_data_stays_zero() {
        let (_, h) = setup(3);
        let s = MacroState::zero(&h);
        let out = h.evolve(&s, &[0.5], 0.05).unwrap();
        assert_eq!(out[0].sup(), 0.0);
        let jets = h.jets(&s, 2).unwrap();
        assert!(jets.a3.iter().all(|j| j.0.iter().all(|f| sup_norm(f) == 0.0)));
    }

    #[test]
    fn single_pulse_velocity_is_group_velocity() {
        let (m, h) = setup(2);
        let gv = m.group_velocity(&WaveVector::from_grid(&[13], 100)).unwrap();
        assert!((h.velocity(1)[0] - gv[0]).abs() < 1e-14);
    }

    #[test]
    fn jet_first_coefficient_is_rhs() {
        let (_, h) = setup(3);
        let g = h.grid().clone();
        let a1 = vec![Profile::Gaussian {
            amplitude: Complex64::new(0.4, 0.1),
            center: vec![10.0],
            width: 1.5,
        }
        .sample(&g)];
        let rhs = h.first_order_rhs(&a1);
        let jets = h.a1_jets(&a1, 2);
        let d: f64 = jets[0].0[1]
            .iter()
            .zip(&rhs[0])
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-14);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let (_, h) = setup(2);
        let s = MacroState::zero(&h);
        let dt = 2.0 * h.dt_limit();
        assert!(matches!(h.evolve(&s, &[1.0], dt), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn profiles() {
        let g = MacroGrid::new(1, 32, 8.0).unwrap();
        let b = Profile::Bump {
            amplitude: Complex64::new(1.0, 0.0),
            center: vec![4.0],
            width: 1.0,
        }
        .sample(&g);
        assert!((b[16].re - 1.0).abs() < 1e-15);
        assert_eq!(b[0].re, 0.0);
        let s = Profile::Sech {
            amplitude: Complex64::new(2.0, 0.0),
            center: vec![4.0],
            width: 1.0,
        }
        .sample(&g);
        assert!((s[16].re - 2.0).abs() < 1e-15);
    }
}
