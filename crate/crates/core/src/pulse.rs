//! Pulse systems, representants of pulse products, resonance defects and
//! closedness classification.
//!
//! Pulses are indexed by `j ∈ {±1..±ν}` with `(θ_{-j}, ω_{-j}) = -(θ_j, ω_j)`.
//! A product of pulses is identified by its aggregate `(θ mod torus, ω)`. The
//! canonical index vector of an aggregate is the first one found when
//! enumerating multisets by length and then lexicographically in the key order
//! `1, -1, 2, -2, …`, which yields minimal length and sorted indices.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, WaveVector};

/// Tolerance on aggregate comparison.
pub const AGGREGATE_TOL: f64 = 1e-12;

/// A plane wave `e^{i(ωt + θ·γ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub theta: WaveVector,
    pub omega: f64,
}

impl Pulse {
    pub fn new(theta: WaveVector, omega: f64) -> Self {
        Pulse { theta, omega }
    }

    /// `ω = +Ω(θ)`.
    pub fn on_shell(model: &LatticeModel, theta: WaveVector) -> Result<Self> {
        let omega = model.dispersion(&theta)?;
        Ok(Pulse { theta, omega })
    }
}

/// Canonical representant of a product of pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct Representant {
    pub indices: Vec<i32>,
    pub theta: WaveVector,
    pub omega: f64,
}

impl Representant {
    /// Order `m`: length of the canonical index vector.
    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// True when the representant is a single pulse.
    pub fn is_pulse(&self) -> bool {
        self.indices.len() == 1
    }

    /// Aggregate equality within [`AGGREGATE_TOL`].
    pub fn same_product(&self, other: &Representant) -> bool {
        same_aggregate(&self.theta, self.omega, &other.theta, other.omega)
    }

    /// True when `E_J` is real, i.e. `J ≡ -J`.
    pub fn is_self_conjugate(&self) -> bool {
        same_aggregate(&self.theta, self.omega, &self.theta.neg(), -self.omega)
    }
}

impl fmt::Display for Representant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|j| j.to_string()).collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "({})", parts.join(","))
        }
    }
}

fn same_aggregate(t1: &WaveVector, w1: f64, t2: &WaveVector, w2: f64) -> bool {
    t1.distance(t2) <= AGGREGATE_TOL
        && (w1 - w2).abs() <= AGGREGATE_TOL * w1.abs().max(w2.abs()).max(1.0)
}

/// Position of a signed index in the key order `1, -1, 2, -2, …`.
fn key_of(j: i32) -> usize {
    let base = 2 * (j.unsigned_abs() as usize - 1);
    if j > 0 {
        base
    } else {
        base + 1
    }
}

fn index_of_key(k: usize) -> i32 {
    let j = (k / 2 + 1) as i32;
    if k.is_multiple_of(2) {
        j
    } else {
        -j
    }
}

/// Visit nondecreasing key sequences of length `len` in lexicographic order
/// until `f` returns `true`.
fn for_each_multiset(nkeys: usize, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        nkeys: usize,
        len: usize,
        start: usize,
        buf: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if buf.len() == len {
            return f(buf);
        }
        for k in start..nkeys {
            buf.push(k);
            if rec(nkeys, len, k, buf, f) {
                return true;
            }
            buf.pop();
        }
        false
    }
    rec(nkeys, len, 0, &mut Vec::with_capacity(len), f)
}

/// A resonance `θ_p + θ_q = θ_r` with matching frequencies among the pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseResonance {
    pub p: i32,
    pub q: i32,
    pub r: i32,
}

impl PulseResonance {
    pub fn is_self_interaction(&self) -> bool {
        self.p == self.q
    }
}

/// The named interaction structures of systems with at most three pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionCase {
    NoInteractions,
    ThreeWave,
    OneSelfInteraction,
    TwoSelfInteractions,
    SelfAndThreeWave,
    Unclassified,
}

impl fmt::Display for InteractionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InteractionCase::NoInteractions => "no interactions",
            InteractionCase::ThreeWave => "three-wave interaction",
            InteractionCase::OneSelfInteraction => "one self-interaction",
            InteractionCase::TwoSelfInteractions => "two self-interactions",
            InteractionCase::SelfAndThreeWave => "self-interaction and three-wave interaction",
            InteractionCase::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// A generated product that is resonant but not a pulse of the system.
#[derive(Debug, Clone)]
pub struct Violation {
    pub representant: Representant,
    pub delta: f64,
}

/// Result of [`PulseSystem::classify`].
#[derive(Debug, Clone)]
pub struct Classification {
    pub case: InteractionCase,
    pub resonances: Vec<PulseResonance>,
    /// Largest `k ≤ k_max` for which the system is `k`-closed.
    pub closedness_order: usize,
    /// Resonant products at order `closedness_order + 1`, empty if closed to `k_max`.
    pub violations: Vec<Violation>,
    /// `min |δ|` over nonresonant representants of `T_{closedness_order}`.
    pub margin: f64,
    /// Distinct minimal index vectors sharing one product.
    pub merges: Vec<(Vec<i32>, Vec<i32>)>,
}

/// A set of `ν` pulses together with the resonance tolerance.
#[derive(Debug, Clone)]
pub struct PulseSystem {
    pulses: Vec<Pulse>,
    delta_tol: f64,
}

impl PulseSystem {
    /// Validate the pulse list against the model: dimensions, nonzero
    /// frequencies, the dispersion relation within `δ_tol`, pairwise distinctness.
    pub fn new(model: &LatticeModel, pulses: Vec<Pulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidPulseSystem("no pulses".into()));
        }
        let wmax = pulses.iter().map(|p| p.omega.abs()).fold(0.0, f64::max);
        let delta_tol = 1e-8 * (wmax * wmax).max(1.0);
        for (i, p) in pulses.iter().enumerate() {
            if p.theta.dim() != model.dim() {
                return Err(Error::InvalidPulseSystem(format!(
                    "pulse {} has dimension {}",
                    i + 1,
                    p.theta.dim()
                )));
            }
            if p.omega == 0.0 {
                return Err(Error::InvalidPulseSystem(format!("pulse {} has ω = 0", i + 1)));
            }
            let delta = model.omega_sq(&p.theta) - p.omega * p.omega;
            if delta.abs() > delta_tol {
                return Err(Error::InvalidPulseSystem(format!(
                    "pulse {} is off-shell: δ = {delta:e}",
                    i + 1
                )));
            }
            for (l, q) in pulses.iter().enumerate().take(i) {
                if same_aggregate(&p.theta, p.omega, &q.theta, q.omega)
                    || same_aggregate(&p.theta, p.omega, &q.theta.neg(), -q.omega)
                {
                    return Err(Error::InvalidPulseSystem(format!(
                        "pulses {} and {} coincide up to sign",
                        l + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(PulseSystem { pulses, delta_tol })
    }

    /// Pulses with `ω_j = +Ω(θ_j)`.
    pub fn on_shell(model: &LatticeModel, thetas: Vec<WaveVector>) -> Result<Self> {
        let pulses = thetas
            .into_iter()
            .map(|t| Pulse::on_shell(model, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, pulses)
    }

    /// Override the resonance tolerance.
    pub fn with_delta_tol(mut self, tol: f64) -> Self {
        self.delta_tol = tol;
        self
    }

    pub fn nu(&self) -> usize {
        self.pulses.len()
    }

    pub fn dim(&self) -> usize {
        self.pulses[0].theta.dim()
    }

    pub fn delta_tol(&self) -> f64 {
        self.delta_tol
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    /// `(θ_j, ω_j)` for a signed index.
    pub fn pulse(&self, j: i32) -> Result<(WaveVector, f64)> {
        let k = j.unsigned_abs() as usize;
        if j == 0 || k > self.nu() {
            return Err(Error::InvalidIndex(j));
        }
        let p = &self.pulses[k - 1];
        Ok(if j > 0 {
            (p.theta.clone(), p.omega)
        } else {
            (p.theta.neg(), -p.omega)
        })
    }

    /// Aggregate `(Σθ_{j_i} mod torus, Σω_{j_i})`.
    pub fn aggregate(&self, indices: &[i32]) -> Result<(WaveVector, f64)> {
        let mut theta = vec![0.0; self.dim()];
        let mut omega = 0.0;
        for &j in indices {
            let (t, w) = self.pulse(j)?;
            for (a, b) in theta.iter_mut().zip(t.components()) {
                *a += b;
            }
            omega += w;
        }
        Ok((WaveVector::new(theta), omega))
    }

    fn keys_aggregate(&self, keys: &[usize]) -> (WaveVector, f64) {
        let idx: Vec<i32> = keys.iter().map(|&k| index_of_key(k)).collect();
        self.aggregate(&idx).expect("keys are valid indices")
    }

    /// Canonical representant of the product of the given pulses.
    pub fn canonicalize(&self, indices: &[i32]) -> Result<Representant> {
        if indices.is_empty() {
            return Err(Error::InvalidPulseSystem("empty index vector".into()));
        }
        let (theta, omega) = self.aggregate(indices)?;
        let nkeys = 2 * self.nu();
        for len in 1..=indices.len() {
            let mut found = None;
            for_each_multiset(nkeys, len, &mut |keys| {
                let (t, w) = self.keys_aggregate(keys);
                if same_aggregate(&t, w, &theta, omega) {
                    found = Some(keys.iter().map(|&k| index_of_key(k)).collect::<Vec<_>>());
                    true
                } else {
                    false
                }
            });
            if let Some(idx) = found {
                return Ok(Representant {
                    indices: idx,
                    theta,
                    omega,
                });
            }
        }
        unreachable!("the sorted input itself has the same aggregate")
    }

    /// Canonical representant of `-J`.
    pub fn negate(&self, rep: &Representant) -> Representant {
        let neg: Vec<i32> = rep.indices.iter().map(|j| -j).collect();
        self.canonicalize(&neg).expect("indices valid")
    }

    /// `T_k`: all distinct representants of products of at most `k` pulses,
    /// both signs, in canonical enumeration order.
    pub fn representant_table(&self, k: usize) -> Vec<Representant> {
        self.table_with_merges(k).0
    }

    fn table_with_merges(&self, k: usize) -> (Vec<Representant>, Vec<(Vec<i32>, Vec<i32>)>) {
        let nkeys = 2 * self.nu();
        let mut table: Vec<Representant> = Vec::new();
        let mut merges = Vec::new();
        for len in 1..=k {
            for_each_multiset(nkeys, len, &mut |keys| {
                let (theta, omega) = self.keys_aggregate(keys);
                let idx: Vec<i32> = keys.iter().map(|&key| index_of_key(key)).collect();
                match table
                    .iter()
                    .find(|r| same_aggregate(&r.theta, r.omega, &theta, omega))
                {
                    Some(r) => {
                        if r.indices.len() == len && !has_cancelling_pair(&idx) {
                            merges.push((r.indices.clone(), idx));
                        }
                    }
                    None => table.push(Representant {
                        indices: idx,
                        theta,
                        omega,
                    }),
                }
                false
            });
        }
        (table, merges)
    }

    /// Representants of `T_k` with each conjugate pair stored once (the member
    /// found first in canonical order); self-conjugate ones appear once.
    pub fn stored_representants(&self, k: usize) -> Vec<Representant> {
        let mut stored: Vec<Representant> = Vec::new();
        for rep in self.representant_table(k) {
            let conj_seen = stored.iter().any(|s| {
                same_aggregate(&s.theta, s.omega, &rep.theta.neg(), -rep.omega)
            });
            if !conj_seen {
                stored.push(rep);
            }
        }
        stored
    }

    /// Position of `rep` or its conjugate in a stored list: `(index, conjugated)`.
    pub fn locate(stored: &[Representant], theta: &WaveVector, omega: f64) -> Option<(usize, bool)> {
        for (i, s) in stored.iter().enumerate() {
            if same_aggregate(&s.theta, s.omega, theta, omega) {
                return Some((i, false));
            }
            if same_aggregate(&s.theta, s.omega, &theta.neg(), -omega) {
                return Some((i, true));
            }
        }
        None
    }

    /// `δ_J = Ω²(θ_J) - ω_J²`.
    pub fn defect(&self, model: &LatticeModel, rep: &Representant) -> f64 {
        model.omega_sq(&rep.theta) - rep.omega * rep.omega
    }

    /// Non-pulse representants of `T_k` that are resonant.
    pub fn resonant_products(&self, model: &LatticeModel, k: usize) -> Vec<Violation> {
        self.representant_table(k)
            .into_iter()
            .filter(|r| !r.is_pulse())
            .filter_map(|r| {
                let delta = self.defect(model, &r);
                (delta.abs() <= self.delta_tol).then_some(Violation {
                    representant: r,
                    delta,
                })
            })
            .collect()
    }

    /// True when `δ_J ≠ 0` for every `J ∈ T_k \ N`.
    pub fn is_closed(&self, model: &LatticeModel, k: usize) -> bool {
        self.resonant_products(model, k).is_empty()
    }

    /// Largest `k ≤ k_max` for which the system is `k`-closed (at least 1).
    pub fn closedness_order(&self, model: &LatticeModel, k_max: usize) -> usize {
        let mut k = 1;
        while k < k_max && self.is_closed(model, k + 1) {
            k += 1;
        }
        k
    }

    /// Fail with [`Error::NotClosed`] unless the system is `k`-closed.
    pub fn require_closed(&self, model: &LatticeModel, k: usize) -> Result<()> {
        let reached = self.closedness_order(model, k);
        if reached < k {
            return Err(Error::NotClosed {
                required: k,
                reached,
            });
        }
        Ok(())
    }

    /// `min |δ|` over non-pulse representants of `T_k` that are not resonant.
    pub fn margin(&self, model: &LatticeModel, k: usize) -> f64 {
        self.representant_table(k)
            .iter()
            .filter(|r| !r.is_pulse())
            .map(|r| self.defect(model, r).abs())
            .filter(|d| *d > self.delta_tol)
            .fold(f64::INFINITY, f64::min)
    }

    /// Resonances `θ_p + θ_q = θ_r` among the pulses, each relation once.
    pub fn pulse_resonances(&self) -> Vec<PulseResonance> {
        let nu = self.nu() as i32;
        let signed: Vec<i32> = (1..=nu).flat_map(|j| [j, -j]).collect();
        let mut seen: Vec<Vec<i32>> = Vec::new();
        let mut out = Vec::new();
        for (a, &p) in signed.iter().enumerate() {
            for &q in &signed[a..] {
                if p == -q {
                    continue;
                }
                let (t, w) = self.aggregate(&[p, q]).expect("valid");
                for &r in &signed {
                    let (tr, wr) = self.pulse(r).expect("valid");
                    if !same_aggregate(&t, w, &tr, wr) {
                        continue;
                    }
                    let mut rel = vec![p, q, -r];
                    rel.sort_by_key(|&j| key_of(j));
                    let mut neg: Vec<i32> = rel.iter().map(|j| -j).collect();
                    neg.sort_by_key(|&j| key_of(j));
                    if seen.contains(&rel) || seen.contains(&neg) {
                        continue;
                    }
                    seen.push(rel.clone());
                    out.push(relation_to_resonance(&rel));
                }
            }
        }
        out
    }

    /// Interaction structure, closedness order and margins.
    pub fn classify(&self, model: &LatticeModel, k_max: usize) -> Classification {
        let resonances = self.pulse_resonances();
        let selfs = resonances.iter().filter(|r| r.is_self_interaction()).count();
        let waves = resonances.len() - selfs;
        let case = if self.nu() > 3 {
            if resonances.is_empty() {
                InteractionCase::NoInteractions
            } else {
                InteractionCase::Unclassified
            }
        } else {
            match (selfs, waves) {
                (0, 0) => InteractionCase::NoInteractions,
                (0, 1) => InteractionCase::ThreeWave,
                (1, 0) => InteractionCase::OneSelfInteraction,
                (2, 0) => InteractionCase::TwoSelfInteractions,
                (1, 1) => InteractionCase::SelfAndThreeWave,
                _ => InteractionCase::Unclassified,
            }
        };
        let closedness_order = self.closedness_order(model, k_max);
        let violations = if closedness_order < k_max {
            self.resonant_products(model, closedness_order + 1)
        } else {
            Vec::new()
        };
        let (_, merges) = self.table_with_merges(closedness_order.max(2));
        Classification {
            case,
            resonances,
            closedness_order,
            violations,
            margin: self.margin(model, closedness_order.max(2)),
            merges,
        }
    }
}

fn has_cancelling_pair(idx: &[i32]) -> bool {
    idx.iter().any(|j| idx.contains(&-j))
}

/// Turn a zero-sum triple `{a, b, c}` into `p + q = r`, preferring two
/// summands of equal sign.
fn relation_to_resonance(rel: &[i32]) -> PulseResonance {
    let positives: Vec<i32> = rel.iter().copied().filter(|j| *j > 0).collect();
    let negatives: Vec<i32> = rel.iter().copied().filter(|j| *j < 0).collect();
    if positives.len() == 2 {
        PulseResonance {
            p: positives[0],
            q: positives[1],
            r: -negatives[0],
        }
    } else if negatives.len() == 2 {
        PulseResonance {
            p: -negatives[0],
            q: -negatives[1],
            r: positives[0],
        }
    } else {
        PulseResonance {
            p: rel[0],
            q: rel[1],
            r: -rel[2],
        }
    }
}
