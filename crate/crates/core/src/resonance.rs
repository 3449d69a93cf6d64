//! Three-wave resonances `Ω(θ₁+θ₂) = Ω(θ₁) + Ω(θ₂)` of the nearest-neighbour
//! chain `Ω²(θ) = 2a₁(1 - cos θ) + b₁` with `a₁ < 0`.
//!
//! With `χ = (1 - cos θ₁)/2`, `ψ = (1 - cos θ₂)/2` and `φ = b₁/(4|a₁|)` the
//! squared resonance condition is the level set `g(χ, ψ) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::wrap_angle;

/// Bisection tolerance in `χ`, `ψ`.
pub const BISECTION_TOL: f64 = 1e-12;
/// Default nonresonance margin threshold.
pub const MARGIN_THRESHOLD: f64 = 1e-4;
/// Tolerance of the lifted resonance identity.
pub const RESONANCE_TOL: f64 = 1e-10;

/// The `(k₁, k₂)` combinations that must stay nonresonant.
pub const NONRESONANT_COMBINATIONS: [(i64, i64); 6] = [(2, 0), (0, 2), (2, 2), (2, 1), (1, 2), (1, -1)];

/// `g(χ, ψ)` for parameter `φ`.
pub fn g(chi: f64, psi: f64, phi: f64) -> f64 {
    5.0 * phi * phi / 4.0 + chi * psi * (chi + psi) - phi * (chi * psi + chi + psi)
        + (phi - 2.0 * chi * psi) * ((phi - chi) * (phi - psi)).sqrt()
}

/// `g̃(χ) = g(χ, χ) = 4χ³ - 3φχ² - 3φχ + 9φ²/4`.
pub fn g_diag(chi: f64, phi: f64) -> f64 {
    4.0 * chi.powi(3) - 3.0 * phi * chi * chi - 3.0 * phi * chi + 9.0 * phi * phi / 4.0
}

/// `g̃'(χ) = 3(4χ² - 2φχ - φ)`.
pub fn g_diag_prime(chi: f64, phi: f64) -> f64 {
    3.0 * (4.0 * chi * chi - 2.0 * phi * chi - phi)
}

/// Minimiser `χ_m = (φ/4)(1 + √(1 + 4/φ))` of `g̃`.
pub fn diagonal_minimum(phi: f64) -> f64 {
    phi / 4.0 * (1.0 + (1.0 + 4.0 / phi).sqrt())
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Nearest-neighbour chain parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceProblem {
    pub a1: f64,
    pub b1: f64,
}

/// A lifted, checked resonant triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonantTriple {
    pub chi: f64,
    pub psi: f64,
    pub zeta: f64,
    /// `θ₁, θ₂, θ₃ = θ₁ + θ₂` wrapped to `[-π, π)`.
    pub theta: [f64; 3],
    pub omega: [f64; 3],
    /// `|δ|/(4|a₁|)` for each entry of [`NONRESONANT_COMBINATIONS`].
    pub delta_margins: [f64; 6],
    /// `|χ² - 3φ/4|, |ψ² - 3φ/4|, |ζ² - 3φ/4|, |χψ - φ/2|, |χζ - φ/2|, |ζψ - φ/2|`.
    pub curve_margins: [f64; 6],
}

impl ResonantTriple {
    pub fn min_margin(&self) -> f64 {
        self.delta_margins
            .iter()
            .chain(&self.curve_margins)
            .fold(f64::INFINITY, |a, b| a.min(*b))
    }
}

/// Result of the filtered search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub accepted: Vec<ResonantTriple>,
    pub rejected: Vec<ResonantTriple>,
}

impl ResonanceProblem {
    pub fn new(a1: f64, b1: f64) -> Self {
        ResonanceProblem { a1, b1 }
    }

    /// Problem with `b₁ = 1` and `a₁ = -1/(4φ)`.
    pub fn from_phi(phi: f64) -> Self {
        ResonanceProblem {
            a1: -1.0 / (4.0 * phi),
            b1: 1.0,
        }
    }

    pub fn phi(&self) -> f64 {
        self.b1 / (4.0 * self.a1.abs())
    }

    /// `Ω(θ)`.
    pub fn omega(&self, theta: f64) -> f64 {
        (2.0 * self.a1 * (1.0 - theta.cos()) + self.b1).sqrt()
    }

    fn check_branch(&self) -> Result<f64> {
        let phi = self.phi();
        if self.b1 <= 0.0 {
            return Err(Error::EmptyBranch(format!("b1 = {} is not positive", self.b1)));
        }
        if self.a1 >= 0.0 {
            return Err(Error::EmptyBranch(format!("a1 = {} is not negative", self.a1)));
        }
        if phi <= 1.0 {
            return Err(Error::EmptyBranch(format!("phi = {phi} violates stability")));
        }
        if phi >= 4.0 / 3.0 {
            return Err(Error::EmptyBranch(format!("phi = {phi} is not below 4/3")));
        }
        Ok(phi)
    }

    /// `[χ*, χ**]`: the diagonal interval where `g̃ < 0`.
    pub fn bracket(&self) -> Result<(f64, f64)> {
        let phi = self.check_branch()?;
        let chi_m = diagonal_minimum(phi);
        let gd = |c: f64| g_diag(c, phi);
        let lo = bisect(gd, 0.0, chi_m, BISECTION_TOL)
            .ok_or_else(|| Error::EmptyBranch("no diagonal sign change".into()))?;
        let hi = bisect(gd, chi_m, 1.0, BISECTION_TOL).unwrap_or(1.0);
        Ok((lo, hi))
    }

    /// Roots `(χ, ψ)` of `g` for `samples` values of `χ` inside the bracket.
    pub fn solve_level_set(&self, samples: usize) -> Result<Vec<(f64, f64)>> {
        let phi = self.check_branch()?;
        let (lo, hi) = self.bracket()?;
        let mut out = Vec::new();
        for i in 0..samples {
            let chi = lo + (i as f64 + 0.5) / samples as f64 * (hi - lo);
            let f = |psi: f64| g(chi, psi, phi);
            if let Some(psi) = bisect(f, 0.0, chi, BISECTION_TOL) {
                out.push((chi, psi));
            }
            if f(1.0) > 0.0 {
                if let Some(psi) = bisect(f, chi, 1.0, BISECTION_TOL) {
                    out.push((chi, psi));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyBranch("no sign change in psi".into()));
        }
        Ok(out)
    }

    /// Right-hand side `φ/2 - χψ + √((φ-χ)(φ-ψ))` of the unsquared condition.
    pub fn unsquared_rhs(&self, chi: f64, psi: f64) -> f64 {
        let phi = self.phi();
        phi / 2.0 - chi * psi + ((phi - chi) * (phi - psi)).sqrt()
    }

    /// Recover the wave numbers of a root and evaluate all margins. Returns
    /// `None` if the lifted triple fails the resonance identity.
    pub fn lift(&self, chi: f64, psi: f64) -> Option<ResonantTriple> {
        let phi = self.phi();
        let s = -self.unsquared_rhs(chi, psi).signum();
        let lhs = -s * (chi * (1.0 - chi) * psi * (1.0 - psi)).sqrt();
        let rhs = self.unsquared_rhs(chi, psi);
        if (lhs - rhs).abs() > 1e-8 {
            return None;
        }
        let t1 = (1.0 - 2.0 * chi).clamp(-1.0, 1.0).acos();
        let t2 = s * (1.0 - 2.0 * psi).clamp(-1.0, 1.0).acos();
        let t3 = wrap_angle(t1 + t2);
        let omega = [self.omega(t1), self.omega(t2), self.omega(t3)];
        if (omega[2] - omega[0] - omega[1]).abs() > RESONANCE_TOL {
            return None;
        }
        let zeta = chi + psi - phi - 2.0 * ((phi - chi) * (phi - psi)).sqrt();
        let scale = 4.0 * self.a1.abs();
        let delta_margins = NONRESONANT_COMBINATIONS.map(|(k1, k2)| {
            let th = k1 as f64 * t1 + k2 as f64 * t2;
            let w = k1 as f64 * omega[0] + k2 as f64 * omega[1];
            (self.omega(th).powi(2) - w * w).abs() / scale
        });
        let q = 3.0 * phi / 4.0;
        let h = phi / 2.0;
        let curve_margins = [
            (chi * chi - q).abs(),
            (psi * psi - q).abs(),
            (zeta * zeta - q).abs(),
            (chi * psi - h).abs(),
            (chi * zeta - h).abs(),
            (zeta * psi - h).abs(),
        ];
        Some(ResonantTriple {
            chi,
            psi,
            zeta,
            theta: [wrap_angle(t1), wrap_angle(t2), t3],
            omega,
            delta_margins,
            curve_margins,
        })
    }

    /// Lift every root and split by the nonresonance filter.
    pub fn lift_and_filter(&self, roots: &[(f64, f64)], threshold: f64) -> Result<SearchResult> {
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        for &(chi, psi) in roots {
            if let Some(t) = self.lift(chi, psi) {
                if t.min_margin() >= threshold {
                    accepted.push(t);
                } else {
                    rejected.push(t);
                }
            }
        }
        if accepted.is_empty() {
            return Err(Error::AllFiltered {
                count: roots.len(),
                best_margin: rejected.iter().map(|t| t.min_margin()).fold(0.0, f64::max),
            });
        }
        Ok(SearchResult { accepted, rejected })
    }

    /// `solve_level_set` followed by `lift_and_filter`.
    pub fn search(&self, samples: usize, threshold: f64) -> Result<SearchResult> {
        let roots = self.solve_level_set(samples)?;
        self.lift_and_filter(&roots, threshold)
    }
}

/// A triple snapped onto the `2π/M` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SnappedTriple {
    pub cells: usize,
    pub k1: i64,
    pub k2: i64,
    /// `Ω(θ₁+θ₂) - Ω(θ₁) - Ω(θ₂)` on the grid.
    pub detuning: f64,
}

/// Choose `M` from the candidates and grid indices closest to the triple,
/// minimising the detuning.
pub fn snap_to_grid(problem: &ResonanceProblem, triple: &ResonantTriple, candidates: &[usize]) -> Option<SnappedTriple> {
    let mut best: Option<SnappedTriple> = None;
    for &m in candidates {
        let unit = 2.0 * PI / m as f64;
        let base1 = (triple.theta[0] / unit).round() as i64;
        let base2 = (triple.theta[1] / unit).round() as i64;
        for d1 in -1..=1 {
            for d2 in -1..=1 {
                let (k1, k2) = (base1 + d1, base2 + d2);
                let (t1, t2) = (k1 as f64 * unit, k2 as f64 * unit);
                let detuning =
                    problem.omega(t1 + t2) - problem.omega(t1) - problem.omega(t2);
                if best.as_ref().is_none_or(|b| detuning.abs() < b.detuning.abs()) {
                    best = Some(SnappedTriple {
                        cells: m,
                        k1,
                        k2,
                        detuning,
                    });
                }
            }
        }
    }
    best
}

/// `a₁ ∈ (-b₁/4, -3b₁/16)` for which grid wave numbers `θ₁, θ₂` resonate exactly.
pub fn tune_a1(b1: f64, theta1: f64, theta2: f64) -> Result<f64> {
    let f = |a1: f64| {
        let p = ResonanceProblem::new(a1, b1);
        p.omega(theta1 + theta2) - p.omega(theta1) - p.omega(theta2)
    };
    let lo = -b1 / 4.0 * (1.0 - 1e-12);
    let hi = -3.0 * b1 / 16.0;
    bisect(f, lo, hi, 1e-15 * b1)
        .ok_or_else(|| Error::EmptyBranch(format!("no resonant a1 for theta = ({theta1}, {theta2})")))
}
