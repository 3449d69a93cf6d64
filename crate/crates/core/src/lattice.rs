//! Lattice geometry, potentials, dispersion relation, forces and energies.
//!
//! All wave vectors are stored in lattice coordinates `φ_i = θ·g_i`, so that
//! `θ·α = Σ_i α_i φ_i` for a lattice offset `α = Σ_i α_i g_i`. Macroscopic
//! positions are likewise measured in cell coordinates. The basis enters only
//! when converting the group velocity to physical coordinates.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Wrap an angle into `[-π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Wave vector on the dual torus, in lattice coordinates reduced to `[-π, π)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector(Vec<f64>);

impl WaveVector {
    pub fn new(components: Vec<f64>) -> Self {
        WaveVector(components.into_iter().map(wrap_angle).collect())
    }

    pub fn zero(dim: usize) -> Self {
        WaveVector(vec![0.0; dim])
    }

    /// `θ = 2πk/M` per axis.
    pub fn from_grid(k: &[i64], m: usize) -> Self {
        Self::new(k.iter().map(|&ki| 2.0 * PI * ki as f64 / m as f64).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `θ·α` for an integer offset in lattice coordinates.
    pub fn dot(&self, alpha: &[i64]) -> f64 {
        self.0.iter().zip(alpha).map(|(t, &a)| t * a as f64).sum()
    }

    pub fn add(&self, other: &WaveVector) -> WaveVector {
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> WaveVector {
        Self::new(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> WaveVector {
        Self::new(self.0.iter().map(|a| a * k as f64).collect())
    }

    /// Largest per-axis distance on the torus.
    pub fn distance(&self, other: &WaveVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Grid indices `k` with `θ = 2πk/M`, if the vector is commensurate.
    pub fn grid_index(&self, m: usize, tol: f64) -> Option<Vec<i64>> {
        let mut k = Vec::with_capacity(self.0.len());
        for &t in &self.0 {
            let r = t * m as f64 / (2.0 * PI);
            let ki = r.round();
            if (r - ki).abs() > tol * m as f64 {
                return None;
            }
            k.push((ki as i64).rem_euclid(m as i64));
        }
        Some(k)
    }
}

/// Lattice dimension, basis and periodic extent.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    dim: usize,
    basis: Vec<Vec<f64>>,
    cells: usize,
}

impl LatticeSpec {
    /// `basis[i]` is the vector `g_{i+1}`; `cells` is `M`, the number of cells per axis.
    pub fn new(dim: usize, basis: Vec<Vec<f64>>, cells: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be positive".into()));
        }
        if basis.len() != dim || basis.iter().any(|g| g.len() != dim) {
            return Err(Error::InvalidLattice(format!(
                "basis must consist of {dim} vectors of length {dim}"
            )));
        }
        let mat = DMatrix::from_fn(dim, dim, |r, c| basis[c][r]);
        if mat.determinant().abs() < 1e-12 {
            return Err(Error::InvalidLattice("basis vectors are linearly dependent".into()));
        }
        if cells < 2 {
            return Err(Error::InvalidLattice(format!("M = {cells} must be at least 2")));
        }
        Ok(LatticeSpec { dim, basis, cells })
    }

    /// Unit basis `g_i = e_i`.
    pub fn cubic(dim: usize, cells: usize) -> Result<Self> {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(dim, basis, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Total number of sites `M^d`.
    pub fn sites(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Cell coordinates of a row-major site index.
    pub fn coords(&self, mut index: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.dim];
        for i in (0..self.dim).rev() {
            c[i] = (index % self.cells) as i64;
            index /= self.cells;
        }
        c
    }

    /// Row-major site index of (periodically reduced) cell coordinates.
    pub fn index(&self, coords: &[i64]) -> usize {
        let m = self.cells as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.cells + c.rem_euclid(m) as usize)
    }

    /// Every wave vector of the discrete torus `2πk/M`.
    pub fn wave_grid(&self) -> impl Iterator<Item = WaveVector> + '_ {
        (0..self.sites()).map(move |s| WaveVector::from_grid(&self.coords(s), self.cells))
    }
}

/// A real scalar function of one variable.
pub type Callback = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Exact potential with its derivative.
#[derive(Clone)]
pub struct ExactFunction {
    pub value: Callback,
    pub derivative: Callback,
}

impl std::fmt::Debug for ExactFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactFunction")
    }
}

/// Exact interaction and on-site potentials.
#[derive(Debug, Clone)]
pub struct ExactPotentials {
    interaction: Vec<(Vec<i64>, ExactFunction)>,
    onsite: Option<ExactFunction>,
}

impl ExactPotentials {
    pub fn new() -> Self {
        ExactPotentials {
            interaction: Vec::new(),
            onsite: None,
        }
    }

    /// Register `V_α`; `V_{-α}(x) = V_α(-x)` is added automatically.
    pub fn with_interaction(mut self, alpha: Vec<i64>, f: ExactFunction) -> Self {
        let neg: Vec<i64> = alpha.iter().map(|a| -a).collect();
        let (v, dv) = (f.value.clone(), f.derivative.clone());
        let mirrored = ExactFunction {
            value: Arc::new(move |x| v(-x)),
            derivative: Arc::new(move |x| -dv(-x)),
        };
        self.interaction.retain(|(a, _)| *a != alpha && *a != neg);
        self.interaction.push((alpha, f));
        self.interaction.push((neg, mirrored));
        self
    }

    /// Register `W`.
    pub fn with_onsite(mut self, f: ExactFunction) -> Self {
        self.onsite = Some(f);
        self
    }
}

impl Default for ExactPotentials {
    fn default() -> Self {
        Self::new()
    }
}

/// Taylor coefficients of one interaction direction.
#[derive(Debug, Clone)]
pub struct Interaction {
    pub alpha: Vec<i64>,
    /// `a[n-1] = a_{n,α}`.
    pub a: Vec<f64>,
}

/// Taylor data of the potentials and optional exact callbacks.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    dim: usize,
    order: usize,
    interactions: Vec<Interaction>,
    onsite: Vec<f64>,
    exact: Option<ExactPotentials>,
    callback_tol: f64,
}

impl PotentialSpec {
    /// Empty potential of Taylor order `order` (`N_max`).
    pub fn new(dim: usize, order: usize) -> Self {
        PotentialSpec {
            dim,
            order,
            interactions: Vec::new(),
            onsite: vec![0.0; order],
            exact: None,
            callback_tol: 1e-6,
        }
    }

    /// Add `a_{n,α}` for `n = 1..=a.len()`; the coefficients of `-α` follow from
    /// antisymmetry. If `-α` was given explicitly the two must agree.
    pub fn add_interaction(&mut self, alpha: Vec<i64>, mut a: Vec<f64>) -> Result<()> {
        if alpha.len() != self.dim {
            return Err(Error::InvalidLattice(format!(
                "offset {alpha:?} has wrong dimension"
            )));
        }
        if alpha.iter().all(|&c| c == 0) {
            return Ok(());
        }
        if a.len() > self.order {
            return Err(Error::OrderOutOfRange {
                n: a.len(),
                max: self.order,
            });
        }
        a.resize(self.order, 0.0);
        let neg: Vec<i64> = alpha.iter().map(|c| -c).collect();
        let mirrored: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { *v } else { -*v })
            .collect();
        for (target, coeffs) in [(&alpha, &a), (&neg, &mirrored)] {
            if let Some(existing) = self.interactions.iter().find(|i| &i.alpha == target) {
                for n in 0..self.order {
                    let (x, y) = (existing.a[n], coeffs[n]);
                    if (x - y).abs() > 1e-14 * x.abs().max(y.abs()).max(1.0) {
                        return Err(Error::AntisymmetryViolation {
                            n: n + 1,
                            alpha: target.clone(),
                            a: x,
                            b: y,
                        });
                    }
                }
            }
        }
        if !self.interactions.iter().any(|i| i.alpha == alpha) {
            self.interactions.push(Interaction { alpha, a });
            self.interactions.push(Interaction {
                alpha: neg,
                a: mirrored,
            });
        }
        Ok(())
    }

    /// Set `b_n` for `n = 1..=b.len()`.
    pub fn set_onsite(&mut self, b: Vec<f64>) -> Result<()> {
        if b.len() > self.order {
            return Err(Error::OrderOutOfRange {
                n: b.len(),
                max: self.order,
            });
        }
        self.onsite = b;
        self.onsite.resize(self.order, 0.0);
        Ok(())
    }

    pub fn set_exact(&mut self, exact: ExactPotentials) {
        self.exact = Some(exact);
    }

    /// Relative tolerance for the callback consistency check.
    pub fn set_callback_tolerance(&mut self, tol: f64) {
        self.callback_tol = tol;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Interaction range `R = max |α|_∞`.
    pub fn range(&self) -> usize {
        self.interactions
            .iter()
            .flat_map(|i| i.alpha.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// `b_n`, zero beyond the stored order.
    pub fn b(&self, n: usize) -> f64 {
        if n == 0 || n > self.order {
            0.0
        } else {
            self.onsite[n - 1]
        }
    }

    /// `a_{n,α}`, zero for offsets or orders not stored.
    pub fn a(&self, n: usize, alpha: &[i64]) -> f64 {
        if n == 0 || n > self.order {
            return 0.0;
        }
        self.interactions
            .iter()
            .find(|i| i.alpha == alpha)
            .map_or(0.0, |i| i.a[n - 1])
    }

    pub fn exact(&self) -> Option<&ExactPotentials> {
        self.exact.as_ref()
    }

    fn check_callbacks(&self) -> Result<()> {
        let Some(exact) = &self.exact else {
            return Ok(());
        };
        let tol = self.callback_tol;
        let check = |what: String, f: &ExactFunction, stored: &[f64]| -> Result<()> {
            let v0 = (f.value)(0.0);
            if v0.abs() > tol {
                return Err(Error::TaylorMismatch {
                    what: format!("{what} value"),
                    n: 0,
                    stored: 0.0,
                    fitted: v0,
                });
            }
            let fitted = taylor_coefficients(&*f.derivative, self.order);
            for n in 0..=self.order {
                let s = if n == 0 { 0.0 } else { stored[n - 1] };
                if (fitted[n] - s).abs() > tol * s.abs().max(1.0) {
                    return Err(Error::TaylorMismatch {
                        what: what.clone(),
                        n,
                        stored: s,
                        fitted: fitted[n],
                    });
                }
            }
            Ok(())
        };
        for inter in &self.interactions {
            let f = exact
                .interaction
                .iter()
                .find(|(a, _)| *a == inter.alpha)
                .map(|(_, f)| f)
                .ok_or_else(|| Error::TaylorMismatch {
                    what: format!("missing callback for alpha {:?}", inter.alpha),
                    n: 1,
                    stored: inter.a[0],
                    fitted: 0.0,
                })?;
            check(format!("V'_{:?}", inter.alpha), f, &inter.a)?;
        }
        for (alpha, f) in &exact.interaction {
            if !self.interactions.iter().any(|i| &i.alpha == alpha) {
                check(format!("V'_{alpha:?}"), f, &vec![0.0; self.order])?;
            }
        }
        match &exact.onsite {
            Some(w) => check("W'".into(), w, &self.onsite)?,
            None => {
                if self.onsite.iter().any(|&b| b != 0.0) {
                    return Err(Error::TaylorMismatch {
                        what: "missing on-site callback".into(),
                        n: 1,
                        stored: self.onsite[0],
                        fitted: 0.0,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Taylor coefficients `c_0..c_order` of `f` at 0 from a polynomial fit at
/// Chebyshev nodes (a high-order finite-difference stencil).
fn taylor_coefficients(f: &dyn Fn(f64) -> f64, order: usize) -> Vec<f64> {
    const NODES: usize = 13;
    const H: f64 = 0.25;
    let s: Vec<f64> = (0..NODES)
        .map(|i| ((i as f64 + 0.5) * PI / NODES as f64).cos())
        .collect();
    let vander = DMatrix::from_fn(NODES, NODES, |r, c| s[r].powi(c as i32));
    let rhs = DVector::from_iterator(NODES, s.iter().map(|&si| f(H * si)));
    let p = vander
        .lu()
        .solve(&rhs)
        .unwrap_or_else(|| DVector::zeros(NODES));
    (0..=order.min(NODES - 1))
        .map(|n| p[n] / H.powi(n as i32))
        .chain(std::iter::repeat(0.0))
        .take(order + 1)
        .collect()
}

/// `Σ_n c_n x^n` for `c = [c_1, c_2, ...]`.
fn horner_force(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cn| (acc + cn) * x)
}

/// `Σ_n c_n x^{n+1}/(n+1)`.
fn horner_energy(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, &cn) in c.iter().enumerate().rev() {
        acc = (acc + cn / (i as f64 + 2.0)) * x;
    }
    acc * x
}

/// Lattice plus potentials; the source of `Ω`, forces and energies.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    spec: LatticeSpec,
    pot: PotentialSpec,
    neighbors: Vec<Vec<usize>>,
}

impl LatticeModel {
    /// Build and check the stability condition `Ω² > 0` on the full grid.
    pub fn new(spec: LatticeSpec, pot: PotentialSpec) -> Result<Self> {
        let model = Self::new_unchecked(spec, pot)?;
        for theta in model.spec.wave_grid() {
            let w2 = model.omega_sq(&theta);
            if w2 <= 0.0 {
                return Err(Error::StabilityViolation {
                    theta: theta.components().to_vec(),
                    value: w2,
                });
            }
        }
        Ok(model)
    }

    /// Build without the stability scan (e.g. the FPU chain with `W ≡ 0`).
    /// Dispersion evaluations still refuse non-positive radicands.
    pub fn new_unchecked(spec: LatticeSpec, pot: PotentialSpec) -> Result<Self> {
        if pot.dim() != spec.dim() {
            return Err(Error::InvalidLattice(format!(
                "potential dimension {} differs from lattice dimension {}",
                pot.dim(),
                spec.dim()
            )));
        }
        pot.check_callbacks()?;
        let neighbors = pot
            .interactions()
            .iter()
            .map(|inter| {
                (0..spec.sites())
                    .map(|s| {
                        let c: Vec<i64> = spec
                            .coords(s)
                            .iter()
                            .zip(&inter.alpha)
                            .map(|(a, b)| a + b)
                            .collect();
                        spec.index(&c)
                    })
                    .collect()
            })
            .collect();
        Ok(LatticeModel {
            spec,
            pot,
            neighbors,
        })
    }

    /// Same potentials on a lattice with a different extent `M`.
    pub fn with_cells(&self, cells: usize) -> Result<Self> {
        let spec = LatticeSpec::new(self.spec.dim, self.spec.basis.clone(), cells)?;
        Self::new(spec, self.pot.clone())
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn cells(&self) -> usize {
        self.spec.cells
    }

    pub fn sites(&self) -> usize {
        self.spec.sites()
    }

    /// The radicand `Σ_α a_{1,α}(1 - cos θ·α) + b₁`.
    pub fn omega_sq(&self, theta: &WaveVector) -> f64 {
        self.pot
            .interactions()
            .iter()
            .map(|i| i.a[0] * (1.0 - theta.dot(&i.alpha).cos()))
            .sum::<f64>()
            + self.pot.b(1)
    }

    /// `Ω(θ)`.
    pub fn dispersion(&self, theta: &WaveVector) -> Result<f64> {
        let w2 = self.omega_sq(theta);
        if w2 <= 0.0 {
            return Err(Error::StabilityViolation {
                theta: theta.components().to_vec(),
                value: w2,
            });
        }
        Ok(w2.sqrt())
    }

    /// `∇Ω(θ)` in lattice coordinates (`∂Ω/∂φ_i`).
    pub fn group_velocity(&self, theta: &WaveVector) -> Result<Vec<f64>> {
        let omega = self.dispersion(theta)?;
        let mut g = vec![0.0; self.dim()];
        for inter in self.pot.interactions() {
            let s = inter.a[0] * theta.dot(&inter.alpha).sin();
            for (gi, &ai) in g.iter_mut().zip(&inter.alpha) {
                *gi += s * ai as f64;
            }
        }
        Ok(g.into_iter().map(|x| x / (2.0 * omega)).collect())
    }

    /// `∇_θΩ` in physical coordinates, `Σ_i (∂Ω/∂φ_i) g_i`.
    pub fn group_velocity_physical(&self, theta: &WaveVector) -> Result<Vec<f64>> {
        let g = self.group_velocity(theta)?;
        let mut out = vec![0.0; self.dim()];
        for (gi, basis) in g.iter().zip(self.spec.basis()) {
            for (o, b) in out.iter_mut().zip(basis) {
                *o += gi * b;
            }
        }
        Ok(out)
    }

    /// `Σ_α a_{n,α} e^{iθ·α} (α·e)^s`, with `e` in lattice coordinates.
    pub fn symbol_sum(&self, n: usize, theta: &WaveVector, s: u32, e: &[f64]) -> Result<Complex64> {
        if n == 0 || n > self.pot.order() {
            return Err(Error::OrderOutOfRange {
                n,
                max: self.pot.order(),
            });
        }
        Ok(self
            .pot
            .interactions()
            .iter()
            .map(|i| {
                let ae: f64 = i.alpha.iter().zip(e).map(|(&a, &ei)| a as f64 * ei).sum();
                Complex64::from_polar(i.a[n - 1], theta.dot(&i.alpha)) * ae.powi(s as i32)
            })
            .sum())
    }

    /// `H = Σ_α a_{1,α} cos(θ·α) α αᵀ`, so that
    /// `Σ_α a_{1,α} e^{iθ·α} (α·∇)² = Σ_{il} H_{il} ∂_i ∂_l` (the sine part cancels).
    pub fn second_moment(&self, theta: &WaveVector) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut h = vec![vec![0.0; d]; d];
        for inter in self.pot.interactions() {
            let w = inter.a[0] * theta.dot(&inter.alpha).cos();
            for i in 0..d {
                for l in 0..d {
                    h[i][l] += w * (inter.alpha[i] * inter.alpha[l]) as f64;
                }
            }
        }
        h
    }

    /// `(μ₋, μ₊)`: extremes of `Ω` over the wave-vector grid.
    pub fn omega_range(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for theta in self.spec.wave_grid() {
            let w = self.dispersion(&theta)?;
            lo = lo.min(w);
            hi = hi.max(w);
        }
        Ok((lo, hi))
    }

    /// Largest `Ω` over the grid, tolerating `Ω(0) = 0` (for time-step selection).
    pub fn omega_max(&self) -> f64 {
        self.spec
            .wave_grid()
            .map(|t| self.omega_sq(&t).max(0.0).sqrt())
            .fold(0.0, f64::max)
    }

    /// Accelerations, using exact callbacks when present.
    pub fn force(&self, x: &[f64], out: &mut [f64]) {
        match self.pot.exact() {
            Some(exact) => self.force_exact(exact, x, out),
            None => self.force_taylor(x, out),
        }
    }

    /// Accelerations from the truncated Taylor polynomials.
    pub fn force_taylor(&self, x: &[f64], out: &mut [f64]) {
        let b = &self.pot.onsite;
        for (s, o) in out.iter_mut().enumerate() {
            *o = -horner_force(b, x[s]);
        }
        for (inter, nb) in self.pot.interactions().iter().zip(&self.neighbors) {
            for (s, o) in out.iter_mut().enumerate() {
                *o += horner_force(&inter.a, x[nb[s]] - x[s]);
            }
        }
    }

    fn force_exact(&self, exact: &ExactPotentials, x: &[f64], out: &mut [f64]) {
        match &exact.onsite {
            Some(w) => {
                for (s, o) in out.iter_mut().enumerate() {
                    *o = -(w.derivative)(x[s]);
                }
            }
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
        for (alpha, f) in &exact.interaction {
            let nb = self.neighbor_table(alpha);
            for (s, o) in out.iter_mut().enumerate() {
                *o += (f.derivative)(x[nb[s]] - x[s]);
            }
        }
    }

    fn neighbor_table(&self, alpha: &[i64]) -> std::borrow::Cow<'_, [usize]> {
        match self
            .pot
            .interactions()
            .iter()
            .position(|i| i.alpha == alpha)
        {
            Some(k) => std::borrow::Cow::Borrowed(&self.neighbors[k]),
            None => std::borrow::Cow::Owned(
                (0..self.sites())
                    .map(|s| {
                        let c: Vec<i64> = self
                            .spec
                            .coords(s)
                            .iter()
                            .zip(alpha)
                            .map(|(a, b)| a + b)
                            .collect();
                        self.spec.index(&c)
                    })
                    .collect(),
            ),
        }
    }

    /// Potential energy `Σ_γ (½Σ_α V_α(x_{γ+α} - x_γ) + W(x_γ))`.
    pub fn potential_energy(&self, x: &[f64]) -> f64 {
        match self.pot.exact() {
            Some(exact) => {
                let mut e = 0.0;
                if let Some(w) = &exact.onsite {
                    e += x.iter().map(|&xi| (w.value)(xi)).sum::<f64>();
                }
                for (alpha, f) in &exact.interaction {
                    let nb = self.neighbor_table(alpha);
                    e += 0.5 * (0..x.len()).map(|s| (f.value)(x[nb[s]] - x[s])).sum::<f64>();
                }
                e
            }
            None => self.potential_energy_taylor(x),
        }
    }

    /// Potential energy from the truncated Taylor polynomials.
    pub fn potential_energy_taylor(&self, x: &[f64]) -> f64 {
        let mut e: f64 = x.iter().map(|&xi| horner_energy(&self.pot.onsite, xi)).sum();
        for (inter, nb) in self.pot.interactions().iter().zip(&self.neighbors) {
            e += 0.5
                * (0..x.len())
                    .map(|s| horner_energy(&inter.a, x[nb[s]] - x[s]))
                    .sum::<f64>();
        }
        e
    }

    /// Hamiltonian `½Σv² + potential energy`.
    pub fn energy(&self, x: &[f64], v: &[f64]) -> f64 {
        0.5 * v.iter().map(|vi| vi * vi).sum::<f64>() + self.potential_energy(x)
    }

    /// `‖x‖²_E = Σ_α (a_{1,α}/2) Σ_γ |x_{γ+α} - x_γ|² + b₁ Σ_γ |x_γ|²`.
    pub fn energy_norm_sq(&self, x: &[f64]) -> f64 {
        let mut e = self.pot.b(1) * x.iter().map(|xi| xi * xi).sum::<f64>();
        for (inter, nb) in self.pot.interactions().iter().zip(&self.neighbors) {
            e += 0.5
                * inter.a[0]
                * (0..x.len())
                    .map(|s| (x[nb[s]] - x[s]).powi(2))
                    .sum::<f64>();
        }
        e
    }
}
