//! Periodic macroscopic grids, pseudo-spectral operators and Taylor jets.
//!
//! Fields are complex arrays on a uniform periodic grid of `P` points per
//! axis over `[0, L)^d` (row-major). Derivatives use the FFT; the Nyquist
//! wavenumber is set to zero so that all derivative operators commute.
//! A [`Jet`] stores normalized Taylor coefficients `∂_τ^k A / k!` of a field.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Complex field on a macroscopic grid.
pub type Field = Vec<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform periodic grid of `points` per axis on `[0, length)^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroGrid {
    dim: usize,
    points: usize,
    length: f64,
}

impl MacroGrid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if dim == 0 || points < 2 || !(length > 0.0) {
            return Err(Error::Config(format!(
                "invalid macro grid: d={dim}, P={points}, L={length}"
            )));
        }
        Ok(MacroGrid {
            dim,
            points,
            length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Number of grid values `P^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a row-major position.
    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for i in (0..self.dim).rev() {
            c[i] = index % self.points;
            index /= self.points;
        }
        c
    }

    /// Coordinates `u` of a grid point.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        self.multi_index(index)
            .into_iter()
            .map(|c| c as f64 * self.spacing())
            .collect()
    }

    /// Sample a function of the coordinates.
    pub fn sample(&self, f: impl Fn(&[f64]) -> Complex64) -> Field {
        (0..self.len()).map(|i| f(&self.coords(i))).collect()
    }

    /// Signed mode number of an FFT bin.
    fn mode(&self, bin: usize) -> i64 {
        let p = self.points as i64;
        let b = bin as i64;
        if b <= (p - 1) / 2 {
            b
        } else {
            b - p
        }
    }

    fn is_nyquist(&self, bin: usize) -> bool {
        self.points.is_multiple_of(2) && bin == self.points / 2
    }

    /// Angular wavenumber of a bin, zero at Nyquist.
    fn wavenumber(&self, bin: usize) -> f64 {
        if self.is_nyquist(bin) {
            0.0
        } else {
            2.0 * PI * self.mode(bin) as f64 / self.length
        }
    }
}

fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, plan: &Arc<dyn Fft<f64>>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (k, l) in line.iter().enumerate() {
                    data[base + k * stride] = *l;
                }
            }
        }
    }
}

/// FFT-based operators on a [`MacroGrid`].
#[derive(Clone)]
pub struct Spectral {
    grid: MacroGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Per-axis angular wavenumbers indexed by bin.
    kappa: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: MacroGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let kappa = (0..grid.points).map(|b| grid.wavenumber(b)).collect();
        Spectral {
            grid,
            forward,
            inverse,
            kappa,
        }
    }

    pub fn grid(&self) -> &MacroGrid {
        &self.grid
    }

    /// Unnormalized forward transform.
    pub fn to_spectrum(&self, f: &[Complex64]) -> Field {
        let mut data = f.to_vec();
        fft_nd(&mut data, self.grid.points, self.grid.dim, &self.forward);
        data
    }

    /// Inverse transform including the `1/P^d` normalization.
    pub fn from_spectrum(&self, spec: &[Complex64]) -> Field {
        let mut data = spec.to_vec();
        fft_nd(&mut data, self.grid.points, self.grid.dim, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// Multiply the spectrum by `symbol(κ)`.
    pub fn apply_symbol(&self, f: &[Complex64], symbol: impl Fn(&[f64]) -> Complex64) -> Field {
        let mut spec = self.to_spectrum(f);
        let mut kappa = vec![0.0; self.grid.dim];
        for (i, s) in spec.iter_mut().enumerate() {
            for (k, b) in kappa.iter_mut().zip(self.grid.multi_index(i)) {
                *k = self.kappa[b];
            }
            *s *= symbol(&kappa);
        }
        self.from_spectrum(&spec)
    }

    /// `dir·∇f`.
    pub fn directional(&self, f: &[Complex64], dir: &[f64]) -> Field {
        self.apply_symbol(f, |k| {
            I * k.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>()
        })
    }

    /// `∂f/∂u_axis`.
    pub fn partial(&self, f: &[Complex64], axis: usize) -> Field {
        self.apply_symbol(f, |k| I * k[axis])
    }

    /// `Σ_{il} H_{il} ∂_i ∂_l f`.
    pub fn second_order(&self, f: &[Complex64], h: &[Vec<f64>]) -> Field {
        self.apply_symbol(f, |k| {
            let mut q = 0.0;
            for (i, hi) in h.iter().enumerate() {
                for (l, hil) in hi.iter().enumerate() {
                    q += hil * k[i] * k[l];
                }
            }
            Complex64::new(-q, 0.0)
        })
    }

    /// `f(u + shift)` by phase multiplication.
    pub fn translate(&self, f: &[Complex64], shift: &[f64]) -> Field {
        self.apply_symbol(f, |k| {
            Complex64::from_polar(1.0, k.iter().zip(shift).map(|(a, b)| a * b).sum())
        })
    }

    /// Largest angular wavenumber magnitude resolved by the grid.
    pub fn max_wavenumber(&self) -> f64 {
        self.kappa.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Trigonometric interpolation of macro fields onto the `M^d` lattice points
/// `u = L k / M` of the same period.
#[derive(Clone)]
pub struct LatticeSampler {
    grid: MacroGrid,
    cells: usize,
    inverse: Arc<dyn Fft<f64>>,
    /// For each macro bin and axis: target lattice bins with weights.
    targets: Vec<Vec<(usize, f64)>>,
}

impl LatticeSampler {
    pub fn new(grid: MacroGrid, cells: usize) -> Self {
        let inverse = FftPlanner::new().plan_fft_inverse(cells);
        let m = cells as i64;
        let targets = (0..grid.points)
            .map(|b| {
                let n = grid.mode(b);
                if grid.is_nyquist(b) {
                    vec![
                        (n.rem_euclid(m) as usize, 0.5),
                        ((-n).rem_euclid(m) as usize, 0.5),
                    ]
                } else {
                    vec![(n.rem_euclid(m) as usize, 1.0)]
                }
            })
            .collect();
        LatticeSampler {
            grid,
            cells,
            inverse,
            targets,
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Values at all lattice sites (row-major over `M^d`) from a spectrum.
    pub fn sample_spectrum(&self, spec: &[Complex64]) -> Field {
        let d = self.grid.dim;
        let mut folded = vec![Complex64::new(0.0, 0.0); self.cells.pow(d as u32)];
        for (i, &c) in spec.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mi = self.grid.multi_index(i);
            let mut stack: Vec<(usize, f64)> = vec![(0, 1.0)];
            for &b in &mi {
                let mut next = Vec::with_capacity(stack.len() * 2);
                for &(idx, w) in &stack {
                    for &(t, tw) in &self.targets[b] {
                        next.push((idx * self.cells + t, w * tw));
                    }
                }
                stack = next;
            }
            for (idx, w) in stack {
                folded[idx] += c * w;
            }
        }
        fft_nd(&mut folded, self.cells, d, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        folded.iter_mut().for_each(|v| *v *= scale);
        folded
    }
}

/// Truncated Taylor series in `τ` of a field: `coeffs[k] = ∂_τ^k A / k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<Field>);

impl Jet {
    pub fn zero(len: usize, order: usize) -> Self {
        Jet(vec![vec![Complex64::new(0.0, 0.0); len]; order + 1])
    }

    pub fn constant(f: Field) -> Self {
        Jet(vec![f])
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> &Field {
        &self.0[0]
    }

    /// `∂_τ^k A`.
    pub fn time_derivative(&self, k: usize) -> Field {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k].iter().map(|v| v * fact).collect()
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet(self.0[..=order.min(self.order())].to_vec())
    }

    /// Jet of `∂_τ A`, one order shorter.
    pub fn tau_derivative(&self) -> Jet {
        if self.order() == 0 {
            return Jet::zero(self.0[0].len(), 0);
        }
        Jet((1..=self.order())
            .map(|k| self.0[k].iter().map(|v| v * k as f64).collect())
            .collect())
    }

    pub fn conj(&self) -> Jet {
        Jet(self
            .0
            .iter()
            .map(|f| f.iter().map(|v| v.conj()).collect())
            .collect())
    }

    /// Apply a linear spatial operator to every coefficient.
    pub fn map(&self, op: impl Fn(&[Complex64]) -> Field) -> Jet {
        Jet(self.0.iter().map(|f| op(f)).collect())
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order().min(other.order());
        let len = self.0[0].len();
        let mut out = Jet::zero(len, order);
        for k in 0..=order {
            for i in 0..=k {
                let (a, b) = (&self.0[i], &other.0[k - i]);
                for (o, (x, y)) in out.0[k].iter_mut().zip(a.iter().zip(b)) {
                    *o += x * y;
                }
            }
        }
        out
    }

    /// `self += c · other` on common orders; `self` is truncated to the smaller order.
    pub fn axpy(&mut self, c: Complex64, other: &Jet) {
        let order = self.order().min(other.order());
        self.0.truncate(order + 1);
        for (dst, src) in self.0.iter_mut().zip(&other.0) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet(self
            .0
            .iter()
            .map(|f| f.iter().map(|v| v * c).collect())
            .collect())
    }

    /// Largest modulus of the value.
    pub fn sup(&self) -> f64 {
        self.0[0].iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

/// Largest modulus of a field.
pub fn sup_norm(f: &[Complex64]) -> f64 {
    f.iter().fold(0.0, |a, v| a.max(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(grid: &MacroGrid, c: f64, w: f64) -> Field {
        grid.sample(|u| Complex64::new((-(u[0] - c).powi(2) / (2.0 * w * w)).exp(), 0.0))
    }

    #[test]
    fn derivative_of_gaussian() {
        let grid = MacroGrid::new(1, 128, 20.0).unwrap();
        let sp = Spectral::new(grid.clone());
        let f = gauss(&grid, 10.0, 1.0);
        let df = sp.partial(&f, 0);
        for i in 0..grid.len() {
            let u = grid.coords(i)[0] - 10.0;
            let exact = -u * (-u * u / 2.0).exp();
            assert!((df[i].re - exact).abs() < 1e-10);
        }
        let d2 = sp.second_order(&f, &[vec![1.0]]);
        let dd = sp.partial(&df, 0);
        for (a, b) in d2.iter().zip(&dd) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_transform_roundtrip() {
        let grid = MacroGrid::new(2, 16, 6.0).unwrap();
        let sp = Spectral::new(grid.clone());
        let f = grid.sample(|u| Complex64::new((u[0]).sin(), (2.0 * u[1]).cos()));
        let back = sp.from_spectrum(&sp.to_spectrum(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn lattice_sampling_is_interpolation() {
        let grid = MacroGrid::new(1, 64, 10.0).unwrap();
        let sp = Spectral::new(grid.clone());
        let f = gauss(&grid, 5.0, 0.6);
        for m in [64usize, 100, 250, 40] {
            let s = LatticeSampler::new(grid.clone(), m).sample_spectrum(&sp.to_spectrum(&f));
            for (k, v) in s.iter().enumerate() {
                let u = 10.0 * k as f64 / m as f64;
                let exact = (-(u - 5.0).powi(2) / 0.72).exp();
                let tol = if m < 64 { 1e-6 } else { 1e-12 };
                assert!((v.re - exact).abs() < tol, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn jet_product_is_cauchy() {
        let a = Jet(vec![vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(2.0, 0.0)]]);
        let b = Jet(vec![vec![Complex64::new(3.0, 0.0)], vec![Complex64::new(5.0, 0.0)]]);
        let c = a.mul(&b);
        assert_eq!(c.0[0][0].re, 3.0);
        assert_eq!(c.0[1][0].re, 11.0);
        let d = Jet(vec![
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(2.0, 0.0)],
            vec![Complex64::new(3.0, 0.0)],
        ]);
        assert_eq!(d.time_derivative(2)[0].re, 6.0);
        assert_eq!(d.tau_derivative().0[1][0].re, 6.0);
    }
}
