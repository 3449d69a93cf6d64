//! Closed-form amplitude equations of a nearest-neighbour chain, evaluated
//! with a naive DFT. Shared by the oracle and acceptance test targets.

#![allow(dead_code)]

use std::f64::consts::PI;

use modlat::lattice::{LatticeModel, LatticeSpec, PotentialSpec, WaveVector};
use modlat::macro_solver::Hierarchy;
use modlat::pulse::{PulseSystem, Representant};
use modlat::resonance::tune_a1;
use modlat::spectral::MacroGrid;
use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const P: usize = 64;
pub const LEN: f64 = 12.0;
pub const I: C = C::new(0.0, 1.0);

/// `V'(u) = Σ a_n u^n` along `α = ±1`, `W'(x) = Σ b_n x^n`.
pub struct Chain {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl Chain {
    pub fn omega2(&self, t: f64) -> f64 {
        2.0 * self.a[0] * (1.0 - t.cos()) + self.b[0]
    }
    pub fn omega(&self, t: f64) -> f64 {
        self.omega2(t).sqrt()
    }
    pub fn velocity(&self, t: f64) -> f64 {
        self.a[0] * t.sin() / self.omega(t)
    }
    pub fn delta(&self, t: f64, w: f64) -> f64 {
        self.omega2(t) - w * w
    }
    /// `a_{n,α}` with `a_{n,-α} = (-1)^{n+1} a_{n,α}`.
    pub fn a_n(&self, n: usize, alpha: f64) -> f64 {
        if alpha < 0.0 && n.is_multiple_of(2) {
            -self.a[n - 1]
        } else {
            self.a[n - 1]
        }
    }
    pub fn c(&self, thetas: &[f64]) -> C {
        let n = thetas.len();
        let mut s = C::new(-self.b[n - 1], 0.0);
        for alpha in [1.0f64, -1.0] {
            let prod: C = thetas
                .iter()
                .map(|t| C::from_polar(1.0, t * alpha) - 1.0)
                .product();
            s += self.a_n(n, alpha) * prod;
        }
        s
    }
    pub fn gamma(&self, tp: f64, tq: f64) -> f64 {
        [1.0f64, -1.0]
            .iter()
            .map(|&al| 2.0 * self.a_n(2, al) * (((tp + tq) * al).cos() - (tq * al).cos()) * al)
            .sum()
    }
    pub fn hess(&self, t: f64) -> C {
        [1.0f64, -1.0]
            .iter()
            .map(|&al| 0.5 * self.a[0] * C::from_polar(1.0, t * al) * al * al)
            .sum()
    }
}

pub fn dft_derivative(f: &[C], order: u32) -> Vec<C> {
    let n = f.len();
    let spec: Vec<C> = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| f[j] * C::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64))
                .sum::<C>()
                / n as f64
        })
        .collect();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let kk = if k < n / 2 { k as f64 } else if k == n / 2 { 0.0 } else { k as f64 - n as f64 };
                    let ik = I * (2.0 * PI * kk / LEN);
                    spec[k] * ik.powu(order) * C::from_polar(1.0, 2.0 * PI * (k * j) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

pub fn smooth_field(rng: &mut ChaCha8Rng, scale: f64) -> Vec<C> {
    let modes: Vec<(i32, C)> = (-6..=6)
        .map(|k: i32| {
            let damp = scale / (1.0 + (k * k) as f64);
            (k, C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp)
        })
        .collect();
    (0..P)
        .map(|j| {
            let y = LEN * j as f64 / P as f64;
            modes
                .iter()
                .map(|(k, c)| c * C::from_polar(1.0, 2.0 * PI * *k as f64 * y / LEN))
                .sum()
        })
        .collect()
}

pub fn rel_sup(a: &[C], b: &[C]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max).max(1e-300);
    num / den
}

pub fn add(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
pub fn mul(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}
pub fn conj(a: &[C]) -> Vec<C> {
    a.iter().map(|x| x.conj()).collect()
}
pub fn scale(a: &[C], s: C) -> Vec<C> {
    a.iter().map(|x| x * s).collect()
}
pub fn abs2(a: &[C]) -> Vec<C> {
    a.iter().map(|x| C::new(x.norm_sqr(), 0.0)).collect()
}

pub fn chain_model(ch: &Chain, cells: usize) -> LatticeModel {
    let mut pot = PotentialSpec::new(1, 3);
    pot.add_interaction(vec![1], ch.a.to_vec()).unwrap();
    pot.set_onsite(ch.b.to_vec()).unwrap();
    LatticeModel::new(LatticeSpec::cubic(1, cells).unwrap(), pot).unwrap()
}

pub fn find(modes: &[Representant], theta: f64, omega: f64) -> (usize, bool) {
    PulseSystem::locate(modes, &WaveVector::new(vec![theta]), omega)
        .unwrap_or_else(|| panic!("no mode at theta {theta}, omega {omega}"))
}

pub struct ThreeWave {
    pub ch: Chain,
    pub th: [f64; 3],
    pub w: [f64; 3],
}

impl ThreeWave {
    pub fn new() -> Self {
        let (t1, t2) = (2.0 * PI * 0.36, 2.0 * PI * 0.65);
        let a1 = tune_a1(1.0, t1, t2).unwrap();
        let ch = Chain {
            a: [a1, 0.3, 0.2],
            b: [1.0, 0.4, 0.3],
        };
        let th = [t1, t2, t1 + t2];
        let w = [ch.omega(t1), ch.omega(t2), ch.omega(t1) + ch.omega(t2)];
        ThreeWave { ch, th, w }
    }

    pub fn c12(&self) -> C {
        self.ch.c(&[self.th[0], self.th[1]])
    }

    /// Right-hand sides of the first-order three-wave system.
    pub fn first_order(&self, a: &[Vec<C>; 3]) -> [Vec<C>; 3] {
        let c = self.c12();
        let t = |j: usize| scale(&dft_derivative(&a[j], 1), C::new(self.ch.velocity(self.th[j]), 0.0));
        [
            add(&t(0), &scale(&mul(&a[2], &conj(&a[1])), -I * c.conj() / self.w[0])),
            add(&t(1), &scale(&mul(&a[2], &conj(&a[0])), -I * c.conj() / self.w[1])),
            add(&t(2), &scale(&mul(&a[0], &a[1]), -I * c / self.w[2])),
        ]
    }

    pub fn eta(&self, j: usize, p: usize, sign: f64) -> C {
        let ch = &self.ch;
        let (tj, tp) = (self.th[j], sign * self.th[p]);
        let (wj, wp) = (self.w[j], sign * self.w[p]);
        let cjp = ch.c(&[tj, tp]);
        C::new(2.0 * ch.b[1] * ch.b[1] / ch.b[0], 0.0)
            + 2.0 * cjp.norm_sqr() / ch.delta(tj + tp, wj + wp)
            + 3.0 * ch.c(&[tj, tp, -tp])
    }

    /// Right-hand sides of the transport equations of `A_{2,j}`.
    pub fn second_order(&self, a1: &[Vec<C>; 3], a2: &[Vec<C>; 3]) -> [Vec<C>; 3] {
        let ch = &self.ch;
        let c = self.c12();
        let b22 = C::new(2.0 * ch.b[1] * ch.b[1] / ch.b[0], 0.0);
        let d1 = self.first_order(a1);
        let dd: Vec<Vec<C>> = (0..3)
            .map(|j| {
                let tr = scale(&dft_derivative(&d1[j], 1), C::new(ch.velocity(self.th[j]), 0.0));
                let nl = match j {
                    0 => scale(
                        &add(&mul(&d1[2], &conj(&a1[1])), &mul(&a1[2], &conj(&d1[1]))),
                        -I * c.conj() / self.w[0],
                    ),
                    1 => scale(
                        &add(&mul(&d1[2], &conj(&a1[0])), &mul(&a1[2], &conj(&d1[0]))),
                        -I * c.conj() / self.w[1],
                    ),
                    _ => scale(&add(&mul(&d1[0], &a1[1]), &mul(&a1[0], &d1[1])), -I * c / self.w[2]),
                };
                add(&tr, &nl)
            })
            .collect();
        let g = |p: f64, q: f64| C::new(ch.gamma(p, q), 0.0);
        let [t1, t2, t3] = self.th;
        let grad = |f: &[C]| dft_derivative(f, 1);
        let lap = |f: &[C]| dft_derivative(f, 2);

        // pulse 1
        let cubic1 = add(
            &add(
                &scale(&abs2(&a1[0]), self.eta(0, 0, 1.0) + b22),
                &scale(&abs2(&a1[1]), 2.0 * self.eta(0, 1, -1.0)),
            ),
            &scale(&abs2(&a1[2]), 2.0 * self.eta(0, 2, 1.0)),
        );
        let mut s1 = mul(&cubic1, &a1[0]);
        s1 = add(&s1, &scale(&dd[0], C::new(-1.0, 0.0)));
        s1 = add(&s1, &scale(&mul(&a1[2], &grad(&conj(&a1[1]))), g(t3, -t2)));
        s1 = add(&s1, &scale(&mul(&conj(&a1[1]), &grad(&a1[2])), g(-t2, t3)));
        s1 = add(&s1, &scale(&lap(&a1[0]), ch.hess(t1)));
        let mut r1 = scale(&grad(&a2[0]), C::new(ch.velocity(t1), 0.0));
        r1 = add(
            &r1,
            &scale(
                &add(&mul(&a1[2], &conj(&a2[1])), &mul(&conj(&a1[1]), &a2[2])),
                -I * c.conj() / self.w[0],
            ),
        );
        r1 = add(&r1, &scale(&s1, 1.0 / (2.0 * I * self.w[0])));

        // pulse 2
        let cubic2 = add(
            &add(
                &scale(&abs2(&a1[1]), self.eta(1, 1, 1.0) + b22),
                &scale(&abs2(&a1[0]), 2.0 * self.eta(1, 0, -1.0)),
            ),
            &scale(&abs2(&a1[2]), 2.0 * self.eta(1, 2, 1.0)),
        );
        let mut s2 = mul(&cubic2, &a1[1]);
        s2 = add(&s2, &scale(&dd[1], C::new(-1.0, 0.0)));
        s2 = add(&s2, &scale(&mul(&a1[2], &grad(&conj(&a1[0]))), g(t3, -t1)));
        s2 = add(&s2, &scale(&mul(&conj(&a1[0]), &grad(&a1[2])), g(-t1, t3)));
        s2 = add(&s2, &scale(&lap(&a1[1]), ch.hess(t2)));
        let mut r2 = scale(&grad(&a2[1]), C::new(ch.velocity(t2), 0.0));
        r2 = add(
            &r2,
            &scale(
                &add(&mul(&a1[2], &conj(&a2[0])), &mul(&conj(&a1[0]), &a2[2])),
                -I * c.conj() / self.w[1],
            ),
        );
        r2 = add(&r2, &scale(&s2, 1.0 / (2.0 * I * self.w[1])));

        // pulse 3
        let cubic3 = add(
            &add(
                &scale(&abs2(&a1[2]), self.eta(2, 2, 1.0) + b22),
                &scale(&abs2(&a1[0]), 2.0 * self.eta(2, 0, 1.0)),
            ),
            &scale(&abs2(&a1[1]), 2.0 * self.eta(2, 1, 1.0)),
        );
        let mut s3 = mul(&cubic3, &a1[2]);
        s3 = add(&s3, &scale(&dd[2], C::new(-1.0, 0.0)));
        s3 = add(&s3, &scale(&mul(&a1[0], &grad(&a1[1])), g(t1, t2)));
        s3 = add(&s3, &scale(&mul(&a1[1], &grad(&a1[0])), g(t2, t1)));
        s3 = add(&s3, &scale(&lap(&a1[2]), ch.hess(t3)));
        let mut r3 = scale(&grad(&a2[2]), C::new(ch.velocity(t3), 0.0));
        r3 = add(
            &r3,
            &scale(
                &add(&mul(&a1[0], &a2[1]), &mul(&a1[1], &a2[0])),
                -I * c / self.w[2],
            ),
        );
        r3 = add(&r3, &scale(&s3, 1.0 / (2.0 * I * self.w[2])));
        [r1, r2, r3]
    }

    pub fn hierarchy(&self) -> Hierarchy {
        let model = chain_model(&self.ch, 100);
        let sys = PulseSystem::on_shell(
            &model,
            vec![
                WaveVector::from_grid(&[36], 100),
                WaveVector::from_grid(&[65], 100),
                WaveVector::from_grid(&[101], 100),
            ],
        )
        .unwrap();
        Hierarchy::new(&model, &sys, 3, MacroGrid::new(1, P, LEN).unwrap()).unwrap()
    }
}

pub fn random_triple(rng: &mut ChaCha8Rng, s: f64) -> [Vec<C>; 3] {
    [smooth_field(rng, s), smooth_field(rng, s), smooth_field(rng, s)]
}

