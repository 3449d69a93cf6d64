//! The assembled hierarchy against closed-form amplitude equations.

mod oracle;

use std::f64::consts::PI;

use modlat::lattice::WaveVector;
use modlat::macro_solver::Hierarchy;
use modlat::pulse::{PulseSystem, Representant};
use modlat::spectral::MacroGrid;
use num_complex::Complex64 as C;
use oracle::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn three_wave_first_order_matches_closed_form() {
    let tw = ThreeWave::new();
    let h = tw.hierarchy();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a1 = random_triple(&mut rng, 0.7);
    let lib = h.first_order_rhs(&a1);
    let oracle = tw.first_order(&a1);
    for j in 0..3 {
        let e = rel_sup(&lib[j], &oracle[j]);
        assert!(e < 1e-10, "pulse {}: {e:e}", j + 1);
    }
}

#[test]
fn three_wave_algebraic_second_order_fields() {
    let tw = ThreeWave::new();
    let ch = &tw.ch;
    let h = tw.hierarchy();
    let reps: Vec<Representant> = h.t2_modes().iter().map(|m| m.rep.clone()).collect();
    assert_eq!(reps.len(), 7);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = random_triple(&mut rng, 0.7);
    let lib = h.second_order_fields(&a).unwrap();
    let [t1, t2, t3] = tw.th;
    let [w1, w2, w3] = tw.w;
    let pair = |tp: f64, tq: f64, wp: f64, wq: f64, k: f64, f: Vec<C>| -> (f64, f64, Vec<C>) {
        let c = ch.c(&[tp, tq]);
        let d = ch.delta(tp + tq, wp + wq);
        (tp + tq, wp + wq, scale(&f, k * c / d))
    };
    let zero: Vec<C> = (0..P)
        .map(|i| C::new(-2.0 * ch.b[1] / ch.b[0] * a.iter().map(|f| f[i].norm_sqr()).sum::<f64>(), 0.0))
        .collect();
    let expected = vec![
        pair(t1, t1, w1, w1, 1.0, mul(&a[0], &a[0])),
        pair(t2, t2, w2, w2, 1.0, mul(&a[1], &a[1])),
        pair(t3, t3, w3, w3, 1.0, mul(&a[2], &a[2])),
        pair(t1, t3, w1, w3, 2.0, mul(&a[0], &a[2])),
        pair(t1, -t2, w1, -w2, 2.0, mul(&a[0], &conj(&a[1]))),
        pair(t2, t3, w2, w3, 2.0, mul(&a[1], &a[2])),
        (0.0, 0.0, zero),
    ];
    for (theta, omega, f) in expected {
        let (idx, flip) = find(&reps, theta, omega);
        let got = if flip { conj(&lib[idx]) } else { lib[idx].clone() };
        let e = rel_sup(&got, &f);
        assert!(e < 1e-10, "mode {:?}: {e:e}", reps[idx].indices);
    }
}

#[test]
fn three_wave_second_order_rhs_matches_closed_form() {
    let tw = ThreeWave::new();
    let h = tw.hierarchy();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..3 {
        let a1 = random_triple(&mut rng, 0.7);
        let a2 = random_triple(&mut rng, 0.5);
        let lib = h.second_order_rhs(&a1, &a2).unwrap();
        let oracle = tw.second_order(&a1, &a2);
        for j in 0..3 {
            let e = rel_sup(&lib[j], &oracle[j]);
            assert!(e < 1e-10, "pulse {}: {e:e}", j + 1);
        }
    }
}

#[test]
fn vanishing_first_order_leaves_pure_transport() {
    let tw = ThreeWave::new();
    let h = tw.hierarchy();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a1 = [vec![C::new(0.0, 0.0); P], vec![C::new(0.0, 0.0); P], vec![C::new(0.0, 0.0); P]];
    let a2 = random_triple(&mut rng, 1.0);
    let lib = h.second_order_rhs(&a1, &a2).unwrap();
    for j in 0..3 {
        let v = tw.ch.velocity(tw.th[j]);
        let transport = scale(&dft_derivative(&a2[j], 1), C::new(v, 0.0));
        let e = rel_sup(&lib[j], &transport);
        assert!(e < 1e-12, "pulse {}: {e:e}", j + 1);
        assert!((h.velocity(j + 1)[0] - v).abs() < 1e-14);
    }
}

#[test]
fn single_pulse_second_and_third_order() {
    let ch = Chain {
        a: [1.0, 0.3, 0.2],
        b: [1.0, 0.4, 0.3],
    };
    let th = 2.0 * PI * 7.0 / 40.0;
    let w = ch.omega(th);
    let model = chain_model(&ch, 40);
    let sys = PulseSystem::on_shell(&model, vec![WaveVector::from_grid(&[7], 40)]).unwrap();
    let h = Hierarchy::new(&model, &sys, 3, MacroGrid::new(1, P, LEN).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let a = smooth_field(&mut rng, 0.8);
    let a2 = smooth_field(&mut rng, 0.5);
    let v = C::new(ch.velocity(th), 0.0);
    let grad = |f: &[C]| dft_derivative(f, 1);

    // A_{2,1}
    let c11 = ch.c(&[th, th]);
    let d11 = ch.delta(2.0 * th, 2.0 * w);
    let coef = 2.0 * c11.norm_sqr() / d11 + 4.0 * ch.b[1] * ch.b[1] / ch.b[0] + 3.0 * ch.c(&[th, th, -th]);
    let da = scale(&grad(&a), v);
    let dda = scale(&grad(&da), v);
    let mut src = scale(&mul(&abs2(&a), &a), coef);
    src = add(&src, &scale(&dft_derivative(&a, 2), ch.hess(th)));
    src = add(&src, &scale(&dda, C::new(-1.0, 0.0)));
    let oracle = add(&scale(&grad(&a2), v), &scale(&src, 1.0 / (2.0 * I * w)));
    let lib = h.second_order_rhs(std::slice::from_ref(&a), std::slice::from_ref(&a2)).unwrap();
    let e = rel_sup(&lib[0], &oracle);
    assert!(e < 1e-10, "A2 rhs: {e:e}");

    // A_{3,·}
    let reps: Vec<Representant> = h.t3_modes().iter().map(|m| m.rep.clone()).collect();
    let lib3 = h.third_order_fields(std::slice::from_ref(&a), std::slice::from_ref(&a2)).unwrap();
    let get = |theta: f64, omega: f64| {
        let (i, flip) = find(&reps, theta, omega);
        if flip { conj(&lib3[i]) } else { lib3[i].clone() }
    };

    let beta_m: C = [1.0f64, -1.0]
        .iter()
        .map(|&al| 2.0 * ch.a_n(2, al) * (1.0 - C::from_polar(1.0, -th * al)) * al)
        .sum();
    let half = add(
        &scale(&mul(&a, &conj(&a2)), C::new(-2.0 * ch.b[1], 0.0)),
        &scale(&mul(&a, &grad(&conj(&a))), beta_m),
    );
    let zero: Vec<C> = add(&half, &conj(&half)).iter().map(|x| x / ch.b[0]).collect();
    let e = rel_sup(&get(0.0, 0.0), &zero);
    assert!(e < 1e-10, "A3 (1,-1): {e:e}");

    let a_sq = mul(&a, &a);
    let dt_sq = scale(&mul(&a, &da), C::new(2.0, 0.0));
    let w2 = ch.omega(2.0 * th);
    let grad2 = C::new(2.0 * w2 * ch.velocity(2.0 * th), 0.0);
    let mut rhs = add(&scale(&dt_sq, -4.0 * I * w), &scale(&grad(&a_sq), I * grad2));
    rhs = scale(&rhs, c11 / d11);
    rhs = add(&rhs, &scale(&mul(&a, &a2), 2.0 * c11));
    let beta_2: C = [1.0f64, -1.0]
        .iter()
        .map(|&al| 2.0 * ch.a_n(2, al) * (C::from_polar(1.0, 2.0 * th * al) - C::from_polar(1.0, th * al)) * al)
        .sum();
    rhs = add(&rhs, &scale(&mul(&a, &grad(&a)), beta_2));
    let e = rel_sup(&get(2.0 * th, 2.0 * w), &scale(&rhs, C::new(1.0 / d11, 0.0)));
    assert!(e < 1e-10, "A3 (1,1): {e:e}");

    let d111 = ch.delta(3.0 * th, 3.0 * w);
    let c1_11 = ch.c(&[th, 2.0 * th]);
    let k = (2.0 * c1_11 * c11 / d11 + ch.c(&[th, th, th])) / d111;
    let e = rel_sup(&get(3.0 * th, 3.0 * w), &scale(&mul(&a_sq, &a), k));
    assert!(e < 1e-10, "A3 (1,1,1): {e:e}");
}
