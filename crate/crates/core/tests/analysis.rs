use proptest::prelude::*;
use qfa::analysis::{
    added_noise, classical_sensitivity, detuned_stability_threshold, effective_bandwidth,
    first_order_gain_fluctuation, gain_profile, plant_noise_floor, sensitivity_bound, stability,
    NoiseFlavor, DEFAULT_STABILITY_MARGIN,
};
use qfa::interconnect::{
    classical_feedback_gain, close_ideal_feedback, close_lossy_feedback, FeedbackLoopConfig,
};
use qfa::models::{build_beam_splitter, build_detuned_ndpa, build_ndpa};
use qfa::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn threshold_agrees_with_pole_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let beta: f64 = rng.random_range(-0.95..0.95);
        let lambda: f64 = rng.random_range(-30.0..30.0);
        let max = detuned_stability_threshold(1.0, beta).unwrap();
        if (lambda.abs() - max).abs() < 1e-6 {
            continue;
        }
        let cl = close_ideal_feedback(
            &build_detuned_ndpa(1.0, lambda).unwrap(),
            &build_beam_splitter(beta).unwrap(),
        )
        .unwrap();
        let v = stability(&cl, DEFAULT_STABILITY_MARGIN).unwrap();
        assert_eq!(
            v.stable,
            lambda.abs() < max,
            "beta {beta} lambda {lambda} max {max}"
        );
        checked += 1;
    }
}

#[test]
fn bandwidth_examples() {
    let bw = |l: f64| {
        let curve = gain_profile(&build_detuned_ndpa(1.0, l).unwrap(), -2.0, 2.0, 2001).unwrap();
        effective_bandwidth(&curve, 3.0).unwrap()
    };
    let (b1, b5) = (bw(1.0), bw(5.0));
    assert!((b5 - 0.322).abs() < 2e-3, "{b5}");
    assert!((b1 - 0.339).abs() < 2e-3, "{b1}");
    assert!((b1 - b5).abs() / b5 < 0.1);
}

#[test]
fn sensitivity_inequality_holds_for_small_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let beta: f64 = rng.random_range(0.02..0.3);
        let max = detuned_stability_threshold(1.0, beta).unwrap().min(20.0);
        let lambda = rng.random_range(0.3..0.9) * max;
        let omega: f64 = rng.random_range(-0.5..0.5);
        let k = build_beam_splitter(beta).unwrap();
        let nominal = build_detuned_ndpa(1.0, lambda).unwrap();
        let e: [f64; 3] = [0; 3].map(|_| rng.random_range(-1.0..1.0));
        let l2 = lambda * (1.0 + 1e-3 * e[0]);
        let perturbed = build_ndpa(
            1.0,
            l2,
            l2 * (1.0 + 1e-4 * e[1]),
            l2 * (1.0 + 1e-4 * e[2]),
            0.0,
        )
        .unwrap();
        let g0 = close_ideal_feedback(&nominal, &k)
            .unwrap()
            .signal_gain_at(omega)
            .unwrap()
            .norm();
        let g1 = close_ideal_feedback(&perturbed, &k)
            .unwrap()
            .signal_gain_at(omega)
            .unwrap()
            .norm();
        let g22 = nominal.g22().eval_iw(omega).unwrap();
        let dg22 = perturbed.g22().eval_iw(omega).unwrap() - g22;
        let bound = sensitivity_bound(&nominal, &k, omega).unwrap();
        let realized = ((g1 - g0) / g0).abs();
        assert!(realized <= bound * dg22.norm() / g22.norm() + 1e-4);
    }
}

#[test]
fn sensitivity_bound_limits() {
    let plant = build_detuned_ndpa(1.0, 5.0).unwrap();
    let b = sensitivity_bound(&plant, &build_beam_splitter(0.1).unwrap(), 0.0).unwrap();
    assert!((b - 0.438).abs() < 5e-3);
    let big = build_detuned_ndpa(1.0, 1e4).unwrap();
    assert!(sensitivity_bound(&big, &build_beam_splitter(0.5).unwrap(), 0.0).unwrap() < 1e-3);
}

#[test]
fn first_order_fluctuation_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ratio = |g22: Complex64, k21: Complex64| {
        (g22.conj() - k21).norm() / (Complex64::new(1.0, 0.0) - k21 * g22).norm()
    };
    let eps = 1e-6;
    for _ in 0..100 {
        let g22 = Complex64::from_polar(
            rng.random_range(0.5..20.0),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let k21 = Complex64::from_polar(
            rng.random_range(0.0..0.95),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let u = Complex64::from_polar(
            1.0,
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let du = u * eps;
        let f0 = ratio(g22, k21);
        let fd = (ratio(g22 + du, k21) - ratio(g22 - du, k21)) / (2.0 * f0);
        let pred = first_order_gain_fluctuation(g22, k21, du).unwrap();
        assert!(
            (fd - pred).abs() <= 1e-4 * pred.abs().max(1e-3 * eps),
            "{fd} vs {pred}"
        );
    }
}

#[test]
fn classical_sensitivity_matches_derivative() {
    for (g, k) in [(10.0, 0.1), (100.0, 0.5), (3.0, -0.2)] {
        let h = 1e-6 * g;
        let fd = (classical_feedback_gain(g + h, k).unwrap()
            - classical_feedback_gain(g - h, k).unwrap())
            / (2.0 * h);
        let s = classical_sensitivity(g, k).unwrap();
        assert!((fd - s * s).abs() < 1e-8 * (s * s).abs());
    }
}

#[test]
fn noise_limit_gap_shrinks_with_gain() {
    let gap = |l: f64| {
        let plant = build_ndpa(1.0, l, l, l, 0.05).unwrap();
        let k = build_beam_splitter(0.5 / l).unwrap();
        let cl =
            close_lossy_feedback(&plant, &k, FeedbackLoopConfig::symmetric(0.5).unwrap()).unwrap();
        let a = added_noise(&cl, 0.0, NoiseFlavor::ClosedLoop)
            .unwrap()
            .a_value;
        (a - plant_noise_floor(&plant, 0.0).unwrap()).abs()
    };
    let g: Vec<f64> = [5.0, 10.0, 20.0].iter().map(|&l| gap(l)).collect();
    assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    assert!(g[2] < 5e-3);
}

#[test]
fn ideal_noise_tends_to_half() {
    let a = |l: f64| {
        added_noise(
            &build_detuned_ndpa(1.0, l).unwrap(),
            0.0,
            NoiseFlavor::Ideal,
        )
        .unwrap()
        .a_value
    };
    assert!(a(1.0) < a(10.0) && a(10.0) < a(100.0));
    assert!((a(1000.0) - 0.5).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_decomposition_matches_row_sum(
        kappa in 0.5f64..2.0, lambda in 0.5f64..10.0, gamma in 0.0f64..0.3,
        beta in -0.3f64..0.3, a1 in 0.3f64..1.0, a2 in 0.3f64..1.0, w in -1.0f64..1.0,
    ) {
        let plant = build_ndpa(kappa, lambda, lambda, lambda, gamma).unwrap();
        let k = build_beam_splitter(beta).unwrap();
        let cl = close_lossy_feedback(&plant, &k, FeedbackLoopConfig::new(a1, a2).unwrap()).unwrap();
        let Ok(r) = added_noise(&cl, w, NoiseFlavor::ClosedLoop) else { return Ok(()) };
        let row: Vec<f64> = cl.b1_row().values().map(|g| g.eval_iw(w).unwrap().norm_sqr()).collect();
        let g11 = cl.signal_gain_at(w).unwrap().norm_sqr();
        let ratio = (row.iter().sum::<f64>() - g11) / (2.0 * g11);
        prop_assert!((r.a_value - ratio).abs() < 1e-9 * ratio.max(1.0), "{} vs {}", r.a_value, ratio);
        prop_assert!((r.a_value - (r.half_term + r.gain_term + r.excess_term)).abs() < 1e-12);
        prop_assert!(r.a_value >= 0.0);
    }

    #[test]
    fn plant_noise_is_nonnegative(kappa in 0.5f64..2.0, lambda in -10.0f64..10.0, gamma in 0.0f64..1.0, w in -2.0f64..2.0) {
        let plant = build_ndpa(kappa, lambda, lambda, lambda, gamma).unwrap();
        let r = added_noise(&plant, w, NoiseFlavor::Plant).unwrap();
        prop_assert!(r.a_value >= 0.0);
        let g = plant.g11().eval_iw(w).unwrap().norm_sqr();
        let expect = (plant.g12().eval_iw(w).unwrap().norm_sqr()
            + plant.g13().map_or(0.0, |g13| g13.eval_iw(w).unwrap().norm_sqr())) / (2.0 * g);
        prop_assert!((r.a_value - expect).abs() < 1e-9 * expect.max(1.0));
    }
}
