//! Symmetry and determinism properties of the volume split and the
//! generalized Laplacian estimator.

use approx::assert_relative_eq;
use minsurf::asymptotics::lemma2_fit;
use minsurf::genlap::{gen_laplacian_at, gen_laplacian_limit, RadiusSchedule};
use minsurf::geometry::catalog;
use minsurf::geometry::{GraphSurface, JumpFunction};
use minsurf::quadrature::{volume_split, Integrand, Method, SamplerConfig};
use minsurf::Execution;
use proptest::prelude::*;

fn small(seed: u64) -> SamplerConfig {
    SamplerConfig::monte_carlo(20_000, seed)
}

fn jump(s: &GraphSurface, a: f64, b: f64) -> Integrand {
    Integrand::Jump(JumpFunction::new(s.clone(), a, b))
}

fn methods() -> impl Strategy<Value = Method> {
    prop_oneof![Just(Method::MonteCarlo), Just(Method::LowDiscrepancy), Just(Method::TensorGrid)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flipping_orientation_negates_the_split(
        k1 in -2.0..2.0f64, k2 in -2.0..2.0f64, seed in any::<u64>(), method in methods(),
    ) {
        let s = catalog::paraboloid(&[k1, k2], 1.0).unwrap().surface;
        let cfg = small(seed).with_method(method);
        let x = [0.0, 0.0, 0.0];
        let a = volume_split(&s, &x, 0.3, &cfg).unwrap();
        let b = volume_split(&s.flipped(), &x, 0.3, &cfg).unwrap();
        prop_assert_eq!(a.diff, -b.diff);
        prop_assert_eq!(a.vol_plus, b.vol_minus);
    }

    #[test]
    fn dyadic_dilation_scales_the_split_exactly(
        k1 in -2.0..2.0f64, k2 in -2.0..2.0f64, seed in any::<u64>(), e in -2i32..=2,
    ) {
        let s = catalog::paraboloid(&[k1, k2], 1.0).unwrap().surface;
        let f = 2f64.powi(e);
        let d = s.dilated(f).unwrap();
        let x = [0.0, 0.0, 0.0];
        let a = volume_split(&s, &x, 0.3, &small(seed)).unwrap();
        let b = volume_split(&d, &x, 0.3 * f, &small(seed)).unwrap();
        prop_assert_eq!(b.diff, a.diff * f.powi(3));
    }

    #[test]
    fn planes_through_the_centre_balance_exactly(
        sx in -3.0..3.0f64, sy in -3.0..3.0f64, seed in any::<u64>(), r in 0.05..0.5f64,
    ) {
        let s = catalog::plane(&[sx, sy], 0.0, 1.0).unwrap().surface;
        let split = volume_split(&s, &[0.0, 0.0, 0.0], r, &small(seed)).unwrap();
        prop_assert_eq!(split.diff, 0.0);
    }

    #[test]
    fn swapping_alphas_negates_the_estimator(
        a in -3.0..3.0f64, b in -3.0..3.0f64, seed in any::<u64>(),
    ) {
        let s = catalog::sphere(3, 1.0, 0.7).unwrap().surface;
        let x = s.point_on(&[0.1, -0.1]).unwrap();
        let u = gen_laplacian_at(&jump(&s, a, b), &x, 0.2, &small(seed)).unwrap();
        let v = gen_laplacian_at(&jump(&s, b, a), &x, 0.2, &small(seed)).unwrap();
        prop_assert_eq!(u.value, -v.value);
        prop_assert_eq!(u.stderr, v.stderr);
    }

    #[test]
    fn estimator_is_linear_in_the_jump(
        a in -3.0..3.0f64, b in -3.0..3.0f64, c in -5.0..5.0f64, seed in any::<u64>(),
    ) {
        let s = catalog::sphere(3, 1.0, 0.7).unwrap().surface;
        let x = s.point_on(&[0.0, 0.2]).unwrap();
        let unit = gen_laplacian_at(&jump(&s, 1.0, -1.0), &x, 0.2, &small(seed)).unwrap();
        let scaled = gen_laplacian_at(&jump(&s, a, b), &x, 0.2, &small(seed)).unwrap();
        let shifted = gen_laplacian_at(&jump(&s, a + c, b + c), &x, 0.2, &small(seed)).unwrap();
        let tol = 1e-12 * (1.0 + unit.value.abs() * (a - b).abs());
        prop_assert!((scaled.value - 0.5 * (a - b) * unit.value).abs() <= tol);
        prop_assert!((shifted.value - scaled.value).abs() <= tol);
    }

    #[test]
    fn sequential_and_parallel_are_bit_identical(seed in any::<u64>(), method in methods()) {
        let s = catalog::scherk(1.2).unwrap().surface;
        let x = s.point_on(&[0.3, -0.2]).unwrap();
        let sched = RadiusSchedule::new(0.2, 0.6, 4).unwrap();
        let cfg = SamplerConfig::monte_carlo(30_000, seed).with_method(method);
        let f = jump(&s, 1.0, -1.0);
        let par = gen_laplacian_limit(&f, &x, &sched, &cfg.with_execution(Execution::Parallel)).unwrap();
        let seq = gen_laplacian_limit(&f, &x, &sched, &cfg.with_execution(Execution::Sequential)).unwrap();
        prop_assert_eq!(par.values, seq.values);
        prop_assert_eq!(par.stderrs, seq.stderrs);
    }

    #[test]
    fn curvature_is_recovered_on_random_paraboloids(k1 in -2.0..2.0f64, k2 in -2.0..2.0f64, seed in any::<u64>()) {
        let s = catalog::paraboloid(&[k1, k2], 1.0).unwrap().surface;
        let sched = RadiusSchedule::new(0.2, 0.6, 5).unwrap();
        let fit = lemma2_fit(&s, &[0.0, 0.0], &sched, &SamplerConfig::monte_carlo(200_000, seed), None).unwrap();
        let h = 0.5 * (k1 + k2);
        prop_assert!((fit.h_hat - h).abs() <= 4.0 * fit.h_stderr + 0.05 * h.abs(), "{} vs {}", fit.h_hat, h);
    }
}

#[test]
fn same_seed_same_result() {
    let s = catalog::sphere(3, 1.0, 0.7).unwrap().surface;
    let x = s.point_on(&[0.0, 0.0]).unwrap();
    let a = volume_split(&s, &x, 0.3, &small(9)).unwrap();
    let b = volume_split(&s, &x, 0.3, &small(9)).unwrap();
    let c = volume_split(&s, &x, 0.3, &small(10)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.diff, c.diff);
}

#[test]
fn generic_dilation_scales_approximately() {
    let s = catalog::paraboloid(&[1.0, 0.5], 1.0).unwrap().surface;
    let x = [0.0, 0.0, 0.0];
    let cfg = SamplerConfig::monte_carlo(400_000, 3);
    let a = volume_split(&s, &x, 0.3, &cfg).unwrap();
    let f = 1.7;
    let b = volume_split(&s.dilated(f).unwrap(), &x, 0.3 * f, &cfg).unwrap();
    assert_relative_eq!(b.diff / f.powi(3), a.diff, max_relative = 1e-3);
}

#[test]
fn confidence_intervals_cover_the_exact_mean() {
    // Mean of |y - x|^2 over the ball is n r^2 / (n + 2), so the estimator is 2n.
    let n = 3;
    let x = vec![0.2, -0.1, 0.3];
    let xc = x.clone();
    let f = Integrand::smooth(n, move |y: &[f64]| y.iter().zip(&xc).map(|(a, b)| (a - b).powi(2)).sum());
    let covered = (0..100)
        .filter(|&seed| {
            let v = gen_laplacian_at(&f, &x, 0.25, &SamplerConfig::monte_carlo(4_000, seed)).unwrap();
            (v.value - 6.0).abs() <= 1.96 * v.stderr
        })
        .count();
    assert!((85..=100).contains(&covered), "coverage {covered}/100");
}
