use proptest::prelude::*;
use std::f64::consts::PI;
use twistkam::aubry::{minimal_periodic_orbit, Configuration};
use twistkam::herman::toy_potential;
use twistkam::perturb::{make_u, smooth_family, SmoothBumpParams};
use twistkam::potential::PeriodicPotential;
use twistkam::twistmap::*;

fn u(n: u32, a: f64) -> GeneratingFunction {
    GeneratingFunction::new(make_u(n, a).unwrap())
}

#[test]
fn shear_step() {
    let p = map_step(&GeneratingFunction::integrable(), PhasePoint::new(0.3, 0.5));
    assert!((p.x - 0.8).abs() < 1e-15 && (p.y - 0.5).abs() < 1e-15);
}

#[test]
fn toy_step_at_origin() {
    let h = GeneratingFunction::new(toy_potential(1));
    let p = map_step(&h, PhasePoint::new(0.0, 0.0));
    assert!(p.x.abs() < 1e-15);
    assert!((p.y + 1.25).abs() < 1e-15);
}

#[test]
fn cosine_well_step() {
    // V'(x) = 2 pi n^{-a} sin(2 pi x) = pi sin(pi/2) at x = 1/4
    let p = map_step(&u(2, 1.0), PhasePoint::new(0.0, 0.25));
    assert!((p.x - 0.25).abs() < 1e-15);
    assert!((p.y - (0.25 + PI)).abs() < 1e-12);
}

#[test]
fn shear_rotation_numbers() {
    let h = GeneratingFunction::integrable();
    for n in [1, 7, 1000] {
        assert_eq!(orbit_rotation_number(&h, PhasePoint::new(0.0, 0.375), n).unwrap(), 0.375);
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let r = orbit_rotation_number(&h, PhasePoint::new(0.0, g), 10_000).unwrap();
    assert!((r - g).abs() < 1e-12);
}

#[test]
fn rotation_estimator_is_cauchy() {
    // k = 4 pi^2 n^{-a} = 0.49, below the breakup of the last circle, so the orbit stays on a circle
    let h = u(3, 4.0);
    let p0 = PhasePoint::new(0.0, 0.3);
    let n = 100_000;
    let a = orbit_rotation_number(&h, p0, n).unwrap();
    let b = orbit_rotation_number(&h, p0, 2 * n).unwrap();
    assert!((a - b).abs() < 2.0 / n as f64, "{a} vs {b}");
}

#[test]
fn rotation_number_rejects_zero_steps_and_runaway() {
    let h = GeneratingFunction::integrable();
    assert!(orbit_rotation_number(&h, PhasePoint::new(0.0, 1.0), 0).is_err());
    assert!(orbit_rotation_number(&h, PhasePoint::new(0.0, 1e9), 10_000).is_err());
}

#[test]
fn residual_examples() {
    let w = 0.375;
    let c = Configuration::free((0..20).map(|i| i as f64 * w).collect(), 1.0);
    assert_eq!(stationarity_residual(&GeneratingFunction::integrable(), &c), 0.0);
    let h = u(2, 1.0);
    let want = (1..19)
        .map(|i| h.potential.d1(i as f64 * w).abs())
        .fold(0.0, f64::max);
    let got = stationarity_residual(&h, &c);
    assert!((got - want).abs() < 1e-12 && got > 0.0);
    let orbit = minimal_periodic_orbit(&h, 2, 5, None).unwrap();
    assert!(stationarity_residual(&h, &orbit) <= 1e-10);
}

#[test]
fn kernel_identities() {
    let h = smooth_family(SmoothBumpParams { n: 2, a: 1.0, k: 2 }).unwrap();
    for i in 0..50 {
        let x = -1.3 + 0.071 * i as f64;
        let xp = 0.4 - 0.053 * i as f64;
        assert_eq!(h.d12(x, xp), -1.0);
        assert!((h.h(x + 1.0, xp + 1.0) - h.h(x, xp)).abs() < 1e-12);
        assert!((h.potential.value(x + 1.0) - h.potential.value(x)).abs() < 1e-12);
    }
}

#[test]
fn periodic_momentum_balance() {
    // y_{i+1} - y_i = V'(x_{i+1}) sums to zero over one period of a stationary orbit
    let h = u(2, 1.0);
    for (p, q) in [(1, 2), (1, 3), (2, 5)] {
        let c = minimal_periodic_orbit(&h, p, q, None).unwrap();
        let s: f64 = (1..=q).map(|i| h.potential.d1(c.extended(i))).sum();
        assert!(s.abs() < 1e-10, "{p}/{q}: {s}");
    }
}

fn jacobian_det(h: &GeneratingFunction, x: f64, y: f64) -> f64 {
    // fourth-order centered differences
    let e = 1e-3;
    let f = |x: f64, y: f64| map_step(h, PhasePoint::new(x, y));
    let d = |g: &dyn Fn(f64) -> PhasePoint| {
        let (a, b, c, d) = (g(-2.0 * e), g(-e), g(e), g(2.0 * e));
        (
            (a.x - 8.0 * b.x + 8.0 * c.x - d.x) / (12.0 * e),
            (a.y - 8.0 * b.y + 8.0 * c.y - d.y) / (12.0 * e),
        )
    };
    let (xx, yx) = d(&|t| f(x + t, y));
    let (xy, yy) = d(&|t| f(x, y + t));
    xx * yy - xy * yx
}

proptest! {
    #[test]
    fn area_preserving(x in -3.0..3.0f64, y in -2.0..2.0f64) {
        let h = smooth_family(SmoothBumpParams { n: 2, a: 1.0, k: 2 }).unwrap();
        prop_assert!((jacobian_det(&h, x, y) - 1.0).abs() < 1e-8);
        let toy = GeneratingFunction::new(toy_potential(3));
        prop_assert!((jacobian_det(&toy, x, y) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lift_equivariance(x in -3.0..3.0f64, y in -2.0..2.0f64) {
        let h = u(3, 0.5);
        let a = map_step(&h, PhasePoint::new(x + 1.0, y));
        let b = map_step(&h, PhasePoint::new(x, y));
        prop_assert!((a.x - b.x - 1.0).abs() < 1e-12);
        prop_assert!((a.y - b.y).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_differences(x in 0.0..1.0f64) {
        let v = PeriodicPotential::Sum(vec![
            make_u(2, 1.0).unwrap(),
            twistkam::perturb::make_bump_v(SmoothBumpParams { n: 3, a: 1.0, k: 2 }).unwrap(),
        ]);
        let h = 1e-5;
        for order in 1..=4u32 {
            let f = |t: f64| v.derivative(t, order - 1);
            let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let an = v.derivative(x, order);
            prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1.0), "order {} at {}: {} vs {}", order, x, an, fd);
        }
    }
}
