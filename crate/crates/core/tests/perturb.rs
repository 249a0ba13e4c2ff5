use proptest::prelude::*;
use std::f64::consts::PI;
use twistkam::herman::toy_phi;
use twistkam::perturb::*;
use twistkam::potential::PeriodicPotential;
use twistkam::rotation::rescale_problem;
use twistkam::trigpoly::TrigPoly;

#[test]
fn cosine_well_examples() {
    for (n, a) in [(1u32, 1.0), (3, 0.5), (4, 2.0)] {
        let u = make_u(n, a).unwrap();
        let na = (n as f64).powf(-a);
        assert_eq!(u.value(0.0), 0.0);
        assert!((u.value(0.5) - 2.0 * na).abs() < 1e-15);
        assert!((u.sup_derivative(0, 4096) - 2.0 * na).abs() < 1e-14);
        assert!((u.sup_derivative(1, 4096) - 2.0 * PI * na).abs() < 1e-12);
    }
    assert!((make_u(4, 2.0).unwrap().value(0.25) - 1.0 / 16.0).abs() < 1e-16);
    assert!(make_u(0, 1.0).is_err() && make_u(2, 0.0).is_err());
}

#[test]
fn bump_examples() {
    for (n, a, k) in [(2u32, 1.0, 2u32), (5, 1.0, 2), (8, 0.5, 3)] {
        let p = SmoothBumpParams { n, a, k };
        let v = make_bump_v(p).unwrap();
        let w = p.half_width();
        assert!((v.value(0.5) - p.peak()).abs() < 1e-16 * p.peak().max(1.0));
        assert_eq!(v.value(0.5 - w), 0.0);
        assert_eq!(v.value(0.5 + w), 0.0);
        assert_eq!(v.value(0.0), 0.0);
        for i in 0..1000 {
            let x = -2.0 + 0.004_123 * i as f64;
            assert!(v.value(x) >= 0.0);
            assert!((v.value(x + 1.0) - v.value(x)).abs() <= 1e-15);
        }
    }
    assert!(matches!(
        make_bump_v(SmoothBumpParams { n: 1, a: 0.5, k: 2 }),
        Err(twistkam::Error::SupportTooWide { .. })
    ));
}

fn c2_by_differences(v: &PeriodicPotential) -> f64 {
    let m = 1usize << 16;
    let h = 1.0 / m as f64;
    let f: Vec<f64> = (0..m).map(|i| v.value(i as f64 * h)).collect();
    let (mut d0, mut d1, mut d2) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..m {
        let (a, b, c) = (f[(i + m - 1) % m], f[i], f[(i + 1) % m]);
        d0 = d0.max(b.abs());
        d1 = d1.max(((c - a) / (2.0 * h)).abs());
        d2 = d2.max(((c - 2.0 * b + a) / (h * h)).abs());
    }
    d0.max(d1).max(d2)
}

#[test]
fn bump_c2_norm_by_differences() {
    // peak 2^{-6}, as in s = 6
    let v = make_bump_v(SmoothBumpParams { n: 2, a: 1.0, k: 4 }).unwrap();
    let c2 = c2_by_differences(&v);
    let scale = 2f64.powi(-2);
    assert!(c2 >= 0.1 * scale && c2 <= 10.0 * scale, "{c2}");

    // with s = (k + 2) a and k = 2 the ratio is the profile constant max |f''|, independent of n
    let ratios: Vec<f64> = [2u32, 4, 8]
        .iter()
        .map(|&n| {
            let v = make_bump_v(SmoothBumpParams { n, a: 1.0, k: 2 }).unwrap();
            c2_by_differences(&v) / (n as f64).powi(-2)
        })
        .collect();
    println!("C^2 / n^-2a for k = 2: {ratios:?}");
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() < 1e-3);
    }
}

#[test]
fn analytic_bump_examples() {
    let p = AnalyticPerturbParams::new(2, 1.0, 4, 0.3);
    let av = make_analytic_v(p).unwrap();
    let PeriodicPotential::Trig(poly) = &av.potential else {
        panic!("analytic perturbation must be a trig polynomial")
    };
    assert!(poly.degree() <= 2 * av.degree_n + 1);
    let scale = poly.scale();
    for i in 0..10_000 {
        let x = i as f64 / 10_000.0;
        assert!(poly.eval_unscaled(x, 0) >= -1e-12, "x {x}");
        assert!(av.potential.value(x) >= -1e-12 * scale);
    }
    // max on the bump region >= e^{-2N} n^{-a}
    assert!(av.log_on_bump_max >= -2.0 * av.degree_n as f64 + (0.5f64).ln() - 1e-12);
    let ratio = (av.log_off_bump_max - av.log_on_bump_max).exp();
    let c = ratio / (p.sigma * p.sigma);
    println!("off/on ratio {ratio}, fitted C {c}, N {}", av.degree_n);
    assert!(c <= 10.0, "{c}");
}

#[test]
fn analytic_peak_from_log_coefficients() {
    for n in [2u32, 3] {
        let p = AnalyticPerturbParams::new(n, 1.0, 4, 0.3 * (n as f64).powf(-0.5));
        let av = make_analytic_v(p).unwrap();
        assert!(av.degree_n <= 20);
        let PeriodicPotential::Trig(poly) = &av.potential else { unreachable!() };
        // direct evaluation of the expanded polynomial at the scale 1
        let direct: f64 = poly.cos[0]
            + (1..poly.cos.len())
                .map(|k| poly.cos[k] * (PI * k as f64).cos() + poly.sin[k] * (PI * k as f64).sin())
                .sum::<f64>();
        let direct = direct * (-2.0 * av.degree_n as f64).exp();
        let logged = av.potential.value(0.5);
        assert!(((logged - direct) / direct).abs() < 1e-10, "{logged} vs {direct}");
        assert!((logged.ln() - av.log_on_bump_max).abs() < 1e-10);
    }
}

#[test]
fn analytic_rejects_large_sigma() {
    assert!(make_analytic_v(AnalyticPerturbParams::new(4, 1.0, 4, 0.3)).is_err());
    let mut p = AnalyticPerturbParams::new(2, 1.0, 4, 0.01);
    p.degree_cap = 9;
    assert!(matches!(make_analytic_v(p), Err(twistkam::Error::DegreeOverflow { .. })));
}

#[test]
fn rescaled_norms_scale() {
    // Q_q = q^{-2} (u_q + v_q)(q x): ||Q_q||_{C^r} ~ q^{r - a - 2}
    let a = 1.0;
    let qs = [8u32, 16, 32, 64];
    for r in [0.0, 1.0, 1.5, 2.0] {
        let norms: Vec<f64> = qs
            .iter()
            .map(|&q| {
                let p = PeriodicPotential::Sum(vec![
                    make_u(q, a).unwrap(),
                    make_bump_v(SmoothBumpParams { n: q, a, k: 2 }).unwrap(),
                ]);
                let rep = norm_report(&rescale_problem(&p, q), &[r], None).unwrap();
                rep.rows[0].seminorm
            })
            .collect();
        let x: Vec<f64> = qs.iter().map(|&q| q as f64).collect();
        let slope = loglog_slope(&x, &norms);
        assert!((slope - (r - a - 2.0)).abs() < 0.1, "r {r}: slope {slope}");
    }
}

#[test]
fn toy_norms() {
    let mut c0 = Vec::new();
    for n in [1u32, 2, 4, 8, 16, 32] {
        let phi = toy_phi(n);
        c0.push(phi.sup_derivative(0, 8192));
        let d = phi.sup_derivative(1, 8192);
        assert!((1.4..=1.6).contains(&d), "n {n}: {d}");
    }
    assert!(c0.windows(2).all(|w| w[1] < w[0]));
    assert!(c0[c0.len() - 1] < 0.05);
}

#[test]
fn strip_norm_of_cosine() {
    for (deg, r) in [(3usize, 0.5), (8, 0.2), (1, 1.0)] {
        let mut cos = vec![0.0; deg + 1];
        cos[deg] = 1.0;
        let p = PeriodicPotential::Trig(TrigPoly::new(2.0 * PI, cos, vec![]));
        let rep = norm_report(&p, &[0.0], Some(r)).unwrap();
        let (strip, bound) = rep.strip.unwrap();
        let want = (r * deg as f64).cosh();
        assert!((strip - want).abs() < 1e-9 * want, "{strip} vs {want}");
        assert!(strip <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn interpolated_norm_bound() {
    // the fractional norm 2 ||f||^{1-t} ||Df||^t dominates the truth for f = sin
    let p = PeriodicPotential::Trig(TrigPoly::new(2.0 * PI, vec![0.0, 0.0], vec![0.0, 1.0]));
    let rep = norm_report(&p, &[0.5], None).unwrap();
    assert!(rep.rows[0].interpolated);
    assert!((rep.rows[0].seminorm - 2.0).abs() < 1e-9);
}

#[test]
fn analytic_rescaled_family_decays() {
    // ||q^{-2} (u + v)(q x)||_{C^{3 - delta}} along q in {8, 16, 32}, a = 1, delta = 1/2
    let a = 1.0;
    let r = 2.5;
    let qs = [8u32, 16, 32];
    let norms: Vec<f64> = qs
        .iter()
        .map(|&q| {
            let av = make_analytic_v(AnalyticPerturbParams::new(q, a, 4, 0.25 * (q as f64).powf(-a / 2.0))).unwrap();
            let p = PeriodicPotential::Sum(vec![make_u(q, a).unwrap(), av.potential]);
            norm_report(&rescale_problem(&p, q), &[r], None).unwrap().rows[0].norm
        })
        .collect();
    let x: Vec<f64> = qs.iter().map(|&q| q as f64).collect();
    let slope = loglog_slope(&x, &norms);
    assert!(slope <= -(a + 2.0 - r) + 0.1, "slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composite_derivatives_consistent(x in 0.0..1.0f64) {
        let av = make_analytic_v(AnalyticPerturbParams::new(2, 1.0, 4, 0.3)).unwrap();
        let v = PeriodicPotential::Sum(vec![
            make_u(2, 1.0).unwrap(),
            make_bump_v(SmoothBumpParams { n: 2, a: 1.0, k: 2 }).unwrap(),
            av.potential,
        ]);
        let h = 1e-5;
        for order in 1..=3u32 {
            let f = |t: f64| v.derivative(t, order - 1);
            let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let an = v.derivative(x, order);
            prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1.0));
        }
    }

    #[test]
    fn bump_peak_is_global_max(n in 2u32..40, k in 1u32..5) {
        let p = SmoothBumpParams { n, a: 1.0, k };
        let v = make_bump_v(p).unwrap();
        for i in 0..200 {
            let x = i as f64 / 200.0;
            prop_assert!(v.value(x) <= p.peak() + 1e-18);
        }
    }
}
