//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

fn bond(v: &dyn Fn(f64) -> f64, x: f64, y: f64) -> f64 {
    0.5 * (x - y) * (x - y) + v(y)
}

/// DP over per-site state grids: minimal `sum h(x_{i-1}, x_i)` with `x_0 = a`,
/// `x_m = b` and interior sites restricted to `grids[i]`.
fn dp_pass(v: &dyn Fn(f64) -> f64, a: f64, b: f64, grids: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let m = grids.len();
    let vals: Vec<Vec<f64>> = grids.iter().map(|g| g.iter().map(|&x| v(x)).collect()).collect();
    let mut cost: Vec<f64> = grids[0].iter().zip(&vals[0]).map(|(&x, &vx)| 0.5 * (a - x) * (a - x) + vx).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(m);
    for i in 1..m {
        let mut next = vec![f64::INFINITY; grids[i].len()];
        let mut arg = vec![0usize; grids[i].len()];
        for (j, &y) in grids[i].iter().enumerate() {
            for (k, &x) in grids[i - 1].iter().enumerate() {
                let c = cost[k] + 0.5 * (x - y) * (x - y);
                if c < next[j] {
                    next[j] = c;
                    arg[j] = k;
                }
            }
            next[j] += vals[i][j];
        }
        back.push(arg);
        cost = next;
    }
    let (mut best, mut idx) = (f64::INFINITY, 0);
    for (k, &x) in grids[m - 1].iter().enumerate() {
        let c = cost[k] + bond(v, x, b);
        if c < best {
            best = c;
            idx = k;
        }
    }
    let mut path = vec![0.0; m];
    for i in (0..m).rev() {
        path[i] = grids[i][idx];
        if i > 0 {
            idx = back[i - 1][idx];
        }
    }
    (best, path)
}

/// Minimal action of a chain with `bonds` bonds from `a` to `b`, interior
/// sites searched on `points` states in `[lo, hi]`, then refined on shrinking
/// windows around the previous optimum.
pub fn dp_chain(v: &dyn Fn(f64) -> f64, a: f64, b: f64, bonds: usize, lo: f64, hi: f64, points: usize) -> (f64, Vec<f64>) {
    if bonds == 1 {
        return (bond(v, a, b), vec![]);
    }
    let m = bonds - 1;
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + i as f64 * step).collect();
    let mut grids = vec![grid; m];
    let (mut best, mut path) = dp_pass(v, a, b, &grids);
    let mut width = 4.0 * step;
    let fine = 161;
    for _ in 0..6 {
        grids = path
            .iter()
            .map(|&c| (0..fine).map(|i| c - width + 2.0 * width * i as f64 / (fine - 1) as f64).collect())
            .collect();
        let (b2, p2) = dp_pass(v, a, b, &grids);
        best = best.min(b2);
        path = p2;
        width = 8.0 * width / (fine - 1) as f64;
    }
    (best, path)
}

/// Minimal action over `(p, q)`-periodic configurations of period `l`:
/// coarse scan over the anchor `x_0`, then golden-section refinement.
pub fn dp_periodic_action(v: &dyn Fn(f64) -> f64, l: f64, p: i64, q: usize, points: usize) -> f64 {
    let pinned = |x0: f64, pts: usize| {
        let b = x0 + p as f64 * l;
        let (lo, hi) = (x0.min(b) - l, x0.max(b) + l);
        dp_chain(v, x0, b, q, lo, hi, pts).0
    };
    let scan = 64;
    let h = l / scan as f64;
    let vals: Vec<f64> = (0..scan).map(|i| pinned(i as f64 * h, points / 4)).collect();
    let best = (0..scan).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let (mut a, mut b) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if pinned(x1, points / 4) < pinned(x2, points / 4) {
            b = x2;
        } else {
            a = x1;
        }
    }
    pinned(0.5 * (a + b), points)
}

/// Pinned periodic barrier by DP: pinned minimum through `xi` minus the minimal action.
pub fn dp_periodic_barrier(v: &dyn Fn(f64) -> f64, l: f64, p: i64, q: usize, xi: f64, amin: f64, points: usize) -> f64 {
    let b = xi + p as f64 * l;
    let (lo, hi) = (xi.min(b) - l, xi.max(b) + l);
    dp_chain(v, xi, b, q, lo, hi, points).0 - amin
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..60 {
        let (x, y) = (0.5 * (a + b), (a * b).sqrt());
        a = x;
        b = y;
        if (a - b).abs() < 1e-16 * a {
            break;
        }
    }
    0.5 * (a + b)
}

/// `int_0^pi dq / sqrt(2(e + sigma (1 - cos q)))` in closed form: `pi / AGM(sqrt(2e), sqrt(2e + 4 sigma))`.
pub fn time_of_flight_agm(sigma: f64, e: f64) -> f64 {
    PI / agm((2.0 * e).sqrt(), (2.0 * e + 4.0 * sigma).sqrt())
}

/// Quintic cardinal B-spline `M(t)` supported on `[0, 6]`.
pub fn quintic_bspline(t: f64) -> f64 {
    const BINOM: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
    let mut s = 0.0;
    for (i, c) in BINOM.iter().enumerate() {
        let u = t - i as f64;
        if u > 0.0 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * c * u.powi(5);
        }
    }
    s / 120.0
}

/// Periodization on `[0, 2 pi)` of `M(x/h)` with knot spacing `h = pi/4` (8 knots per period).
pub fn periodic_bspline(x: f64) -> f64 {
    let h = PI / 4.0;
    let t = x.rem_euclid(2.0 * PI) / h;
    (-1..=1).map(|k| quintic_bspline(t + 8.0 * k as f64)).sum()
}

/// Composite Gauss-Legendre (5 points) on `n` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let c = a + (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            s += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * s
}
