//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
/// Gauss weights at the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]` until the summed error estimate is below
/// `abs_tol`, bisecting the worst interval first.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    let (value, error) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let (mut total, mut err) = (value, error);
    let mut evaluations = 15;
    while err > abs_tol {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                estimate: total,
                tolerance: abs_tol,
            });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            return Err(Error::QuadratureFailure {
                estimate: total,
                tolerance: abs_tol,
            });
        }
        let (v1, e1) = kronrod(&f, p.a, m);
        let (v2, e2) = kronrod(&f, m, p.b);
        evaluations += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
        if err <= abs_tol {
            // resum to shed accumulated cancellation in the running totals
            total = heap.iter().map(|q| q.value).sum();
            err = heap.iter().map(|q| q.error).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure {
            estimate: total,
            tolerance: abs_tol,
        });
    }
    Ok(Quadrature {
        value: total,
        error: err,
        evaluations,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x.powi(10), 0.0, 1.0, 1e-14, 100).unwrap();
        assert!((q.value - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn peaked_integrand() {
        // int_{-1}^{1} dx / (1e-6 + x^2) = 2e3 atan(1e3)
        let q = integrate(|x| 1.0 / (1e-6 + x * x), -1.0, 1.0, 1e-9, 10_000).unwrap();
        let want = 2e3 * 1e3f64.atan();
        assert!((q.value - want).abs() < 1e-8, "{} vs {want}", q.value);
    }

    #[test]
    fn budget_exhausted() {
        let r = integrate(|x| x.sin() * 1e3, 0.0, 1e4, 1e-30, 8);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
