//! Real trigonometric polynomials in one and several variables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `exp(log_scale) * (a_0 + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L))`.
///
/// The separate log scale lets tiny polynomials (such as `e^{-2N}` normalized
/// bumps) be stored with well-conditioned coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub period: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub log_scale: f64,
}

impl TrigPoly {
    pub fn new(period: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len()).max(1);
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        sin[0] = 0.0;
        TrigPoly {
            period,
            cos,
            sin,
            log_scale: 0.0,
        }
    }

    pub fn constant(period: f64, c: f64) -> Self {
        Self::new(period, vec![c], vec![0.0])
    }

    /// Highest frequency carrying a nonzero coefficient.
    pub fn degree(&self) -> usize {
        (0..self.cos.len())
            .rev()
            .find(|&k| self.cos[k] != 0.0 || self.sin[k] != 0.0)
            .unwrap_or(0)
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Value of the unscaled sum (without the `exp(log_scale)` factor).
    pub fn eval_unscaled(&self, x: f64, order: u32) -> f64 {
        let w = self.wavenumber();
        let shift = order as f64 * PI / 2.0;
        let mut s = if order == 0 { self.cos[0] } else { 0.0 };
        for k in 1..self.cos.len() {
            let (a, b) = (self.cos[k], self.sin[k]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let wk = w * k as f64;
            let th = wk * x + shift;
            s += wk.powi(order as i32) * (a * th.cos() + b * th.sin());
        }
        s
    }

    /// Derivative of the given order (0 = value).
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        self.scale() * self.eval_unscaled(x, order)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Complex coefficients `c_k`, `k = -deg..=deg`, of the unscaled sum in
    /// the basis `exp(2 pi i k x / L)`.
    pub fn complex_coeffs(&self) -> Vec<Complex64> {
        let n = self.cos.len() - 1;
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        c[n] = Complex64::new(self.cos[0], 0.0);
        for k in 1..=n {
            let ck = Complex64::new(self.cos[k], -self.sin[k]) * 0.5;
            c[n + k] = ck;
            c[n - k] = ck.conj();
        }
        c
    }

    pub fn from_complex_coeffs(period: f64, c: &[Complex64], log_scale: f64) -> Self {
        let n = (c.len() - 1) / 2;
        let mut cos = vec![0.0; n + 1];
        let mut sin = vec![0.0; n + 1];
        cos[0] = c[n].re;
        for k in 1..=n {
            let s = c[n + k] + c[n - k].conj();
            cos[k] = s.re;
            sin[k] = -s.im;
        }
        TrigPoly {
            period,
            cos,
            sin,
            log_scale,
        }
    }

    /// Product of two polynomials with the same period; log scales add.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let a = self.complex_coeffs();
        let b = other.complex_coeffs();
        let (na, nb) = ((a.len() - 1) / 2, (b.len() - 1) / 2);
        let n = na + nb;
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        TrigPoly::from_complex_coeffs(self.period, &c, self.log_scale + other.log_scale)
    }

    /// `sup |p(z)|` over the strip `|Im z| <= r` (in the angle variable
    /// `2 pi x / L`), sampled on the boundary lines.
    pub fn strip_norm(&self, r: f64, samples: usize) -> f64 {
        let c = self.complex_coeffs();
        let n = (c.len() - 1) / 2;
        let mut best: f64 = 0.0;
        for sign in [-1.0, 1.0] {
            for s in 0..samples {
                let th = 2.0 * PI * s as f64 / samples as f64;
                let mut z = Complex64::new(0.0, 0.0);
                for (idx, ck) in c.iter().enumerate() {
                    let k = idx as f64 - n as f64;
                    z += ck * (-k * sign * r).exp() * Complex64::from_polar(1.0, k * th);
                }
                best = best.max(z.norm());
            }
        }
        best * self.scale()
    }

    /// Sup norm of the order-`j` derivative on a uniform grid.
    pub fn sup_derivative(&self, order: u32, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.derivative(self.period * i as f64 / samples as f64, order).abs())
            .fold(0.0, f64::max)
    }
}

/// Real trigonometric polynomial on the `d`-torus `[0, 2 pi)^d`, stored as a
/// dense block of complex coefficients indexed by `k_j in -deg_j..=deg_j`
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolyND {
    pub degree: Vec<usize>,
    pub coeffs: Vec<Complex64>,
}

impl TrigPolyND {
    pub fn zeros(degree: Vec<usize>) -> Self {
        let len = degree.iter().map(|&n| 2 * n + 1).product();
        TrigPolyND {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    fn extents(&self) -> Vec<usize> {
        self.degree.iter().map(|&n| 2 * n + 1).collect()
    }

    pub fn index(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (j, &kj) in k.iter().enumerate() {
            let n = self.degree[j] as i64;
            if kj.abs() > n {
                return None;
            }
            idx = idx * (2 * n as usize + 1) + (kj + n) as usize;
        }
        Some(idx)
    }

    pub fn frequency(&self, mut idx: usize) -> Vec<i64> {
        let ext = self.extents();
        let mut k = vec![0i64; ext.len()];
        for j in (0..ext.len()).rev() {
            k[j] = (idx % ext[j]) as i64 - self.degree[j] as i64;
            idx /= ext[j];
        }
        k
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, k: &[i64], c: Complex64) {
        let i = self.index(k).expect("frequency outside stored degree");
        self.coeffs[i] = c;
    }

    /// Largest `|k_j|` with a coefficient above `tol` in magnitude, per axis.
    pub fn effective_degree(&self, tol: f64) -> Vec<usize> {
        let mut out = vec![0usize; self.dim()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol {
                for (o, k) in out.iter_mut().zip(self.frequency(i)) {
                    *o = (*o).max(k.unsigned_abs() as usize);
                }
            }
        }
        out
    }

    /// Max deviation from the Hermitian symmetry `c_{-k} = conj(c_k)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k: Vec<i64> = self.frequency(i).iter().map(|v| -v).collect();
            worst = worst.max((self.coefficient(&k) - c.conj()).norm());
        }
        worst
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let k = self.frequency(i);
            let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
            s += c * Complex64::from_polar(1.0, phase);
        }
        s.re
    }

    pub fn mean(&self) -> f64 {
        self.coefficient(&vec![0; self.dim()]).re
    }
}
