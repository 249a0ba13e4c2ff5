//! Uniform grid samples of functions on the torus `[0, 2 pi)^d` with cached spectra.

use crate::error::{Error, Result};
use crate::trigpoly::TrigPolyND;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug)]
pub struct TorusField {
    shape: Vec<usize>,
    samples: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for TorusField {
    fn clone(&self) -> Self {
        TorusField {
            shape: self.shape.clone(),
            samples: self.samples.clone(),
            spectrum: OnceLock::new(),
        }
    }
}

/// In-place multi-dimensional FFT over a row-major array (last axis fastest).
/// The inverse is unnormalized.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    let mut stride = 1usize;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

/// Signed frequency of FFT bin `k` on an `n`-point axis.
pub fn signed_frequency(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl TorusField {
    pub fn new(shape: Vec<usize>, samples: Vec<f64>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if shape.is_empty() || total != samples.len() {
            return Err(Error::InvalidArgument("sample count does not match the grid shape".into()));
        }
        Ok(TorusField {
            shape,
            samples,
            spectrum: OnceLock::new(),
        })
    }

    /// Samples `f` at the grid points `2 pi j / n` (in parallel).
    pub fn from_fn(shape: Vec<usize>, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let total: usize = shape.iter().product();
        let samples = (0..total)
            .into_par_iter()
            .map(|i| f(&grid_point(&shape, i)))
            .collect();
        TorusField {
            shape,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        grid_point(&self.shape, idx)
    }

    /// Normalized discrete Fourier coefficients `(1/N) sum f e^{-i k x}`, FFT order.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft_nd(&mut data, &self.shape, false);
            let n = self.samples.len() as f64;
            data.iter_mut().for_each(|c| *c /= n);
            data
        })
    }

    /// Signed multi-frequency of spectrum entry `idx`.
    pub fn frequency(&self, mut idx: usize) -> Vec<i64> {
        let mut k = vec![0i64; self.dim()];
        for j in (0..self.dim()).rev() {
            let n = self.shape[j];
            k[j] = signed_frequency(idx % n, n);
            idx /= n;
        }
        k
    }

    /// Field whose normalized spectrum is `spec` (real part of the inverse transform).
    pub fn from_spectrum(shape: Vec<usize>, spec: &[Complex64]) -> Self {
        let mut data = spec.to_vec();
        fft_nd(&mut data, &shape, true);
        let samples = data.iter().map(|c| c.re).collect();
        TorusField {
            shape,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.spectrum()[0].re
    }

    /// Relative round-trip error of forward then inverse transform.
    pub fn round_trip_error(&self) -> f64 {
        let back = TorusField::from_spectrum(self.shape.clone(), self.spectrum());
        let scale = self.sup_norm().max(1e-300);
        back.samples
            .iter()
            .zip(&self.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Minimum and its grid index.
    pub fn argmin(&self) -> (usize, f64) {
        self.samples
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn argmax(&self) -> (usize, f64) {
        self.samples
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TorusField {
        TorusField {
            shape: self.shape.clone(),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_with(&self, other: &TorusField, f: impl Fn(f64, f64) -> f64) -> TorusField {
        TorusField {
            shape: self.shape.clone(),
            samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    /// Applies a per-frequency multiplier in Fourier space.
    pub fn spectral_map(&self, f: impl Fn(&[i64]) -> Complex64) -> TorusField {
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, c)| c * f(&self.frequency(i)))
            .collect();
        TorusField::from_spectrum(self.shape.clone(), &spec)
    }

    /// Spectral derivative of the given order along `axis`. The Nyquist bin of
    /// even grids is dropped.
    pub fn derivative(&self, axis: usize, order: u32) -> TorusField {
        let n = self.shape[axis];
        self.spectral_map(|k| {
            let kj = k[axis];
            if n % 2 == 0 && kj == -(n as i64) / 2 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, kj as f64).powu(order)
        })
    }

    /// Coefficients with `|k_j| <= degree_j` as a trigonometric polynomial.
    pub fn to_trigpoly(&self, degree: &[usize]) -> TrigPolyND {
        let mut p = TrigPolyND::zeros(degree.to_vec());
        for (i, c) in self.spectrum().iter().enumerate() {
            let k = self.frequency(i);
            if let Some(idx) = p.index(&k) {
                p.coeffs[idx] = *c;
            }
        }
        p
    }
}

pub fn grid_point(shape: &[usize], mut idx: usize) -> Vec<f64> {
    let mut x = vec![0.0; shape.len()];
    for j in (0..shape.len()).rev() {
        let n = shape[j];
        x[j] = 2.0 * PI * (idx % n) as f64 / n as f64;
        idx /= n;
    }
    x
}

impl TrigPolyND {
    /// Samples the polynomial on a grid by inverse FFT. Every per-axis degree
    /// must be below half the grid size.
    pub fn to_field(&self, shape: &[usize]) -> Result<TorusField> {
        for (j, (&deg, &n)) in self.degree.iter().zip(shape).enumerate() {
            if 2 * deg >= n {
                return Err(Error::GridTooCoarse {
                    axis: j,
                    points: n,
                    order: deg,
                    required: 2 * deg + 1,
                });
            }
        }
        let total: usize = shape.iter().product();
        let mut spec = vec![Complex64::new(0.0, 0.0); total];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.frequency(i);
            let mut idx = 0usize;
            for (j, &kj) in k.iter().enumerate() {
                let n = shape[j] as i64;
                idx = idx * shape[j] + kj.rem_euclid(n) as usize;
            }
            spec[idx] += c;
        }
        Ok(TorusField::from_spectrum(shape.to_vec(), &spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_cosine() {
        let f = TorusField::from_fn(vec![16, 8], |x| (2.0 * x[0]).cos() + 0.5);
        let s = f.spectrum();
        assert!((s[0].re - 0.5).abs() < 1e-15);
        let k2 = 2 * 8;
        assert!((s[k2].re - 0.5).abs() < 1e-14);
        assert!(f.round_trip_error() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let f = TorusField::from_fn(vec![32], |x| (3.0 * x[0]).sin());
        let d = f.derivative(0, 1);
        for (i, v) in d.samples().iter().enumerate() {
            let x = 2.0 * PI * i as f64 / 32.0;
            assert!((v - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn trigpoly_field_round_trip() {
        let mut p = TrigPolyND::zeros(vec![2, 1]);
        p.set(&[1, -1], Complex64::new(0.3, 0.1));
        p.set(&[-1, 1], Complex64::new(0.3, -0.1));
        let f = p.to_field(&[8, 8]).unwrap();
        for i in 0..f.len() {
            assert!((f.samples()[i] - p.eval(&f.point(i))).abs() < 1e-14);
        }
    }
}
