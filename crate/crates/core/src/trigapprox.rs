//! Fejér and de la Vallée Poussin means on the torus, with Jackson-type error reports.
//!
//! Both operators act diagonally in Fourier space: the Fejér mean `F_m` along
//! axis `j` multiplies the coefficient of frequency `k` by `max(0, 1 - |k_j|/m)`,
//! and `P_m = 2 F_{2m} - F_m` multiplies it by `1` for `|k_j| <= m`, `2 - |k_j|/m`
//! for `m < |k_j| < 2m`, and `0` beyond.

use crate::error::{Error, Result};
use crate::torus::TorusField;
use crate::trigpoly::TrigPolyND;
use serde::Serialize;

/// Points required along an axis per unit of operator order `m`.
pub const OVERSAMPLING: usize = 8;

pub fn fejer_weight(k: i64, m: usize) -> f64 {
    (1.0 - k.unsigned_abs() as f64 / m as f64).max(0.0)
}

pub fn vallee_poussin_weight(k: i64, m: usize) -> f64 {
    2.0 * fejer_weight(k, 2 * m) - fejer_weight(k, m)
}

fn check_grid(f: &TorusField, axis: usize, m: usize) -> Result<()> {
    let n = f.shape()[axis];
    if m == 0 || n < OVERSAMPLING * m {
        return Err(Error::GridTooCoarse {
            axis,
            points: n,
            order: m,
            required: OVERSAMPLING * m.max(1),
        });
    }
    Ok(())
}

/// Applies per-axis weights; `degree[j]` bounds the output along axis `j`.
fn weighted(f: &TorusField, degree: Vec<usize>, weight: impl Fn(&[i64]) -> f64) -> TrigPolyND {
    let mut p = TrigPolyND::zeros(degree);
    for (i, c) in f.spectrum().iter().enumerate() {
        let k = f.frequency(i);
        if let Some(idx) = p.index(&k) {
            p.coeffs[idx] = c * weight(&k);
        }
    }
    p
}

fn full_degree(f: &TorusField) -> Vec<usize> {
    f.shape().iter().map(|&n| (n - 1) / 2).collect()
}

/// Fejér mean of order `m` along `axis`.
pub fn fejer(f: &TorusField, m: usize, axis: usize) -> Result<TrigPolyND> {
    check_grid(f, axis, m)?;
    let mut deg = full_degree(f);
    deg[axis] = m - 1;
    Ok(weighted(f, deg, |k| fejer_weight(k[axis], m)))
}

/// `P_m = 2 F_{2m} - F_m` along a single axis.
pub fn vallee_poussin_axis(f: &TorusField, m: usize, axis: usize) -> Result<TrigPolyND> {
    check_grid(f, axis, m)?;
    let mut deg = full_degree(f);
    deg[axis] = 2 * m - 1;
    Ok(weighted(f, deg, |k| vallee_poussin_weight(k[axis], m)))
}

/// Composition of `P_{m_j}` over every axis.
pub fn vallee_poussin_nd(f: &TorusField, m: &[usize]) -> Result<TrigPolyND> {
    if m.len() != f.dim() {
        return Err(Error::InvalidArgument("one order per axis is required".into()));
    }
    for (j, &mj) in m.iter().enumerate() {
        check_grid(f, j, mj)?;
    }
    let deg = m.iter().map(|&mj| 2 * mj - 1).collect();
    Ok(weighted(f, deg, |k| {
        k.iter().zip(m).map(|(&kj, &mj)| vallee_poussin_weight(kj, mj)).product()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacksonReport {
    pub m: Vec<usize>,
    pub r: Vec<u32>,
    /// `sup |f - P_m f|` over the sample grid.
    pub achieved_error: f64,
    /// `m_j^{-r_j} ||d^{r_j} f / d x_j^{r_j}||` per axis.
    pub bound_terms: Vec<f64>,
    /// `achieved_error / sum(bound_terms)`: the smallest `C_d` making the bound hold.
    pub fitted_constant: f64,
}

/// Error of the de la Vallée Poussin approximation against the Jackson bound,
/// given the derivative sup norms `||d^{r_j} f||` per axis.
pub fn jackson_report(f: &TorusField, m: &[usize], r: &[u32], derivative_norms: &[f64]) -> Result<JacksonReport> {
    if r.len() != f.dim() || derivative_norms.len() != f.dim() {
        return Err(Error::InvalidArgument("one order and one derivative norm per axis are required".into()));
    }
    let p = vallee_poussin_nd(f, m)?;
    let approx = p.to_field(f.shape())?;
    let achieved_error = approx
        .samples()
        .iter()
        .zip(f.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let bound_terms: Vec<f64> = m
        .iter()
        .zip(r)
        .zip(derivative_norms)
        .map(|((&mj, &rj), &dn)| (mj as f64).powi(-(rj as i32)) * dn)
        .collect();
    let total: f64 = bound_terms.iter().sum();
    Ok(JacksonReport {
        m: m.to_vec(),
        r: r.to_vec(),
        achieved_error,
        bound_terms,
        fitted_constant: if total > 0.0 { achieved_error / total } else { f64::INFINITY },
    })
}

/// Sup norm of the spectral derivative of order `order` along `axis`.
pub fn spectral_derivative_norm(f: &TorusField, axis: usize, order: u32) -> f64 {
    f.derivative(axis, order).sup_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_low_frequencies() {
        for m in 1..20 {
            for k in -(m as i64)..=(m as i64) {
                assert!((vallee_poussin_weight(k, m) - 1.0).abs() < 1e-15);
            }
            assert_eq!(vallee_poussin_weight(2 * m as i64, m), 0.0);
        }
    }

    #[test]
    fn fejer_of_constant() {
        let f = TorusField::from_fn(vec![64], |_| 2.5);
        let p = fejer(&f, 4, 0).unwrap();
        assert!((p.mean() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_rejected() {
        let f = TorusField::from_fn(vec![16], |x| x[0].cos());
        assert!(matches!(fejer(&f, 4, 0), Err(Error::GridTooCoarse { .. })));
    }
}
