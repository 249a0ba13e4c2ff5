//! Rotation numbers and vectors: continued-fraction convergents, Dirichlet
//! resonance vectors, orthogonal integer frames, and the `q^{-2} P(qx)` rescaling.

use crate::aubry::{Closure, Configuration};
use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use serde::Serialize;

/// Default tolerance below which `|q w - p|` marks `w` as rational.
pub const RATIONAL_TOL: f64 = 1e-9;
pub const RATIONAL_QMAX: i64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergentSequence {
    pub omega: f64,
    pub pairs: Vec<(i64, i64)>,
    /// Set when the expansion stopped because `omega` is rational at working precision.
    pub terminated: bool,
}

/// Exact `omega = num / 2^shift` for finite `omega`, with `shift <= 120`;
/// smaller fractional parts are flushed to zero.
fn dyadic(omega: f64) -> (i128, u32) {
    let a0 = omega.floor();
    let frac = omega - a0;
    let mut shift = 0u32;
    let mut f = frac;
    while f != f.floor() && shift < 120 {
        f *= 2.0;
        shift += 1;
    }
    (((a0 as i128) << shift) + f.floor() as i128, shift)
}

/// Continued-fraction convergents `p_k/q_k` of `omega`, at most `count` of them.
/// The expansion runs in exact integer arithmetic on the binary value of `omega`.
pub fn convergents(omega: f64, count: usize) -> ConvergentSequence {
    let mut pairs = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let (num, shift) = dyadic(omega);
    let (mut n, mut d) = (num, 1i128 << shift);
    let mut terminated = false;
    while pairs.len() < count {
        let a = n.div_euclid(d);
        let (p, q) = (a * p1 + p0, a * q1 + q0);
        if q > 1_000_000_000 {
            break;
        }
        pairs.push((p as i64, q as i64));
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let r = n - a * d;
        let defect = (q as f64).mul_add(omega, -(p as f64)).abs();
        if r == 0 || defect < 1e-15 * q as f64 {
            terminated = true;
            break;
        }
        (n, d) = (d, r);
    }
    ConvergentSequence {
        omega,
        pairs,
        terminated,
    }
}

/// Whether `omega` is within `tol` of some `p/q` with `q <= qmax` in the sense `|q w - p| <= tol`.
pub fn is_rational(omega: f64, tol: f64, qmax: i64) -> bool {
    convergents(omega, 64)
        .pairs
        .iter()
        .take_while(|(_, q)| *q <= qmax)
        .any(|&(p, q)| (q as f64 * omega - p as f64).abs() <= tol)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceSeed {
    pub k: Vec<i64>,
    /// `|<omega, k>|`.
    pub inner: f64,
    /// `|<omega, k>| * |k|^{d-1}`.
    pub constant: f64,
}

fn norm(k: &[i64]) -> f64 {
    (k.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt()
}

fn sign_normalize(k: &mut [i64]) {
    if let Some(&first) = k.iter().find(|&&v| v != 0) {
        if first < 0 {
            k.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Exhaustive search over `0 < |k| <= max_norm` for the integer vector
/// minimizing `|<omega,k>| |k|^{d-1}`.
pub fn resonance_vector(omega: &[f64], max_norm: i64) -> Result<ResonanceSeed> {
    let d = omega.len();
    if d < 2 {
        return Err(Error::Unsupported(d));
    }
    if omega.iter().all(|&w| w == 0.0) || max_norm < 1 {
        return Err(Error::InvalidArgument("omega must be nonzero and max_norm positive".into()));
    }
    let side = (2 * max_norm + 1) as usize;
    let total = side.pow(d as u32);
    let mut best: Option<(f64, f64, Vec<i64>)> = None;
    let mut k = vec![0i64; d];
    for idx in 0..total {
        let mut r = idx;
        for kj in k.iter_mut().rev() {
            *kj = (r % side) as i64 - max_norm;
            r /= side;
        }
        // one representative of each +-k pair
        match k.iter().find(|&&v| v != 0) {
            Some(&first) if first > 0 => {}
            _ => continue,
        }
        let nk = norm(&k);
        if nk > max_norm as f64 + 1e-12 {
            continue;
        }
        let inner: f64 = omega.iter().zip(&k).map(|(w, &kj)| w * kj as f64).sum::<f64>().abs();
        let c = inner * nk.powi(d as i32 - 1);
        let better = match &best {
            None => true,
            Some((bc, bn, bk)) => c < *bc || (c == *bc && (nk < *bn || (nk == *bn && k < *bk))),
        };
        if better {
            best = Some((c, nk, k.clone()));
        }
    }
    let (c, _, k) = best.expect("search ball is nonempty");
    let inner = omega.iter().zip(&k).map(|(w, &kj)| w * kj as f64).sum::<f64>().abs();
    Ok(ResonanceSeed { k, inner, constant: c })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceFrame {
    pub d: usize,
    pub k: Vec<i64>,
    pub k_prime: Vec<i64>,
    pub l_rows: Vec<Vec<i64>>,
}

impl ResonanceFrame {
    pub fn rows(&self) -> Vec<Vec<i64>> {
        let mut r = vec![self.k.clone(), self.k_prime.clone()];
        r.extend(self.l_rows.iter().cloned());
        r
    }

    /// `<omega, row>` for every row of the frame.
    pub fn frequencies(&self, omega: &[f64]) -> Vec<f64> {
        self.rows()
            .iter()
            .map(|r| r.iter().zip(omega).map(|(&a, w)| a as f64 * w).sum())
            .collect()
    }
}

fn cross(a: &[i64], b: &[i64]) -> Vec<i64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Pairwise orthogonal integer frame whose first row is `k` (d = 2 or 3).
pub fn orthogonal_frame(k: &[i64]) -> Result<ResonanceFrame> {
    let d = k.len();
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(d));
    }
    if k.iter().all(|&v| v == 0) {
        return Err(Error::InvalidArgument("frame seed must be nonzero".into()));
    }
    if d == 2 {
        return Ok(ResonanceFrame {
            d,
            k: k.to_vec(),
            k_prime: vec![-k[1], k[0]],
            l_rows: vec![],
        });
    }
    let axes = [[0, 0, 1], [0, 1, 0], [1, 0, 0]];
    let mut kp = axes
        .iter()
        .map(|e| cross(k, e))
        .find(|v| v.iter().any(|&c| c != 0))
        .expect("a nonzero vector is parallel to at most one axis");
    let g = kp.iter().fold(0, |acc, &v| gcd(acc, v));
    kp.iter_mut().for_each(|v| *v /= g);
    sign_normalize(&mut kp);
    let l3 = cross(k, &kp);
    Ok(ResonanceFrame {
        d,
        k: k.to_vec(),
        k_prime: kp,
        l_rows: vec![l3],
    })
}

/// `Q(x) = q^{-2} P(q x)`.
pub fn rescale_problem(p: &PeriodicPotential, q: u32) -> PeriodicPotential {
    if q == 1 {
        return p.clone();
    }
    PeriodicPotential::Rescaled {
        inner: Box::new(p.clone()),
        q,
    }
}

/// Maps a configuration of the rescaled problem to the original one by `y_i = q x_i`.
pub fn transport_configuration(c: &Configuration, q: u32) -> Configuration {
    let qf = q as f64;
    let closure = match c.closure {
        Closure::Periodic { p, q: len } => Closure::Periodic { p: p * q as i64, q: len },
        Closure::Clamped => Closure::Clamped,
        Closure::Free => Closure::Free,
    };
    Configuration {
        values: c.values.iter().map(|x| x * qf).collect(),
        first_index: c.first_index,
        closure,
        symbol: None,
        period: c.period,
    }
}
