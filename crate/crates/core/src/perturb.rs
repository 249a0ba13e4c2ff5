//! The explicit perturbation families: the cosine well `u_n`, the smooth bump
//! `v_n`, the analytic bump `u_n * p~_N`, and their norm reports.

use crate::error::{Error, Result};
use crate::potential::{golden_max, Bump, PeriodicPotential};
use crate::torus::TorusField;
use crate::trigapprox::vallee_poussin_nd;
use crate::trigpoly::TrigPoly;
use crate::twistmap::GeneratingFunction;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothBumpParams {
    pub n: u32,
    pub a: f64,
    pub k: u32,
}

impl SmoothBumpParams {
    /// Decay exponent of the bump height, `s = (k + 2) a`.
    pub fn s(&self) -> f64 {
        (self.k as f64 + 2.0) * self.a
    }

    pub fn half_width(&self) -> f64 {
        (self.n as f64).powf(-self.a)
    }

    pub fn peak(&self) -> f64 {
        (self.n as f64).powf(-self.s())
    }
}

pub fn make_u(n: u32, a: f64) -> Result<PeriodicPotential> {
    if n == 0 || !(a > 0.0) {
        return Err(Error::InvalidArgument("u_n needs n >= 1 and a > 0".into()));
    }
    Ok(PeriodicPotential::NamedU { n, a })
}

/// Mollifier bump of height `n^{-s}` centred at 1/2 with support `1/2 +- n^{-a}`.
pub fn make_bump_v(p: SmoothBumpParams) -> Result<PeriodicPotential> {
    if p.n == 0 || !(p.a > 0.0) || p.k == 0 {
        return Err(Error::InvalidArgument("bump needs n, k >= 1 and a > 0".into()));
    }
    let w = p.half_width();
    if w > 0.5 {
        return Err(Error::SupportTooWide { half_width: w });
    }
    Ok(PeriodicPotential::Bump(Bump {
        center: 0.5,
        half_width: w,
        peak: p.peak(),
    }))
}

/// `h_n = h_0 + u_n + v_n`.
pub fn smooth_family(p: SmoothBumpParams) -> Result<GeneratingFunction> {
    Ok(GeneratingFunction::new(PeriodicPotential::Sum(vec![
        make_u(p.n, p.a)?,
        make_bump_v(p)?,
    ])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticPerturbParams {
    pub n: u32,
    pub a: f64,
    pub k: u32,
    pub sigma: f64,
    /// Largest admissible trigonometric degree of `v`.
    pub degree_cap: usize,
}

impl AnalyticPerturbParams {
    pub fn new(n: u32, a: f64, k: u32, sigma: f64) -> Self {
        AnalyticPerturbParams {
            n,
            a,
            k,
            sigma,
            degree_cap: 4096,
        }
    }

    /// Width `L = n^{-a/2} / 2` of the bump interval `Lambda_n` centred at 1/2.
    pub fn bump_width(&self) -> f64 {
        0.5 * (self.n as f64).powf(-self.a / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticV {
    #[serde(skip)]
    pub potential: PeriodicPotential,
    /// Degree `N = 2m - 1` of the approximant `p_N`.
    pub degree_n: usize,
    pub m: usize,
    /// `sup |phi - p_N|`.
    pub approx_error: f64,
    /// `N / (sigma^{-1/k} n^{a/2})`.
    pub degree_constant: f64,
    /// `log max v` over `Lambda_n`.
    pub log_on_bump_max: f64,
    /// `log max |v|` off `Lambda_n`.
    pub log_off_bump_max: f64,
    /// Smallest `C` with `|v| <= C sigma^2 e^{-2N} n^{-a}` off `Lambda_n`.
    pub off_bump_constant: f64,
}

fn mollifier_2pi(center: f64, half_width: f64, peak: f64) -> impl Fn(f64) -> f64 {
    move |theta: f64| {
        let x = theta / (2.0 * PI);
        let d = x - center;
        let d = d - d.round();
        let t = d / half_width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            peak * (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

/// `v_n = u_n e^{-2N} (p_N / max p_N)^2` with `p_N` the de la Vallée Poussin
/// approximant of a peak-2 mollifier on `Lambda_n`. The `e^{-2N}` factor is
/// kept in the polynomial's log scale.
pub fn make_analytic_v(p: AnalyticPerturbParams) -> Result<AnalyticV> {
    let lw = p.bump_width();
    if p.n == 0 || !(p.a > 0.0) || p.k == 0 {
        return Err(Error::InvalidArgument("analytic bump needs n, k >= 1 and a > 0".into()));
    }
    if !(p.sigma > 0.0) || p.sigma > lw + 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "sigma must lie in (0, n^(-a/2)/2 = {lw}]"
        )));
    }
    let phi = mollifier_2pi(0.5, lw / 2.0, 2.0);
    let mut m = 1usize;
    let (poly, err) = loop {
        let deg = 2 * m - 1;
        if 2 * deg + 1 > p.degree_cap {
            return Err(Error::DegreeOverflow {
                degree: 2 * deg + 1,
                cap: p.degree_cap,
            });
        }
        let grid = (8 * m).max(4096).next_power_of_two();
        let f = TorusField::from_fn(vec![grid], |x| phi(x[0]));
        let pn = vallee_poussin_nd(&f, &[m])?;
        let approx = pn.to_field(&[grid])?;
        let err = approx
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err < p.sigma {
            let c: Vec<_> = pn.coeffs.clone();
            break (TrigPoly::from_complex_coeffs(1.0, &c, 0.0), err);
        }
        m += 1;
    };
    let n_deg = 2 * m - 1;

    // normalize by the maximum, located on a grid and refined
    let samples = 8192;
    let (imax, _) = (0..samples)
        .map(|i| (i, poly.value(i as f64 / samples as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let c = imax as f64 / samples as f64;
    let h = 1.0 / samples as f64;
    let pmax = golden_max(|x| poly.value(x), c - h, c + h, 80).max(poly.value(c));
    let mut normalized = poly.clone();
    normalized.cos.iter_mut().for_each(|v| *v /= pmax);
    normalized.sin.iter_mut().for_each(|v| *v /= pmax);
    let mut ptilde = normalized.mul(&normalized);
    ptilde.log_scale = -2.0 * n_deg as f64;
    let na = (p.n as f64).powf(-p.a);
    let u = TrigPoly::new(1.0, vec![na, -na], vec![]);
    let v = u.mul(&ptilde);

    let lo = 0.5 - lw / 2.0;
    let hi = 0.5 + lw / 2.0;
    let dense = 16384;
    let (mut on, mut off) = (0.0f64, 0.0f64);
    for i in 0..dense {
        let x = i as f64 / dense as f64;
        let val = v.eval_unscaled(x, 0);
        if x >= lo && x <= hi {
            on = on.max(val);
        } else {
            off = off.max(val.abs());
        }
    }
    let scale = -2.0 * n_deg as f64;
    let degree_constant = n_deg as f64 / (p.sigma.powf(-1.0 / p.k as f64) * (p.n as f64).powf(p.a / 2.0));
    Ok(AnalyticV {
        potential: PeriodicPotential::Trig(v),
        degree_n: n_deg,
        m,
        approx_error: err,
        degree_constant,
        log_on_bump_max: on.ln() + scale,
        log_off_bump_max: off.ln() + scale,
        off_bump_constant: off / (p.sigma * p.sigma * na),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub order: f64,
    /// `sup |V^{(j)}|` for integer orders; Hölder bound for fractional ones.
    pub seminorm: f64,
    /// `max` of the lower-order seminorms and this one.
    pub norm: f64,
    pub interpolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub rows: Vec<NormRow>,
    /// `(sup over the strip, e^{rN} ||p||)` for trigonometric polynomials.
    pub strip: Option<(f64, f64)>,
}

/// Derivative sup norms, Hölder-interpolated fractional norms
/// (`2 ||D^j V||^{1-t} ||D^{j+1} V||^t` for order `j + t`) and the strip bound.
pub fn norm_report(v: &PeriodicPotential, orders: &[f64], strip_r: Option<f64>) -> Result<NormReport> {
    let samples = 8192;
    let max_int = orders.iter().fold(0.0f64, |m, &o| m.max(o.ceil())) as u32;
    if max_int > 4 && !matches!(v, PeriodicPotential::Trig(_)) {
        return Err(Error::InvalidArgument("orders above 4 need a trigonometric polynomial".into()));
    }
    let sups: Vec<f64> = (0..=max_int).map(|j| v.sup_derivative(j, samples)).collect();
    let rows = orders
        .iter()
        .map(|&r| {
            let j = r.floor() as usize;
            let t = r - j as f64;
            let (semi, interp) = if t == 0.0 {
                (sups[j], false)
            } else {
                (2.0 * sups[j].powf(1.0 - t) * sups[j + 1].powf(t), true)
            };
            let lower = sups[..=j].iter().fold(0.0f64, |m, &s| m.max(s));
            NormRow {
                order: r,
                seminorm: semi,
                norm: lower.max(semi),
                interpolated: interp,
            }
        })
        .collect();
    let strip = match (strip_r, v) {
        (Some(r), PeriodicPotential::Trig(p)) => {
            let nd = p.degree() as f64;
            let sup = p.strip_norm(r, 2048);
            Some((sup, (r * nd).exp() * p.sup_derivative(0, samples)))
        }
        (Some(_), _) => {
            return Err(Error::InvalidArgument("strip norms need a trigonometric polynomial".into()));
        }
        _ => None,
    };
    Ok(NormReport { rows, strip })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Least-squares `(slope, intercept, max residual)` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icept - slope * a).abs())
        .fold(0.0, f64::max);
    (slope, icept, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_extremes() {
        let u = make_u(4, 2.0).unwrap();
        assert!((u.value(0.25) - 1.0 / 16.0).abs() < 1e-16);
        let u = make_u(3, 1.0).unwrap();
        assert_eq!(u.value(0.0), 0.0);
        assert!((u.value(0.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bump_support_and_peak() {
        let p = SmoothBumpParams { n: 2, a: 1.0, k: 2 };
        let v = make_bump_v(p).unwrap();
        assert!((v.value(0.5) - 2f64.powi(-4)).abs() < 1e-16);
        assert_eq!(v.value(0.0), 0.0);
        assert!(make_bump_v(SmoothBumpParams { n: 1, a: 0.5, k: 2 }).is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0];
        let (s, c, r) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (c + 1.0).abs() < 1e-14 && r < 1e-14);
    }
}
