//! Herman's total-destruction criterion, the toy family, the smooth and
//! analytic zero-mean fields `T_n` on the torus, and the Poisson step
//! `(1/d) Delta Psi = T`.

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::torus::TorusField;
use crate::trigapprox::{vallee_poussin_nd, OVERSAMPLING};
use crate::trigpoly::{TrigPoly, TrigPolyND};
use crate::twistmap::GeneratingFunction;
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub min_t: f64,
    pub max_t: f64,
    /// `1 / (1 + min/2)`, infinite once the denominator collapses.
    pub lhs: f64,
    /// `1 + max/2 + sqrt(max + max^2/4)`.
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
    /// Lipschitz bound on `g`: `1 + M/2 + (M + M^2/4)^{1/2}`.
    pub lipschitz_bound_g: f64,
    pub denominator_collapse: bool,
    /// Asymptotic form `-min/2 > sqrt(max)`, for diagnostics.
    pub asymptotic_lhs: f64,
    pub asymptotic_rhs: f64,
    pub asymptotic_holds: bool,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

pub fn lipschitz_bound_g(max_t: f64) -> f64 {
    1.0 + 0.5 * max_t + (max_t + 0.25 * max_t * max_t).max(0.0).sqrt()
}

/// Evaluates the criterion `1/(1 + min/2) > 1 + max/2 + sqrt(max + max^2/4)`.
pub fn criterion_check(min_t: f64, max_t: f64) -> CriterionReport {
    let denom = 1.0 + 0.5 * min_t;
    let denominator_collapse = denom <= 0.0;
    let lhs = if denominator_collapse { f64::INFINITY } else { 1.0 / denom };
    let rhs = lipschitz_bound_g(max_t);
    let asymptotic_lhs = -0.5 * min_t;
    let asymptotic_rhs = max_t.max(0.0).sqrt();
    CriterionReport {
        min_t,
        max_t,
        lhs,
        rhs,
        holds: denominator_collapse || lhs > rhs,
        margin: lhs - rhs,
        lipschitz_bound_g: rhs,
        denominator_collapse,
        asymptotic_lhs,
        asymptotic_rhs,
        asymptotic_holds: asymptotic_lhs > asymptotic_rhs,
        argmin: Vec::new(),
        argmax: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyFamily {
    pub n: u32,
    /// `V` with `V' = phi`, period `2 pi / n`.
    pub potential: PeriodicPotential,
    /// `phi_n(x) = -(5/(4n)) cos(nx) + (1/(8n)) sin(2nx)`.
    pub phi: PeriodicPotential,
    pub report: CriterionReport,
}

impl ToyFamily {
    pub fn generating_function(&self) -> GeneratingFunction {
        GeneratingFunction::new(self.potential.clone())
    }
}

/// `V_n(x) = -(5/(4n^2)) sin(nx) - (1/(16 n^2)) cos(2nx)`.
pub fn toy_potential(n: u32) -> PeriodicPotential {
    let nf = n as f64;
    PeriodicPotential::Trig(TrigPoly::new(
        2.0 * PI / nf,
        vec![0.0, 0.0, -1.0 / (16.0 * nf * nf)],
        vec![0.0, -5.0 / (4.0 * nf * nf), 0.0],
    ))
}

pub fn toy_phi(n: u32) -> PeriodicPotential {
    let nf = n as f64;
    PeriodicPotential::Trig(TrigPoly::new(
        2.0 * PI / nf,
        vec![0.0, -5.0 / (4.0 * nf), 0.0],
        vec![0.0, 0.0, 1.0 / (8.0 * nf)],
    ))
}

/// Extrema of a 1-periodic-in-`L` function on a dense grid, refined by golden section.
fn extrema_1d(f: impl Fn(f64) -> f64, period: f64, samples: usize) -> ((f64, f64), (f64, f64)) {
    let h = period / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|i| f(i as f64 * h)).collect();
    let imin = (0..samples).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    let imax = (0..samples).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    let refine = |i: usize, sign: f64| {
        let c = i as f64 * h;
        let (mut a, mut b) = (c - h, c + h);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let x1 = b - r * (b - a);
            let x2 = a + r * (b - a);
            if sign * f(x1) < sign * f(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let x = 0.5 * (a + b);
        let x = x.rem_euclid(period);
        if sign * f(x) >= sign * vals[i] {
            (x, f(x))
        } else {
            (c, vals[i])
        }
    };
    (refine(imin, -1.0), refine(imax, 1.0))
}

pub fn toy_family(n: u32) -> Result<ToyFamily> {
    if n == 0 {
        return Err(Error::InvalidArgument("the toy family needs n >= 1".into()));
    }
    let phi = toy_phi(n);
    let period = phi.period();
    // 8 samples per shortest wavelength (period / 2) at minimum
    let ((xmin, mn), (xmax, mx)) = extrema_1d(|x| phi.derivative(x, 1), period, 256);
    let mut report = criterion_check(mn, mx);
    report.argmin = vec![xmin];
    report.argmax = vec![xmax];
    Ok(ToyFamily {
        n,
        potential: toy_potential(n),
        phi,
        report,
    })
}

/// Criterion report of a sampled field, extrema taken on the grid.
pub fn field_report(t: &TorusField) -> CriterionReport {
    let (imin, mn) = t.argmin();
    let (imax, mx) = t.argmax();
    let mut r = criterion_check(mn, mx);
    r.argmin = t.point(imin);
    r.argmax = t.point(imax);
    r
}

/// Parabolic refinement of a grid extremum along each axis.
fn parabolic_offset(t: &TorusField, idx: usize) -> Vec<f64> {
    let shape = t.shape();
    let s = t.samples();
    let mut x = t.point(idx);
    let mut stride = 1usize;
    for j in (0..shape.len()).rev() {
        let n = shape[j];
        let pos = (idx / stride) % n;
        let base = idx - pos * stride;
        let at = |p: usize| s[base + (p % n) * stride];
        let (fm, f0, fp) = (at(pos + n - 1), at(pos), at(pos + 1));
        let curv = fm - 2.0 * f0 + fp;
        if curv != 0.0 {
            let off = (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5);
            x[j] += off * 2.0 * PI / n as f64;
        }
        stride *= n;
    }
    x
}

/// Criterion report of a polynomial from a dense sample field, with the grid
/// extrema polished by a parabolic step and re-evaluated exactly.
pub fn poly_report(p: &TrigPolyND, samples: &TorusField) -> CriterionReport {
    let (imin, gmin) = samples.argmin();
    let (imax, gmax) = samples.argmax();
    let xmin = parabolic_offset(samples, imin);
    let xmax = parabolic_offset(samples, imax);
    let (vmin, vmax) = (p.eval(&xmin), p.eval(&xmax));
    let (xmin, mn) = if vmin < gmin { (xmin, vmin) } else { (samples.point(imin), gmin) };
    let (xmax, mx) = if vmax > gmax { (xmax, vmax) } else { (samples.point(imax), gmax) };
    let mut r = criterion_check(mn, mx);
    r.argmin = xmin;
    r.argmax = xmax;
    r
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Width of the transition layers of the plateau.
const PLATEAU_EDGE: f64 = PI / 8.0;

/// Smooth plateau on `[0, pi]`, equal to 1 on `[pi/8, 7pi/8]`, repeated with period `2 pi`.
pub fn plateau_profile(x: f64) -> f64 {
    let x = x.rem_euclid(2.0 * PI);
    if x >= PI {
        return 0.0;
    }
    smooth_step(x / PLATEAU_EDGE) * smooth_step((PI - x) / PLATEAU_EDGE)
}

/// `exp(1 - 1/(1 - r^2))` for `r < 1`, zero outside.
pub fn radial_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// `(-pi/2, ..., -pi/2)`.
fn ball_center(d: usize) -> Vec<f64> {
    vec![-PI / 2.0; d]
}

fn wrapped_distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| {
            let t = (a - b).rem_euclid(2.0 * PI);
            let t = if t > PI { t - 2.0 * PI } else { t };
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

fn plateau_field(shape: &[usize], height: f64) -> TorusField {
    TorusField::from_fn(shape.to_vec(), |x| height * x.iter().map(|&v| plateau_profile(v)).product::<f64>())
}

fn ball_field(shape: &[usize], radius: f64, height: f64) -> TorusField {
    let c = ball_center(shape.len());
    TorusField::from_fn(shape.to_vec(), move |x| height * radial_profile(wrapped_distance(x, &c) / radius))
}

/// `kappa_d = int_{|y|<1} exp(1 - 1/(1-|y|^2)) dy`.
pub fn radial_profile_integral(d: usize) -> f64 {
    let sphere = match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            // surface area of the unit sphere in R^d
            2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d)
        }
    };
    let n = 20000;
    let h = 1.0 / n as f64;
    let radial: f64 = (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            radial_profile(r) * r.powi(d as i32 - 1)
        })
        .sum::<f64>()
        * h;
    sphere * radial
}

/// `Gamma(d/2)`.
fn gamma_half_integer(d: usize) -> f64 {
    let mut g = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if d % 2 == 0 { 1.0 } else { 0.5 };
    while k < d as f64 / 2.0 {
        g *= k;
        k += 1.0;
    }
    g
}

/// `int_0^{2 pi} plateau`.
pub fn plateau_integral() -> f64 {
    let n = 20000;
    let h = PI / n as f64;
    (0..n).map(|i| plateau_profile((i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothTParams {
    pub n: u64,
    pub d: usize,
    /// Height factor `c` of the ball bump, `max T^- = c / sqrt(n)`.
    pub amplitude: f64,
    pub points_per_axis: usize,
}

impl SmoothTParams {
    pub fn new(n: u64, d: usize) -> Self {
        SmoothTParams {
            n,
            d,
            amplitude: 4.0,
            points_per_axis: 128,
        }
    }

    pub fn radius(&self) -> f64 {
        (self.n as f64).powf(-1.0 / (2.0 * self.d as f64))
    }
}

#[derive(Debug, Clone)]
pub struct SmoothT {
    pub field: TorusField,
    pub beta: f64,
    pub radius: f64,
    /// `-beta c / sqrt(n)`.
    pub predicted_min: f64,
    pub report: CriterionReport,
}

fn check_ball(radius: f64, shape: &[usize]) -> Result<()> {
    if !(radius < PI / 2.0) {
        return Err(Error::BallDoesNotFit { radius });
    }
    let spacing = 2.0 * PI / *shape.iter().min().unwrap_or(&1) as f64;
    if radius < 3.0 * spacing {
        return Err(Error::InvalidArgument(format!(
            "ball radius {radius} is under three grid spacings"
        )));
    }
    Ok(())
}

/// `T = T^+ - beta T^-`: plateau of height `1/n` on `[0, pi]^d` minus a radial
/// bump of height `c/sqrt(n)` and radius `n^{-1/(2d)}` centred at `(-pi/2, ...)`.
pub fn make_t_smooth(p: SmoothTParams) -> Result<SmoothT> {
    if p.n == 0 || p.d == 0 || !(p.amplitude > 0.0) {
        return Err(Error::InvalidArgument("n, d and the amplitude must be positive".into()));
    }
    let shape = vec![p.points_per_axis; p.d];
    let radius = p.radius();
    check_ball(radius, &shape)?;
    let nf = p.n as f64;
    let plus = plateau_field(&shape, 1.0 / nf);
    let minus = ball_field(&shape, radius, p.amplitude / nf.sqrt());
    let beta = plus.mean() / minus.mean();
    let raw = plus.zip_with(&minus, |a, b| a - beta * b);
    let m = raw.mean();
    let field = raw.map(|v| v - m);
    let report = field_report(&field);
    Ok(SmoothT {
        field,
        beta,
        radius,
        predicted_min: -beta * p.amplitude / nf.sqrt(),
        report,
    })
}

/// Smallest `n` on the ladder `1, 2, 4, ..., n_max` (refined by bisection
/// below the first passing rung) from which the criterion holds at every
/// ladder point up to `n_max`. `n_max` is lowered to the largest `n` whose
/// ball the grid still resolves.
pub fn smooth_threshold(d: usize, amplitude: f64, points_per_axis: usize, n_max: u64) -> Result<Option<u64>> {
    let holds = |n: u64| -> Result<bool> {
        let mut p = SmoothTParams::new(n, d);
        p.amplitude = amplitude;
        p.points_per_axis = points_per_axis;
        Ok(make_t_smooth(p)?.report.holds)
    };
    // beyond this n the ball spans fewer than three grid spacings
    let resolvable = (6.0 * PI / points_per_axis as f64).powf(-2.0 * d as f64);
    let n_max = n_max.min(resolvable.floor().min(u64::MAX as f64) as u64);
    let mut ladder = vec![];
    let mut n = 1u64;
    while n <= n_max {
        ladder.push((n, holds(n)?));
        n *= 2;
    }
    let first = match ladder.iter().rposition(|&(_, h)| !h) {
        None => return Ok(ladder.first().map(|_| 1)),
        Some(i) if i + 1 == ladder.len() => return Ok(None),
        Some(i) => i,
    };
    let (mut lo, mut hi) = (ladder[first].0, ladder[first + 1].0);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticTParams {
    pub n: u64,
    pub d: usize,
    /// Jackson order `k` entering the degree estimate.
    pub k: u32,
    pub eps: f64,
    /// Target sup error of the de la Vallée Poussin approximation.
    pub sigma: f64,
    pub degree_cap: usize,
}

impl AnalyticTParams {
    pub fn new(n: u64, d: usize, k: u32, eps: f64) -> Self {
        AnalyticTParams {
            n,
            d,
            k,
            eps,
            sigma: 0.05,
            degree_cap: 512,
        }
    }

    /// Ball radius `rho n^{-1/d}` with `rho` chosen so the plateau and the
    /// height-`n` ball carry equal mass.
    pub fn radius(&self) -> f64 {
        let rho = (plateau_integral().powi(self.d as i32) / radial_profile_integral(self.d)).powf(1.0 / self.d as f64);
        rho * (self.n as f64).powf(-1.0 / self.d as f64)
    }

    /// `(1/sigma)^{1/k} n^{1/d + 1/k}`, the degree estimate with unit constant.
    pub fn degree_estimate(&self) -> f64 {
        let (k, d, n) = (self.k as f64, self.d as f64, self.n as f64);
        (1.0 / self.sigma).powf(1.0 / k) * n.powf(1.0 / d + 1.0 / k)
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticT {
    /// `p~_N = p_N / (n^{1-eps} max |p_N|)` with zero constant term.
    pub poly: TrigPolyND,
    pub degree: usize,
    pub m: usize,
    pub beta: f64,
    pub radius: f64,
    /// `sup |T~ - p_N|` on the construction grid.
    pub approx_error: f64,
    /// Fitted constant `A` in `N^k = (A / sigma) n^{1 + k/d}`.
    pub degree_constant: f64,
    /// `max p_N / max |p_N|`, times `n`.
    pub max_ratio: f64,
    pub report: CriterionReport,
    /// `(4 max_ratio)^{1/eps}`: where `-min/2 > sqrt(max)` starts to hold asymptotically.
    pub predicted_threshold: Option<f64>,
    pub grid: Vec<usize>,
}

/// Builds `T~ = T~^+ - beta T~^-` (plateau height 1, ball height `n`), takes its
/// de la Vallée Poussin approximant of the smallest dyadic order meeting
/// `sigma`, removes the constant term and normalizes.
pub fn make_t_analytic(p: AnalyticTParams) -> Result<AnalyticT> {
    if p.n == 0 || p.d == 0 || p.k == 0 {
        return Err(Error::InvalidArgument("n, d and k must be positive".into()));
    }
    if !(p.eps > 0.0 && p.eps < 1.0) {
        return Err(Error::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    if !(p.sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let radius = p.radius();
    let nf = p.n as f64;
    let est = p.degree_estimate();
    let mut m = (((est + 1.0) / 2.0).ceil() as usize).max(2).next_power_of_two();
    loop {
        let degree = 2 * m - 1;
        if degree > p.degree_cap {
            return Err(Error::DegreeOverflow {
                degree,
                cap: p.degree_cap,
            });
        }
        let points = (OVERSAMPLING * m).max(128).next_power_of_two();
        let shape = vec![points; p.d];
        check_ball(radius, &shape)?;
        let plus = plateau_field(&shape, 1.0);
        let minus = ball_field(&shape, radius, nf);
        let beta = plus.mean() / minus.mean();
        let target = plus.zip_with(&minus, |a, b| a - beta * b);
        let mut poly = vallee_poussin_nd(&target, &vec![m; p.d])?;
        let approx = poly.to_field(&shape)?;
        let err = approx
            .samples()
            .iter()
            .zip(target.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err >= p.sigma {
            m *= 2;
            continue;
        }
        let zero = vec![0i64; p.d];
        poly.set(&zero, Complex64::new(0.0, 0.0));
        let field = poly.to_field(&shape)?;
        let raw = poly_report(&poly, &field);
        let max_abs = raw.max_t.abs().max(raw.min_t.abs());
        let scale = 1.0 / (nf.powf(1.0 - p.eps) * max_abs);
        poly.coeffs.iter_mut().for_each(|c| *c *= scale);
        let field = field.map(|v| v * scale);
        let report = poly_report(&poly, &field);
        let max_ratio = raw.max_t / max_abs * nf;
        let predicted_threshold = (max_ratio > 0.0).then(|| (4.0 * max_ratio).powf(1.0 / p.eps));
        return Ok(AnalyticT {
            poly,
            degree,
            m,
            beta,
            radius,
            approx_error: err,
            degree_constant: err * (degree as f64).powi(p.k as i32) / nf.powf(1.0 + p.k as f64 / p.d as f64),
            max_ratio,
            report,
            predicted_threshold,
            grid: shape,
        });
    }
}

const MEAN_TOL: f64 = 1e-12;

fn squared_norm(k: &[i64]) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum()
}

/// `Psi` with `(1/d) Delta Psi = T` and zero mean.
pub fn poisson_solve(t: &TorusField) -> Result<TorusField> {
    let mean = t.mean();
    if mean.abs() >= MEAN_TOL {
        return Err(Error::NonzeroMean { mean });
    }
    let d = t.dim() as f64;
    Ok(t.spectral_map(|k| {
        let k2 = squared_norm(k);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-d / k2, 0.0)
        }
    }))
}

/// Poisson solve for a trigonometric polynomial, sampled on `shape`.
pub fn poisson_solve_poly(t: &TrigPolyND, shape: &[usize]) -> Result<TorusField> {
    let mean = t.mean();
    if mean.abs() >= MEAN_TOL {
        return Err(Error::NonzeroMean { mean });
    }
    let d = t.dim() as f64;
    let mut psi = t.clone();
    for (i, c) in psi.coeffs.iter_mut().enumerate() {
        let k2 = squared_norm(&t.frequency(i));
        *c = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *c * (-d / k2) };
    }
    psi.to_field(shape)
}

/// `(1/d) Delta Psi`, spectrally.
pub fn scaled_laplacian(psi: &TorusField) -> TorusField {
    let d = psi.dim() as f64;
    psi.spectral_map(|k| Complex64::new(-squared_norm(k) / d, 0.0))
}

/// `sup |(1/d) Delta Psi - T|` on the grid.
pub fn poisson_residual(psi: &TorusField, t: &TorusField) -> f64 {
    scaled_laplacian(psi)
        .samples()
        .iter()
        .zip(t.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Lift `g(x) = x + psi(x)` of a circle map, `psi` a `2 pi`-periodic
/// trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleLift {
    pub psi: TrigPoly,
}

impl CircleLift {
    pub fn identity() -> Self {
        CircleLift {
            psi: TrigPoly::constant(2.0 * PI, 0.0),
        }
    }

    pub fn rotation(c: f64) -> Self {
        CircleLift {
            psi: TrigPoly::constant(2.0 * PI, c),
        }
    }

    /// Trigonometric interpolant of samples `g(2 pi j / n)`, `j = 0..n`.
    pub fn from_samples(g: &[f64]) -> Result<Self> {
        let n = g.len();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples of g".into()));
        }
        let psi: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(j, v)| v - 2.0 * PI * j as f64 / n as f64)
            .collect();
        let field = TorusField::new(vec![n], psi)?;
        let deg = (n - 1) / 2;
        let spec = field.to_trigpoly(&[deg]);
        Ok(CircleLift {
            psi: TrigPoly::from_complex_coeffs(2.0 * PI, &spec.coeffs, 0.0),
        })
    }

    /// `g = Id + c0 + sum_k a_k cos kx + b_k sin kx`, parameters `[c0, a_1, b_1, a_2, b_2, ...]`.
    pub fn from_params(params: &[f64]) -> Self {
        let k = (params.len().saturating_sub(1)) / 2;
        let mut cos = vec![params.first().copied().unwrap_or(0.0)];
        let mut sin = vec![0.0];
        for i in 0..k {
            cos.push(params[1 + 2 * i]);
            sin.push(params[2 + 2 * i]);
        }
        CircleLift {
            psi: TrigPoly::new(2.0 * PI, cos, sin),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        x + self.psi.value(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        1.0 + self.psi.derivative(x, 1)
    }

    /// Smallest slope on a dense grid.
    pub fn min_slope(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.slope(2.0 * PI * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// `g^{-1}(y)` by safeguarded Newton on the bracket `y - psi` ranges over.
    pub fn inverse(&self, y: f64, bound: f64) -> f64 {
        let (mut lo, mut hi) = (y - bound - 1e-12, y + bound + 1e-12);
        let mut x = y - self.psi.value(y);
        for _ in 0..100 {
            let r = self.eval(x) - y;
            if r.abs() < 1e-15 * (1.0 + y.abs()) {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let s = self.slope(x);
            let mut next = x - r / s;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() < 1e-16 * (1.0 + x.abs()) {
                x = next;
                break;
            }
            x = next;
        }
        x
    }
}

const SLOPE_SAMPLES: usize = 1024;

/// `sup_j |(g(x_j) + g^{-1}(x_j))/2 - x_j - phi(x_j)/2|` over `samples` points of `[0, 2 pi)`.
pub fn conjugacy_residual(phi: &PeriodicPotential, g: &CircleLift, samples: usize) -> Result<f64> {
    let min_slope = g.min_slope(SLOPE_SAMPLES.max(4 * samples));
    if !(min_slope > 0.0) {
        return Err(Error::NotMonotone { min_slope });
    }
    let bound = (0..SLOPE_SAMPLES)
        .map(|i| g.psi.value(2.0 * PI * i as f64 / SLOPE_SAMPLES as f64).abs())
        .fold(0.0, f64::max)
        * 1.01
        + 1e-9;
    Ok((0..samples)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / samples as f64;
            (0.5 * (g.eval(x) + g.inverse(x, bound)) - x - 0.5 * phi.value(x)).abs()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyFit {
    pub params: Vec<f64>,
    pub residual: f64,
    pub evaluations: u64,
}

struct ConjugacyCost<'a> {
    phi: &'a PeriodicPotential,
    samples: usize,
}

impl CostFunction for ConjugacyCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let g = CircleLift::from_params(p);
        Ok(match conjugacy_residual(self.phi, &g, self.samples) {
            Ok(r) => r,
            Err(_) => 1e3 + (1.0 - g.min_slope(SLOPE_SAMPLES)).abs(),
        })
    }
}

/// Minimizes the conjugacy residual over `g = Id + sum_{|k| <= modes} c_k e^{ikx}`
/// by restarted Nelder-Mead. The result bounds the infimum from above.
pub fn fit_conjugacy(phi: &PeriodicPotential, modes: usize, samples: usize, restarts: usize, iters: u64) -> Result<ConjugacyFit> {
    let dim = 2 * modes + 1;
    let mut best = vec![0.0; dim];
    let problem = ConjugacyCost { phi, samples };
    let mut best_cost = problem.cost(&best).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut evaluations = 0;
    for round in 0..restarts.max(1) {
        let step = 0.05 / (1.0 + round as f64);
        let mut simplex = vec![best.clone()];
        for i in 0..dim {
            let mut v = best.clone();
            v[i] += step;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-14)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let res = Executor::new(ConjugacyCost { phi, samples }, solver)
            .configure(|s| s.max_iters(iters))
            .run()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let state = res.state();
        evaluations += state.get_iter();
        if let Some(p) = state.get_best_param() {
            if state.get_best_cost() < best_cost {
                best_cost = state.get_best_cost();
                best = p.clone();
            }
        }
    }
    Ok(ConjugacyFit {
        params: best,
        residual: best_cost,
        evaluations,
    })
}
