//! Pendulum lemmas and the Melnikov function: separatrix, energy-time relation,
//! broken actions, Melnikov integrals and the coupling estimate on short
//! integrated trajectories.

use crate::error::{Error, Result};
use crate::perturb::linear_fit;
use crate::quadrature::integrate;
use num_complex::Complex64;
use ode_solvers::{Dopri5, System, Vector4};
use serde::Serialize;
use std::f64::consts::PI;

const QUAD_TOL: f64 = 1e-12;
const QUAD_INTERVALS: usize = 50_000;

/// Pendulum `A = qdot^2/2 + sigma (1 - cos q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PendulumParams {
    pub sigma: f64,
}

impl PendulumParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        Ok(PendulumParams { sigma })
    }

    /// `sigma (1 - cos q)`, written as `2 sigma sin^2(q/2)`.
    pub fn potential(&self, q: f64) -> f64 {
        let s = (0.5 * q).sin();
        2.0 * self.sigma * s * s
    }
}

/// Upper separatrix through `q = pi` at `t = 0`: `(q, qdot)`.
pub fn separatrix(p: PendulumParams, t: f64) -> (f64, f64) {
    let r = p.sigma.sqrt();
    (4.0 * (r * t).exp().atan(), 2.0 * r / (r * t).cosh())
}

/// Time to sweep `q` from 0 to `pi` at energy `qdot^2/2 - V = e`.
pub fn time_of_flight(p: PendulumParams, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::InvalidArgument("time of flight needs e > 0".into()));
    }
    let q = integrate(|q| 1.0 / (2.0 * (e + p.potential(q))).sqrt(), 0.0, PI, QUAD_TOL, QUAD_INTERVALS)?;
    Ok(q.value)
}

/// Inverse of [`time_of_flight`] by bracketed root finding in `log e`.
pub fn energy_from_time(p: PendulumParams, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::OutOfBracket { target: t });
    }
    // T(e) < pi / sqrt(2e), so this energy is too fast
    let mut hi = PI * PI / (2.0 * t * t);
    let g = |u: f64| -> Result<f64> { Ok(time_of_flight(p, u.exp())? - t) };
    let mut ghi = g(hi.ln())?;
    let mut lo = hi;
    let mut glo = ghi;
    while glo <= 0.0 {
        hi = lo;
        ghi = glo;
        lo /= 1e3;
        if lo < 1e-280 * p.sigma.max(1.0) {
            return Err(Error::OutOfBracket { target: t });
        }
        glo = g(lo.ln())?;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (mut fa, mut fb) = (glo, ghi);
    let mut side = 0i32;
    for _ in 0..200 {
        // Illinois false position
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = g(c)?;
        if fc == 0.0 || (b - a).abs() < 1e-13 * (1.0 + c.abs()) {
            return Ok(c.exp());
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            return Ok((0.5 * (a + b)).exp());
        }
    }
    Err(Error::NonConvergence {
        iterations: 200,
        residual: (b - a).abs(),
    })
}

/// Action `int_0^pi sqrt(2(e + V)) dq - e tau` of the half swing lasting `tau`, and its energy.
pub fn swing_action(p: PendulumParams, tau: f64) -> Result<(f64, f64)> {
    let e = energy_from_time(p, tau)?;
    let q = integrate(|q| (2.0 * (e + p.potential(q))).sqrt(), 0.0, PI, QUAD_TOL, QUAD_INTERVALS)?;
    Ok((q.value - e * tau, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrokenAction {
    pub value: f64,
    /// Energy of the swing on `[t0, t1]`.
    pub e_left: f64,
    /// Energy of the swing on `[t1, t2]`.
    pub e_right: f64,
}

/// `L(t1)`: two half swings from `q = 0` to `pi` glued at `t1`.
pub fn broken_action(p: PendulumParams, t0: f64, t1: f64, t2: f64) -> Result<BrokenAction> {
    if !(t0 < t1 && t1 < t2) {
        return Err(Error::InvalidArgument("broken action needs t0 < t1 < t2".into()));
    }
    let (l, e_left) = swing_action(p, t1 - t0)?;
    let (r, e_right) = swing_action(p, t2 - t1)?;
    Ok(BrokenAction {
        value: l + r,
        e_left,
        e_right,
    })
}

/// Affine fit of `log(e/sigma)` against `sqrt(sigma) T` over `points` times
/// spread across `[lo, hi]`: `(slope, intercept, max residual)`.
pub fn energy_time_fit(p: PendulumParams, lo: f64, hi: f64, points: usize) -> Result<(f64, f64, f64)> {
    let r = p.sigma.sqrt();
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let s = lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64;
        let e = energy_from_time(p, s / r)?;
        xs.push(s);
        ys.push((e / p.sigma).ln());
    }
    Ok(linear_fit(&xs, &ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MelnikovParams {
    pub delta: f64,
    pub omega2: f64,
    /// `q_2(t_1)`.
    pub q2: f64,
    pub mu: f64,
}

impl MelnikovParams {
    pub fn new(delta: f64, omega2: f64, q2: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument("delta must be positive".into()));
        }
        Ok(MelnikovParams {
            delta,
            omega2,
            q2,
            mu: 0.0,
        })
    }
}

/// `2 pi omega / sinh(pi omega / (2 sqrt delta))`, with its limit `4 sqrt delta` at 0.
pub fn melnikov_amplitude(delta: f64, omega2: f64) -> f64 {
    let c = PI / (2.0 * delta.sqrt());
    let x = c * omega2;
    if x.abs() < 1e-8 {
        4.0 * delta.sqrt() * (1.0 - x * x / 6.0)
    } else {
        2.0 * PI * omega2 / x.sinh()
    }
}

pub fn melnikov_closed_form(m: MelnikovParams) -> f64 {
    melnikov_amplitude(m.delta, m.omega2) * m.q2.cos()
}

/// `M(q2 = 0) - M(q2 = pi)`.
pub fn melnikov_gap(delta: f64, omega2: f64) -> f64 {
    2.0 * melnikov_amplitude(delta, omega2).abs()
}

/// `delta int (1 - cos qhat(s)) cos(omega2 s + q2) ds` over `|s| <= window/sqrt(delta)`.
///
/// The integrand is continued analytically, `1 - cos qhat(s) = 2 sech^2(sqrt(delta) s)`,
/// and integrated along `Im s = eta` toward the decaying side of `e^{i omega2 s}`.
/// On the real line the result is exponentially smaller than the integrand and
/// is lost to cancellation; the shifted line keeps the two comparable. The
/// vertical end pieces are of order `e^{-2 window}` and are dropped.
pub fn melnikov_quadrature(m: MelnikovParams, window: f64) -> Result<f64> {
    if !(m.delta > 0.0 && window > 0.0) {
        return Err(Error::InvalidArgument("delta and the window must be positive".into()));
    }
    let r = m.delta.sqrt();
    let w = m.omega2.abs();
    // distance of the line to the pole at sqrt(delta) s = i pi/2
    let gap = if w > 0.0 { (r / w).min(PI / 4.0) } else { PI / 2.0 };
    let eta = m.omega2.signum() * (PI / 2.0 - gap) / r;
    let phase = Complex64::from_polar(1.0, m.q2);
    let f = |s: f64| {
        let z = Complex64::new(s, eta);
        let ch = (z * r).cosh();
        let g = 2.0 * m.delta / (ch * ch);
        (phase * g * (Complex64::i() * m.omega2 * z).exp()).re
    };
    let half = window / r;
    let l1 = integrate(|s| f(s).abs(), -half, half, 1e-6 * m.delta, QUAD_INTERVALS)?.value;
    let coarse = integrate(f, -half, half, 1e-8 * l1, QUAD_INTERVALS)?.value;
    let tol = (1e-10 * coarse.abs()).max(1e-15 * l1);
    Ok(integrate(f, -half, half, tol, QUAD_INTERVALS)?.value)
}

/// Least-squares `lambda` in `gap ~ A exp(-lambda / sqrt(delta))` over the given deltas.
pub fn fit_gap_exponent(omega2: f64, deltas: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = deltas.iter().map(|d| 1.0 / d.sqrt()).collect();
    let ys: Vec<f64> = deltas.iter().map(|&d| melnikov_gap(d, omega2).ln()).collect();
    let (slope, intercept, res) = linear_fit(&xs, &ys);
    (-slope, intercept, res)
}

/// Two degrees of freedom, `L = |qdot|^2/2 + delta (1 - cos q1)(1 + mu cos q2)`.
struct Coupled {
    delta: f64,
    mu: f64,
}

impl System<f64, Vector4<f64>> for Coupled {
    fn system(&self, _t: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let (q1, q2) = (y[0], y[1]);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = self.delta * q1.sin() * (1.0 + self.mu * q2.cos());
        dy[3] = -self.mu * self.delta * (1.0 - q1.cos()) * q2.sin();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingReport {
    /// `max_t |qdot_2(t) - (q_2(t'') - q_2(t')) / (t'' - t')|`.
    pub max_deviation: f64,
    /// `mu sqrt(delta)`.
    pub scale: f64,
    pub ratio: f64,
    /// Largest change of `qdot_1^2/2 - delta (1 - cos q1)` along the run.
    pub pendulum_energy_drift: f64,
    pub steps: usize,
}

/// Integrates the coupled system over one passage along the separatrix,
/// `t in [-window/sqrt(delta), window/sqrt(delta)]`, starting on the
/// unperturbed separatrix with `q_2 = q2`, `qdot_2 = omega2`.
pub fn coupling_check(m: MelnikovParams, window: f64) -> Result<CouplingReport> {
    if !(m.delta > 0.0 && window > 0.0) {
        return Err(Error::InvalidArgument("delta and the window must be positive".into()));
    }
    let r = m.delta.sqrt();
    let (t0, t1) = (-window / r, window / r);
    let (q1, v1) = separatrix(PendulumParams { sigma: m.delta }, t0);
    let y0 = Vector4::new(q1, m.q2, v1, m.omega2);
    // autonomous, so time runs from 0; the solver assumes nonnegative times
    let system = Coupled {
        delta: m.delta,
        mu: m.mu,
    };
    let mut solver = Dopri5::new(system, 0.0, t1 - t0, (t1 - t0) / 2000.0, y0, 1e-11, 1e-13);
    let stats = solver.integrate().map_err(|e| Error::InvalidArgument(format!("integration failed: {e}")))?;
    let ts = solver.x_out();
    let ys = solver.y_out();
    let (first, last) = (ys.first().copied().unwrap_or(y0), ys.last().copied().unwrap_or(y0));
    let span = ts.last().copied().unwrap_or(t1 - t0) - ts.first().copied().unwrap_or(0.0);
    let mean_speed = (last[1] - first[1]) / span;
    let energy = |y: &Vector4<f64>| 0.5 * y[2] * y[2] - m.delta * (1.0 - y[0].cos());
    let e0 = energy(&first);
    let mut max_deviation: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for y in ys {
        max_deviation = max_deviation.max((y[3] - mean_speed).abs());
        drift = drift.max((energy(y) - e0).abs());
    }
    let scale = m.mu * r;
    Ok(CouplingReport {
        max_deviation,
        scale,
        ratio: if scale > 0.0 { max_deviation / scale } else { 0.0 },
        pendulum_energy_drift: drift,
        steps: stats.accepted_steps as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separatrix_at_origin() {
        let p = PendulumParams::new(0.25).unwrap();
        let (q, v) = separatrix(p, 0.0);
        assert!((q - PI).abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_limit() {
        let a = melnikov_amplitude(0.5, 1e-12);
        assert!((a - 4.0 * 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let m = MelnikovParams::new(1.0, 1.0, 0.0).unwrap();
        let q = melnikov_quadrature(m, 40.0).unwrap();
        let c = melnikov_closed_form(m);
        assert!(((q - c) / c).abs() < 1e-9, "{q} vs {c}");
    }
}
