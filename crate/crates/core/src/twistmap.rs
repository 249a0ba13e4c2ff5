//! Generating functions, map iteration and stationarity residuals for
//! exact area-preserving twist maps of the cylinder.
//!
//! Every kernel has the mechanical form `h(x,x') = (x-x')^2/2 + V(x')`, so the
//! map is explicit: `x' = x + y`, `y' = y + V'(x')`.

use crate::aubry::{Closure, Configuration};
use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;

pub const LIFT_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    pub potential: PeriodicPotential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PhasePoint { x, y }
    }
}

impl GeneratingFunction {
    pub fn new(potential: PeriodicPotential) -> Self {
        GeneratingFunction { potential }
    }

    pub fn integrable() -> Self {
        Self::new(PeriodicPotential::zero())
    }

    /// Lift period `L` of the kernel: `h(x+L, x'+L) = h(x, x')`.
    pub fn period(&self) -> f64 {
        self.potential.period()
    }

    pub fn h(&self, x: f64, xp: f64) -> f64 {
        0.5 * (x - xp) * (x - xp) + self.potential.value(xp)
    }

    pub fn d1(&self, x: f64, xp: f64) -> f64 {
        x - xp
    }

    pub fn d2(&self, x: f64, xp: f64) -> f64 {
        xp - x + self.potential.d1(xp)
    }

    pub fn d12(&self, _x: f64, _xp: f64) -> f64 {
        -1.0
    }
}

pub fn map_step(h: &GeneratingFunction, p: PhasePoint) -> PhasePoint {
    let x = p.x + p.y;
    PhasePoint {
        x,
        y: p.y + h.potential.d1(x),
    }
}

/// `(x_N - x_0)/N` along the orbit of `p0`, in the units of the lift coordinate.
pub fn orbit_rotation_number(h: &GeneratingFunction, p0: PhasePoint, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("orbit length must be positive".into()));
    }
    let mut p = p0;
    for step in 1..=n {
        p = map_step(h, p);
        if !p.x.is_finite() || p.x.abs() > LIFT_BOUND {
            return Err(Error::Overflow {
                steps: step,
                bound: LIFT_BOUND,
            });
        }
    }
    Ok((p.x - p0.x) / n as f64)
}

/// Max over interior sites of `|d1 h(x_i, x_{i+1}) + d2 h(x_{i-1}, x_i)|`.
/// For periodic closures every site is interior.
pub fn stationarity_residual(h: &GeneratingFunction, c: &Configuration) -> f64 {
    let x = &c.values;
    let n = x.len();
    let el = |prev: f64, cur: f64, next: f64| (h.d1(cur, next) + h.d2(prev, cur)).abs();
    match c.closure {
        Closure::Periodic { p, .. } => {
            let shift = p as f64 * c.period;
            (0..n)
                .map(|i| {
                    let prev = if i == 0 { x[n - 1] - shift } else { x[i - 1] };
                    let next = if i + 1 == n { x[0] + shift } else { x[i + 1] };
                    el(prev, x[i], next)
                })
                .fold(0.0, f64::max)
        }
        _ => (1..n.saturating_sub(1))
            .map(|i| el(x[i - 1], x[i], x[i + 1]))
            .fold(0.0, f64::max),
    }
}
