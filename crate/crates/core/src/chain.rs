//! Box-constrained minimization of discrete Frenkel–Kontorova actions.
//!
//! Two chain shapes occur: clamped segments (fixed values just outside both
//! ends) and cyclic segments closed by `x_q = x_0 + shift`. Both have a
//! tridiagonal (or cyclic tridiagonal) Hessian `2 + V''(x_i)`, `-1`.

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::tridiag;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub gtol: f64,
    pub max_newton: usize,
    pub descent_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gtol: 1e-12,
            max_newton: 400,
            descent_steps: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub x: Vec<f64>,
    pub energy: f64,
    pub projected_gradient: f64,
    pub iterations: usize,
}

pub trait Chain {
    fn energy(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Solves `(H_FF + lambda I) d_F = -g_F` with `d = 0` on active sites.
    fn newton(&self, x: &[f64], g: &[f64], active: &[bool], lambda: f64) -> Option<Vec<f64>>;
    fn lower(&self, _i: usize) -> f64 {
        f64::NEG_INFINITY
    }
    fn upper(&self, _i: usize) -> f64 {
        f64::INFINITY
    }
    fn curvature(&self) -> f64;
}

pub struct Clamped<'a> {
    pub v: &'a PeriodicPotential,
    pub left: f64,
    pub right: f64,
    pub lo: Option<&'a [f64]>,
    pub hi: Option<&'a [f64]>,
    pub curv: f64,
}

impl<'a> Clamped<'a> {
    pub fn new(v: &'a PeriodicPotential, left: f64, right: f64, curv: f64) -> Self {
        Clamped {
            v,
            left,
            right,
            lo: None,
            hi: None,
            curv,
        }
    }

    pub fn with_box(mut self, lo: &'a [f64], hi: &'a [f64]) -> Self {
        self.lo = Some(lo);
        self.hi = Some(hi);
        self
    }

    /// Per-bond terms `h(x_{i-1}, x_i)` including the final bond into `right`.
    pub fn terms(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len() + 1);
        let mut prev = self.left;
        for &xi in x.iter().chain(std::iter::once(&self.right)) {
            out.push(0.5 * (xi - prev) * (xi - prev) + self.v.value(xi));
            prev = xi;
        }
        out
    }
}

impl Chain for Clamped<'_> {
    fn energy(&self, x: &[f64]) -> f64 {
        self.terms(x).iter().sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let prev = if i == 0 { self.left } else { x[i - 1] };
                let next = if i + 1 == n { self.right } else { x[i + 1] };
                2.0 * x[i] - prev - next + self.v.d1(x[i])
            })
            .collect()
    }

    fn newton(&self, x: &[f64], g: &[f64], active: &[bool], lambda: f64) -> Option<Vec<f64>> {
        let n = x.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            if active[i] {
                diag[i] = 1.0;
            } else {
                diag[i] = 2.0 + self.v.d2(x[i]) + lambda;
                rhs[i] = -g[i];
            }
            if i + 1 < n && !active[i] && !active[i + 1] {
                off[i] = -1.0;
            }
        }
        tridiag::solve_spd(&diag, &off, &rhs)
    }

    fn lower(&self, i: usize) -> f64 {
        self.lo.map_or(f64::NEG_INFINITY, |l| l[i])
    }

    fn upper(&self, i: usize) -> f64 {
        self.hi.map_or(f64::INFINITY, |h| h[i])
    }

    fn curvature(&self) -> f64 {
        self.curv
    }
}

pub struct Cyclic<'a> {
    pub v: &'a PeriodicPotential,
    pub shift: f64,
    pub curv: f64,
}

impl Cyclic<'_> {
    fn neighbours(&self, x: &[f64], i: usize) -> (f64, f64) {
        let n = x.len();
        let prev = if i == 0 { x[n - 1] - self.shift } else { x[i - 1] };
        let next = if i + 1 == n { x[0] + self.shift } else { x[i + 1] };
        (prev, next)
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] += 2.0 + self.v.d2(x[i]);
            let j = (i + 1) % n;
            h[(i, j)] -= 1.0;
            h[(j, i)] -= 1.0;
        }
        h
    }
}

impl Chain for Cyclic<'_> {
    fn energy(&self, x: &[f64]) -> f64 {
        let n = x.len();
        (0..n)
            .map(|i| {
                let (_, next) = self.neighbours(x, i);
                0.5 * (next - x[i]) * (next - x[i]) + self.v.value(next)
            })
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let (prev, next) = self.neighbours(x, i);
                2.0 * x[i] - prev - next + self.v.d1(x[i])
            })
            .collect()
    }

    fn newton(&self, x: &[f64], g: &[f64], _active: &[bool], lambda: f64) -> Option<Vec<f64>> {
        let n = x.len();
        let mut h = self.hessian(x);
        for i in 0..n {
            h[(i, i)] += lambda;
        }
        let chol = h.cholesky()?;
        let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|v| -v));
        let d = chol.solve(&rhs);
        if d.iter().all(|v| v.is_finite()) {
            Some(d.iter().copied().collect())
        } else {
            None
        }
    }

    fn curvature(&self) -> f64 {
        self.curv
    }
}

fn project<C: Chain>(c: &C, x: &mut [f64]) {
    for (i, xi) in x.iter_mut().enumerate() {
        let (a, b) = (c.lower(i), c.upper(i));
        // bounds taken from neighbouring translates can cross by roundoff
        *xi = if a <= b { xi.clamp(a, b) } else { 0.5 * (a + b) };
    }
}

/// Active sites (at a bound with the gradient pushing outward) and the
/// infinity norm of the projected gradient.
fn active_set<C: Chain>(c: &C, x: &[f64], g: &[f64]) -> (Vec<bool>, f64) {
    let mut act = vec![false; x.len()];
    let mut pg: f64 = 0.0;
    for i in 0..x.len() {
        let at_lo = x[i] <= c.lower(i) && g[i] > 0.0;
        let at_hi = x[i] >= c.upper(i) && g[i] < 0.0;
        act[i] = at_lo || at_hi;
        if !act[i] {
            pg = pg.max(g[i].abs());
        }
    }
    (act, pg)
}

/// Projected gradient descent followed by Levenberg-damped projected Newton
/// with Armijo backtracking.
pub fn minimize<C: Chain>(c: &C, x0: Vec<f64>, opts: SolveOptions) -> Result<Solved> {
    let mut x = x0;
    if x.is_empty() {
        let e = c.energy(&x);
        return Ok(Solved {
            x,
            energy: e,
            projected_gradient: 0.0,
            iterations: 0,
        });
    }
    project(c, &mut x);
    let step = 1.0 / (4.0 + c.curvature());
    for _ in 0..opts.descent_steps {
        let g = c.gradient(&x);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        project(c, &mut x);
    }

    let mut e = c.energy(&x);
    let mut g = c.gradient(&x);
    let (mut act, mut pg) = active_set(c, &x, &g);
    let mut stalls = 0;
    for it in 0..opts.max_newton {
        if pg <= opts.gtol {
            return Ok(Solved {
                x,
                energy: e,
                projected_gradient: pg,
                iterations: it,
            });
        }
        let mut lambda = 0.0;
        let mut d = None;
        for _ in 0..30 {
            if let Some(dd) = c.newton(&x, &g, &act, lambda) {
                d = Some(dd);
                break;
            }
            lambda = if lambda == 0.0 {
                1e-8 * (4.0 + c.curvature())
            } else {
                lambda * 10.0
            };
        }
        let mut d = d.unwrap_or_else(|| g.iter().map(|v| -v * step).collect());
        for (di, &a) in d.iter_mut().zip(&act) {
            if a {
                *di = 0.0;
            }
        }
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            d = g
                .iter()
                .zip(&act)
                .map(|(v, &a)| if a { 0.0 } else { -v * step })
                .collect();
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            project(c, &mut xn);
            let en = c.energy(&xn);
            let dec: f64 = xn
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((a, b), gi)| (a - b) * gi)
                .sum();
            let gn = c.gradient(&xn);
            let (actn, pgn) = active_set(c, &xn, &gn);
            let armijo = en <= e + 1e-4 * dec;
            // below energy roundoff, accept undamped Newton steps that shrink the gradient
            let newton_tail = t == 1.0 && lambda == 0.0 && pgn < 0.5 * pg && (en - e).abs() <= 1e-11 * (1.0 + e.abs());
            if armijo || newton_tail {
                x = xn;
                e = en;
                g = gn;
                act = actn;
                pg = pgn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        }
    }
    if pg <= 1e-10 {
        Ok(Solved {
            x,
            energy: e,
            projected_gradient: pg,
            iterations: opts.max_newton,
        })
    } else {
        Err(Error::NonConvergence {
            iterations: opts.max_newton,
            residual: pg,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_integrable_is_linear() {
        let v = PeriodicPotential::zero();
        let c = Clamped::new(&v, 0.0, 1.0, 0.0);
        let s = minimize(&c, vec![0.3, 0.1, 0.9], SolveOptions::default()).unwrap();
        for (i, xi) in s.x.iter().enumerate() {
            assert!((xi - (i + 1) as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn box_is_respected() {
        let v = PeriodicPotential::zero();
        let lo = [0.0, 0.0, 0.0];
        let hi = [0.1, 0.1, 0.1];
        let c = Clamped::new(&v, 0.0, 1.0, 0.0).with_box(&lo, &hi);
        let s = minimize(&c, vec![0.05; 3], SolveOptions::default()).unwrap();
        assert!(s.x.iter().all(|&x| x <= 0.1 + 1e-15));
        assert!((s.x[2] - 0.1).abs() < 1e-15);
    }
}
