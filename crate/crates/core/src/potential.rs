//! Periodic potentials `V` entering the generating function `h(x,x') = (x-x')^2/2 + V(x')`.

use crate::jet::{Jet, ORDER};
use crate::trigpoly::TrigPoly;
use std::f64::consts::PI;

/// Compactly supported mollifier `peak * exp(1 - 1/(1 - t^2))`, `t = (x - center)/half_width`,
/// repeated with period 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub peak: f64,
}

impl Bump {
    fn jet(&self, x: f64) -> Jet {
        let d = x - self.center;
        let d = d - d.round();
        let t = d / self.half_width;
        if t.abs() >= 1.0 {
            return Jet::constant(0.0);
        }
        let tj = Jet::variable(t);
        let g = (Jet::constant(1.0) - tj * tj).recip();
        let profile = (Jet::constant(1.0) - g).exp().scale(self.peak);
        // chain rule for t = (x - c)/w: k-th Taylor coefficient scales by w^{-k}
        let mut out = profile.0;
        let mut f = 1.0;
        for c in out.iter_mut() {
            *c *= f;
            f /= self.half_width;
        }
        Jet(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PeriodicPotential {
    Zero { period: f64 },
    /// `n^{-a} (1 - cos 2 pi x)`.
    NamedU { n: u32, a: f64 },
    Bump(Bump),
    Trig(TrigPoly),
    Sum(Vec<PeriodicPotential>),
    /// `q^{-2} P(q x)`.
    Rescaled { inner: Box<PeriodicPotential>, q: u32 },
}

impl PeriodicPotential {
    pub fn zero() -> Self {
        PeriodicPotential::Zero { period: 1.0 }
    }

    pub fn period(&self) -> f64 {
        match self {
            PeriodicPotential::Zero { period } => *period,
            PeriodicPotential::NamedU { .. } | PeriodicPotential::Bump(_) => 1.0,
            PeriodicPotential::Trig(p) => p.period,
            PeriodicPotential::Sum(parts) => parts.first().map_or(1.0, |p| p.period()),
            PeriodicPotential::Rescaled { inner, .. } => inner.period(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PeriodicPotential::Zero { .. } => true,
            PeriodicPotential::Sum(parts) => parts.iter().all(|p| p.is_zero()),
            PeriodicPotential::Rescaled { inner, .. } => inner.is_zero(),
            _ => false,
        }
    }

    /// Derivative of the given order. Orders above 4 are only available for
    /// trigonometric polynomials and return NaN otherwise.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        match self {
            PeriodicPotential::Zero { .. } => 0.0,
            PeriodicPotential::NamedU { n, a } => {
                let c = (*n as f64).powf(-a);
                let w = 2.0 * PI;
                let th = w * x;
                match order {
                    0 => c * (1.0 - th.cos()),
                    _ => {
                        // d^j/dx^j (-cos wx) = -w^j cos(wx + j pi/2)
                        -c * w.powi(order as i32) * (th + order as f64 * PI / 2.0).cos()
                    }
                }
            }
            PeriodicPotential::Bump(b) => {
                if order as usize > ORDER {
                    return f64::NAN;
                }
                b.jet(x).derivative(order as usize)
            }
            PeriodicPotential::Trig(p) => p.derivative(x, order),
            PeriodicPotential::Sum(parts) => parts.iter().map(|p| p.derivative(x, order)).sum(),
            PeriodicPotential::Rescaled { inner, q } => {
                let q = *q as f64;
                q.powi(order as i32 - 2) * inner.derivative(q * x, order)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.derivative(x, 1)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.derivative(x, 2)
    }

    /// Sup norm of the `order`-th derivative over one period, on a uniform grid
    /// followed by golden-section refinement around the largest sample.
    pub fn sup_derivative(&self, order: u32, samples: usize) -> f64 {
        if let PeriodicPotential::Rescaled { inner, q } = self {
            return (*q as f64).powi(order as i32 - 2) * inner.sup_derivative(order, samples);
        }
        let l = self.period();
        let h = l / samples as f64;
        let f = |x: f64| self.derivative(x, order).abs();
        let (mut best_i, mut best) = (0usize, f(0.0));
        for i in 1..samples {
            let v = f(i as f64 * h);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let c = best_i as f64 * h;
        best.max(golden_max(f, c - h, c + h, 60))
    }

    /// `sup |V^{(order)}|` bound used for step-size control.
    pub fn curvature_bound(&self) -> f64 {
        self.sup_derivative(2, 512) * 1.1
    }
}

/// Maximum of a unimodal function on `[a, b]` by golden-section search.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
