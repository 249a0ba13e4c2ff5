//! Truncated Taylor arithmetic, used to differentiate closed-form bump profiles.
//!
//! A `Jet` stores the normalized coefficients `f^(k)(x0) / k!` for `k = 0..=ORDER`.

use std::ops::{Add, Mul, Neg, Sub};

pub const ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; ORDER + 1]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; ORDER + 1];
        a[0] = c;
        Jet(a)
    }

    /// The identity function `x` expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut a = [0.0; ORDER + 1];
        a[0] = x0;
        a[1] = 1.0;
        Jet(a)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// The `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.0[k] * fact
    }

    pub fn scale(self, c: f64) -> Self {
        Jet(self.0.map(|v| v * c))
    }

    pub fn recip(self) -> Self {
        let a = self.0;
        let mut b = [0.0; ORDER + 1];
        b[0] = 1.0 / a[0];
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s * b[0];
        }
        Jet(b)
    }

    pub fn exp(self) -> Self {
        let a = self.0;
        let mut e = [0.0; ORDER + 1];
        e[0] = a[0].exp();
        for k in 1..=ORDER {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Jet(e)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self.0;
        for (x, y) in r.iter_mut().zip(o.0) {
            *x += y;
        }
        Jet(r)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = [0.0; ORDER + 1];
        for (i, x) in self.0.iter().enumerate() {
            for (j, y) in o.0.iter().enumerate().take(ORDER + 1 - i) {
                r[i + j] += x * y;
            }
        }
        Jet(r)
    }
}
