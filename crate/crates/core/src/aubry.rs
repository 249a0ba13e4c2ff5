//! Discrete variational engine: actions, minimal configurations for every
//! rotation symbol, Peierls barriers and the invariant-circle test.
//!
//! Lift coordinates are measured in absolute units; rotation numbers and
//! symbols are measured in units of the potential period `L`, so a `(p, q)`
//! periodic configuration satisfies `x_{i+q} = x_i + p L`.

use crate::chain::{self, Clamped, Cyclic, SolveOptions};
use crate::error::{Error, Result};
use crate::rotation::{self, convergents};
use crate::twistmap::{stationarity_residual, GeneratingFunction};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RotationSymbol {
    Rational { p: i64, q: i64 },
    Plus { p: i64, q: i64 },
    Minus { p: i64, q: i64 },
    Irrational(f64),
}

impl RotationSymbol {
    fn check(p: i64, q: i64) -> Result<()> {
        if q < 1 || rotation::gcd(p, q) != 1 {
            return Err(Error::InvalidArgument(format!("{p}/{q} is not in lowest terms with q >= 1")));
        }
        Ok(())
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        Self::check(p, q).map(|_| RotationSymbol::Rational { p, q })
    }

    pub fn plus(p: i64, q: i64) -> Result<Self> {
        Self::check(p, q).map(|_| RotationSymbol::Plus { p, q })
    }

    pub fn minus(p: i64, q: i64) -> Result<Self> {
        Self::check(p, q).map(|_| RotationSymbol::Minus { p, q })
    }

    pub fn irrational(omega: f64) -> Result<Self> {
        if !omega.is_finite() || rotation::is_rational(omega, rotation::RATIONAL_TOL, rotation::RATIONAL_QMAX) {
            return Err(Error::InvalidArgument(format!("{omega} is rational at working precision")));
        }
        Ok(RotationSymbol::Irrational(omega))
    }

    pub fn omega(&self) -> f64 {
        match *self {
            RotationSymbol::Rational { p, q } | RotationSymbol::Plus { p, q } | RotationSymbol::Minus { p, q } => {
                p as f64 / q as f64
            }
            RotationSymbol::Irrational(w) => w,
        }
    }
}

impl fmt::Display for RotationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let frac = |p: i64, q: i64| if q == 1 { format!("{p}") } else { format!("{p}/{q}") };
        match *self {
            RotationSymbol::Rational { p, q } => write!(f, "{}", frac(p, q)),
            RotationSymbol::Plus { p, q } => write!(f, "{}+", frac(p, q)),
            RotationSymbol::Minus { p, q } => write!(f, "{}-", frac(p, q)),
            RotationSymbol::Irrational(w) => write!(f, "{w}"),
        }
    }
}

impl FromStr for RotationSymbol {
    type Err = Error;

    /// Accepts `p/q`, `p/q+`, `p/q-`, an integer with optional sign suffix,
    /// `golden`, or a decimal irrational.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "golden" {
            return Self::irrational((5f64.sqrt() - 1.0) / 2.0);
        }
        let (body, side) = match s.strip_suffix('+') {
            Some(b) => (b, 1),
            None => match s.strip_suffix('-') {
                Some(b) if !b.is_empty() => (b, -1),
                _ => (s, 0),
            },
        };
        let bad = || Error::InvalidArgument(format!("cannot parse rotation symbol '{s}'"));
        let (p, q) = if let Some((p, q)) = body.split_once('/') {
            (p.parse::<i64>().map_err(|_| bad())?, q.parse::<i64>().map_err(|_| bad())?)
        } else if let Ok(p) = body.parse::<i64>() {
            (p, 1)
        } else {
            if side != 0 {
                return Err(bad());
            }
            return Self::irrational(body.parse::<f64>().map_err(|_| bad())?);
        };
        match side {
            1 => Self::plus(p, q),
            -1 => Self::minus(p, q),
            _ => Self::rational(p, q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Closure {
    /// `x_{i+q} = x_i + p L`; values hold exactly one period.
    Periodic { p: i64, q: usize },
    /// First and last values are fixed anchors.
    Clamped,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    pub values: Vec<f64>,
    /// Lattice index of `values[0]`.
    pub first_index: i64,
    pub closure: Closure,
    pub symbol: Option<RotationSymbol>,
    /// Lift period `L` of the potential.
    pub period: f64,
}

impl Configuration {
    pub fn free(values: Vec<f64>, period: f64) -> Self {
        Configuration {
            values,
            first_index: 0,
            closure: Closure::Free,
            symbol: None,
            period,
        }
    }

    pub fn periodic(values: Vec<f64>, p: i64, period: f64) -> Self {
        let q = values.len();
        Configuration {
            values,
            first_index: 0,
            closure: Closure::Periodic { p, q },
            symbol: None,
            period,
        }
    }

    /// Value at lattice index `i` for periodic closures (periodic extension).
    pub fn extended(&self, i: i64) -> f64 {
        match self.closure {
            Closure::Periodic { p, q } => {
                let q = q as i64;
                let r = i.rem_euclid(q);
                let k = i.div_euclid(q);
                self.values[r as usize] + (k * p) as f64 * self.period
            }
            _ => self.values[(i - self.first_index) as usize],
        }
    }

    /// `x_i < x_{i+1}` along the stored values (and across the period seam).
    pub fn is_monotone(&self) -> bool {
        let n = self.values.len() as i64;
        let last = match self.closure {
            Closure::Periodic { .. } => n,
            _ => n - 1,
        };
        (0..last).all(|i| self.extended(i) < self.extended(i + 1))
            || (0..last).all(|i| self.extended(i) > self.extended(i + 1))
    }
}

/// Sum of `h` over consecutive pairs; periodic closures include the bond that
/// closes the period.
pub fn segment_action(h: &GeneratingFunction, c: &Configuration) -> f64 {
    let x = &c.values;
    let mut s: f64 = x.windows(2).map(|w| h.h(w[0], w[1])).sum();
    if let Closure::Periodic { p, .. } = c.closure {
        s += h.h(x[x.len() - 1], x[0] + p as f64 * c.period);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierOptions {
    /// Truncation window in periods `q` on each side of the pinned site.
    pub window: usize,
    /// Minimum number of sites on each side regardless of `window * q`.
    pub min_sites: usize,
    /// Windows are doubled until successive values differ by less than this.
    pub stability: f64,
    pub max_sites: usize,
    /// Largest convergent denominator used for irrational symbols.
    pub q_max: i64,
    /// Multi-start anchors per period for periodic minimization.
    pub anchors: usize,
    /// Values below this are reported as lying in the minimal set.
    pub zero_tol: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            window: 1,
            min_sites: 50,
            stability: 1e-9,
            max_sites: 3200,
            q_max: 150,
            anchors: 8,
            zero_tol: 1e-13,
        }
    }
}

fn solve_opts() -> SolveOptions {
    SolveOptions::default()
}

/// Minimal `(p, q)` periodic configuration and its period action.
pub fn minimal_periodic_orbit(
    h: &GeneratingFunction,
    p: i64,
    q: i64,
    seed: Option<&Configuration>,
) -> Result<Configuration> {
    periodic_minimizer(h, p, q, seed, BarrierOptions::default().anchors).map(|(c, _)| c)
}

fn periodic_minimizer(
    h: &GeneratingFunction,
    p: i64,
    q: i64,
    seed: Option<&Configuration>,
    anchors: usize,
) -> Result<(Configuration, f64)> {
    RotationSymbol::check(p, q)?;
    let l = h.period();
    let qu = q as usize;
    let cyc = Cyclic {
        v: &h.potential,
        shift: p as f64 * l,
        curv: h.potential.curvature_bound(),
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(s) = seed {
        if s.values.len() != qu {
            return Err(Error::InvalidArgument("seed length must equal q".into()));
        }
        starts.push(s.values.clone());
    }
    for j in 0..anchors.max(1) {
        let x0 = l * j as f64 / (q as f64 * anchors.max(1) as f64);
        starts.push((0..qu).map(|i| x0 + i as f64 * p as f64 * l / q as f64).collect());
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut last_err = None;
    for x0 in starts {
        match chain::minimize(&cyc, x0, solve_opts()) {
            Ok(s) => {
                let better = match &best {
                    None => true,
                    Some((_, e)) => s.energy < e - 1e-12 * (1.0 + e.abs()),
                };
                if better {
                    best = Some((s.x, s.energy));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (x, e) = match best {
        Some(b) => b,
        None => return Err(last_err.expect("at least one start")),
    };
    let mut c = Configuration::periodic(x, p, l);
    if seed.is_none() {
        c = canonical_translate(&c);
    }
    c.symbol = Some(RotationSymbol::Rational { p, q });
    let res = stationarity_residual(h, &c);
    if res > 1e-10 {
        return Err(Error::NonConvergence {
            iterations: solve_opts().max_newton,
            residual: res,
        });
    }
    Ok((c, e))
}

/// Index/lift translate of a periodic configuration: `(T x)_i = x_{i+j} + k L`.
fn translate(c: &Configuration, j: i64, k: i64) -> Configuration {
    let Closure::Periodic { q, .. } = c.closure else {
        unreachable!("translate is only used on periodic configurations")
    };
    let mut t = c.clone();
    t.values = (0..q as i64).map(|i| c.extended(i + j) + k as f64 * c.period).collect();
    t
}

/// Lower and upper neighbouring translates bracketing `xi` at index 0:
/// `lower_0 <= xi < upper_0`.
fn bracket(c: &Configuration, xi: f64) -> (Configuration, Configuration) {
    let Closure::Periodic { q, .. } = c.closure else {
        unreachable!()
    };
    let l = c.period;
    let mut lo = (0i64, 0i64, f64::NEG_INFINITY);
    let mut hi = (0i64, 0i64, f64::INFINITY);
    for j in 0..q as i64 {
        let v = c.extended(j);
        let mut k = ((xi - v) / l).floor() as i64;
        // guard against rounding in the floor
        while v + (k as f64) * l > xi {
            k -= 1;
        }
        while v + ((k + 1) as f64) * l <= xi {
            k += 1;
        }
        let below = v + k as f64 * l;
        if below > lo.2 {
            lo = (j, k, below);
        }
        let above = below + l;
        if above < hi.2 {
            hi = (j, k + 1, above);
        }
    }
    (translate(c, lo.0, lo.1), translate(c, hi.0, hi.1))
}

fn canonical_translate(c: &Configuration) -> Configuration {
    let (lo, hi) = bracket(c, 0.0);
    if lo.values[0] == 0.0 {
        lo
    } else {
        hi
    }
}

/// Smallest eigenvalue of the period Hessian at a periodic configuration.
pub fn periodic_hessian_min_eigenvalue(h: &GeneratingFunction, c: &Configuration) -> f64 {
    let Closure::Periodic { p, .. } = c.closure else {
        return f64::NAN;
    };
    let cyc = Cyclic {
        v: &h.potential,
        shift: p as f64 * c.period,
        curv: 0.0,
    };
    let m = cyc.hessian(&c.values);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Per-bond terms for the chain `anchor_left, x..., anchor_right`.
fn bond_terms(h: &GeneratingFunction, left: f64, x: &[f64], right: f64) -> Vec<f64> {
    Clamped::new(&h.potential, left, right, 0.0).terms(x)
}

/// Neighbouring translates of the periodic minimizer sampled on `-n..=n`.
struct Corridor {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n: i64,
}

impl Corridor {
    fn new(lo: &Configuration, hi: &Configuration, n: i64) -> Self {
        Corridor {
            lower: (-n..=n).map(|i| lo.extended(i)).collect(),
            upper: (-n..=n).map(|i| hi.extended(i)).collect(),
            n,
        }
    }

    fn at(&self, i: i64) -> (f64, f64) {
        let k = (i + self.n) as usize;
        (self.lower[k], self.upper[k])
    }

    /// Step from the `from` side to the `to` side at site `c` over the indices `range`.
    fn step_seed(&self, range: std::ops::Range<i64>, c: i64, side: Side) -> Vec<f64> {
        range
            .map(|i| {
                let (l, u) = self.at(i);
                let before = i < c;
                match (side, before) {
                    (Side::Plus, true) | (Side::Minus, false) => l,
                    _ => u,
                }
            })
            .collect()
    }

    fn slice(&self, range: std::ops::Range<i64>, upper: bool) -> Vec<f64> {
        let v = if upper { &self.upper } else { &self.lower };
        range.map(|i| v[(i + self.n) as usize]).collect()
    }
}

struct ClampedResult {
    x: Vec<f64>,
    terms: Vec<f64>,
}

/// Minimizes a clamped chain over the given seeds, keeping the best.
fn best_clamped(
    h: &GeneratingFunction,
    left: f64,
    right: f64,
    lo: &[f64],
    hi: &[f64],
    seeds: Vec<Vec<f64>>,
) -> Result<ClampedResult> {
    let curv = h.potential.curvature_bound();
    let ch = Clamped::new(&h.potential, left, right, curv).with_box(lo, hi);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut last_err = None;
    for s in seeds {
        match chain::minimize(&ch, s, solve_opts()) {
            Ok(r) => {
                if best.as_ref().is_none_or(|(_, e)| r.energy < *e) {
                    best = Some((r.x, r.energy));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (x, _) = best.ok_or_else(|| last_err.expect("at least one seed"))?;
    let terms = ch.terms(&x);
    Ok(ClampedResult { x, terms })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierValue {
    pub value: f64,
    /// Sites on each side of the pinned site actually used (0 for periodic symbols).
    pub sites: usize,
    /// Convergent denominator used for irrational symbols.
    pub q: i64,
    /// Difference to the previous window or convergent.
    pub uncertainty: f64,
    /// Stationarity residual of the pinned minimizer on its free sites.
    pub residual: f64,
}

/// Peierls barrier of a periodic symbol `p/q` at `xi`, given the minimizer.
fn periodic_barrier(h: &GeneratingFunction, xstar: &Configuration, amin: f64, xi: f64) -> Result<(f64, f64)> {
    let Closure::Periodic { p, .. } = xstar.closure else {
        unreachable!()
    };
    let (lo, hi) = bracket(xstar, xi);
    if xi == lo.values[0] {
        return Ok((0.0, 0.0));
    }
    let right = xi + p as f64 * xstar.period;
    let l = &lo.values[1..];
    let u = &hi.values[1..];
    let theta = (xi - lo.values[0]) / (hi.values[0] - lo.values[0]);
    let interp: Vec<f64> = l.iter().zip(u).map(|(a, b)| a + theta * (b - a)).collect();
    let r = best_clamped(h, xi, right, l, u, vec![interp, l.to_vec(), u.to_vec()])?;
    let e: f64 = r.terms.iter().sum();
    let res = free_residual(h, xi, &r.x, right, l, u);
    Ok((e - amin, res))
}

/// Stationarity residual over sites strictly inside their box.
fn free_residual(h: &GeneratingFunction, left: f64, x: &[f64], right: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let n = x.len();
    (0..n)
        .filter(|&i| x[i] > lo[i] && x[i] < hi[i])
        .map(|i| {
            let prev = if i == 0 { left } else { x[i - 1] };
            let next = if i + 1 == n { right } else { x[i + 1] };
            (2.0 * x[i] - prev - next + h.potential.d1(x[i])).abs()
        })
        .fold(0.0, f64::max)
}

fn sites_for(q: i64, window: usize, min_sites: usize) -> usize {
    (window * q as usize).max(min_sites).div_ceil(q as usize) * q as usize
}

/// Barrier of a one-sided symbol on a fixed truncation window of `n` sites per side.
fn one_sided_barrier_fixed(
    h: &GeneratingFunction,
    xstar: &Configuration,
    side: Side,
    xi: f64,
    n: i64,
) -> Result<(f64, f64)> {
    let q = match xstar.closure {
        Closure::Periodic { q, .. } => q as i64,
        _ => unreachable!(),
    };
    let (lo, hi) = bracket(xstar, xi);
    let cor = Corridor::new(&lo, &hi, n);
    let (a, b) = match side {
        Side::Plus => (cor.at(-n).0, cor.at(n).1),
        Side::Minus => (cor.at(-n).1, cor.at(n).0),
    };
    let left_range = -n + 1..0;
    let right_range = 1..n;
    let (ll, lu) = (cor.slice(left_range.clone(), false), cor.slice(left_range.clone(), true));
    let (rl, ru) = (cor.slice(right_range.clone(), false), cor.slice(right_range.clone(), true));

    let mut lseeds: Vec<Vec<f64>> = [-n / 2, -2 * q, -q, 0]
        .iter()
        .map(|&c| cor.step_seed(left_range.clone(), c, side))
        .collect();
    lseeds.push(cor.step_seed(left_range.clone(), -n, side));
    let mut rseeds: Vec<Vec<f64>> = [1, q, 2 * q, n / 2]
        .iter()
        .map(|&c| cor.step_seed(right_range.clone(), c, side))
        .collect();
    rseeds.push(cor.step_seed(right_range.clone(), n, side));
    let left = best_clamped(h, a, xi, &ll, &lu, lseeds)?;
    let right = best_clamped(h, xi, b, &rl, &ru, rseeds)?;

    let mut pinned = left.x.clone();
    pinned.push(xi);
    pinned.extend(&right.x);
    let mut pinned_terms = left.terms.clone();
    pinned_terms.extend(&right.terms);

    let full_range = -n + 1..n;
    let (fl, fu) = (cor.slice(full_range.clone(), false), cor.slice(full_range.clone(), true));
    let mut fseeds: Vec<Vec<f64>> = (0..q.min(8)).map(|c| cor.step_seed(full_range.clone(), c, side)).collect();
    fseeds.push(pinned.clone());
    let free = best_clamped(h, a, b, &fl, &fu, fseeds)?;

    let value: f64 = pinned_terms.iter().zip(&free.terms).map(|(p, f)| p - f).sum();
    let res = free_residual(h, a, &left.x, xi, &ll, &lu).max(free_residual(h, xi, &right.x, b, &rl, &ru));
    Ok((value, res))
}

/// Peierls barrier `P_s(xi)`.
pub fn peierls_barrier(h: &GeneratingFunction, s: RotationSymbol, xi: f64, window: usize) -> Result<f64> {
    let opts = BarrierOptions {
        window,
        ..BarrierOptions::default()
    };
    peierls_barrier_with(h, s, xi, &opts).map(|b| b.value)
}

/// Precomputed minimizers for evaluating a barrier at many points.
pub struct BarrierContext<'a> {
    h: &'a GeneratingFunction,
    symbol: RotationSymbol,
    opts: BarrierOptions,
    /// `(p, q, minimizer, action)` per rational approximant.
    levels: Vec<(i64, i64, Configuration, f64)>,
}

impl<'a> BarrierContext<'a> {
    pub fn new(h: &'a GeneratingFunction, symbol: RotationSymbol, opts: BarrierOptions) -> Result<Self> {
        let pairs: Vec<(i64, i64)> = match symbol {
            RotationSymbol::Rational { p, q } | RotationSymbol::Plus { p, q } | RotationSymbol::Minus { p, q } => {
                vec![(p, q)]
            }
            RotationSymbol::Irrational(w) => {
                let cs = convergents(w, 64);
                let mut v: Vec<(i64, i64)> = cs.pairs.into_iter().filter(|&(_, q)| q <= opts.q_max).collect();
                if v.len() > 2 {
                    v.drain(..v.len() - 2);
                }
                v
            }
        };
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("no convergent below q_max".into()));
        }
        let levels = pairs
            .into_iter()
            .map(|(p, q)| periodic_minimizer(h, p, q, None, opts.anchors).map(|(c, a)| (p, q, c, a)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BarrierContext {
            h,
            symbol,
            opts,
            levels,
        })
    }

    pub fn symbol(&self) -> RotationSymbol {
        self.symbol
    }

    pub fn minimizer(&self) -> &Configuration {
        &self.levels.last().expect("nonempty").2
    }

    pub fn eval(&self, xi: f64) -> Result<BarrierValue> {
        match self.symbol {
            RotationSymbol::Rational { q, .. } => {
                let (_, _, c, a) = &self.levels[0];
                let (v, res) = periodic_barrier(self.h, c, *a, xi)?;
                Ok(BarrierValue {
                    value: v,
                    sites: 0,
                    q,
                    uncertainty: 0.0,
                    residual: res,
                })
            }
            RotationSymbol::Irrational(_) => {
                let vals = self
                    .levels
                    .iter()
                    .map(|(_, _, c, a)| periodic_barrier(self.h, c, *a, xi))
                    .collect::<Result<Vec<_>>>()?;
                let (last, res) = vals[vals.len() - 1];
                let prev = if vals.len() > 1 { vals[vals.len() - 2].0 } else { last };
                Ok(BarrierValue {
                    value: last,
                    sites: 0,
                    q: self.levels.last().expect("nonempty").1,
                    uncertainty: (last - prev).abs(),
                    residual: res,
                })
            }
            RotationSymbol::Plus { q, .. } | RotationSymbol::Minus { q, .. } => {
                let side = if matches!(self.symbol, RotationSymbol::Plus { .. }) {
                    Side::Plus
                } else {
                    Side::Minus
                };
                let (_, _, c, a) = &self.levels[0];
                let (per, _) = periodic_barrier(self.h, c, *a, xi)?;
                if per <= self.opts.zero_tol {
                    return Ok(BarrierValue {
                        value: 0.0,
                        sites: 0,
                        q,
                        uncertainty: per.abs(),
                        residual: 0.0,
                    });
                }
                let mut n = sites_for(q, self.opts.window, self.opts.min_sites) as i64;
                let (mut v, mut res) = one_sided_barrier_fixed(self.h, c, side, xi, n)?;
                loop {
                    let n2 = 2 * n;
                    if n2 as usize > self.opts.max_sites {
                        return Ok(BarrierValue {
                            value: v,
                            sites: n as usize,
                            q,
                            uncertainty: f64::NAN,
                            residual: res,
                        });
                    }
                    let (v2, res2) = one_sided_barrier_fixed(self.h, c, side, xi, n2)?;
                    let diff = (v2 - v).abs();
                    v = v2;
                    res = res2;
                    n = n2;
                    if diff < self.opts.stability {
                        return Ok(BarrierValue {
                            value: v,
                            sites: n as usize,
                            q,
                            uncertainty: diff,
                            residual: res,
                        });
                    }
                }
            }
        }
    }

    /// Barrier on one fixed truncation window, without doubling (one-sided symbols only).
    pub fn eval_fixed_window(&self, xi: f64, sites: usize) -> Result<f64> {
        let side = match self.symbol {
            RotationSymbol::Plus { .. } => Side::Plus,
            RotationSymbol::Minus { .. } => Side::Minus,
            _ => return self.eval(xi).map(|b| b.value),
        };
        let (_, _, c, _) = &self.levels[0];
        one_sided_barrier_fixed(self.h, c, side, xi, sites as i64).map(|(v, _)| v)
    }
}

pub fn peierls_barrier_with(
    h: &GeneratingFunction,
    s: RotationSymbol,
    xi: f64,
    opts: &BarrierOptions,
) -> Result<BarrierValue> {
    BarrierContext::new(h, s, *opts)?.eval(xi)
}

/// Minimal heteroclinic of symbol `p/q+` (`Side::Plus`) or `p/q-`, on sites
/// `-window*q ..= window*q`, clamped to the neighbouring periodic translates.
pub fn minimal_heteroclinic(h: &GeneratingFunction, p: i64, q: i64, side: Side, window: usize) -> Result<Configuration> {
    let (xstar, _) = periodic_minimizer(h, p, q, None, BarrierOptions::default().anchors)?;
    let lam = periodic_hessian_min_eigenvalue(h, &xstar);
    if lam < 1e-9 {
        return Err(Error::DegenerateMinimizer { eigenvalue: lam });
    }
    let n = (window.max(1) * q as usize) as i64;
    let (lo, hi) = bracket(&xstar, xstar.values[0]);
    let cor = Corridor::new(&lo, &hi, n);
    let (a, b) = match side {
        Side::Plus => (cor.at(-n).0, cor.at(n).1),
        Side::Minus => (cor.at(-n).1, cor.at(n).0),
    };
    let range = -n + 1..n;
    let (fl, fu) = (cor.slice(range.clone(), false), cor.slice(range.clone(), true));
    let seeds: Vec<Vec<f64>> = (0..q.min(8)).map(|c| cor.step_seed(range.clone(), c, side)).collect();
    let r = best_clamped(h, a, b, &fl, &fu, seeds)?;

    let dev = match side {
        Side::Plus => (r.x[0] - cor.at(-n + 1).0).abs().max((r.x[r.x.len() - 1] - cor.at(n - 1).1).abs()),
        Side::Minus => (r.x[0] - cor.at(-n + 1).1).abs().max((r.x[r.x.len() - 1] - cor.at(n - 1).0).abs()),
    };
    if dev > 1e-8 {
        return Err(Error::WindowTooSmall { deviation: dev, limit: 1e-8 });
    }
    let mut values = vec![a];
    values.extend(&r.x);
    values.push(b);
    let c = Configuration {
        values,
        first_index: -n,
        closure: Closure::Clamped,
        symbol: Some(match side {
            Side::Plus => RotationSymbol::Plus { p, q },
            Side::Minus => RotationSymbol::Minus { p, q },
        }),
        period: h.period(),
    };
    let res = stationarity_residual(h, &c);
    if res > 1e-10 {
        return Err(Error::NonConvergence {
            iterations: solve_opts().max_newton,
            residual: res,
        });
    }
    Ok(c)
}

/// Action of a clamped configuration relative to the same number of bonds
/// along its lower periodic translate.
pub fn relative_action(h: &GeneratingFunction, c: &Configuration, reference: &Configuration) -> f64 {
    let x = &c.values;
    let n = x.len();
    let r: Vec<f64> = (0..n as i64).map(|i| reference.extended(c.first_index + i)).collect();
    let a = bond_terms(h, x[0], &x[1..n - 1], x[n - 1]);
    let b = bond_terms(h, r[0], &r[1..n - 1], r[n - 1]);
    a.iter().zip(&b).map(|(u, v)| u - v).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierProfile {
    pub symbol: RotationSymbol,
    pub xi_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub details: Vec<BarrierValue>,
    pub truncation_window: usize,
    pub tolerance: f64,
}

impl BarrierProfile {
    pub fn sup(&self) -> (f64, f64) {
        self.xi_grid
            .iter()
            .zip(&self.values)
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (&x, &v)| if v > acc.1 { (x, v) } else { acc })
    }
}

/// Barrier on the uniform grid `xi_j = j L / m`, evaluated in parallel.
pub fn barrier_profile(
    h: &GeneratingFunction,
    s: RotationSymbol,
    grid: usize,
    opts: &BarrierOptions,
) -> Result<BarrierProfile> {
    let ctx = BarrierContext::new(h, s, *opts)?;
    let l = h.period();
    let xi_grid: Vec<f64> = (0..grid).map(|j| l * j as f64 / grid as f64).collect();
    let details = xi_grid.par_iter().map(|&xi| ctx.eval(xi)).collect::<Result<Vec<_>>>()?;
    Ok(BarrierProfile {
        symbol: s,
        values: details.iter().map(|b| b.value).collect(),
        truncation_window: details.iter().map(|b| b.sites).max().unwrap_or(0),
        xi_grid,
        details,
        tolerance: opts.stability,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CircleVerdict {
    /// Every sampled barrier value is below the threshold. This does not prove a circle exists.
    ExistsCompatible { sup_barrier: f64 },
    Destroyed { witness_xi: f64, barrier: f64 },
}

/// Mather's criterion on a grid: a barrier value above `threshold` witnesses
/// that no invariant circle of rotation number `omega` exists.
pub fn invariant_circle_test(
    h: &GeneratingFunction,
    omega: f64,
    xi_grid_size: usize,
    threshold: f64,
    opts: &BarrierOptions,
) -> Result<(CircleVerdict, BarrierProfile)> {
    let s = RotationSymbol::irrational(omega)?;
    let prof = barrier_profile(h, s, xi_grid_size, opts)?;
    let (xi, sup) = prof.sup();
    let v = if sup > threshold {
        CircleVerdict::Destroyed {
            witness_xi: xi,
            barrier: sup,
        }
    } else {
        CircleVerdict::ExistsCompatible { sup_barrier: sup }
    };
    Ok((v, prof))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Census {
    pub count: usize,
    pub min_gap: f64,
}

/// Number of entries in `[lo, hi)` and the smallest gap `x_{i+1} - x_i` among them.
pub fn configuration_census(c: &Configuration, lo: f64, hi: f64) -> Census {
    let x = &c.values;
    let mut count = 0;
    let mut gap = f64::INFINITY;
    for i in 0..x.len() {
        if x[i] >= lo && x[i] < hi {
            count += 1;
            let next = match c.closure {
                Closure::Periodic { .. } => Some(c.extended(c.first_index + i as i64 + 1)),
                _ => x.get(i + 1).copied(),
            };
            if let Some(nx) = next {
                gap = gap.min(nx - x[i]);
            }
        }
    }
    Census { count, min_gap: gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PeriodicPotential;

    #[test]
    fn integrable_periodic_orbit_from_seed() {
        let h = GeneratingFunction::integrable();
        let seed = Configuration::periodic(vec![0.2, 0.5, 0.9], 1, 1.0);
        let c = minimal_periodic_orbit(&h, 1, 3, Some(&seed)).unwrap();
        for (i, x) in c.values.iter().enumerate() {
            assert!((x - (0.2 + i as f64 / 3.0)).abs() < 1e-12);
        }
        assert!((segment_action(&h, &c) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_of_u() {
        let h = GeneratingFunction::new(PeriodicPotential::NamedU { n: 1, a: 1.0 });
        let c = minimal_periodic_orbit(&h, 0, 1, None).unwrap();
        assert!(c.values[0].abs() < 1e-12);
        assert!(segment_action(&h, &c).abs() < 1e-14);
    }

    #[test]
    fn census_of_progression() {
        let c = Configuration::free((0..12).map(|i| i as f64 * 0.25).collect(), 1.0);
        let s = configuration_census(&c, 0.0, 1.0);
        assert_eq!(s.count, 4);
        assert!((s.min_gap - 0.25).abs() < 1e-15);
    }

    #[test]
    fn symbols_parse() {
        assert_eq!("0+".parse::<RotationSymbol>().unwrap(), RotationSymbol::Plus { p: 0, q: 1 });
        assert_eq!("1/2".parse::<RotationSymbol>().unwrap(), RotationSymbol::Rational { p: 1, q: 2 });
        assert_eq!("1/3-".parse::<RotationSymbol>().unwrap(), RotationSymbol::Minus { p: 1, q: 3 });
        assert!("2/4".parse::<RotationSymbol>().is_err());
        assert!("0.5".parse::<RotationSymbol>().is_err());
    }
}
