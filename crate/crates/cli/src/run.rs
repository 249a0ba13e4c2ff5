//! One experiment per subcommand: compute, then tabulate.

use crate::config::*;
use crate::error::CliError;
use crate::output::{Artifact, Cell};
use serde_json::{json, Value};
use std::f64::consts::PI;
use twistkam::aubry::{
    barrier_profile, minimal_periodic_orbit, periodic_hessian_min_eigenvalue, segment_action, BarrierOptions,
    RotationSymbol,
};
use twistkam::herman::{
    make_t_analytic, make_t_smooth, toy_family, AnalyticTParams, CriterionReport, SmoothTParams,
};
use twistkam::melnikov::{
    coupling_check, energy_time_fit, melnikov_amplitude, melnikov_closed_form, melnikov_gap, melnikov_quadrature,
    separatrix, PendulumParams,
};
use twistkam::perturb::{
    loglog_slope, make_analytic_v, make_bump_v, make_u, norm_report, AnalyticPerturbParams, SmoothBumpParams,
};
use twistkam::potential::PeriodicPotential;
use twistkam::rotation::rescale_problem;
use twistkam::torus::TorusField;
use twistkam::trigapprox::{jackson_report, spectral_derivative_norm};
use twistkam::twistmap::{stationarity_residual, GeneratingFunction};

/// A fully resolved subcommand.
#[derive(Debug, Clone)]
pub enum Experiment {
    Barrier(BarrierParams),
    Orbit(OrbitParams),
    Construct(ConstructParams),
    Approx(ApproxParams),
    Herman(HermanParams),
    Melnikov(MelnikovParams),
}

impl Experiment {
    pub fn params_json(&self) -> Value {
        match self {
            Experiment::Barrier(p) => serde_json::to_value(p),
            Experiment::Orbit(p) => serde_json::to_value(p),
            Experiment::Construct(p) => serde_json::to_value(p),
            Experiment::Approx(p) => serde_json::to_value(p),
            Experiment::Herman(p) => serde_json::to_value(p),
            Experiment::Melnikov(p) => serde_json::to_value(p),
        }
        .expect("params serialize")
    }

    /// Resolves `name` from defaults and the given layers.
    pub fn resolve(name: &str, layers: &[&Value]) -> Result<Self, Vec<String>> {
        Ok(match name {
            "barrier" => Experiment::Barrier(resolve(layers)?),
            "orbit" => Experiment::Orbit(resolve(layers)?),
            "construct" => Experiment::Construct(resolve(layers)?),
            "approx" => Experiment::Approx(resolve(layers)?),
            "herman" => Experiment::Herman(resolve(layers)?),
            "melnikov" => Experiment::Melnikov(resolve(layers)?),
            other => return Err(vec![format!("unknown subcommand '{other}'")]),
        })
    }

    pub fn run(&self, tol: Option<f64>) -> Result<Artifact, CliError> {
        match self {
            Experiment::Barrier(p) => barrier(p, tol),
            Experiment::Orbit(p) => orbit(p, tol),
            Experiment::Construct(p) => construct(p),
            Experiment::Approx(p) => approx(p),
            Experiment::Herman(p) => herman(p),
            Experiment::Melnikov(p) => melnikov(p, tol),
        }
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn potential(family: Family, n: u32, a: f64, k: u32, sigma: f64) -> Result<(PeriodicPotential, Value), CliError> {
    Ok(match family {
        Family::Integrable => (PeriodicPotential::zero(), Value::Null),
        Family::Cos => (make_u(n, a)?, Value::Null),
        Family::Cinf => {
            let bp = SmoothBumpParams { n, a, k };
            let v = PeriodicPotential::Sum(vec![make_u(n, a)?, make_bump_v(bp)?]);
            (v, json!({"bump_peak": bp.peak(), "bump_half_width": bp.half_width(), "s": bp.s()}))
        }
        Family::Analytic => {
            let av = make_analytic_v(AnalyticPerturbParams::new(n, a, k, sigma))?;
            let info = serde_json::to_value(&av).expect("serializable");
            (PeriodicPotential::Sum(vec![make_u(n, a)?, av.potential]), info)
        }
        Family::Toy => (toy_family(n)?.potential, Value::Null),
    })
}

fn barrier(p: &BarrierParams, tol: Option<f64>) -> Result<Artifact, CliError> {
    let (v, family_info) = potential(p.family, p.n, p.a, p.k, p.sigma)?;
    let h = GeneratingFunction::new(v);
    let symbol: RotationSymbol = p.symbol.parse()?;
    let opts = BarrierOptions {
        window: p.window,
        stability: tol.unwrap_or(BarrierOptions::default().stability),
        ..BarrierOptions::default()
    };
    let prof = barrier_profile(&h, symbol, p.xi_grid, &opts)?;
    let (witness, sup) = prof.sup();
    let rows = prof
        .xi_grid
        .iter()
        .zip(&prof.details)
        .map(|(&xi, d)| vec![Cell::F(xi), Cell::F(d.value), Cell::I(d.sites as i64), Cell::F(d.residual)])
        .collect();
    let verdict = match symbol {
        RotationSymbol::Irrational(_) if sup > p.threshold => json!("destroyed"),
        RotationSymbol::Irrational(_) => json!("exists-compatible"),
        _ => Value::Null,
    };
    let max_unc = prof.details.iter().map(|d| d.uncertainty).fold(0.0, f64::max);
    Ok(Artifact {
        columns: cols(&["xi", "barrier", "window", "residual"]),
        rows,
        results: json!({
            "symbol": symbol.to_string(),
            "omega": symbol.omega(),
            "period": h.period(),
            "sup_barrier": sup,
            "witness_xi": witness,
            "verdict": verdict,
            "truncation_window": prof.truncation_window,
            "max_uncertainty": max_unc,
            "stability_tol": opts.stability,
            "family": family_info,
        }),
    })
}

fn orbit(p: &OrbitParams, tol: Option<f64>) -> Result<Artifact, CliError> {
    let (v, family_info) = potential(p.family, p.n, p.a, p.k, p.sigma)?;
    let h = GeneratingFunction::new(v);
    let c = minimal_periodic_orbit(&h, p.p, p.q, None)?;
    let residual = stationarity_residual(&h, &c);
    let limit = tol.unwrap_or(1e-9);
    if residual > limit {
        return Err(twistkam::Error::NonConvergence {
            iterations: 0,
            residual,
        }
        .into());
    }
    let rows = (0..p.q)
        .map(|i| {
            vec![
                Cell::I(i),
                Cell::F(c.extended(i)),
                Cell::F(c.extended(i + 1) - c.extended(i)),
            ]
        })
        .collect();
    let lo = c.values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Artifact {
        columns: cols(&["i", "x", "step"]),
        rows,
        results: json!({
            "p": p.p,
            "q": p.q,
            "period": h.period(),
            "action": segment_action(&h, &c),
            "stationarity_residual": residual,
            "residual_tol": limit,
            "hessian_min_eigenvalue": periodic_hessian_min_eigenvalue(&h, &c),
            "monotone": c.is_monotone(),
            "rotation_number": (c.extended(p.q) - c.extended(0)) / (p.q as f64 * h.period()),
            "min_site": lo,
            "family": family_info,
        }),
    })
}

fn construct(p: &ConstructParams) -> Result<Artifact, CliError> {
    let (v, family_info) = potential(p.family, p.n, p.a, p.k, p.sigma)?;
    let q = rescale_problem(&v, p.rescale);
    let rep = norm_report(&q, &p.orders, p.strip)?;
    let l = q.period();
    let rows = (0..p.samples)
        .map(|i| {
            let x = l * i as f64 / p.samples as f64;
            vec![Cell::F(x), Cell::F(q.value(x)), Cell::F(q.derivative(x, 1)), Cell::F(q.derivative(x, 2))]
        })
        .collect();
    Ok(Artifact {
        columns: cols(&["x", "v", "dv", "d2v"]),
        rows,
        results: json!({
            "period": l,
            "rescale": p.rescale,
            "norms": rep.rows,
            "strip": rep.strip.map(|(s, b)| json!({"sup": s, "bound": b})),
            "family": family_info,
        }),
    })
}

fn quintic_bspline(t: f64) -> f64 {
    const BINOM: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
    let mut s = 0.0;
    for (i, c) in BINOM.iter().enumerate() {
        let u = t - i as f64;
        if u > 0.0 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * c * u.powi(5);
        }
    }
    s / 120.0
}

const KNOT: f64 = PI / 4.0;

fn periodic_bspline(x: f64) -> f64 {
    let t = x.rem_euclid(2.0 * PI) / KNOT;
    (-1..=1).map(|k| quintic_bspline(t + 8.0 * k as f64)).sum()
}

fn approx(p: &ApproxParams) -> Result<Artifact, CliError> {
    let f = match p.function {
        TestFunction::Bspline => TorusField::from_fn(vec![p.points], |x| periodic_bspline(x[0])),
        TestFunction::Expcos => TorusField::from_fn(vec![p.points], |x| x[0].cos().exp()),
    };
    // the fifth derivative of the spline is a step function, so use its exact sup
    let dnorm = match (p.function, p.r) {
        (TestFunction::Bspline, 5) => 10.0 / KNOT.powi(5),
        _ => spectral_derivative_norm(&f, 0, p.r),
    };
    let mut rows = Vec::new();
    let (mut errs, mut cs) = (Vec::new(), Vec::new());
    for &m in &p.m {
        let rep = jackson_report(&f, &[m], &[p.r], &[dnorm])?;
        rows.push(vec![
            Cell::I(m as i64),
            Cell::F(rep.achieved_error),
            Cell::F(rep.bound_terms[0]),
            Cell::F(rep.fitted_constant),
        ]);
        errs.push(rep.achieved_error);
        cs.push(rep.fitted_constant);
    }
    let slope = if p.m.len() >= 2 {
        let x: Vec<f64> = p.m.iter().map(|&m| m as f64).collect();
        Some(loglog_slope(&x, &errs))
    } else {
        None
    };
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    Ok(Artifact {
        columns: cols(&["m", "error", "bound", "fitted_constant"]),
        rows,
        results: json!({
            "r": p.r,
            "derivative_norm": dnorm,
            "errors": errs,
            "fitted_constants": cs,
            "slope": slope,
            "c_min": lo,
            "c_max": hi,
            "c_spread": hi / lo,
        }),
    })
}

fn criterion_json(r: &CriterionReport) -> Value {
    json!({
        "min": r.min_t,
        "max": r.max_t,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "holds": r.holds,
        "margin": r.margin,
        "lipschitz_bound_g": r.lipschitz_bound_g,
        "denominator_collapse": r.denominator_collapse,
        "asymptotic_lhs": r.asymptotic_lhs,
        "asymptotic_rhs": r.asymptotic_rhs,
        "asymptotic_holds": r.asymptotic_holds,
        "argmin": r.argmin,
        "argmax": r.argmax,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn herman(p: &HermanParams) -> Result<Artifact, CliError> {
    match p.mode {
        HermanMode::Toy => {
            let toy = toy_family(p.n as u32)?;
            let l = 2.0 * PI / p.n as f64;
            let rows = (0..p.points)
                .map(|i| {
                    let x = l * i as f64 / p.points as f64;
                    vec![Cell::F(x), Cell::F(toy.phi.value(x)), Cell::F(toy.phi.d1(x))]
                })
                .collect();
            Ok(Artifact {
                columns: cols(&["x", "phi", "dphi"]),
                rows,
                results: merge(criterion_json(&toy.report), json!({"period": l})),
            })
        }
        HermanMode::Smooth => {
            let sp = SmoothTParams {
                n: p.n,
                d: p.d,
                amplitude: p.amplitude,
                points_per_axis: p.points,
            };
            let t = make_t_smooth(sp)?;
            let stride: usize = (0..p.d).map(|j| p.points.pow(j as u32)).sum();
            let rows = (0..p.points)
                .map(|i| {
                    let idx = i * stride;
                    vec![Cell::F(t.field.point(idx)[0]), Cell::F(t.field.samples()[idx])]
                })
                .collect();
            let extra = json!({
                "mean": t.field.mean(),
                "beta": t.beta,
                "radius": t.radius,
                "predicted_min": t.predicted_min,
            });
            Ok(Artifact {
                columns: cols(&["s", "t"]),
                rows,
                results: merge(criterion_json(&t.report), extra),
            })
        }
        HermanMode::Analytic => {
            let ap = AnalyticTParams {
                n: p.n,
                d: p.d,
                k: p.k,
                eps: p.eps,
                sigma: p.sigma,
                degree_cap: p.degree_cap,
            };
            let t = make_t_analytic(ap)?;
            let rows = (0..p.points)
                .map(|i| {
                    let s = 2.0 * PI * i as f64 / p.points as f64;
                    vec![Cell::F(s), Cell::F(t.poly.eval(&vec![s; p.d]))]
                })
                .collect();
            let extra = json!({
                "mean": t.poly.mean(),
                "degree": t.degree,
                "m": t.m,
                "beta": t.beta,
                "radius": t.radius,
                "approx_error": t.approx_error,
                "degree_constant": t.degree_constant,
                "max_ratio": t.max_ratio,
                "predicted_threshold": t.predicted_threshold,
                "grid": t.grid,
            });
            Ok(Artifact {
                columns: cols(&["s", "t"]),
                rows,
                results: merge(criterion_json(&t.report), extra),
            })
        }
    }
}

fn melnikov(p: &MelnikovParams, tol: Option<f64>) -> Result<Artifact, CliError> {
    let mut m = twistkam::melnikov::MelnikovParams::new(p.delta, p.omega2, p.q2)?;
    m.mu = p.mu;
    let closed = melnikov_closed_form(m);
    let quad = melnikov_quadrature(m, p.window)?;
    let rel_err = if closed != 0.0 { ((quad - closed) / closed).abs() } else { (quad - closed).abs() };
    let agree_tol = tol.unwrap_or(1e-6);
    let pend = PendulumParams::new(p.delta)?;
    let (slope, intercept, res) = energy_time_fit(pend, p.fit_lo, p.fit_hi, p.fit_points)?;
    let coupling = if p.mu > 0.0 {
        serde_json::to_value(coupling_check(m, p.coupling_window)?).expect("serializable")
    } else {
        Value::Null
    };
    let sd = p.delta.sqrt();
    let span = p.window / sd;
    let rows = (0..p.samples)
        .map(|i| {
            let t = -span + 2.0 * span * i as f64 / (p.samples - 1) as f64;
            let (q, v) = separatrix(pend, t);
            let integrand = p.delta * (1.0 - q.cos()) * (p.omega2 * t + p.q2).cos();
            vec![Cell::F(t), Cell::F(q), Cell::F(v), Cell::F(integrand)]
        })
        .collect();
    Ok(Artifact {
        columns: cols(&["t", "q", "v", "integrand"]),
        rows,
        results: json!({
            "closed_form": closed,
            "quadrature": quad,
            "rel_err": rel_err,
            "agree_tol": agree_tol,
            "agrees": rel_err < agree_tol,
            "amplitude": melnikov_amplitude(p.delta, p.omega2),
            "gap": melnikov_gap(p.delta, p.omega2),
            "energy_time": {
                "slope": slope,
                "intercept": intercept,
                "max_residual": res,
                "y_range": slope.abs() * (p.fit_hi - p.fit_lo),
            },
            "coupling": coupling,
        }),
    })
}
