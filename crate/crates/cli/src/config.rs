//! Experiment configuration.
//!
//! Values are resolved in three layers: built-in defaults, the TOML file
//! given by `--config`, then command-line flags. Every layer is merged as
//! JSON objects before the typed parameters are deserialized and validated.

use crate::error::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SUBCOMMANDS: [&str; 7] = ["barrier", "orbit", "construct", "approx", "herman", "melnikov", "sweep"];
const GLOBAL_KEYS: [&str; 5] = ["subcommand", "out", "tol", "workers", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `V = 0`.
    Integrable,
    /// `u_n` alone.
    Cos,
    /// `u_n + v_n` with the compactly supported bump.
    Cinf,
    /// `u_n + v_n` with the trigonometric-polynomial bump.
    Analytic,
    /// Herman's toy potential with `V' = phi_n`.
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum HermanMode {
    Toy,
    Smooth,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// Periodized quintic B-spline, knot spacing `pi/4`: C^4 but not C^5.
    Bspline,
    /// `exp(cos x)`.
    Expcos,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Global {
    pub out: PathBuf,
    /// Overrides the subcommand's own tolerance where it has one.
    pub tol: Option<f64>,
    pub workers: usize,
    /// Recorded for replay; no current subcommand draws random numbers.
    pub seed: Option<u64>,
}

impl Default for Global {
    fn default() -> Self {
        Global {
            out: PathBuf::from("."),
            tol: None,
            workers: 1,
            seed: None,
        }
    }
}

impl Global {
    fn validate(&self, v: &mut Vec<String>) {
        if self.workers == 0 {
            v.push("workers must be >= 1".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                v.push(format!("tol must be positive and finite (got {t})"));
            }
        }
    }
}

pub trait Params: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn validate(&self, v: &mut Vec<String>);
}

fn family_checks(name: &str, family: Family, n: u32, a: f64, k: u32, sigma: f64, v: &mut Vec<String>) {
    if family != Family::Integrable && n == 0 {
        v.push(format!("{name}.n must be >= 1"));
    }
    if matches!(family, Family::Cos | Family::Cinf | Family::Analytic) && !(a > 0.0 && a.is_finite()) {
        v.push(format!("{name}.a must be positive (got {a})"));
    }
    if matches!(family, Family::Cinf | Family::Analytic) && k == 0 {
        v.push(format!("{name}.k must be >= 1"));
    }
    if family == Family::Cinf && n > 0 && a > 0.0 && (n as f64).powf(-a) > 0.5 {
        v.push(format!("{name}: bump support n^-a = {} exceeds 1/2", (n as f64).powf(-a)));
    }
    if family == Family::Analytic && !(sigma > 0.0 && sigma < 1.0) {
        v.push(format!("{name}.sigma must lie in (0, 1) (got {sigma})"));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierParams {
    pub family: Family,
    pub n: u32,
    pub a: f64,
    pub k: u32,
    pub sigma: f64,
    /// `p/q`, `p/q+`, `p/q-`, `golden` or a decimal irrational.
    pub symbol: String,
    pub xi_grid: usize,
    /// Truncation window in periods on each side of the pinned site.
    pub window: usize,
    /// Barrier level above which an irrational symbol is reported destroyed.
    pub threshold: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            family: Family::Cinf,
            n: 2,
            a: 1.0,
            k: 2,
            sigma: 0.3,
            symbol: "0+".into(),
            xi_grid: 64,
            window: 1,
            threshold: 1e-8,
        }
    }
}

impl Params for BarrierParams {
    const NAME: &'static str = "barrier";
    fn validate(&self, v: &mut Vec<String>) {
        family_checks(Self::NAME, self.family, self.n, self.a, self.k, self.sigma, v);
        if let Err(e) = self.symbol.parse::<twistkam::aubry::RotationSymbol>() {
            v.push(format!("barrier.symbol: {e}"));
        }
        if self.xi_grid == 0 {
            v.push("barrier.xi_grid must be >= 1".into());
        }
        if self.window == 0 {
            v.push("barrier.window must be >= 1".into());
        }
        if !(self.threshold > 0.0) {
            v.push(format!("barrier.threshold must be positive (got {})", self.threshold));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    pub family: Family,
    pub n: u32,
    pub a: f64,
    pub k: u32,
    pub sigma: f64,
    pub p: i64,
    pub q: i64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            family: Family::Cinf,
            n: 2,
            a: 1.0,
            k: 2,
            sigma: 0.3,
            p: 1,
            q: 2,
        }
    }
}

impl Params for OrbitParams {
    const NAME: &'static str = "orbit";
    fn validate(&self, v: &mut Vec<String>) {
        family_checks(Self::NAME, self.family, self.n, self.a, self.k, self.sigma, v);
        if self.q < 1 {
            v.push(format!("orbit.q must be >= 1 (got {})", self.q));
        } else if twistkam::rotation::gcd(self.p, self.q) != 1 {
            v.push(format!("orbit: {}/{} is not in lowest terms", self.p, self.q));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructParams {
    pub family: Family,
    pub n: u32,
    pub a: f64,
    pub k: u32,
    pub sigma: f64,
    /// Smoothness orders `r` of the reported `C^r` norms.
    pub orders: Vec<f64>,
    /// Rescaling factor `q` in `q^-2 V(q x)`.
    pub rescale: u32,
    /// Strip half-width for the analytic norm of trigonometric potentials.
    pub strip: Option<f64>,
    /// Sample count of the CSV profile over one period.
    pub samples: usize,
}

impl Default for ConstructParams {
    fn default() -> Self {
        ConstructParams {
            family: Family::Cinf,
            n: 2,
            a: 1.0,
            k: 2,
            sigma: 0.3,
            orders: vec![0.0, 1.0, 2.0],
            rescale: 1,
            strip: None,
            samples: 256,
        }
    }
}

impl Params for ConstructParams {
    const NAME: &'static str = "construct";
    fn validate(&self, v: &mut Vec<String>) {
        if !matches!(self.family, Family::Cos | Family::Cinf | Family::Analytic) {
            v.push("construct.family must be cos, cinf or analytic".into());
        }
        family_checks(Self::NAME, self.family, self.n, self.a, self.k, self.sigma, v);
        if self.orders.is_empty() || self.orders.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
            v.push("construct.orders must be a non-empty list of nonnegative numbers".into());
        }
        if self.rescale == 0 {
            v.push("construct.rescale must be >= 1".into());
        }
        if let Some(r) = self.strip {
            if !(r > 0.0) {
                v.push(format!("construct.strip must be positive (got {r})"));
            }
        }
        if self.samples == 0 {
            v.push("construct.samples must be >= 1".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxParams {
    pub function: TestFunction,
    /// Orders of the de la Vallée Poussin means.
    pub m: Vec<usize>,
    /// Jackson smoothness order.
    pub r: u32,
    pub points: usize,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams {
            function: TestFunction::Bspline,
            m: vec![8, 16, 32, 64, 128],
            r: 5,
            points: 1 << 14,
        }
    }
}

impl Params for ApproxParams {
    const NAME: &'static str = "approx";
    fn validate(&self, v: &mut Vec<String>) {
        if self.m.is_empty() || self.m.contains(&0) {
            v.push("approx.m must be a non-empty list of positive orders".into());
        }
        if self.r == 0 {
            v.push("approx.r must be >= 1".into());
        }
        let need = self.m.iter().max().map_or(0, |&m| 4 * m);
        if self.points <= need {
            v.push(format!("approx.points must exceed 4 max(m) = {need} (got {})", self.points));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HermanParams {
    pub mode: HermanMode,
    pub n: u64,
    pub d: usize,
    /// Height factor `c` of the smooth construction.
    pub amplitude: f64,
    /// Grid points per axis (smooth), or CSV samples over one period (toy, analytic).
    pub points: usize,
    pub k: u32,
    pub eps: f64,
    pub sigma: f64,
    pub degree_cap: usize,
}

impl Default for HermanParams {
    fn default() -> Self {
        HermanParams {
            mode: HermanMode::Toy,
            n: 4,
            d: 2,
            amplitude: 4.0,
            points: 128,
            k: 6,
            eps: 0.2,
            sigma: 0.05,
            degree_cap: 512,
        }
    }
}

impl Params for HermanParams {
    const NAME: &'static str = "herman";
    fn validate(&self, v: &mut Vec<String>) {
        if self.n == 0 {
            v.push("herman.n must be >= 1".into());
        }
        if self.mode == HermanMode::Toy && self.n > u32::MAX as u64 {
            v.push("herman.n is too large for the toy family".into());
        }
        if self.mode != HermanMode::Toy && !(1..=3).contains(&self.d) {
            v.push(format!("herman.d must be 1, 2 or 3 (got {})", self.d));
        }
        if !(self.amplitude > 0.0) {
            v.push(format!("herman.amplitude must be positive (got {})", self.amplitude));
        }
        if self.points < 2 {
            v.push("herman.points must be >= 2".into());
        }
        if self.mode == HermanMode::Analytic {
            if self.k == 0 {
                v.push("herman.k must be >= 1".into());
            }
            if !(self.eps > 0.0 && self.eps < 1.0) {
                v.push(format!("herman.eps must lie in (0, 1) (got {})", self.eps));
            }
            if !(self.sigma > 0.0) {
                v.push(format!("herman.sigma must be positive (got {})", self.sigma));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MelnikovParams {
    pub delta: f64,
    pub omega2: f64,
    pub q2: f64,
    /// Coupling strength; the coupled system is integrated when positive.
    pub mu: f64,
    /// Quadrature window in units of `1/sqrt(delta)`.
    pub window: f64,
    pub coupling_window: f64,
    /// Range of `sqrt(delta) T` for the energy-time fit.
    pub fit_lo: f64,
    pub fit_hi: f64,
    pub fit_points: usize,
    /// CSV samples of the separatrix integrand.
    pub samples: usize,
}

impl Default for MelnikovParams {
    fn default() -> Self {
        MelnikovParams {
            delta: 0.04,
            omega2: 1.0,
            q2: 0.0,
            mu: 0.0,
            window: 40.0,
            coupling_window: 10.0,
            fit_lo: 5.0,
            fit_hi: 20.0,
            fit_points: 16,
            samples: 401,
        }
    }
}

impl Params for MelnikovParams {
    const NAME: &'static str = "melnikov";
    fn validate(&self, v: &mut Vec<String>) {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            v.push(format!("melnikov.delta must be positive (got {})", self.delta));
        }
        if !self.omega2.is_finite() || !self.q2.is_finite() {
            v.push("melnikov.omega2 and melnikov.q2 must be finite".into());
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            v.push(format!("melnikov.mu must be nonnegative (got {})", self.mu));
        }
        if !(self.window > 0.0) || !(self.coupling_window > 0.0) {
            v.push("melnikov.window and melnikov.coupling_window must be positive".into());
        }
        if !(self.fit_lo > 0.0 && self.fit_hi > self.fit_lo) {
            v.push(format!("melnikov fit range [{}, {}] is empty or not positive", self.fit_lo, self.fit_hi));
        }
        if self.fit_points < 3 {
            v.push("melnikov.fit_points must be >= 3".into());
        }
        if self.samples < 2 {
            v.push("melnikov.samples must be >= 2".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// Swept parameter on the horizontal axis.
    pub x: String,
    /// Dotted path of a scalar in each point's results, e.g. `norms.0.seminorm`.
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub command: String,
    /// Parameter name to values. `a+b` assigns each value to both parameters.
    pub ranges: BTreeMap<String, Vec<Value>>,
    pub fit: Option<FitSpec>,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            command: String::new(),
            ranges: BTreeMap::new(),
            fit: None,
        }
    }
}

impl Params for SweepParams {
    const NAME: &'static str = "sweep";
    fn validate(&self, v: &mut Vec<String>) {
        if !SUBCOMMANDS[..6].contains(&self.command.as_str()) {
            v.push(format!("sweep.command must be one of {:?} (got '{}')", &SUBCOMMANDS[..6], self.command));
        }
        if self.ranges.is_empty() {
            v.push("sweep.ranges is empty".into());
        }
        for (k, vals) in &self.ranges {
            if vals.is_empty() {
                v.push(format!("sweep range '{k}' is empty"));
            }
            for val in vals {
                if let Some(x) = val.as_f64() {
                    if !x.is_finite() {
                        v.push(format!("sweep range '{k}' has a non-finite value"));
                    }
                } else if !val.is_string() {
                    v.push(format!("sweep range '{k}' holds {val}, expected numbers or strings"));
                }
            }
        }
        if let Some(f) = &self.fit {
            if !self.ranges.keys().any(|k| k.split('+').any(|p| p == f.x)) {
                v.push(format!("sweep.fit.x '{}' is not a swept parameter", f.x));
            }
        }
    }
}

/// Parsed `--config` file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    table: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
        let Value::Object(table) = serde_json::to_value(table).expect("TOML maps to JSON") else {
            unreachable!()
        };
        let unknown: Vec<String> = table
            .keys()
            .filter(|k| !GLOBAL_KEYS.contains(&k.as_str()) && !SUBCOMMANDS.contains(&k.as_str()))
            .map(|k| format!("unknown top-level key '{k}' in {}", path.display()))
            .collect();
        if !unknown.is_empty() {
            return Err(CliError::Validation(unknown));
        }
        Ok(ConfigFile { table })
    }

    pub fn subcommand(&self) -> Option<&str> {
        self.table.get("subcommand").and_then(Value::as_str)
    }

    pub fn section(&self, name: &str) -> Option<&Value> {
        self.table.get(name)
    }

    fn globals(&self) -> Value {
        Value::Object(
            self.table
                .iter()
                .filter(|(k, _)| GLOBAL_KEYS[1..].contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

/// Copies the non-null entries of `top` into `base`. A scalar given for a
/// list-valued parameter becomes a one-element list.
pub fn overlay(base: &mut Value, top: &Value) {
    let (Value::Object(b), Value::Object(t)) = (base, top) else {
        return;
    };
    for (k, v) in t {
        if v.is_null() {
            continue;
        }
        let v = match b.get(k) {
            Some(Value::Array(_)) if !v.is_array() => Value::Array(vec![v.clone()]),
            _ => v.clone(),
        };
        b.insert(k.clone(), v);
    }
}

/// Defaults, then `layers` in order, then validation. Violations are collected, not short-circuited.
pub fn resolve<P: Params>(layers: &[&Value]) -> Result<P, Vec<String>> {
    let mut v = serde_json::to_value(P::default()).expect("defaults serialize");
    for l in layers {
        if !l.is_object() && !l.is_null() {
            return Err(vec![format!("[{}] must be a table", P::NAME)]);
        }
        overlay(&mut v, l);
    }
    let p: P = serde_json::from_value(v).map_err(|e| vec![format!("{}: {e}", P::NAME)])?;
    let mut errs = Vec::new();
    p.validate(&mut errs);
    if errs.is_empty() {
        Ok(p)
    } else {
        Err(errs)
    }
}

pub fn resolve_global(file: &ConfigFile, flags: &Value) -> Result<Global, Vec<String>> {
    let mut v = serde_json::to_value(Global::default()).expect("defaults serialize");
    overlay(&mut v, &file.globals());
    overlay(&mut v, flags);
    let g: Global = serde_json::from_value(v).map_err(|e| vec![format!("global settings: {e}")])?;
    let mut errs = Vec::new();
    g.validate(&mut errs);
    if errs.is_empty() {
        Ok(g)
    } else {
        Err(errs)
    }
}
