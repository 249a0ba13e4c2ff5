//! Cartesian parameter sweeps over one subcommand.

use crate::config::{FitSpec, SweepParams};
use crate::error::CliError;
use crate::output::{json_line, Artifact, Cell};
use crate::run::Experiment;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use twistkam::perturb::linear_fit;

/// One point of the product: `(range key, value)` in key order.
pub type Point = Vec<(String, Value)>;

pub fn points(ranges: &std::collections::BTreeMap<String, Vec<Value>>) -> Vec<Point> {
    let mut out: Vec<Point> = vec![Vec::new()];
    for (k, vals) in ranges {
        out = out
            .into_iter()
            .flat_map(|pt| {
                vals.iter().map(move |v| {
                    let mut pt = pt.clone();
                    pt.push((k.clone(), v.clone()));
                    pt
                })
            })
            .collect();
    }
    out
}

fn point_layer(pt: &Point) -> Value {
    let mut m = Map::new();
    for (k, v) in pt {
        for name in k.split('+') {
            m.insert(name.to_string(), v.clone());
        }
    }
    Value::Object(m)
}

pub struct PointOutcome {
    pub record: Value,
    pub artifact: Option<Artifact>,
}

fn run_point(index: usize, pt: &Point, command: &str, base: &Value, tol: Option<f64>) -> PointOutcome {
    let params: Map<String, Value> = pt.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let layer = point_layer(pt);
    let mut record = json!({"point": index, "params": params});
    let exp = match Experiment::resolve(command, &[base, &layer]) {
        Ok(e) => e,
        Err(errs) => {
            record["status"] = json!("invalid");
            record["error"] = json!(errs);
            return PointOutcome { record, artifact: None };
        }
    };
    record["config"] = exp.params_json();
    match exp.run(tol) {
        Ok(a) => {
            record["status"] = json!("ok");
            record["results"] = a.results.clone();
            PointOutcome {
                record,
                artifact: Some(a),
            }
        }
        Err(e) => {
            record["status"] = json!("error");
            record["exit_code"] = json!(e.exit_code());
            record["error"] = json!(e.to_string());
            PointOutcome { record, artifact: None }
        }
    }
}

/// Runs every point on a pool of `workers` threads. Results come back in point order.
pub fn run_sweep(p: &SweepParams, base: &Value, tol: Option<f64>, workers: usize) -> Result<Vec<PointOutcome>, CliError> {
    let pts = points(&p.ranges);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(vec![format!("cannot start {workers} workers: {e}")]))?;
    Ok(pool.install(|| {
        pts.par_iter()
            .enumerate()
            .map(|(i, pt)| run_point(i, pt, &p.command, base, tol))
            .collect()
    }))
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, key| match key.parse::<usize>() {
        Ok(i) if cur.is_array() => cur.get(i),
        _ => cur.get(key),
    })
}

fn scalar(v: &Value) -> Option<f64> {
    match v {
        Value::Array(a) if a.len() == 1 => a[0].as_f64(),
        _ => v.as_f64(),
    }
}

/// Log-log least squares of results at `fit.y` against the swept `fit.x`.
pub fn fit(spec: &FitSpec, outcomes: &[PointOutcome]) -> Value {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for o in outcomes {
        let x = lookup(&o.record["config"], &spec.x).and_then(scalar);
        let y = lookup(&o.record["results"], &spec.y).and_then(scalar);
        if let (Some(x), Some(y)) = (x, y) {
            if x > 0.0 && y != 0.0 {
                xs.push(x.ln());
                ys.push(y.abs().ln());
            }
        }
    }
    if xs.len() < 2 {
        return json!({"x": spec.x, "y": spec.y, "points": xs.len(), "slope": null});
    }
    let (slope, intercept, res) = linear_fit(&xs, &ys);
    json!({"x": spec.x, "y": spec.y, "points": xs.len(), "slope": slope, "intercept": intercept, "max_residual": res})
}

/// `(columns, rows)` of the concatenated CSV: point index, swept values, then the command's columns.
pub fn table(p: &SweepParams, outcomes: &[PointOutcome]) -> (Vec<String>, Vec<Vec<Cell>>) {
    let keys: Vec<String> = p.ranges.keys().cloned().collect();
    let mut columns = vec!["point".to_string()];
    columns.extend(keys.iter().cloned());
    if let Some(a) = outcomes.iter().find_map(|o| o.artifact.as_ref()) {
        columns.extend(a.columns.iter().cloned());
    }
    let mut rows = Vec::new();
    for o in outcomes {
        let Some(a) = &o.artifact else { continue };
        let idx = o.record["point"].as_i64().unwrap_or(-1);
        let head: Vec<Cell> = keys
            .iter()
            .map(|k| match &o.record["params"][k] {
                Value::Number(n) if n.is_i64() => Cell::I(n.as_i64().unwrap()),
                Value::Number(n) => Cell::F(n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => Cell::S(s.clone()),
                other => Cell::S(other.to_string()),
            })
            .collect();
        for r in &a.rows {
            let mut row = vec![Cell::I(idx)];
            row.extend(head.iter().cloned());
            row.extend(r.iter().cloned());
            rows.push(row);
        }
    }
    (columns, rows)
}

pub fn json_lines(outcomes: &[PointOutcome]) -> String {
    outcomes.iter().map(|o| json_line(&o.record) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn product_order() {
        let mut r = BTreeMap::new();
        r.insert("a".to_string(), vec![json!(1), json!(2)]);
        r.insert("b".to_string(), vec![json!("x"), json!("y"), json!("z")]);
        let p = points(&r);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![("a".into(), json!(1)), ("b".into(), json!("y"))]);
        assert_eq!(p[3][0].1, json!(2));
    }

    #[test]
    fn linked_keys() {
        let layer = point_layer(&vec![("n+rescale".to_string(), json!(8))]);
        assert_eq!(layer, json!({"n": 8, "rescale": 8}));
    }

    #[test]
    fn dotted_lookup() {
        let v = json!({"norms": [{"seminorm": 2.0}]});
        assert_eq!(lookup(&v, "norms.0.seminorm"), Some(&json!(2.0)));
        assert_eq!(lookup(&v, "norms.3"), None);
    }
}
