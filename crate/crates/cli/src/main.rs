//! `twistkam`: experiment runner for the twistkam library.
//!
//! Every run writes `<subcommand>.csv` and `<subcommand>.json` into the
//! output directory. Column orders are documented in `SCHEMA.md`.

mod config;
mod error;
mod output;
mod run;
mod sweep;

use clap::{Args, Parser, Subcommand};
use config::{ConfigFile, Family, FitSpec, HermanMode, Params, SweepParams, TestFunction};
use error::CliError;
use output::{ensure_dir, json_line, write_csv, write_text};
use run::Experiment;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "twistkam", version, about = "Converse KAM experiments for twist maps")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Serialize)]
struct GlobalArgs {
    /// TOML file with global keys and one table per subcommand
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parallel sweep points
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Tolerance override for the subcommand's own tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Peierls barrier profile on a xi grid
    Barrier(BarrierArgs),
    /// Minimal periodic orbit
    Orbit(OrbitArgs),
    /// Perturbation potentials and their norms
    Construct(ConstructArgs),
    /// de la Vallée Poussin approximation against the Jackson bound
    Approx(ApproxArgs),
    /// Herman's total-destruction criterion
    Herman(HermanArgs),
    /// Melnikov integral and pendulum fits
    Melnikov(MelnikovArgs),
    /// Cartesian sweep over another subcommand
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Serialize)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct BarrierArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    /// p/q, p/q+, p/q-, golden, or a decimal irrational
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    xi_grid: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct OrbitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<i64>,
    #[arg(long)]
    q: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<f64>>,
    #[arg(long)]
    rescale: Option<u32>,
    #[arg(long)]
    strip: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct ApproxArgs {
    #[arg(long, value_enum)]
    function: Option<TestFunction>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct HermanArgs {
    #[arg(long, value_enum)]
    mode: Option<HermanMode>,
    /// Shorthand for --mode toy
    #[arg(long, conflicts_with = "mode")]
    #[serde(skip)]
    toy: bool,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    degree_cap: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct MelnikovArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q2: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    coupling_window: Option<f64>,
    #[arg(long)]
    fit_lo: Option<f64>,
    #[arg(long)]
    fit_hi: Option<f64>,
    #[arg(long)]
    fit_points: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Subcommand run at every point
    #[arg(long)]
    command: Option<String>,
    /// KEY=V1,V2,...; KEY may join parameters with '+'
    #[arg(long = "range", value_name = "KEY=VALUES")]
    ranges: Vec<String>,
    /// X:Y, log-log fit of result Y (dotted path) against swept X
    #[arg(long, value_name = "X:Y")]
    fit: Option<String>,
}

fn flags<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("flags serialize")
}

fn parse_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        json!(i)
    } else if let Ok(x) = s.parse::<f64>() {
        json!(x)
    } else {
        json!(s)
    }
}

fn sweep_flags(a: &SweepArgs, v: &mut Vec<String>) -> Value {
    let mut out = serde_json::Map::new();
    if let Some(c) = &a.command {
        out.insert("command".into(), json!(c));
    }
    if !a.ranges.is_empty() {
        let mut ranges = serde_json::Map::new();
        for r in &a.ranges {
            match r.split_once('=') {
                Some((k, vals)) => {
                    let vals: Vec<Value> =
                        vals.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_value(s.trim())).collect();
                    ranges.insert(k.trim().to_string(), Value::Array(vals));
                }
                None => v.push(format!("--range '{r}' is not KEY=VALUES")),
            }
        }
        out.insert("ranges".into(), Value::Object(ranges));
    }
    if let Some(f) = &a.fit {
        match f.split_once(':') {
            Some((x, y)) => {
                out.insert("fit".into(), json!(FitSpec { x: x.into(), y: y.into() }));
            }
            None => v.push(format!("--fit '{f}' is not X:Y")),
        }
    }
    Value::Object(out)
}

fn summary(name: &str, global: &config::Global, params: Value, results: Value) -> String {
    let mut config = serde_json::to_value(global).expect("serializable");
    config["subcommand"] = json!(name);
    config["params"] = params;
    json_line(&json!({"subcommand": name, "config": config, "results": results})) + "\n"
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let name = match &cli.command {
        Some(Command::Barrier(_)) => "barrier",
        Some(Command::Orbit(_)) => "orbit",
        Some(Command::Construct(_)) => "construct",
        Some(Command::Approx(_)) => "approx",
        Some(Command::Herman(_)) => "herman",
        Some(Command::Melnikov(_)) => "melnikov",
        Some(Command::Sweep(_)) => "sweep",
        None => file.subcommand().ok_or_else(|| {
            CliError::Validation(vec!["no subcommand given on the command line or as 'subcommand' in the config".into()])
        })?,
    }
    .to_string();

    let mut violations = Vec::new();
    let global = config::resolve_global(&file, &flags(&cli.global)).unwrap_or_else(|e| {
        violations.extend(e);
        config::Global::default()
    });
    let empty = Value::Null;
    let section = file.section(&name).unwrap_or(&empty);
    let cmd_flags = match &cli.command {
        Some(Command::Barrier(a)) => flags(a),
        Some(Command::Orbit(a)) => flags(a),
        Some(Command::Construct(a)) => flags(a),
        Some(Command::Approx(a)) => flags(a),
        Some(Command::Herman(a)) => {
            let mut f = flags(a);
            if a.toy {
                f["mode"] = json!("toy");
            }
            f
        }
        Some(Command::Melnikov(a)) => flags(a),
        Some(Command::Sweep(a)) => sweep_flags(a, &mut violations),
        None => Value::Null,
    };

    if name == SweepParams::NAME {
        let sp = config::resolve::<SweepParams>(&[section, &cmd_flags]).map_err(|e| {
            violations.extend(e);
            CliError::Validation(violations.clone())
        })?;
        if !violations.is_empty() {
            return Err(CliError::Validation(violations));
        }
        let base = file.section(&sp.command).unwrap_or(&empty);
        let outcomes = sweep::run_sweep(&sp, base, global.tol, global.workers)?;
        let (columns, rows) = sweep::table(&sp, &outcomes);
        let failed = outcomes.iter().filter(|o| o.artifact.is_none()).count();
        let mut results = json!({"points": outcomes.len(), "failed": failed});
        if let Some(f) = &sp.fit {
            let fit = sweep::fit(f, &outcomes);
            let fit_cols: Vec<String> = ["x", "y", "slope", "intercept", "max_residual"].map(String::from).to_vec();
            let cell = |k: &str| match fit[k].as_f64() {
                Some(x) => output::Cell::F(x),
                None => output::Cell::S(String::new()),
            };
            let row = vec![
                output::Cell::S(f.x.clone()),
                output::Cell::S(f.y.clone()),
                cell("slope"),
                cell("intercept"),
                cell("max_residual"),
            ];
            ensure_dir(&global.out)?;
            write_csv(&global.out.join("sweep_fit.csv"), &fit_cols, &[row])?;
            results["fit"] = fit;
        }
        ensure_dir(&global.out)?;
        write_csv(&global.out.join("sweep.csv"), &columns, &rows)?;
        write_text(&global.out.join("sweep.jsonl"), &sweep::json_lines(&outcomes))?;
        let params = serde_json::to_value(&sp).expect("serializable");
        write_text(&global.out.join("sweep.json"), &summary(&name, &global, params, results))?;
        if failed > 0 {
            eprintln!("{failed} of {} sweep points failed; see sweep.jsonl", outcomes.len());
        }
        return Ok(());
    }

    let exp = Experiment::resolve(&name, &[section, &cmd_flags]);
    let exp = match exp {
        Ok(e) if violations.is_empty() => e,
        Ok(_) => return Err(CliError::Validation(violations)),
        Err(e) => {
            violations.extend(e);
            return Err(CliError::Validation(violations));
        }
    };
    let art = exp.run(global.tol)?;
    ensure_dir(&global.out)?;
    write_csv(&global.out.join(format!("{name}.csv")), &art.columns, &art.rows)?;
    write_text(
        &global.out.join(format!("{name}.json")),
        &summary(&name, &global, exp.params_json(), art.results),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
