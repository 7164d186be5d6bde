//! Command-line front end: experiment orchestration and report emission.
//!
//! Every run prints a JSON report to stdout with a `header` (timestamp and
//! resolved configuration) and a `body`; for identical flags and seed the
//! body is byte-identical between runs. A human-readable summary goes to
//! stderr. Exit codes: 0 all checks pass, 1 numerical failure, 2 usage or
//! configuration error.

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use qma::models::model_by_name;
use qma::solver::grid::{solve_grid_n1, GridProblem};
use qma::solver::{solve_radial, stability_experiment, RadialProblem};
use qma::verify::{self, critical_exponent, run_integrability, CheckResult};
use qma::{quat, QmaError};

const USAGE_ERROR: u8 = 2;
const CHECK_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "qma", about = "Quaternionic Monge-Ampere toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moore determinant of a hyperhermitian matrix read from a file
    Moore {
        /// Matrix file: `n <size>`, then `entries`, then n^2 lines `w x y z`
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a named verification suite
    Verify {
        /// One of forms, moore, qc, cpr, fundamental, radial, mprime, all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        /// Fan the suites of `all` out across worker threads
        #[arg(long, default_value_t = false)]
        parallel: bool,
    },
    /// Solve a Dirichlet problem described by a configuration file
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the sampled solution as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fundamental-solution mass vs mollification, extrapolated to delta = 0
    Fundamental {
        #[arg(long)]
        n: usize,
        #[arg(long = "delta-levels", default_value_t = 6)]
        delta_levels: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// L^p integrability sweep over dyadic annuli
    Integrability {
        /// Catalog model, e.g. `q0neginv` or `neginv:0`
        #[arg(long)]
        model: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        /// Quaternionic dimension the model lives in
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Stability of the radial solver under a density perturbation family
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-render a saved JSON report as a human-readable table
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    // die quietly when a downstream pager closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: USAGE_ERROR, message: msg.into() }
}

fn numerical(msg: impl Into<String>) -> CliError {
    CliError { code: CHECK_FAILURE, message: msg.into() }
}

impl From<QmaError> for CliError {
    fn from(e: QmaError) -> Self {
        match e {
            QmaError::Parse(_) | QmaError::Invalid(_) => usage(e.to_string()),
            other => numerical(other.to_string()),
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| numerical(format!("cannot write {}: {e}", path.display())))
}

/// Assembles the report: timestamp and resolved config in the header, the
/// deterministic payload in the body.
fn emit_report(command: &str, config: Value, body: Value) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = json!({
        "header": { "command": command, "unix_time": stamp, "config": config },
        "body": body,
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    println!("{text}");
    text
}

fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:.*e}", 5)
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Moore { input } => cmd_moore(&input),
        Command::Verify { suite, seed, parallel } => cmd_verify(&suite, seed, parallel),
        Command::Solve { config, out, csv } => cmd_solve(&config, out.as_ref(), csv.as_ref()),
        Command::Fundamental { n, delta_levels, radius, csv } => {
            cmd_fundamental(n, delta_levels, radius, csv.as_ref())
        }
        Command::Integrability { model, p, levels, n } => cmd_integrability(&model, p, levels, n),
        Command::Stability { config } => cmd_stability(&config),
        Command::Report { input } => cmd_report(&input),
    }
}

fn cmd_moore(input: &PathBuf) -> Result<ExitCode, CliError> {
    let text = read_file(input)?;
    let m = quat::parse_hyperhermitian(&text).map_err(|e| usage(e.to_string()))?;
    let det = quat::moore_det(&m)?;
    let eigen = quat::moore_det_eigen(&m)?;
    let body = json!({
        "n": m.dim(),
        "moore_det": det,
        "eigen_route": eigen,
        "route_gap": (det - eigen).abs(),
        "positive": quat::is_hyperhermitian_positive(&m),
        "strictly_positive": quat::is_hyperhermitian_strictly_positive(&m),
    });
    emit_report("moore", json!({ "in": input.display().to_string() }), body);
    eprintln!("moore determinant = {} (n = {})", sig6(det), m.dim());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, seed: u64, parallel: bool) -> Result<ExitCode, CliError> {
    let results: Vec<CheckResult> = if parallel && suite == "all" {
        let handles: Vec<_> = verify::SUITES
            .iter()
            .map(|&s| std::thread::spawn(move || verify::run_suite(s, seed)))
            .collect();
        let mut merged = Vec::new();
        // joined in declaration order, so the merged table is deterministic
        for h in handles {
            merged.extend(h.join().expect("suite thread")?);
        }
        merged
    } else {
        verify::run_suite(suite, seed)?
    };
    let all_pass = results.iter().all(|r| r.passed);
    let body = json!({
        "seed": seed,
        "results": results,
        "all_pass": all_pass,
    });
    emit_report("verify", json!({ "suite": suite, "seed": seed, "parallel": parallel }), body);
    for r in &results {
        eprintln!("{} {}/{}: {}", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.name, r.detail);
    }
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(numerical("one or more verification checks failed"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    mode: String,
    n: usize,
    radius: f64,
    density: DensitySpec,
    boundary: BoundarySpec,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    max_iters: Option<usize>,
    #[serde(default)]
    grid_spacing: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DensitySpec {
    Name(String),
    Table { table: Vec<(f64, f64)> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BoundarySpec {
    Constant(f64),
    Auto(String),
}

/// Resolves the density spec to a radial function of `s` plus, for catalog
/// models, the manufactured boundary trace `g(R^2)`.
fn resolve_density(
    spec: &DensitySpec,
    n: usize,
    radius: f64,
) -> Result<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, Option<f64>, Value), CliError> {
    match spec {
        DensitySpec::Name(name) => {
            let model = model_by_name(name, n).map_err(|e| usage(e.to_string()))?;
            let trace = model.profile.as_ref().map(|p| p.g(radius * radius));
            let f = model
                .exact_density
                .clone()
                .ok_or_else(|| usage(format!("model `{name}` has no closed-form density")))?;
            Ok((f, trace, json!(name)))
        }
        DensitySpec::Table { table } => {
            if table.len() < 2 {
                return Err(usage("inline density table needs at least two (s, f) rows"));
            }
            let mut rows = table.clone();
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let rows = Arc::new(rows);
            let r2 = rows.clone();
            let f = Arc::new(move |s: f64| -> f64 {
                // piecewise-linear interpolation, clamped at the ends
                let rows = &*r2;
                if s <= rows[0].0 {
                    return rows[0].1;
                }
                if s >= rows[rows.len() - 1].0 {
                    return rows[rows.len() - 1].1;
                }
                let i = rows.partition_point(|&(x, _)| x <= s);
                let (s0, f0) = rows[i - 1];
                let (s1, f1) = rows[i];
                f0 + (f1 - f0) * (s - s0) / (s1 - s0)
            });
            Ok((f, None, json!({ "table": &*rows })))
        }
    }
}

fn cmd_solve(config: &PathBuf, out: Option<&PathBuf>, csv: Option<&PathBuf>) -> Result<ExitCode, CliError> {
    let cfg: SolveConfig = serde_json::from_str(&read_file(config)?)
        .map_err(|e| usage(format!("invalid solve config: {e}")))?;
    if cfg.n == 0 || cfg.radius <= 0.0 {
        return Err(usage("need n >= 1 and radius > 0"));
    }
    let (density, trace, density_cfg) = resolve_density(&cfg.density, cfg.n, cfg.radius)?;
    let boundary = match &cfg.boundary {
        BoundarySpec::Constant(c) => *c,
        BoundarySpec::Auto(word) if word == "auto" => trace.ok_or_else(|| {
            usage("boundary `auto` requires a catalog model with a known profile")
        })?,
        BoundarySpec::Auto(other) => {
            return Err(usage(format!("boundary must be a number or \"auto\", got `{other}`")))
        }
    };
    let resolved = json!({
        "mode": cfg.mode,
        "n": cfg.n,
        "radius": cfg.radius,
        "density": density_cfg,
        "boundary": boundary,
        "tolerance": cfg.tolerance,
        "max_iters": cfg.max_iters,
        "grid_spacing": cfg.grid_spacing,
    });
    let report = match cfg.mode.as_str() {
        "radial" => {
            let f = density.clone();
            let sol = solve_radial(&RadialProblem::new(cfg.n, cfg.radius, move |s| f(s), boundary))?;
            sol.report
        }
        "grid" => {
            if cfg.n != 1 {
                return Err(usage("grid mode supports n = 1 only"));
            }
            let h = cfg
                .grid_spacing
                .ok_or_else(|| usage("grid mode requires `grid_spacing`"))?;
            let f = density.clone();
            let mut p = GridProblem::new(
                cfg.radius,
                h,
                move |x: &[f64; 4]| f(x.iter().map(|v| v * v).sum()),
                move |_: &[f64; 4]| boundary,
            );
            if let Some(m) = cfg.max_iters {
                p.max_iters = m;
            }
            solve_grid_n1(&p)?.report
        }
        other => return Err(usage(format!("mode must be `radial` or `grid`, got `{other}`"))),
    };
    let body = serde_json::to_value(&report).expect("serializable");
    let text = emit_report("solve", resolved, body);
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    if let Some(path) = csv {
        let mut csv_text = String::from("s,u\n");
        for (s, u) in &report.samples {
            csv_text.push_str(&format!("{s},{u}\n"));
        }
        write_file(path, &csv_text)?;
    }
    eprintln!(
        "solved: sup|u| = {}, residual = {}, {} iterations, {:.3} s",
        sig6(report.sup_norm),
        sig6(report.residual_sup),
        report.iterations,
        report.wall_time_s
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_fundamental(n: usize, levels: usize, radius: f64, csv: Option<&PathBuf>) -> Result<ExitCode, CliError> {
    if n == 0 || radius <= 0.0 {
        return Err(usage("need n >= 1 and radius > 0"));
    }
    if levels < 3 {
        return Err(usage("need at least 3 delta levels for extrapolation"));
    }
    let (extrapolated, rows) = verify::extrapolate_fundamental(n, levels, radius);
    let target = qma::models::fundamental_constant(n);
    let rel = (extrapolated - target).abs() / target;
    let tol = if n == 1 { 1e-3 } else { 5e-3 };
    let table: Vec<Value> = rows
        .iter()
        .map(|&(delta, mass, order)| {
            json!({
                "delta": delta,
                "mass": mass,
                "error": target - mass,
                "observed_order": if order.is_finite() { json!(order) } else { Value::Null },
            })
        })
        .collect();
    let body = json!({
        "rows": table,
        "extrapolated": extrapolated,
        "analytic": target,
        "relative_error": rel,
        "pass": rel < tol,
    });
    emit_report(
        "fundamental",
        json!({ "n": n, "delta_levels": levels, "radius": radius }),
        body,
    );
    if let Some(path) = csv {
        let mut text = String::from("delta,mass,error,observed_order\n");
        for (delta, mass, order) in &rows {
            text.push_str(&format!("{delta},{mass},{},{order}\n", target - mass));
        }
        write_file(path, &text)?;
    }
    eprintln!(
        "extrapolated mass {} vs analytic {} (relative error {})",
        sig6(extrapolated),
        sig6(target),
        sig6(rel)
    );
    if rel < tol {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(numerical(format!("extrapolated mass off by {rel:.2e} (tolerance {tol:.0e})")))
    }
}

fn cmd_integrability(model_spec: &str, p: f64, levels: usize, n: usize) -> Result<ExitCode, CliError> {
    let model = model_by_name(model_spec, n).map_err(|e| usage(e.to_string()))?;
    if model.profile.is_none() {
        return Err(usage(format!("model `{model_spec}` is not radial")));
    }
    if p <= 0.0 || levels < 3 {
        return Err(usage("need p > 0 and at least 3 levels"));
    }
    let report = run_integrability(&model, p, levels)?;
    let critical = critical_exponent(&model);
    let body = json!({
        "model": report.model,
        "p": report.p,
        "critical_exponent": if critical.is_finite() { json!(critical) } else { json!("none") },
        "increments": report.increments,
        "classification": report.classification.to_string(),
    });
    emit_report(
        "integrability",
        json!({ "model": model_spec, "p": p, "levels": levels, "n": n }),
        body,
    );
    eprintln!(
        "{}: p = {p}, critical exponent {} -> {}",
        report.model,
        if critical.is_finite() { sig6(critical) } else { "none".into() },
        report.classification
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityConfig {
    n: usize,
    radius: f64,
    density: DensitySpec,
    boundary: f64,
    /// Relative perturbation sizes t of the family f_t = (1 + t) f_0
    perturbations: Vec<f64>,
    q: f64,
}

fn cmd_stability(config: &PathBuf) -> Result<ExitCode, CliError> {
    let cfg: StabilityConfig = serde_json::from_str(&read_file(config)?)
        .map_err(|e| usage(format!("invalid stability config: {e}")))?;
    if cfg.perturbations.is_empty() {
        return Err(usage("need at least one perturbation size"));
    }
    if cfg.q <= 2.0 {
        return Err(usage(format!("stability exponent must satisfy q > 2, got {}", cfg.q)));
    }
    let (density, _, density_cfg) = resolve_density(&cfg.density, cfg.n, cfg.radius)?;
    let mut rows = Vec::new();
    let mut c_hats = Vec::new();
    for &t in &cfg.perturbations {
        let f0 = density.clone();
        let f1 = density.clone();
        let rep = stability_experiment(
            cfg.n,
            cfg.radius,
            move |s| (1.0 + t) * f0(s),
            move |s| f1(s),
            cfg.boundary,
            cfg.boundary,
            cfg.q,
        )?;
        c_hats.push(rep.c_hat);
        rows.push(json!({
            "t": t,
            "sup_diff": rep.sup_diff,
            "boundary_diff": rep.boundary_diff,
            "lq_diff_norm": rep.lq_diff_norm,
            "c_hat": rep.c_hat,
        }));
    }
    let (lo, hi) = c_hats
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let bounded = ratio < 10.0;
    let body = json!({
        "rows": rows,
        "c_hat_max_over_min": ratio,
        "bounded": bounded,
    });
    emit_report(
        "stability",
        json!({
            "n": cfg.n,
            "radius": cfg.radius,
            "density": density_cfg,
            "boundary": cfg.boundary,
            "perturbations": cfg.perturbations,
            "q": cfg.q,
        }),
        body,
    );
    eprintln!("empirical constant range [{}, {}], max/min = {}", sig6(lo), sig6(hi), sig6(ratio));
    if bounded {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(numerical(format!("empirical stability constant unbounded: max/min = {ratio:.2}")))
    }
}

fn cmd_report(input: &PathBuf) -> Result<ExitCode, CliError> {
    let value: Value = serde_json::from_str(&read_file(input)?)
        .map_err(|e| usage(format!("invalid report file: {e}")))?;
    let header = value.get("header").ok_or_else(|| usage("report has no `header`"))?;
    let body = value.get("body").ok_or_else(|| usage("report has no `body`"))?;
    let cmd = header.get("command").and_then(Value::as_str).unwrap_or("?");
    println!("report: {cmd}");
    if let Some(t) = header.get("unix_time").and_then(Value::as_u64) {
        println!("  recorded at unix time {t}");
    }
    if let Some(cfg) = header.get("config") {
        println!("  config: {}", serde_json::to_string(cfg).unwrap());
    }
    print_value(body, 1);
    Ok(ExitCode::SUCCESS)
}

fn print_value(v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        println!("{pad}{k}:");
                        print_value(val, indent + 1);
                    }
                    Value::Number(n) if n.is_f64() => {
                        println!("{pad}{k} = {}", sig6(n.as_f64().unwrap()));
                    }
                    other => println!("{pad}{k} = {other}"),
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::Object(_) | Value::Array(_) => {
                        println!("{pad}[{i}]");
                        print_value(item, indent + 1);
                    }
                    Value::Number(n) if n.is_f64() => {
                        println!("{pad}[{i}] = {}", sig6(n.as_f64().unwrap()));
                    }
                    other => println!("{pad}[{i}] = {other}"),
                }
            }
        }
        other => println!("{pad}{other}"),
    }
}
