//! Command execution behind the `proxkit` binary.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use proxkit_core::solvers::{SolverConfig, StepRule};
use serde_json::json;

use crate::catalog;
use crate::config::{parse_loss_family, parse_sim_family, Command, RunConfig};
use crate::data::{generate, standardize, SimSpec};
use crate::error::{Error, Result};
use crate::experiments::{
    build_penalty, detect_jumps, log_grid, lq_lambda_max, lq_mse_surface, prostate_path, run_experiment,
    solve, support_size, PathOptions, Problem, RegularizationPath, SolverSpec,
};
use crate::io::{ingest_csv, write_path, write_summary, write_trace};

/// Exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run finished but did not converge, or a catalog row failed.
    NotConverged,
}

/// Exit codes: success, non-convergence, configuration error, runtime error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

fn wall_clock() -> f64 {
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}

/// Solver settings from the resolved config.
pub fn solver_config(c: &RunConfig) -> SolverConfig {
    let mut cfg = SolverConfig::default().with_tol(c.tol).with_max_iter(c.max_iter);
    cfg.step = c.step.map(StepRule::Fixed).unwrap_or(StepRule::InverseLipschitz);
    cfg.accelerate = c.accelerate;
    cfg.restart = c.restart;
    cfg.backtracking = c.backtracking;
    cfg.seed = c.seed;
    if c.wall_clock {
        cfg.clock = Some(wall_clock);
    }
    cfg
}

fn solver_spec(c: &RunConfig) -> SolverSpec {
    let mut s = SolverSpec::new(c.solver, solver_config(c));
    s.rho = c.rho;
    s.kappa = c.kappa;
    s.damping = c.damping;
    s
}

fn outcome(converged: bool) -> Outcome {
    if converged {
        Outcome::Success
    } else {
        Outcome::NotConverged
    }
}

/// Runs the configured command, writing files under `c.out` and a short
/// report to `stdout`.
pub fn execute(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    match c.command {
        Command::Fit => fit(c, stdout),
        Command::Simulate => simulate(c, stdout),
        Command::Path => path(c, stdout),
        Command::Surface => surface(c, stdout),
        Command::CatalogCheck => catalog_check(c, stdout),
    }
}

fn config_json(c: &RunConfig) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(c)?)
}

fn say(stdout: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(stdout, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn fit(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let input = c.input.as_deref().ok_or_else(|| Error::Config("missing input file".into()))?;
    let family = parse_loss_family(&c.family)?;
    let columns: Option<Vec<&str>> = c.columns.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let data = ingest_csv(input, c.response.as_deref(), columns.as_deref())?;
    let d = data.a.cols();
    let penalty = build_penalty(c.penalty, d, c.gamma.unwrap_or(0.1), c.q)?;
    let trials = vec![c.trials as f64; data.a.rows()];
    let problem = Problem::new(family, data.a.clone(), data.y.clone(), Some(trials), penalty)?;
    let trace = solve(&problem, &solver_spec(c), &vec![0.0; d])?;
    let objective = problem.objective(&trace.x)?;
    write_trace(&c.out.join("trace.csv"), &trace)?;
    let coefficients: serde_json::Map<String, serde_json::Value> =
        data.names.iter().cloned().zip(trace.x.iter().map(|v| json!(v))).collect();
    write_summary(
        &c.out.join("summary.json"),
        &json!({
            "command": "fit",
            "response": data.response,
            "rows": data.a.rows(),
            "final_objective": objective,
            "iterations": trace.iterations,
            "converged": trace.converged,
            "support": support_size(&trace.x),
            "coefficients": coefficients,
            "config": config_json(c)?,
        }),
    )?;
    say(
        stdout,
        &format!(
            "{} on {} rows x {} columns: objective {objective:.10e}, {} iterations, converged {}",
            c.solver.name(),
            data.a.rows(),
            d,
            trace.iterations,
            trace.converged
        ),
    )?;
    Ok(outcome(trace.converged))
}

fn sim_spec(c: &RunConfig) -> Result<SimSpec> {
    let family = parse_sim_family(&c.family)?;
    Ok(SimSpec {
        n: c.n,
        d: c.d,
        sparsity: c.sparsity,
        trials: c.trials,
        snr: c.snr,
        seed: c.seed,
        family,
    })
}

fn simulate(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let spec = sim_spec(c)?;
    let run = run_experiment(&spec, &solver_spec(c), c.gamma, c.q)?;
    write_trace(&c.out.join("trace.csv"), &run.trace)?;
    let mut summary = serde_json::to_value(&run.summary)?;
    summary["command"] = json!("simulate");
    summary["config"] = config_json(c)?;
    write_summary(&c.out.join("summary.json"), &summary)?;
    let s = &run.summary;
    say(
        stdout,
        &format!(
            "{} {}: objective {:.10e}, {} iterations, converged {}, support {}, mse {:.4e}",
            s.family, s.solver, s.final_objective, s.iterations, s.converged, s.support, s.mse
        ),
    )?;
    Ok(outcome(s.converged))
}

fn lambda_grid(c: &RunConfig, lambda_max: f64) -> Result<Vec<f64>> {
    match &c.lambdas {
        Some(l) => Ok(l.clone()),
        None => log_grid(c.lambda_min_ratio * lambda_max, c.lambda_max_ratio * lambda_max, c.n_lambda),
    }
}

fn path_options(c: &RunConfig) -> PathOptions {
    PathOptions {
        cfg: solver_config(c),
        warm_start: true,
        threads: c.threads,
    }
}

fn unconverged_cells(path: &RegularizationPath) -> usize {
    path.cells.iter().filter(|c| c.error.is_some()).count()
}

fn path(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let input = c.input.as_deref().ok_or_else(|| Error::Config("missing input file".into()))?;
    let columns: Option<Vec<&str>> = c.columns.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let mut data = ingest_csv(input, c.response.as_deref(), columns.as_deref())?;
    standardize(&mut data.a, &mut data.y).map_err(|e| Error::data(input, e.to_string()))?;
    let lambdas = lambda_grid(c, lq_lambda_max(&data.a, &data.y, c.q)?)?;
    let result = prostate_path(&data, c.q, &lambdas, &path_options(c))?;
    write_path(&c.out.join("path.csv"), &result)?;
    let jumps = detect_jumps(&result, 0, 10.0);
    let failed = unconverged_cells(&result);
    write_summary(
        &c.out.join("summary.json"),
        &json!({
            "command": "path",
            "response": data.response,
            "names": result.names,
            "lambdas": result.lambdas,
            "jumps": jumps
                .iter()
                .map(|j| json!({
                    "coefficient": result.names[j.coefficient],
                    "lambda_before": result.lambdas[j.lambda_index],
                    "lambda_after": result.lambdas[j.lambda_index + 1],
                    "size": j.size,
                    "neighbor_change": j.neighbor,
                }))
                .collect::<Vec<_>>(),
            "unconverged_cells": failed,
            "config": config_json(c)?,
        }),
    )?;
    say(
        stdout,
        &format!(
            "path over {} lambdas at q = {}: {} discontinuous exits, {failed} unconverged cells",
            lambdas.len(),
            c.q,
            jumps.len()
        ),
    )?;
    Ok(outcome(failed == 0))
}

fn surface(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let spec = sim_spec(c)?;
    let data = generate(&spec)?;
    let mut lambda_max = 0.0f64;
    for &q in &c.q_grid {
        lambda_max = lambda_max.max(lq_lambda_max(&data.a, &data.y, q)?);
    }
    let lambdas = lambda_grid(c, lambda_max)?;
    let result = lq_mse_surface(&data, &lambdas, &c.q_grid, &path_options(c))?;
    write_path(&c.out.join("path.csv"), &result)?;
    let best = result
        .cells
        .iter()
        .min_by(|a, b| a.mse.total_cmp(&b.mse))
        .ok_or_else(|| Error::Config("empty grid".into()))?;
    let failed = unconverged_cells(&result);
    write_summary(
        &c.out.join("summary.json"),
        &json!({
            "command": "surface",
            "lambdas": result.lambdas,
            "qs": result.qs,
            "log10_mse": result.qs.iter().enumerate().map(|(qi, _)| {
                (0..result.lambdas.len()).map(|li| result.cell(qi, li).mse.log10()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "best": {"lambda": best.lambda, "q": best.q, "mse": best.mse},
            "unconverged_cells": failed,
            "config": config_json(c)?,
        }),
    )?;
    say(
        stdout,
        &format!(
            "surface over {} x {} cells: best mse {:.4e} at lambda {:.4e}, q {}; {failed} unconverged cells",
            result.qs.len(),
            lambdas.len(),
            best.mse,
            best.lambda,
            best.q
        ),
    )?;
    Ok(outcome(failed == 0))
}

fn catalog_check(c: &RunConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    let rows = catalog::catalog_check(c.seed, c.draws);
    stdout
        .write_all(catalog::render_report(&rows).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(outcome(catalog::all_passed(&rows)))
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let invocation = match crate::config::parse_config(argv) {
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
        Ok(Ok(inv)) => inv,
    };
    if invocation.print_config {
        return match toml::to_string(&invocation.config) {
            Ok(text) => {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_RUNTIME
            }
        };
    }
    match execute(&invocation.config, stdout) {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::NotConverged) => EXIT_NOT_CONVERGED,
        Err(e @ Error::Config(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}
