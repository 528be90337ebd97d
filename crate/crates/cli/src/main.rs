//! `mvikit` — command-line front end for the MVI solver toolkit.
//!
//! Subcommands: `solve` (discrete methods), `simulate` (continuous-time
//! trajectories), `check` (descent-inequality and summability diagnostics),
//! `bench` (whole-catalog batch), `catalog` (list benchmark instances).
//!
//! Exit codes: 0 success/converged, 1 configuration or validation failure,
//! 2 iteration budget exhausted, 3 inner solve failed, 4 diverged,
//! 5 diagnostic violations found.

mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mvi_core::catalog;
use mvi_core::diagnostics::{descent_inequality_scan, summability_report};
use mvi_core::dynamics::{
    integrate_sampled, DynamicsParams, IntegrationMethod, PhaseState, TrajectoryStatus,
};
use mvi_core::point;
use mvi_core::solvers::{solve, Method, SolveReport, Status};

use config::{
    load_config_file, parse_point, resolve_problem, resolve_solver_config, resolve_start,
    ResolvedProblem, Settings,
};
use output::{emit, Echo, Format};

#[derive(Parser)]
#[command(
    name = "mvikit",
    version,
    about = "Solvers, dynamics, and diagnostics for mixed variational inequalities",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a discrete solver on a problem and export the report
    Solve(SolveArgs),
    /// Integrate the continuous-time resolvent system and export the trajectory
    Simulate(SimulateArgs),
    /// Scan a run against the descent inequality and summability checks
    Check(CheckArgs),
    /// Run one method across every catalog entry and tabulate the outcomes
    Bench(BenchArgs),
    /// List the benchmark catalog
    Catalog(CatalogArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Default)]
struct IoArgs {
    /// Flat `key = value` config file; flags override file values
    #[arg(long, value_name = "PATH")]
    config: Option<String>,
    /// Output file (stdout when omitted); a relative path is joined onto
    /// $MVIKIT_OUTPUT_DIR when that variable is set
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
    /// Output format: csv or json
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Seed recorded in the output for provenance
    #[arg(long)]
    seed: Option<u64>,
}

/// Problem selection flags.
#[derive(Args, Default)]
struct ProblemArgs {
    /// Catalog entry name, or `inline` with operator/phi keys in the config file
    #[arg(long)]
    problem: Option<String>,
    /// Starting point, comma-separated coordinates
    #[arg(long, value_name = "POINT", allow_hyphen_values = true)]
    x0: Option<String>,
    /// Reference solution, comma-separated coordinates
    #[arg(long, value_name = "POINT", allow_hyphen_values = true)]
    x_star: Option<String>,
}

/// Discrete-solver parameter flags.
#[derive(Args, Default)]
struct SolverArgs {
    /// Method: baseline, algorithm1, algorithm2, explicit, or direct
    #[arg(long)]
    method: Option<String>,
    /// Stencil step size
    #[arg(long)]
    h: Option<f64>,
    /// Operator step and resolvent parameter
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Natural-residual stopping tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget (produced iterates, warm-up included)
    #[arg(long)]
    max_iter: Option<usize>,
    /// Inner fixed-point stopping tolerance
    #[arg(long)]
    inner_tol: Option<f64>,
    /// Inner fixed-point iteration budget
    #[arg(long)]
    inner_max: Option<usize>,
    /// Inner damping factor in (0, 1]
    #[arg(long)]
    inner_damping: Option<f64>,
}

/// Continuous-time parameter flags.
#[derive(Args, Default)]
struct DynamicsArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Operator step and resolvent parameter
    #[arg(long)]
    lambda: Option<f64>,
    /// Integration step size
    #[arg(long)]
    dt: Option<f64>,
    /// Integration horizon
    #[arg(long)]
    t_end: Option<f64>,
    /// Integrator: euler or rk4
    #[arg(long)]
    integrator: Option<String>,
    /// Record every stride-th step (initial and final always recorded)
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    dynamics: DynamicsArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Scan a previously exported JSON solve report instead of running
    #[arg(long, value_name = "PATH", conflicts_with = "problem")]
    report: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CatalogArgs {
    #[command(flatten)]
    io: IoArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Solve(args) => run_solve(args),
        Cmd::Simulate(args) => run_simulate(args),
        Cmd::Check(args) => run_check(args),
        Cmd::Bench(args) => run_bench(args),
        Cmd::Catalog(args) => run_catalog(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

/// Merges config-file settings (if any) with flag overrides.
fn merge_settings(io: &IoArgs, overlays: &[Settings]) -> Result<Settings, String> {
    let mut settings = match &io.config {
        Some(path) => load_config_file(path)?,
        None => Settings::default(),
    };
    for overlay in overlays {
        settings.overlay(overlay.clone());
    }
    let mut io_overlay = Settings::default();
    io_overlay.format = io.format.clone();
    io_overlay.output = io.output.clone();
    io_overlay.seed = io.seed;
    settings.overlay(io_overlay);
    Ok(settings)
}

impl ProblemArgs {
    fn to_settings(&self) -> Result<Settings, String> {
        let mut s = Settings::default();
        s.problem = self.problem.clone();
        if let Some(x0) = &self.x0 {
            s.x0 = Some(parse_point(x0, "flag --x0")?);
        }
        if let Some(x_star) = &self.x_star {
            s.x_star = Some(parse_point(x_star, "flag --x-star")?);
        }
        Ok(s)
    }
}

impl SolverArgs {
    fn to_settings(&self) -> Settings {
        let mut s = Settings::default();
        s.method = self.method.clone();
        s.h = self.h;
        s.lambda = self.lambda;
        s.alpha = self.alpha;
        s.beta = self.beta;
        s.gamma = self.gamma;
        s.tol = self.tol;
        s.max_iter = self.max_iter;
        s.inner_tol = self.inner_tol;
        s.inner_max = self.inner_max;
        s.inner_damping = self.inner_damping;
        s
    }
}

impl DynamicsArgs {
    fn to_settings(&self) -> Settings {
        let mut s = Settings::default();
        s.alpha = self.alpha;
        s.beta = self.beta;
        s.gamma = self.gamma;
        s.lambda = self.lambda;
        s.dt = self.dt;
        s.t_end = self.t_end;
        s.integrator = self.integrator.clone();
        s.stride = self.stride;
        s
    }
}

fn resolve_format(settings: &Settings, default: Format) -> Result<Format, String> {
    match settings.format.as_deref() {
        Some(s) => Format::parse(s),
        None => Ok(default),
    }
}

fn status_exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::MaxIter => 2,
        Status::InnerSolveFailed => 3,
        Status::Diverged => 4,
    }
}

/// Echoes the solver configuration fields in a fixed order.
fn push_solver_echo(echo: &mut Echo, cfg: &mvi_core::solvers::SolverConfig) {
    echo.push_f("h", cfg.h);
    echo.push_f("lambda", cfg.lambda);
    echo.push_f("alpha", cfg.alpha);
    echo.push_f("beta", cfg.beta);
    echo.push_f("gamma", cfg.gamma);
    echo.push_f("tol", cfg.tol);
    echo.push("max_iter", cfg.max_iter.to_string());
    echo.push_f("inner_tol", cfg.inner_tol);
    echo.push("inner_max", cfg.inner_max.to_string());
    echo.push_f("inner_damping", cfg.inner_damping);
}

fn push_io_echo(echo: &mut Echo, settings: &Settings, format: Format) {
    echo.push("seed", settings.seed.unwrap_or(0).to_string());
    echo.push("format", format.as_str());
}

fn push_problem_echo(echo: &mut Echo, rp: &ResolvedProblem) {
    echo.push("problem", rp.label.clone());
    for (k, v) in &rp.inline_echo {
        echo.push(k, v.clone());
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, String> {
    let settings = merge_settings(
        &args.io,
        &[args.problem.to_settings()?, args.solver.to_settings()],
    )?;
    let format = resolve_format(&settings, Format::Json)?;
    let rp = resolve_problem(&settings)?;
    let method: Method = settings
        .method
        .as_deref()
        .unwrap_or("algorithm1")
        .parse()
        .map_err(|e: mvi_core::Error| e.to_string())?;
    let cfg = resolve_solver_config(&settings, rp.recommended_lambda);
    let x0 = resolve_start(&settings, rp.recommended_start.as_ref(), rp.problem.dim());

    let mut echo = Echo::default();
    echo.push("command", "solve");
    push_problem_echo(&mut echo, &rp);
    echo.push("method", method.as_str());
    echo.push_point("x0", &x0);
    if let Some(x_star) = &rp.x_star {
        echo.push_point("x_star", x_star);
    }
    push_solver_echo(&mut echo, &cfg);
    push_io_echo(&mut echo, &settings, format);

    let report = solve(&rp.problem, method, &cfg, &x0).map_err(|e| e.to_string())?;
    let content = match format {
        Format::Json => output::solve_json(&echo, &report)?,
        Format::Csv => output::solve_csv(&echo, &report),
    };
    emit(settings.output.as_deref(), &content)?;
    Ok(status_exit_code(report.status))
}

fn run_simulate(args: SimulateArgs) -> Result<u8, String> {
    let settings = merge_settings(
        &args.io,
        &[args.problem.to_settings()?, args.dynamics.to_settings()],
    )?;
    let format = resolve_format(&settings, Format::Csv)?;
    let rp = resolve_problem(&settings)?;
    let params = DynamicsParams {
        alpha: settings.alpha.unwrap_or(1.0),
        beta: settings.beta.unwrap_or(1.0),
        gamma: settings.gamma.unwrap_or(1.0),
        lambda: settings.lambda.unwrap_or(1.0),
    };
    let dt = settings.dt.unwrap_or(1e-3);
    let t_end = settings.t_end.unwrap_or(20.0);
    let stride = settings.stride.unwrap_or(1);
    let integrator = match settings.integrator.as_deref().unwrap_or("rk4") {
        "euler" => IntegrationMethod::Euler,
        "rk4" => IntegrationMethod::Rk4,
        other => return Err(format!("unknown integrator {other:?}; expected euler or rk4")),
    };
    let x0 = resolve_start(&settings, rp.recommended_start.as_ref(), rp.problem.dim());
    let initial = PhaseState::at_rest(x0.clone(), params.order());

    let mut echo = Echo::default();
    echo.push("command", "simulate");
    push_problem_echo(&mut echo, &rp);
    echo.push_point("x0", &x0);
    echo.push_f("alpha", params.alpha);
    echo.push_f("beta", params.beta);
    echo.push_f("gamma", params.gamma);
    echo.push_f("lambda", params.lambda);
    echo.push_f("dt", dt);
    echo.push_f("t_end", t_end);
    echo.push(
        "integrator",
        match integrator {
            IntegrationMethod::Euler => "euler",
            IntegrationMethod::Rk4 => "rk4",
        },
    );
    echo.push("stride", stride.to_string());
    push_io_echo(&mut echo, &settings, format);

    let traj = integrate_sampled(&rp.problem, &params, &initial, t_end, dt, integrator, stride)
        .map_err(|e| e.to_string())?;
    let content = match format {
        Format::Json => output::simulate_json(&echo, &traj)?,
        Format::Csv => output::simulate_csv(&echo, &traj),
    };
    // the (possibly partial) trajectory is always written, even on divergence
    emit(settings.output.as_deref(), &content)?;
    Ok(match traj.status {
        TrajectoryStatus::Completed => 0,
        TrajectoryStatus::Diverged => 4,
    })
}

/// Extracts a [`SolveReport`] from an exported JSON artifact (either the
/// `{config, report}` wrapper written by `solve --format json`, or a bare
/// report object).
fn load_report(path: &str) -> Result<SolveReport, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read report file {path:?}: {e}"))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| format!("report file {path:?} is not valid JSON: {e}"))?;
    let body = value.get("report").cloned().unwrap_or(value);
    serde_json::from_value(body)
        .map_err(|e| format!("report file {path:?} does not hold a solve report: {e}"))
}

fn run_check(args: CheckArgs) -> Result<u8, String> {
    let settings = merge_settings(
        &args.io,
        &[args.problem.to_settings()?, args.solver.to_settings()],
    )?;
    let format = resolve_format(&settings, Format::Csv)?;
    // the scan is defined for the implicit inertial method only
    if let Some(m) = settings.method.as_deref() {
        if m != "algorithm1" {
            return Err(format!(
                "check scans algorithm1 runs; got method {m:?} (omit the method key or set algorithm1)"
            ));
        }
    }

    let mut echo = Echo::default();
    echo.push("command", "check");

    let (report, x_star) = match &args.report {
        Some(path) => {
            let report = load_report(path)?;
            let x_star = settings.x_star.clone().ok_or_else(|| {
                "checking an exported report needs --x-star (the reference solution)".to_string()
            })?;
            echo.push("report", path.clone());
            echo.push_point("x_star", &x_star);
            push_io_echo(&mut echo, &settings, format);
            (report, x_star)
        }
        None => {
            let rp = resolve_problem(&settings)?;
            let x_star = rp.x_star.clone().ok_or_else(|| {
                "no reference solution: pass x_star for inline problems".to_string()
            })?;
            let cfg = resolve_solver_config(&settings, rp.recommended_lambda);
            let x0 = resolve_start(&settings, rp.recommended_start.as_ref(), rp.problem.dim());
            push_problem_echo(&mut echo, &rp);
            echo.push("method", Method::Algorithm1.as_str());
            echo.push_point("x0", &x0);
            echo.push_point("x_star", &x_star);
            push_solver_echo(&mut echo, &cfg);
            push_io_echo(&mut echo, &settings, format);
            let report =
                solve(&rp.problem, Method::Algorithm1, &cfg, &x0).map_err(|e| e.to_string())?;
            (report, x_star)
        }
    };

    let scan = descent_inequality_scan(&report, &x_star).map_err(|e| e.to_string())?;
    if scan.records.is_empty() {
        return Err(format!(
            "report holds {} iterate(s); at least five are needed to evaluate the inequality",
            report.iterates.len()
        ));
    }
    let summability = summability_report(&report).map_err(|e| e.to_string())?;

    let content = match format {
        Format::Json => output::check_json(&echo, &scan, &summability)?,
        Format::Csv => output::check_csv(&echo, &scan, &summability),
    };
    emit(settings.output.as_deref(), &content)?;
    Ok(if scan.violations > 0 { 5 } else { 0 })
}

fn run_bench(args: BenchArgs) -> Result<u8, String> {
    let settings = merge_settings(&args.io, &[args.solver.to_settings()])?;
    if settings.problem.is_some() {
        return Err("bench always runs the whole catalog; drop the problem key".to_string());
    }
    let format = resolve_format(&settings, Format::Csv)?;
    let method: Method = settings
        .method
        .as_deref()
        .unwrap_or("algorithm1")
        .parse()
        .map_err(|e: mvi_core::Error| e.to_string())?;
    // the inertial stencils are stable at h = 2 across the catalog, so bench
    // defaults there rather than to the solver's generic default
    let mut with_h = settings.clone();
    with_h.h = Some(settings.h.unwrap_or(2.0));

    let mut echo = Echo::default();
    echo.push("command", "bench");
    echo.push("method", method.as_str());
    let shared = resolve_solver_config(&with_h, None);
    push_solver_echo(&mut echo, &shared);
    push_io_echo(&mut echo, &settings, format);

    let mut rows = Vec::new();
    for entry in catalog::catalog() {
        let cfg = resolve_solver_config(&with_h, Some(entry.recommended_lambda));
        let x0 = resolve_start(&with_h, Some(&entry.recommended_start), entry.problem.dim());
        let report = solve(&entry.problem, method, &cfg, &x0).map_err(|e| e.to_string())?;
        rows.push(output::BenchRow {
            problem: entry.name.to_string(),
            method: method.as_str().to_string(),
            status: report.status.as_str().to_string(),
            iterations: report.iterates.len() - 1,
            final_residual: report.final_residual(),
            distance_to_reference: point::dist(report.final_point(), &entry.x_star),
        });
    }

    let content = match format {
        Format::Json => output::bench_json(&echo, &rows)?,
        Format::Csv => output::bench_csv(&echo, &rows),
    };
    emit(settings.output.as_deref(), &content)?;
    Ok(0)
}

fn run_catalog(args: CatalogArgs) -> Result<u8, String> {
    let settings = merge_settings(&args.io, &[])?;
    let format = resolve_format(&settings, Format::Json)?;
    let mut echo = Echo::default();
    echo.push("command", "catalog");
    push_io_echo(&mut echo, &settings, format);
    let entries = catalog::catalog();
    let content = match format {
        Format::Json => output::catalog_json(&echo, &entries)?,
        Format::Csv => output::catalog_csv(&echo, &entries),
    };
    emit(settings.output.as_deref(), &content)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_follow_the_contract() {
        assert_eq!(status_exit_code(Status::Converged), 0);
        assert_eq!(status_exit_code(Status::MaxIter), 2);
        assert_eq!(status_exit_code(Status::InnerSolveFailed), 3);
        assert_eq!(status_exit_code(Status::Diverged), 4);
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
