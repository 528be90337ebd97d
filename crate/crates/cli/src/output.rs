//! Output rendering: CSV and JSON with full-precision numbers, the effective
//! config echo, and output-path resolution.
//!
//! Every artifact embeds the exact configuration that produced it: JSON
//! outputs carry an ordered `config` object of canonical strings, CSV outputs
//! start with `# key = value` comment lines. Numbers render with 17
//! significant digits so they round-trip bit-exactly; all rendering is
//! deterministic (fixed key order, no timestamps).

use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use mvi_core::catalog::CatalogEntry;
use mvi_core::diagnostics::{DescentScan, SummabilityReport};
use mvi_core::dynamics::Trajectory;
use mvi_core::solvers::SolveReport;

/// Environment variable holding the default directory for relative output
/// paths. It never affects anything except where files land.
pub const OUTPUT_DIR_ENV: &str = "MVIKIT_OUTPUT_DIR";

/// Renders a float with 17 significant digits (lossless round-trip).
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// The effective configuration as ordered `key = value` pairs of canonical
/// strings. Serializes to a JSON object preserving insertion order.
#[derive(Debug, Clone, Default)]
pub struct Echo(pub Vec<(String, String)>);

impl Echo {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn push_f(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f(value));
    }

    pub fn push_point(&mut self, key: &str, point: &[f64]) {
        let joined = point.iter().map(|&v| fmt_f(v)).collect::<Vec<_>>().join(",");
        self.push(key, joined);
    }

    /// The `# key = value` comment block used by CSV outputs.
    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

impl Serialize for Echo {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Resolves an output path: relative paths are joined onto the directory from
/// [`OUTPUT_DIR_ENV`] when that variable is set and nonempty.
pub fn resolve_output_path(path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(p);
            }
        }
    }
    p.to_path_buf()
}

/// Writes `content` to the resolved output path, or to stdout when no path
/// was requested.
pub fn emit(output: Option<&str>, content: &str) -> Result<(), String> {
    match output {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let resolved = resolve_output_path(path);
            std::fs::write(&resolved, content)
                .map_err(|e| format!("cannot write output file {}: {e}", resolved.display()))
        }
    }
}

fn json_string<T: Serialize>(payload: &T) -> Result<String, String> {
    serde_json::to_string_pretty(payload)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| format!("cannot serialize output: {e}"))
}

// ---------------------------------------------------------------------------
// solve

#[derive(Serialize)]
struct SolvePayload<'a> {
    config: &'a Echo,
    report: &'a SolveReport,
}

/// JSON solve artifact: `config` echo plus the report with its field names
/// exactly as in [`SolveReport`].
pub fn solve_json(echo: &Echo, report: &SolveReport) -> Result<String, String> {
    json_string(&SolvePayload { config: echo, report })
}

/// CSV solve artifact: config comments, status comments, then one row per
/// iterate with coordinates, natural residual, and step length (empty on the
/// starting row).
pub fn solve_csv(echo: &Echo, report: &SolveReport) -> String {
    let dim = report.iterates.first().map_or(0, |p| p.len());
    let mut out = String::new();
    out.push_str(&echo.comment_lines());
    out.push_str(&format!("# status = {}\n", report.status.as_str()));
    out.push_str(&format!("# descent_warning = {}\n", report.descent_warning));
    out.push_str("iter");
    for i in 0..dim {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",residual,diff\n");
    for (k, point) in report.iterates.iter().enumerate() {
        out.push_str(&k.to_string());
        for &c in point {
            out.push(',');
            out.push_str(&fmt_f(c));
        }
        out.push(',');
        out.push_str(&fmt_f(report.residuals[k]));
        out.push(',');
        if k > 0 {
            out.push_str(&fmt_f(report.successive_diffs[k - 1]));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct SimulatePayload<'a> {
    config: &'a Echo,
    trajectory: &'a Trajectory,
}

pub fn simulate_json(echo: &Echo, traj: &Trajectory) -> Result<String, String> {
    json_string(&SimulatePayload { config: echo, trajectory: traj })
}

/// CSV trajectory: columns `t, x..., v..., a..., residual, lyapunov`, where
/// the `v`/`a` blocks appear only for orders that carry them.
pub fn simulate_csv(echo: &Echo, traj: &Trajectory) -> String {
    let (dim, order) = traj
        .states
        .first()
        .map_or((0, 1), |s| (s.dim(), s.order()));
    let mut out = String::new();
    out.push_str(&echo.comment_lines());
    out.push_str(&format!("# status = {}\n", traj.status.as_str()));
    out.push('t');
    for i in 0..dim {
        out.push_str(&format!(",x{i}"));
    }
    if order >= 2 {
        for i in 0..dim {
            out.push_str(&format!(",v{i}"));
        }
    }
    if order >= 3 {
        for i in 0..dim {
            out.push_str(&format!(",a{i}"));
        }
    }
    out.push_str(",residual,lyapunov\n");
    for (k, state) in traj.states.iter().enumerate() {
        out.push_str(&fmt_f(traj.times[k]));
        for &c in &state.x {
            out.push(',');
            out.push_str(&fmt_f(c));
        }
        if let Some(v) = &state.v {
            for &c in v {
                out.push(',');
                out.push_str(&fmt_f(c));
            }
        }
        if let Some(a) = &state.a {
            for &c in a {
                out.push(',');
                out.push_str(&fmt_f(c));
            }
        }
        out.push(',');
        out.push_str(&fmt_f(traj.residuals[k]));
        out.push(',');
        out.push_str(&fmt_f(mvi_core::dynamics::lyapunov_value(state)));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// check

#[derive(Serialize)]
struct CheckPayload<'a> {
    config: &'a Echo,
    scan: &'a DescentScan,
    summability: &'a SummabilityReport,
}

pub fn check_json(
    echo: &Echo,
    scan: &DescentScan,
    summability: &SummabilityReport,
) -> Result<String, String> {
    json_string(&CheckPayload { config: echo, scan, summability })
}

/// CSV diagnostics: config comments, scan & summability summary comments,
/// then one row per inequality record.
pub fn check_csv(echo: &Echo, scan: &DescentScan, summability: &SummabilityReport) -> String {
    let mut out = String::new();
    out.push_str(&echo.comment_lines());
    out.push_str(&format!("# records = {}\n", scan.records.len()));
    out.push_str(&format!("# violations = {}\n", scan.violations));
    out.push_str(&format!("# tol_ineq = {}\n", fmt_f(scan.tol_ineq)));
    out.push_str(&format!(
        "# tail_max_diff = {}\n",
        fmt_f(summability.tail_max_diff)
    ));
    out.push_str(&format!("# cauchy_ok = {}\n", summability.cauchy_ok));
    if let Some(total) = summability.partial_sums.last() {
        out.push_str(&format!("# sum_sq_diffs = {}\n", fmt_f(*total)));
    }
    out.push_str("n,lhs,rhs,gap\n");
    for r in &scan.records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            fmt_f(r.lhs),
            fmt_f(r.rhs),
            fmt_f(r.gap)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// bench

/// One line of the bench table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub method: String,
    pub status: String,
    pub iterations: usize,
    pub final_residual: f64,
    /// Distance of the final iterate to the catalog reference solution.
    pub distance_to_reference: f64,
}

#[derive(Serialize)]
struct BenchPayload<'a> {
    config: &'a Echo,
    results: &'a [BenchRow],
}

pub fn bench_json(echo: &Echo, rows: &[BenchRow]) -> Result<String, String> {
    json_string(&BenchPayload { config: echo, results: rows })
}

pub fn bench_csv(echo: &Echo, rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str(&echo.comment_lines());
    out.push_str("problem,method,status,iterations,final_residual,distance_to_reference\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.problem,
            r.method,
            r.status,
            r.iterations,
            fmt_f(r.final_residual),
            fmt_f(r.distance_to_reference)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// catalog

#[derive(Serialize)]
struct CatalogPayload<'a> {
    config: &'a Echo,
    entries: &'a [CatalogEntry],
}

pub fn catalog_json(echo: &Echo, entries: &[CatalogEntry]) -> Result<String, String> {
    json_string(&CatalogPayload { config: echo, entries })
}

pub fn catalog_csv(echo: &Echo, entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    out.push_str(&echo.comment_lines());
    out.push_str(
        "name,dim,operator,phi,monotonicity,provenance,x_star,recommended_lambda,recommended_start\n",
    );
    for e in entries {
        let x_star = e
            .x_star
            .iter()
            .map(|&v| fmt_f(v))
            .collect::<Vec<_>>()
            .join(";");
        let start = e
            .recommended_start
            .iter()
            .map(|&v| fmt_f(v))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            e.name,
            e.problem.dim(),
            e.problem.operator.kind_name(),
            e.problem.phi.kind_name(),
            e.monotonicity_class.as_str(),
            e.solution_provenance.as_str(),
            x_star,
            fmt_f(e.recommended_lambda),
            start
        ));
    }
    out
}
