//! Run configuration: flat `key = value` files, flag overlay, problem
//! resolution, and the effective-config echo.
//!
//! Precedence is flags over file over defaults. Unknown and duplicate keys
//! are rejected with their line number. The fully resolved configuration is
//! echoed into every output so each artifact records exactly how it was
//! produced.

use std::collections::HashSet;

use mvi_core::catalog;
use mvi_core::operators::MonotoneMap;
use mvi_core::problem::MviProblem;
use mvi_core::prox::ProxFunction;
use mvi_core::solvers::SolverConfig;

use crate::output::fmt_f;

/// Every accepted configuration key, in documentation order.
pub const KNOWN_KEYS: &[&str] = &[
    // run selection
    "problem", "method", "format", "output", "seed",
    // solver parameters
    "h", "lambda", "alpha", "beta", "gamma", "tol", "max_iter", "inner_tol",
    "inner_max", "inner_damping",
    // dynamics parameters
    "dt", "t_end", "integrator", "stride",
    // points
    "x0", "x_star",
    // inline operator
    "operator", "matrix", "offset", "cubic", "linear", "constant", "m", "s",
    // inline convex term
    "phi", "lo", "hi", "center", "radius", "tau", "diag", "phi_linear",
];

/// All settings a run can carry, each optional until resolution.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    pub problem: Option<String>,
    pub method: Option<String>,
    pub format: Option<String>,
    pub output: Option<String>,
    pub seed: Option<u64>,

    pub h: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub inner_tol: Option<f64>,
    pub inner_max: Option<usize>,
    pub inner_damping: Option<f64>,

    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub integrator: Option<String>,
    pub stride: Option<usize>,

    pub x0: Option<Vec<f64>>,
    pub x_star: Option<Vec<f64>>,

    pub operator: Option<String>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub offset: Option<Vec<f64>>,
    pub cubic: Option<f64>,
    pub linear: Option<f64>,
    pub constant: Option<f64>,
    pub m: Option<f64>,
    pub s: Option<f64>,

    pub phi: Option<String>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub tau: Option<f64>,
    pub diag: Option<Vec<f64>>,
    pub phi_linear: Option<Vec<f64>>,
}

fn parse_f64(value: &str, ctx: &str) -> Result<f64, String> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("{ctx}: expected a number, got {value:?}"))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{ctx}: value must be finite, got {value:?}"))
            }
        })
}

fn parse_usize(value: &str, ctx: &str) -> Result<usize, String> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("{ctx}: expected a nonnegative integer, got {value:?}"))
}

fn parse_u64(value: &str, ctx: &str) -> Result<u64, String> {
    value
        .trim()
        .parse::<u64>()
        .map_err(|_| format!("{ctx}: expected a nonnegative integer, got {value:?}"))
}

/// Parses a comma-separated point such as `1, 0.5`.
pub fn parse_point(value: &str, ctx: &str) -> Result<Vec<f64>, String> {
    let coords: Result<Vec<f64>, String> = value
        .split(',')
        .map(|c| parse_f64(c, ctx))
        .collect();
    let coords = coords?;
    if coords.is_empty() {
        return Err(format!("{ctx}: empty point"));
    }
    Ok(coords)
}

/// Parses a matrix with `;`-separated rows, e.g. `2,0.5; 0.5,1.5`.
pub fn parse_matrix(value: &str, ctx: &str) -> Result<Vec<Vec<f64>>, String> {
    let rows: Result<Vec<Vec<f64>>, String> = value
        .split(';')
        .map(|r| parse_point(r, ctx))
        .collect();
    let rows = rows?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(format!("{ctx}: rows have unequal lengths"));
    }
    Ok(rows)
}

impl Settings {
    /// Applies one `key = value` pair; `ctx` prefixes error messages
    /// (e.g. "config line 3" or "flag --h").
    pub fn apply(&mut self, key: &str, value: &str, ctx: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "problem" => self.problem = Some(value.to_string()),
            "method" => self.method = Some(value.to_string()),
            "format" => self.format = Some(value.to_string()),
            "output" => self.output = Some(value.to_string()),
            "seed" => self.seed = Some(parse_u64(value, ctx)?),
            "h" => self.h = Some(parse_f64(value, ctx)?),
            "lambda" => self.lambda = Some(parse_f64(value, ctx)?),
            "alpha" => self.alpha = Some(parse_f64(value, ctx)?),
            "beta" => self.beta = Some(parse_f64(value, ctx)?),
            "gamma" => self.gamma = Some(parse_f64(value, ctx)?),
            "tol" => self.tol = Some(parse_f64(value, ctx)?),
            "max_iter" => self.max_iter = Some(parse_usize(value, ctx)?),
            "inner_tol" => self.inner_tol = Some(parse_f64(value, ctx)?),
            "inner_max" => self.inner_max = Some(parse_usize(value, ctx)?),
            "inner_damping" => self.inner_damping = Some(parse_f64(value, ctx)?),
            "dt" => self.dt = Some(parse_f64(value, ctx)?),
            "t_end" => self.t_end = Some(parse_f64(value, ctx)?),
            "integrator" => self.integrator = Some(value.to_string()),
            "stride" => self.stride = Some(parse_usize(value, ctx)?),
            "x0" => self.x0 = Some(parse_point(value, ctx)?),
            "x_star" => self.x_star = Some(parse_point(value, ctx)?),
            "operator" => self.operator = Some(value.to_string()),
            "matrix" => self.matrix = Some(parse_matrix(value, ctx)?),
            "offset" => self.offset = Some(parse_point(value, ctx)?),
            "cubic" => self.cubic = Some(parse_f64(value, ctx)?),
            "linear" => self.linear = Some(parse_f64(value, ctx)?),
            "constant" => self.constant = Some(parse_f64(value, ctx)?),
            "m" => self.m = Some(parse_f64(value, ctx)?),
            "s" => self.s = Some(parse_f64(value, ctx)?),
            "phi" => self.phi = Some(value.to_string()),
            "lo" => self.lo = Some(parse_point(value, ctx)?),
            "hi" => self.hi = Some(parse_point(value, ctx)?),
            "center" => self.center = Some(parse_point(value, ctx)?),
            "radius" => self.radius = Some(parse_f64(value, ctx)?),
            "tau" => self.tau = Some(parse_f64(value, ctx)?),
            "diag" => self.diag = Some(parse_point(value, ctx)?),
            "phi_linear" => self.phi_linear = Some(parse_point(value, ctx)?),
            other => {
                return Err(format!(
                    "{ctx}: unknown key {other:?} (known keys: {})",
                    KNOWN_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Overlays `other` on top of `self`: any value set there wins.
    pub fn overlay(&mut self, other: Settings) {
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $( if other.$field.is_some() { self.$field = other.$field; } )*
            };
        }
        take!(
            problem, method, format, output, seed, h, lambda, alpha, beta, gamma,
            tol, max_iter, inner_tol, inner_max, inner_damping, dt, t_end,
            integrator, stride, x0, x_star, operator, matrix, offset, cubic,
            linear, constant, m, s, phi, lo, hi, center, radius, tau, diag,
            phi_linear,
        );
    }
}

/// Parses a flat `key = value` config file: UTF-8, `#` starts a comment,
/// blank lines ignored, unknown and duplicate keys rejected.
pub fn parse_config_text(text: &str) -> Result<Settings, String> {
    let mut settings = Settings::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let ctx = format!("config line {line_no}");
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{ctx}: expected `key = value`, got {line:?}"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("{ctx}: empty key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(format!("{ctx}: duplicate key {key:?}"));
        }
        settings.apply(key, value, &ctx)?;
    }
    Ok(settings)
}

/// Reads and parses a config file from disk.
pub fn load_config_file(path: &str) -> Result<Settings, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {path:?}: {e}"))?;
    parse_config_text(&text)
}

/// A problem ready to run: the instance, its label, the reference solution
/// when one is known, per-problem run hints, and the echo pairs describing an
/// inline problem definition.
#[derive(Debug)]
pub struct ResolvedProblem {
    pub label: String,
    pub problem: MviProblem,
    pub x_star: Option<Vec<f64>>,
    pub recommended_lambda: Option<f64>,
    pub recommended_start: Option<Vec<f64>>,
    /// `key = value` pairs reproducing an inline spec (empty for catalog
    /// entries).
    pub inline_echo: Vec<(String, String)>,
}

fn fmt_point_echo(p: &[f64]) -> String {
    p.iter().map(|&v| fmt_f(v)).collect::<Vec<_>>().join(",")
}

fn fmt_matrix_echo(m: &[Vec<f64>]) -> String {
    m.iter().map(|r| fmt_point_echo(r)).collect::<Vec<_>>().join(";")
}

fn require<T: Clone>(opt: &Option<T>, key: &str, ctx: &str) -> Result<T, String> {
    opt.clone()
        .ok_or_else(|| format!("{ctx} requires the {key:?} key"))
}

/// Builds the problem selected by `settings.problem`: a catalog name, or
/// `inline` assembled from the operator / phi keys.
pub fn resolve_problem(settings: &Settings) -> Result<ResolvedProblem, String> {
    let selector = settings
        .problem
        .as_deref()
        .ok_or_else(|| {
            format!(
                "no problem selected; pass --problem with a catalog name ({}) or `inline`",
                catalog::catalog().iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
            )
        })?;
    if selector != "inline" {
        let entry = catalog::find(selector).map_err(|e| e.to_string())?;
        return Ok(ResolvedProblem {
            label: entry.name.to_string(),
            problem: entry.problem,
            // an explicit x_star overrides the catalog reference
            x_star: settings.x_star.clone().or(Some(entry.x_star)),
            recommended_lambda: Some(entry.recommended_lambda),
            recommended_start: Some(entry.recommended_start),
            inline_echo: Vec::new(),
        });
    }

    let mut echo: Vec<(String, String)> = Vec::new();
    let op_kind = require(&settings.operator, "operator", "inline problem")?;
    echo.push(("operator".into(), op_kind.clone()));
    let operator = match op_kind.as_str() {
        "affine" => {
            let matrix = require(&settings.matrix, "matrix", "operator = affine")?;
            let offset = require(&settings.offset, "offset", "operator = affine")?;
            echo.push(("matrix".into(), fmt_matrix_echo(&matrix)));
            echo.push(("offset".into(), fmt_point_echo(&offset)));
            MonotoneMap::affine(matrix, offset).map_err(|e| e.to_string())?
        }
        "gradient_quadratic" => {
            let matrix = require(&settings.matrix, "matrix", "operator = gradient_quadratic")?;
            let offset = require(&settings.offset, "offset", "operator = gradient_quadratic")?;
            echo.push(("matrix".into(), fmt_matrix_echo(&matrix)));
            echo.push(("offset".into(), fmt_point_echo(&offset)));
            MonotoneMap::gradient_quadratic(matrix, offset).map_err(|e| e.to_string())?
        }
        "scalar_cubic" => {
            let cubic = settings.cubic.unwrap_or(0.0);
            let linear = settings.linear.unwrap_or(0.0);
            let constant = settings.constant.unwrap_or(0.0);
            echo.push(("cubic".into(), fmt_f(cubic)));
            echo.push(("linear".into(), fmt_f(linear)));
            echo.push(("constant".into(), fmt_f(constant)));
            MonotoneMap::scalar_cubic(cubic, linear, constant).map_err(|e| e.to_string())?
        }
        "rotation" => {
            let m = require(&settings.m, "m", "operator = rotation")?;
            let s = require(&settings.s, "s", "operator = rotation")?;
            echo.push(("m".into(), fmt_f(m)));
            echo.push(("s".into(), fmt_f(s)));
            MonotoneMap::rotation(m, s).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "unknown operator kind {other:?}; expected affine, gradient_quadratic, scalar_cubic, or rotation"
            ))
        }
    };

    let dim = operator.dim();
    let phi_kind = settings.phi.clone().unwrap_or_else(|| "zero".to_string());
    echo.push(("phi".into(), phi_kind.clone()));
    let phi = match phi_kind.as_str() {
        "zero" => ProxFunction::zero(dim),
        "indicator_box" => {
            let lo = require(&settings.lo, "lo", "phi = indicator_box")?;
            let hi = require(&settings.hi, "hi", "phi = indicator_box")?;
            echo.push(("lo".into(), fmt_point_echo(&lo)));
            echo.push(("hi".into(), fmt_point_echo(&hi)));
            ProxFunction::indicator_box(lo, hi).map_err(|e| e.to_string())?
        }
        "indicator_ball" => {
            let center = require(&settings.center, "center", "phi = indicator_ball")?;
            let radius = require(&settings.radius, "radius", "phi = indicator_ball")?;
            echo.push(("center".into(), fmt_point_echo(&center)));
            echo.push(("radius".into(), fmt_f(radius)));
            ProxFunction::indicator_ball(center, radius).map_err(|e| e.to_string())?
        }
        "indicator_orthant" => ProxFunction::indicator_orthant(dim),
        "l1" => {
            let tau = settings.tau.unwrap_or(1.0);
            echo.push(("tau".into(), fmt_f(tau)));
            ProxFunction::l1(dim, tau).map_err(|e| e.to_string())?
        }
        "quadratic" => {
            let diag = require(&settings.diag, "diag", "phi = quadratic")?;
            let linear = require(&settings.phi_linear, "phi_linear", "phi = quadratic")?;
            echo.push(("diag".into(), fmt_point_echo(&diag)));
            echo.push(("phi_linear".into(), fmt_point_echo(&linear)));
            ProxFunction::quadratic(diag, linear).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "unknown phi kind {other:?}; expected zero, indicator_box, indicator_ball, indicator_orthant, l1, or quadratic"
            ))
        }
    };

    let problem = MviProblem::new(operator, phi).map_err(|e| e.to_string())?;
    Ok(ResolvedProblem {
        label: "inline".to_string(),
        problem,
        x_star: settings.x_star.clone(),
        recommended_lambda: None,
        recommended_start: None,
        inline_echo: echo,
    })
}

/// Resolves the solver configuration: explicit settings win, then the
/// problem's recommended step, then the library defaults.
pub fn resolve_solver_config(
    settings: &Settings,
    recommended_lambda: Option<f64>,
) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        h: settings.h.unwrap_or(d.h),
        lambda: settings
            .lambda
            .or(recommended_lambda)
            .unwrap_or(d.lambda),
        alpha: settings.alpha.unwrap_or(d.alpha),
        beta: settings.beta.unwrap_or(d.beta),
        gamma: settings.gamma.unwrap_or(d.gamma),
        tol: settings.tol.unwrap_or(d.tol),
        max_iter: settings.max_iter.unwrap_or(d.max_iter),
        inner_tol: settings.inner_tol.unwrap_or(d.inner_tol),
        inner_max: settings.inner_max.unwrap_or(d.inner_max),
        inner_damping: settings.inner_damping.unwrap_or(d.inner_damping),
    }
}

/// Resolves the starting point: explicit `x0`, else the problem's
/// recommended start, else the origin.
pub fn resolve_start(
    settings: &Settings,
    recommended_start: Option<&Vec<f64>>,
    dim: usize,
) -> Vec<f64> {
    settings
        .x0
        .clone()
        .or_else(|| recommended_start.cloned())
        .unwrap_or_else(|| vec![0.0; dim])
}
