//! Discrete-time inertial proximal methods.
//!
//! All multistep methods discretize the third-order resolvent system on a
//! five-point stencil with step `h`:
//!
//! ```text
//! x'''  ~  (x_{n+2} - 2 x_{n+1} + 2 x_{n-1} - x_{n-2}) / (2 h^3)
//! x''   ~  (x_{n+1} - 2 x_n + x_{n-1}) / h^2
//! x'    ~  (x_n - x_{n-1}) / h
//! ```
//!
//! and differ in where the operator `T` is evaluated and which stencil terms
//! are moved through the (nonlinear) resolvent:
//!
//! * `algorithm1` — implicit: `T` at the unknown `x_{n+2}`, affine stencil
//!   terms moved inside the resolvent argument; solved by a damped inner
//!   fixed-point iteration.
//! * `algorithm2` — semi-implicit: `T` at the known `x_{n+1}` (evaluated
//!   once); only the `alpha * x_{n+2}` term remains implicit.
//! * `explicit` — the fully explicit recurrence obtained by moving the
//!   implicit term out of the resolvent; defined only for
//!   `alpha = beta = gamma = 1`.
//! * `direct` — the literal discretization: derivatives outside the
//!   resolvent, `T` at the unknown; the algebraically exact rearrangement is
//!   iterated. (`algorithm1`/`explicit` are *not* rearrangements of this
//!   relation — the resolvent is nonlinear — so both are provided and their
//!   limits compared empirically.)
//! * `baseline` — the classical prox-gradient step `x -> J_phi(x - lambda*T(x))`.
//!
//! History is seeded by three baseline steps ([`warm_up`]). Termination is by
//! natural residual, never by iterate differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};
use crate::problem::MviProblem;

/// Iterates whose norm exceeds this bound mark the run as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// The available methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Algorithm1,
    Algorithm2,
    Explicit,
    Direct,
}

impl Method {
    /// All methods, in reporting order.
    pub const ALL: [Method; 5] = [
        Method::Baseline,
        Method::Algorithm1,
        Method::Algorithm2,
        Method::Explicit,
        Method::Direct,
    ];

    /// Stable lowercase name (matches the serialized form).
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Algorithm1 => "algorithm1",
            Method::Algorithm2 => "algorithm2",
            Method::Explicit => "explicit",
            Method::Direct => "direct",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "algorithm1" => Ok(Method::Algorithm1),
            "algorithm2" => Ok(Method::Algorithm2),
            "explicit" => Ok(Method::Explicit),
            "direct" => Ok(Method::Direct),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!(
                    "unknown method {other:?}; expected one of baseline, algorithm1, algorithm2, explicit, direct"
                ),
            }),
        }
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Natural residual fell at or below `tol`.
    Converged,
    /// The iteration budget ran out first.
    MaxIter,
    /// A damped inner solve exhausted `inner_max` without meeting `inner_tol`.
    InnerSolveFailed,
    /// An iterate became non-finite or exceeded the divergence bound.
    Diverged,
}

impl Status {
    /// Stable lowercase name (matches the serialized form).
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::InnerSolveFailed => "inner_solve_failed",
            Status::Diverged => "diverged",
        }
    }
}

/// Solver configuration shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stencil step size of the finite-difference schemes.
    pub h: f64,
    /// Operator step and resolvent parameter (one knob).
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Stop when the natural residual reaches this value.
    pub tol: f64,
    /// Budget of produced iterates (warm-up steps included).
    pub max_iter: usize,
    /// Inner fixed-point stop: `||u_{k+1} - u_k|| <= inner_tol`.
    pub inner_tol: f64,
    /// Inner fixed-point iteration budget.
    pub inner_max: usize,
    /// Damping `theta` of the inner iteration, in (0, 1].
    pub inner_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 0.5,
            lambda: 0.1,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            tol: 1e-8,
            max_iter: 10_000,
            inner_tol: 1e-10,
            inner_max: 500,
            inner_damping: 0.5,
        }
    }
}

impl SolverConfig {
    /// Validates the sign and range constraints.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 4] = [
            ("h", self.h),
            ("lambda", self.lambda),
            ("tol", self.tol),
            ("inner_tol", self.inner_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        let nonneg: [(&'static str, f64); 3] =
            [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be nonnegative and finite, got {v}"),
                });
            }
        }
        if self.inner_max == 0 {
            return Err(Error::InvalidParameter {
                name: "inner_max",
                reason: "must be at least 1".to_string(),
            });
        }
        if !(self.inner_damping > 0.0 && self.inner_damping <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "inner_damping",
                reason: format!("must lie in (0, 1], got {}", self.inner_damping),
            });
        }
        Ok(())
    }

    /// The descent coefficient `alpha - beta*h + gamma*h^2` that multiplies
    /// the squared distance in the descent inequality.
    pub fn descent_coefficient(&self) -> f64 {
        self.alpha - self.beta * self.h + self.gamma * self.h * self.h
    }

    /// Warning state: the descent coefficient is not positive, so the
    /// distance bound of the descent inequality loses meaning (the iteration
    /// may still run).
    pub fn descent_warning(&self) -> bool {
        !(self.descent_coefficient() > 0.0)
    }
}

/// Rolling window of the last four iterates, oldest first:
/// `(x_{n-2}, x_{n-1}, x_n, x_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    points: [Point; 4],
}

impl History {
    /// Builds a history from four points, oldest first.
    pub fn new(x_nm2: Point, x_nm1: Point, x_n: Point, x_np1: Point) -> Self {
        History {
            points: [x_nm2, x_nm1, x_n, x_np1],
        }
    }

    /// `x_{n-2}`.
    pub fn x_nm2(&self) -> &Point {
        &self.points[0]
    }
    /// `x_{n-1}`.
    pub fn x_nm1(&self) -> &Point {
        &self.points[1]
    }
    /// `x_n`.
    pub fn x_n(&self) -> &Point {
        &self.points[2]
    }
    /// `x_{n+1}` (the newest entry).
    pub fn x_np1(&self) -> &Point {
        &self.points[3]
    }

    /// Shifts the window forward by one iterate.
    pub fn push(&mut self, x_np2: Point) {
        self.points.rotate_left(1);
        self.points[3] = x_np2;
    }
}

/// Seeds a [`History`] with three baseline prox steps from `x0`:
/// `(x0, p(x0), p^2(x0), p^3(x0))` where `p(x) = J_phi(x - lambda*T(x))`.
/// Errors when a warm-up iterate is non-finite.
pub fn warm_up(problem: &MviProblem, config: &SolverConfig, x0: &Point) -> Result<History> {
    config.validate()?;
    let p1 = step_baseline(problem, config, x0)?;
    let p2 = step_baseline(problem, config, &p1)?;
    let p3 = step_baseline(problem, config, &p2)?;
    for (i, p) in [&p1, &p2, &p3].into_iter().enumerate() {
        if !point::is_finite(p) {
            return Err(Error::NonFinite {
                context: format!("warm-up iterate {}", i + 1),
            });
        }
    }
    Ok(History::new(x0.clone(), p1, p2, p3))
}

/// One classical prox-gradient step `J_phi(x - lambda*T(x))`.
pub fn step_baseline(problem: &MviProblem, config: &SolverConfig, x: &Point) -> Result<Point> {
    problem.fixed_point_map(x, config.lambda)
}

/// Damped fixed-point iteration `u <- (1 - theta) u + theta * map(u)` from
/// `u0`, stopping once the update norm reaches `inner_tol`. Returns the last
/// iterate; exhausting `inner_max` yields [`Error::InnerSolveFailed`].
fn damped_fixed_point(
    mut map: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    u0: &Point,
    theta: f64,
    inner_tol: f64,
    inner_max: usize,
) -> Result<Point> {
    let n = u0.len();
    let mut u = u0.clone();
    let mut mapped = vec![0.0; n];
    let mut defect = f64::INFINITY;
    for _ in 0..inner_max {
        map(&u, &mut mapped)?;
        let mut step_sq = 0.0;
        for i in 0..n {
            let next = (1.0 - theta) * u[i] + theta * mapped[i];
            let delta = next - u[i];
            step_sq += delta * delta;
            u[i] = next;
        }
        defect = step_sq.sqrt();
        if !defect.is_finite() {
            return Err(Error::NonFinite {
                context: "inner fixed-point iteration".to_string(),
            });
        }
        if defect <= inner_tol {
            return Ok(u);
        }
    }
    Err(Error::InnerSolveFailed { defect, last: u })
}

/// Shared driver for the three implicit-style steps: builds the resolvent
/// argument for a candidate `u` and iterates it to a fixed point.
fn solve_implicit(
    problem: &MviProblem,
    config: &SolverConfig,
    hist: &History,
    rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<Point> {
    let _ = problem;
    damped_fixed_point(
        rhs,
        hist.x_np1(),
        config.inner_damping,
        config.inner_tol,
        config.inner_max,
    )
}

/// The implicit inertial step: `T` evaluated at the unknown `x_{n+2}` and the
/// affine stencil terms moved inside the resolvent argument,
///
/// ```text
/// x_{n+2} = J_phi[ x_n - lambda*T(x_{n+2})
///                  - (alpha*x_{n+2} - 2(alpha - beta*h) x_{n+1}
///                     - 2(2 beta*h - gamma*h^2) x_n
///                     + 2(alpha + beta*h - gamma*h^2) x_{n-1}
///                     - alpha*x_{n-2}) / (2 h^3) ],
/// ```
///
/// solved by the damped inner iteration started at `x_{n+1}`.
pub fn step_algorithm1(problem: &MviProblem, config: &SolverConfig, hist: &History) -> Result<Point> {
    config.validate()?;
    let d = problem.dim();
    let (h, lam, al, be, ga) = (config.h, config.lambda, config.alpha, config.beta, config.gamma);
    let c = 2.0 * h * h * h;
    let k1 = 2.0 * (al - be * h);
    let k2 = 2.0 * (2.0 * be * h - ga * h * h);
    let k3 = 2.0 * (al + be * h - ga * h * h);
    let mut t_u = vec![0.0; d];
    let mut arg = vec![0.0; d];
    let (xnm2, xnm1, xn, xnp1) = (hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1());
    solve_implicit(problem, config, hist, |u, out| {
        problem.operator.eval_into(u, &mut t_u)?;
        for i in 0..d {
            let stencil = al * u[i] - k1 * xnp1[i] - k2 * xn[i] + k3 * xnm1[i] - al * xnm2[i];
            arg[i] = xn[i] - lam * t_u[i] - stencil / c;
        }
        problem.phi.prox_into(&arg, lam, out)
    })
}

/// The semi-implicit inertial step: `T` evaluated once at the known
/// `x_{n+1}`; only the `alpha * x_{n+2}` stencil term stays implicit,
///
/// ```text
/// x_{n+2} = J_phi[ x_n - lambda*T(x_{n+1})
///                  - (alpha*x_{n+2} - 2(alpha - beta*h - gamma*h^2) x_{n+1}
///                     - 2(2 beta*h + gamma*h^2) x_n
///                     + 2(alpha + beta*h) x_{n-1}
///                     - alpha*x_{n-2}) / (2 h^3) ].
/// ```
///
/// With `alpha = 0` nothing is implicit and a single evaluation is performed.
pub fn step_algorithm2(problem: &MviProblem, config: &SolverConfig, hist: &History) -> Result<Point> {
    config.validate()?;
    let d = problem.dim();
    let (h, lam, al, be, ga) = (config.h, config.lambda, config.alpha, config.beta, config.gamma);
    let c = 2.0 * h * h * h;
    let k1 = 2.0 * (al - be * h - ga * h * h);
    let k2 = 2.0 * (2.0 * be * h + ga * h * h);
    let k3 = 2.0 * (al + be * h);
    let (xnm2, xnm1, xn, xnp1) = (hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1());
    // T is evaluated once, outside the inner loop.
    let t_np1 = problem.operator.eval(xnp1)?;
    let mut arg = vec![0.0; d];
    let rhs = |u: &[f64], out: &mut [f64]| -> Result<()> {
        for i in 0..d {
            let stencil = al * u[i] - k1 * xnp1[i] - k2 * xn[i] + k3 * xnm1[i] - al * xnm2[i];
            arg[i] = xn[i] - lam * t_np1[i] - stencil / c;
        }
        problem.phi.prox_into(&arg, lam, out)
    };
    if al == 0.0 {
        // No implicit coupling remains: one pass computes the step exactly.
        let mut out = vec![0.0; d];
        let mut rhs = rhs;
        rhs(hist.x_np1(), &mut out)?;
        Ok(out)
    } else {
        solve_implicit(problem, config, hist, rhs)
    }
}

/// The fully explicit recurrence, defined only for `alpha = beta = gamma = 1`
/// (errors otherwise, directing to the implicit methods):
///
/// ```text
/// x_{n+2} = (hhat / (1 + hhat)) * J_phi[ (1 - 1/h + 2/h^2) x_n - lambda*T(x_n)
///           - ((2h - 2) x_{n+1} + (2 + 2h - 2h^2) x_{n-1} - x_{n-2}) / (2 h^3) ],
/// ```
///
/// with `hhat = 2 h^3`, exactly as written.
pub fn step_explicit(problem: &MviProblem, config: &SolverConfig, hist: &History) -> Result<Point> {
    config.validate()?;
    if config.alpha != 1.0 || config.beta != 1.0 || config.gamma != 1.0 {
        return Err(Error::UnsupportedConfig {
            method: "explicit",
            reason: format!(
                "the explicit recurrence is defined only for alpha = beta = gamma = 1; \
                 got ({}, {}, {}) — use algorithm1 or algorithm2 instead",
                config.alpha, config.beta, config.gamma
            ),
        });
    }
    let d = problem.dim();
    let (h, lam) = (config.h, config.lambda);
    let hhat = 2.0 * h * h * h;
    let scale = hhat / (1.0 + hhat);
    let cn = 1.0 - 1.0 / h + 2.0 / (h * h);
    let c1 = 2.0 * h - 2.0;
    let c2 = 2.0 + 2.0 * h - 2.0 * h * h;
    let (xnm2, xnm1, xn, xnp1) = (hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1());
    let t_n = problem.operator.eval(xn)?;
    let mut arg = vec![0.0; d];
    for i in 0..d {
        arg[i] = cn * xn[i] - lam * t_n[i] - (c1 * xnp1[i] + c2 * xnm1[i] - xnm2[i]) / hhat;
    }
    let mut out = problem.phi.prox(&arg, lam)?;
    for o in out.iter_mut() {
        *o *= scale;
    }
    Ok(out)
}

/// The literal discretization with derivatives outside the resolvent:
///
/// ```text
/// alpha*D3 + beta*D2 + gamma*D1 + x_{n+2} = J_phi(x_n - lambda*T(x_{n+2})),
/// ```
///
/// iterated via its exact rearrangement
///
/// ```text
/// u <- [ 2h^3 (J_phi(x_n - lambda*T(u)) - beta*D2 - gamma*D1)
///        + alpha (2 x_{n+1} - 2 x_{n-1} + x_{n-2}) ] / (2 h^3 + alpha).
/// ```
///
/// With `alpha = beta = gamma = 0` the scheme degenerates; by convention it
/// dispatches to [`step_baseline`] applied to the newest iterate, so the
/// method family reduces to the classical prox-gradient iteration.
pub fn step_direct(problem: &MviProblem, config: &SolverConfig, hist: &History) -> Result<Point> {
    config.validate()?;
    if config.alpha == 0.0 && config.beta == 0.0 && config.gamma == 0.0 {
        return step_baseline(problem, config, hist.x_np1());
    }
    let d = problem.dim();
    let (h, lam, al, be, ga) = (config.h, config.lambda, config.alpha, config.beta, config.gamma);
    let c = 2.0 * h * h * h;
    let (xnm2, xnm1, xn, xnp1) = (hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1());
    // known finite differences of the history
    let mut d2 = vec![0.0; d];
    let mut d1 = vec![0.0; d];
    for i in 0..d {
        d2[i] = (xnp1[i] - 2.0 * xn[i] + xnm1[i]) / (h * h);
        d1[i] = (xn[i] - xnm1[i]) / h;
    }
    let mut t_u = vec![0.0; d];
    let mut arg = vec![0.0; d];
    let mut j = vec![0.0; d];
    solve_implicit(problem, config, hist, |u, out| {
        problem.operator.eval_into(u, &mut t_u)?;
        for i in 0..d {
            arg[i] = xn[i] - lam * t_u[i];
        }
        problem.phi.prox_into(&arg, lam, &mut j)?;
        for i in 0..d {
            out[i] = (c * (j[i] - be * d2[i] - ga * d1[i])
                + al * (2.0 * xnp1[i] - 2.0 * xnm1[i] + xnm2[i]))
                / (c + al);
        }
        Ok(())
    })
}

/// Dispatches one step of `method` on the current history.
pub fn step(
    problem: &MviProblem,
    method: Method,
    config: &SolverConfig,
    hist: &History,
) -> Result<Point> {
    match method {
        Method::Baseline => step_baseline(problem, config, hist.x_np1()),
        Method::Algorithm1 => step_algorithm1(problem, config, hist),
        Method::Algorithm2 => step_algorithm2(problem, config, hist),
        Method::Explicit => step_explicit(problem, config, hist),
        Method::Direct => step_direct(problem, config, hist),
    }
}

/// Residual defect of a candidate `x_{n+2}` in the implicit relation of
/// `method` (algorithm1, algorithm2, or direct): `||x_next - RHS(x_next)||`.
/// A converged inner solve guarantees this is a small multiple of
/// `inner_tol`. Errors for the non-implicit methods.
pub fn implicit_defect(
    problem: &MviProblem,
    method: Method,
    config: &SolverConfig,
    hist: &History,
    x_next: &Point,
) -> Result<f64> {
    let d = problem.dim();
    let (h, lam, al, be, ga) = (config.h, config.lambda, config.alpha, config.beta, config.gamma);
    let c = 2.0 * h * h * h;
    let (xnm2, xnm1, xn, xnp1) = (hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1());
    let rhs_value = match method {
        Method::Algorithm1 => {
            let k1 = 2.0 * (al - be * h);
            let k2 = 2.0 * (2.0 * be * h - ga * h * h);
            let k3 = 2.0 * (al + be * h - ga * h * h);
            let t_u = problem.operator.eval(x_next)?;
            let mut arg = vec![0.0; d];
            for i in 0..d {
                let stencil =
                    al * x_next[i] - k1 * xnp1[i] - k2 * xn[i] + k3 * xnm1[i] - al * xnm2[i];
                arg[i] = xn[i] - lam * t_u[i] - stencil / c;
            }
            problem.phi.prox(&arg, lam)?
        }
        Method::Algorithm2 => {
            let k1 = 2.0 * (al - be * h - ga * h * h);
            let k2 = 2.0 * (2.0 * be * h + ga * h * h);
            let k3 = 2.0 * (al + be * h);
            let t_np1 = problem.operator.eval(xnp1)?;
            let mut arg = vec![0.0; d];
            for i in 0..d {
                let stencil =
                    al * x_next[i] - k1 * xnp1[i] - k2 * xn[i] + k3 * xnm1[i] - al * xnm2[i];
                arg[i] = xn[i] - lam * t_np1[i] - stencil / c;
            }
            problem.phi.prox(&arg, lam)?
        }
        Method::Direct => {
            let mut d2 = vec![0.0; d];
            let mut d1 = vec![0.0; d];
            for i in 0..d {
                d2[i] = (xnp1[i] - 2.0 * xn[i] + xnm1[i]) / (h * h);
                d1[i] = (xn[i] - xnm1[i]) / h;
            }
            let t_u = problem.operator.eval(x_next)?;
            let mut arg = vec![0.0; d];
            for i in 0..d {
                arg[i] = xn[i] - lam * t_u[i];
            }
            let j = problem.phi.prox(&arg, lam)?;
            let mut out = vec![0.0; d];
            for i in 0..d {
                out[i] = (c * (j[i] - be * d2[i] - ga * d1[i])
                    + al * (2.0 * xnp1[i] - 2.0 * xnm1[i] + xnm2[i]))
                    / (c + al);
            }
            out
        }
        other => {
            return Err(Error::UnsupportedConfig {
                method: "implicit_defect",
                reason: format!("{} has no implicit relation", other.as_str()),
            })
        }
    };
    Ok(point::dist(x_next, &rhs_value))
}

/// Full record of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub status: Status,
    /// Every produced point, starting with `x0` (warm-up included).
    pub iterates: Vec<Point>,
    /// Natural residual of each iterate, aligned with `iterates`.
    pub residuals: Vec<f64>,
    /// `||x_k - x_{k-1}||` for `k >= 1` (one shorter than `iterates`).
    pub successive_diffs: Vec<f64>,
    /// The exact configuration the run used.
    pub config_echo: SolverConfig,
    /// Whether the descent coefficient `alpha - beta*h + gamma*h^2` was
    /// non-positive for this configuration.
    pub descent_warning: bool,
}

impl SolveReport {
    /// The final iterate.
    pub fn final_point(&self) -> &Point {
        self.iterates.last().expect("reports always hold x0")
    }

    /// The final natural residual.
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("reports always hold x0")
    }
}

/// Runs `method` from `x0` until the natural residual reaches `config.tol`,
/// the budget `config.max_iter` (counting every produced iterate, warm-up
/// included) runs out, an inner solve fails, or the iterates diverge.
///
/// Inner-solve failures and divergence are reported through
/// [`SolveReport::status`], never raised; errors are reserved for contract
/// violations (dimension mismatches, invalid configuration, ...).
pub fn solve(
    problem: &MviProblem,
    method: Method,
    config: &SolverConfig,
    x0: &Point,
) -> Result<SolveReport> {
    config.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            context: "solve initial point",
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    if !point::is_finite(x0) {
        return Err(Error::NonFinite {
            context: "solve initial point".to_string(),
        });
    }
    if method == Method::Explicit && (config.alpha != 1.0 || config.beta != 1.0 || config.gamma != 1.0)
    {
        // surface the explicit-scheme precondition before running warm-up
        step_explicit(problem, config, &History::new(x0.clone(), x0.clone(), x0.clone(), x0.clone()))?;
    }

    let mut report = SolveReport {
        method,
        status: Status::MaxIter,
        iterates: vec![x0.clone()],
        residuals: vec![problem.natural_residual(x0, config.lambda)?],
        successive_diffs: Vec::new(),
        config_echo: *config,
        descent_warning: config.descent_warning(),
    };
    if config.max_iter == 0 {
        return Ok(report); // budget spent before the first step
    }
    if report.residuals[0] <= config.tol {
        report.status = Status::Converged;
        return Ok(report);
    }

    // Accepts a candidate iterate: records it and decides whether to stop.
    // Returns `true` when the outer loop should halt.
    fn accept(
        problem: &MviProblem,
        config: &SolverConfig,
        report: &mut SolveReport,
        candidate: Point,
    ) -> bool {
        if !point::is_finite(&candidate) {
            report.status = Status::Diverged;
            return true;
        }
        let residual = match problem.natural_residual(&candidate, config.lambda) {
            Ok(r) => r,
            Err(_) => {
                // residual evaluation overflowed: the run is diverging
                report.status = Status::Diverged;
                return true;
            }
        };
        let diff = point::dist(&candidate, report.final_point());
        let norm = point::norm(&candidate);
        report.iterates.push(candidate);
        report.residuals.push(residual);
        report.successive_diffs.push(diff);
        if residual <= config.tol {
            report.status = Status::Converged;
            return true;
        }
        if norm > DIVERGENCE_BOUND {
            report.status = Status::Diverged;
            return true;
        }
        report.iterates.len() - 1 >= config.max_iter
    }

    if method == Method::Baseline {
        loop {
            let next = match step_baseline(problem, config, report.final_point()) {
                Ok(p) => p,
                Err(Error::NonFinite { .. }) => {
                    report.status = Status::Diverged;
                    return Ok(report);
                }
                Err(e) => return Err(e),
            };
            if accept(problem, config, &mut report, next) {
                return Ok(report);
            }
        }
    }

    // Multistep methods: three baseline warm-up steps, then stencil steps.
    for _ in 0..3 {
        let next = match step_baseline(problem, config, report.final_point()) {
            Ok(p) => p,
            Err(Error::NonFinite { .. }) => {
                report.status = Status::Diverged;
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        if accept(problem, config, &mut report, next) {
            return Ok(report);
        }
    }
    let k = report.iterates.len();
    let mut hist = History::new(
        report.iterates[k - 4].clone(),
        report.iterates[k - 3].clone(),
        report.iterates[k - 2].clone(),
        report.iterates[k - 1].clone(),
    );
    loop {
        let next = match step(problem, method, config, &hist) {
            Ok(p) => p,
            Err(Error::InnerSolveFailed { last, .. }) => {
                report.status = Status::InnerSolveFailed;
                if point::is_finite(&last) {
                    let diff = point::dist(&last, report.final_point());
                    if let Ok(residual) = problem.natural_residual(&last, config.lambda) {
                        report.iterates.push(last);
                        report.residuals.push(residual);
                        report.successive_diffs.push(diff);
                    }
                }
                return Ok(report);
            }
            Err(Error::NonFinite { .. }) => {
                report.status = Status::Diverged;
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        hist.push(next.clone());
        if accept(problem, config, &mut report, next) {
            return Ok(report);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MonotoneMap;
    use crate::prox::ProxFunction;

    /// T(x) = x - 1, phi = 0; x* = 1.
    fn scalar_smooth() -> MviProblem {
        MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![-1.0]).unwrap(),
            ProxFunction::zero(1),
        )
        .unwrap()
    }

    /// T(x) = x, phi = 0; x* = 0.
    fn scalar_origin() -> MviProblem {
        MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![0.0]).unwrap(),
            ProxFunction::zero(1),
        )
        .unwrap()
    }

    fn ones_history() -> History {
        History::new(vec![1.0], vec![1.0], vec![1.0], vec![1.0])
    }

    fn unit_config() -> SolverConfig {
        SolverConfig {
            h: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            inner_tol: 1e-14,
            inner_max: 2000,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn warm_up_geometric_contraction() {
        // lambda = 0.5 on T(x) = x - 1 from 0: (0, 0.5, 0.75, 0.875)
        let prob = scalar_smooth();
        let config = SolverConfig { lambda: 0.5, ..SolverConfig::default() };
        let hist = warm_up(&prob, &config, &vec![0.0]).unwrap();
        assert_eq!(hist.x_nm2(), &vec![0.0]);
        assert_eq!(hist.x_nm1(), &vec![0.5]);
        assert_eq!(hist.x_n(), &vec![0.75]);
        assert_eq!(hist.x_np1(), &vec![0.875]);
    }

    #[test]
    fn warm_up_fixed_point_and_small_lambda() {
        let prob = scalar_smooth();
        let config = SolverConfig { lambda: 0.5, ..SolverConfig::default() };
        let hist = warm_up(&prob, &config, &vec![1.0]).unwrap();
        for p in [hist.x_nm2(), hist.x_nm1(), hist.x_n(), hist.x_np1()] {
            assert_eq!(p, &vec![1.0]);
        }
        // lambda -> 0 keeps the history near x0
        let tiny = SolverConfig { lambda: 1e-12, ..SolverConfig::default() };
        let hist = warm_up(&prob, &tiny, &vec![0.3]).unwrap();
        assert!((hist.x_np1()[0] - 0.3).abs() < 1e-11);
    }

    #[test]
    fn all_steps_fix_a_solution_history() {
        // histories pinned at x* stay at x* for every scheme
        let prob = scalar_smooth();
        let config = unit_config();
        let hist = ones_history();
        for method in Method::ALL {
            let next = step(&prob, method, &config, &hist).unwrap();
            assert!(
                (next[0] - 1.0).abs() <= config.inner_tol + 1e-12,
                "{} moved off the solution: {next:?}",
                method.as_str()
            );
        }
    }

    #[test]
    fn algorithm1_linear_worked_example() {
        // 1-D, phi = 0, T(x) = x, all-ones history and parameters:
        // the implicit relation is u = 1 - u - (u - 1)/2, whose unique
        // solution is u = 3/5 (closed-form linear solve).
        let prob = scalar_origin();
        let config = unit_config();
        let next = step_algorithm1(&prob, &config, &ones_history()).unwrap();
        assert!((next[0] - 0.6).abs() < 1e-12, "got {}", next[0]);
    }

    #[test]
    fn algorithm1_matches_linear_solve_when_lambda_vanishes() {
        // With a tiny lambda the step solves the plain linear five-point
        // recurrence u = rhs - (u - 1)/2 with rhs -> x_n = 1: u -> 1 - (u-1)/2
        // => u = 1 exactly.
        let prob = scalar_origin();
        let config = SolverConfig { lambda: 1e-13, ..unit_config() };
        let next = step_algorithm1(&prob, &config, &ones_history()).unwrap();
        assert!((next[0] - 1.0).abs() < 1e-10, "got {}", next[0]);
    }

    #[test]
    fn algorithm2_closed_form_matches_damped_iteration() {
        // phi = 0 makes the relation linear in x_{n+2}:
        // u (1 + a/(2h^3)) = xn - lam*T(x_{n+1}) + (k1*x_{n+1} + k2*x_n - k3*x_{n-1} + a*x_{n-2})/(2h^3)
        let prob = scalar_origin();
        let config = SolverConfig {
            h: 2.0,
            lambda: 0.5,
            ..unit_config()
        };
        let hist = History::new(vec![0.2], vec![0.4], vec![0.7], vec![0.9]);
        let (h, lam, al, be, ga) = (config.h, config.lambda, 1.0, 1.0, 1.0);
        let c = 2.0 * h * h * h;
        let k1 = 2.0 * (al - be * h - ga * h * h);
        let k2 = 2.0 * (2.0 * be * h + ga * h * h);
        let k3 = 2.0 * (al + be * h);
        let t_np1 = 0.9; // T(x) = x
        let numer = 0.7 - lam * t_np1 + (k1 * 0.9 + k2 * 0.7 - k3 * 0.4 + al * 0.2) / c;
        let expected = numer / (1.0 + al / c);
        let next = step_algorithm2(&prob, &config, &hist).unwrap();
        assert!((next[0] - expected).abs() < 1e-10, "{} vs {expected}", next[0]);
    }

    #[test]
    fn algorithm2_without_inertia_is_single_pass() {
        // alpha = 0 removes the implicit term; the step is well-defined even
        // with inner_max = 1 because exactly one evaluation happens.
        let prob = scalar_origin();
        let config = SolverConfig {
            alpha: 0.0,
            inner_max: 1,
            ..unit_config()
        };
        let hist = History::new(vec![0.1], vec![0.2], vec![0.3], vec![0.4]);
        assert!(step_algorithm2(&prob, &config, &hist).is_ok());
    }

    #[test]
    fn explicit_worked_example() {
        // h=1, lambda=1, T(x)=x, all-ones history: hhat = 2, inner argument
        // 2*1 - 1 - (0 + 2 - 1)/2 = 0.5, result (2/3)*0.5 = 1/3.
        let prob = scalar_origin();
        let config = unit_config();
        let next = step_explicit(&prob, &config, &ones_history()).unwrap();
        assert!((next[0] - 1.0 / 3.0).abs() < 1e-15, "got {}", next[0]);
    }

    #[test]
    fn explicit_zero_fixed_point_and_linearity() {
        let prob = scalar_origin();
        let config = unit_config();
        let zeros = History::new(vec![0.0], vec![0.0], vec![0.0], vec![0.0]);
        assert_eq!(step_explicit(&prob, &config, &zeros).unwrap(), vec![0.0]);
        // doubling a history doubles the output for linear T and phi = 0
        let hist = History::new(vec![0.3], vec![-0.2], vec![0.5], vec![0.1]);
        let double = History::new(vec![0.6], vec![-0.4], vec![1.0], vec![0.2]);
        let a = step_explicit(&prob, &config, &hist).unwrap();
        let b = step_explicit(&prob, &config, &double).unwrap();
        assert!((b[0] - 2.0 * a[0]).abs() < 1e-15);
    }

    #[test]
    fn explicit_requires_unit_parameters() {
        let prob = scalar_origin();
        let config = SolverConfig { alpha: 2.0, ..unit_config() };
        assert!(matches!(
            step_explicit(&prob, &config, &ones_history()),
            Err(Error::UnsupportedConfig { .. })
        ));
        let r = solve(&prob, Method::Explicit, &config, &vec![0.5]);
        assert!(matches!(r, Err(Error::UnsupportedConfig { .. })));
    }

    #[test]
    fn direct_matches_closed_form_on_linear_problem() {
        // phi = 0, T(x) = x: u = [c(xn - lam*u - be*D2 - ga*D1) + al*s]/(c+al)
        // => u (c + al + c*lam) = c(xn - be*D2 - ga*D1) + al*s
        let prob = scalar_origin();
        let config = SolverConfig { h: 2.0, lambda: 0.5, ..unit_config() };
        let hist = History::new(vec![0.2], vec![0.4], vec![0.7], vec![0.9]);
        let (h, lam) = (config.h, config.lambda);
        let c = 2.0 * h * h * h;
        let d2 = (0.9 - 2.0 * 0.7 + 0.4) / (h * h);
        let d1 = (0.7 - 0.4) / h;
        let s = 2.0 * 0.9 - 2.0 * 0.4 + 0.2;
        let expected = (c * (0.7 - d2 - d1) + s) / (c + 1.0 + c * lam);
        let next = step_direct(&prob, &config, &hist).unwrap();
        assert!((next[0] - expected).abs() < 1e-10, "{} vs {expected}", next[0]);
    }

    #[test]
    fn direct_degenerates_to_baseline_sequences() {
        // alpha = beta = gamma = 0 (h = 1): identical iterate sequences
        let prob = scalar_smooth();
        let config = SolverConfig {
            h: 1.0,
            lambda: 0.5,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            tol: 1e-9,
            ..SolverConfig::default()
        };
        let a = solve(&prob, Method::Direct, &config, &vec![0.0]).unwrap();
        let b = solve(&prob, Method::Baseline, &config, &vec![0.0]).unwrap();
        assert_eq!(a.iterates, b.iterates);
        assert_eq!(a.status, Status::Converged);
    }

    #[test]
    fn baseline_solve_geometric() {
        // lambda = 0.5: |x_k - 1| = 2^{-k}; tol 1e-8 within 60 iterations
        let prob = scalar_smooth();
        let config = SolverConfig {
            lambda: 0.5,
            tol: 1e-8,
            max_iter: 60,
            ..SolverConfig::default()
        };
        let r = solve(&prob, Method::Baseline, &config, &vec![0.0]).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.final_point()[0] - 1.0).abs() <= 2e-8);
        assert!(r.iterates.len() <= 61);
    }

    #[test]
    fn zero_budget_reports_max_iter_and_echoes_x0() {
        let prob = scalar_smooth();
        let config = SolverConfig { max_iter: 0, ..SolverConfig::default() };
        // even a solved starting point reports max_iter with a zero budget
        let r = solve(&prob, Method::Algorithm1, &config, &vec![1.0]).unwrap();
        assert_eq!(r.status, Status::MaxIter);
        assert_eq!(r.iterates, vec![vec![1.0]]);
        assert!(r.successive_diffs.is_empty());
    }

    #[test]
    fn starting_at_the_solution_converges_immediately() {
        let prob = scalar_smooth();
        let config = SolverConfig { max_iter: 50, ..SolverConfig::default() };
        let r = solve(&prob, Method::Algorithm1, &config, &vec![1.0]).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.iterates.len(), 1);
    }

    #[test]
    fn report_shapes_are_consistent() {
        let prob = scalar_smooth();
        let config = SolverConfig {
            h: 2.0,
            lambda: 0.9,
            tol: 1e-10,
            max_iter: 500,
            ..SolverConfig::default()
        };
        let r = solve(&prob, Method::Algorithm1, &config, &vec![0.0]).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.iterates.len(), r.residuals.len());
        assert_eq!(r.iterates.len(), r.successive_diffs.len() + 1);
        assert_eq!(r.config_echo, config);
        assert!(!r.descent_warning); // 1 - 2 + 4 = 3 > 0
    }

    #[test]
    fn descent_warning_flag() {
        let ok = SolverConfig { h: 2.0, ..SolverConfig::default() };
        assert_eq!(ok.descent_coefficient(), 3.0);
        assert!(!ok.descent_warning());
        // beta*h > alpha + gamma*h^2: 1 - 4*1 + 0.01 < 0
        let warn = SolverConfig {
            h: 4.0,
            gamma: 1.0 / 1600.0,
            ..SolverConfig::default()
        };
        assert!(warn.descent_warning());
        let r = solve(
            &scalar_smooth(),
            Method::Baseline,
            &SolverConfig { max_iter: 1, ..warn },
            &vec![0.0],
        )
        .unwrap();
        assert!(r.descent_warning);
    }

    #[test]
    fn inner_failure_is_a_status_not_an_error() {
        // a one-iteration inner budget cannot meet a 1e-14 tolerance on a
        // genuinely implicit step far from the solution
        let prob = scalar_origin();
        let config = SolverConfig {
            inner_max: 1,
            inner_tol: 1e-14,
            max_iter: 100,
            h: 2.0,
            lambda: 0.9,
            ..unit_config()
        };
        let r = solve(&prob, Method::Algorithm1, &config, &vec![5.0]).unwrap();
        assert_eq!(r.status, Status::InnerSolveFailed);
    }

    #[test]
    fn defect_certificate_after_converged_steps() {
        let prob = scalar_origin();
        let config = SolverConfig { h: 2.0, lambda: 0.9, inner_tol: 1e-10, ..unit_config() };
        let hist = History::new(vec![0.5], vec![0.4], vec![0.3], vec![0.2]);
        for method in [Method::Algorithm1, Method::Algorithm2, Method::Direct] {
            let next = step(&prob, method, &config, &hist).unwrap();
            let defect = implicit_defect(&prob, method, &config, &hist, &next).unwrap();
            assert!(
                defect <= 5.0 * config.inner_tol,
                "{}: defect {defect}",
                method.as_str()
            );
        }
        assert!(implicit_defect(&prob, Method::Baseline, &config, &hist, &vec![0.0]).is_err());
    }

    #[test]
    fn method_and_status_names_round_trip() {
        for m in Method::ALL {
            let parsed: Method = m.as_str().parse().unwrap();
            assert_eq!(parsed, m);
        }
        assert!("extragradient".parse::<Method>().is_err());
        assert_eq!(Status::InnerSolveFailed.as_str(), "inner_solve_failed");
    }

    #[test]
    fn divergence_is_reported_not_raised() {
        // the explicit recurrence at h = 0.5 is linearly unstable on the
        // smooth scalar problem (spectral radius ~ 1.43): the run must end
        // with a diverged status rather than an error
        let prob = scalar_smooth();
        let config = SolverConfig {
            h: 0.5,
            lambda: 0.1,
            max_iter: 500,
            ..unit_config()
        };
        let r = solve(&prob, Method::Explicit, &config, &vec![0.0]).unwrap();
        assert_eq!(r.status, Status::Diverged);
    }

    #[test]
    fn config_validation_errors() {
        let bad_h = SolverConfig { h: 0.0, ..SolverConfig::default() };
        assert!(bad_h.validate().is_err());
        let bad_damping = SolverConfig { inner_damping: 1.5, ..SolverConfig::default() };
        assert!(bad_damping.validate().is_err());
        let bad_alpha = SolverConfig { alpha: -1.0, ..SolverConfig::default() };
        assert!(bad_alpha.validate().is_err());
    }
}
