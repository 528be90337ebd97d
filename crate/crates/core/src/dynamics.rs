//! Continuous-time resolvent dynamics and trajectory analysis.
//!
//! The third-order resolvent dynamical system attached to an MVI is
//!
//! ```text
//! alpha*x''' + beta*x'' + gamma*x' + x = J_phi(x - lambda*T(x)),
//! ```
//!
//! whose equilibria are exactly the MVI solutions. Setting `alpha = 0`
//! (and then `beta = 0`) yields the second-order and first-order reductions;
//! the first-order flow `x' = gamma*[J_phi(x - lambda*T(x)) - x]` is the
//! classical prox-gradient flow. This module integrates these systems with
//! fixed-step explicit Euler or classical RK4, records natural residuals
//! along the way, and fits exponential decay rates to trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};
use crate::problem::MviProblem;

/// Trajectories abort once `||x||` exceeds this bound.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// Parameters of the dynamical system. `alpha > 0` selects the third-order
/// system; `alpha = 0, beta > 0` the second-order one; `alpha = beta = 0`
/// the first-order flow. `gamma` and `lambda` must always be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for DynamicsParams {
    /// The all-ones configuration used throughout as the reference setting.
    fn default() -> Self {
        DynamicsParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            lambda: 1.0,
        }
    }
}

impl DynamicsParams {
    /// Checks sign constraints: `alpha, beta >= 0`, `gamma, lambda > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be nonnegative, got {}", self.alpha),
            });
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must be nonnegative, got {}", self.beta),
            });
        }
        if self.alpha == 0.0 && self.beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must be nonnegative".to_string(),
            });
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive, got {}", self.gamma),
            });
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be positive, got {}", self.lambda),
            });
        }
        Ok(())
    }

    /// Order of the selected system: 3, 2, or 1.
    pub fn order(&self) -> usize {
        if self.alpha > 0.0 {
            3
        } else if self.beta > 0.0 {
            2
        } else {
            1
        }
    }
}

/// State of the dynamical system: position, and (for orders >= 2, >= 3)
/// velocity and acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Point>,
}

impl PhaseState {
    /// First-order state (position only).
    pub fn first(x: Point) -> Self {
        PhaseState { x, v: None, a: None }
    }

    /// Second-order state.
    pub fn second(x: Point, v: Point) -> Self {
        PhaseState { x, v: Some(v), a: None }
    }

    /// Third-order state.
    pub fn third(x: Point, v: Point, a: Point) -> Self {
        PhaseState {
            x,
            v: Some(v),
            a: Some(a),
        }
    }

    /// State at position `x` with zero derivatives, shaped for `order`.
    pub fn at_rest(x: Point, order: usize) -> Self {
        let d = x.len();
        match order {
            1 => PhaseState::first(x),
            2 => PhaseState::second(x, vec![0.0; d]),
            _ => PhaseState::third(x, vec![0.0; d], vec![0.0; d]),
        }
    }

    /// Order implied by the populated components.
    pub fn order(&self) -> usize {
        match (&self.v, &self.a) {
            (Some(_), Some(_)) => 3,
            (Some(_), None) => 2,
            _ => 1,
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.x.clone();
        if let Some(v) = &self.v {
            flat.extend_from_slice(v);
        }
        if let Some(a) = &self.a {
            flat.extend_from_slice(a);
        }
        flat
    }

    fn from_flat(flat: &[f64], dim: usize, order: usize) -> Self {
        let x = flat[..dim].to_vec();
        match order {
            1 => PhaseState::first(x),
            2 => PhaseState::second(x, flat[dim..2 * dim].to_vec()),
            _ => PhaseState::third(x, flat[dim..2 * dim].to_vec(), flat[2 * dim..3 * dim].to_vec()),
        }
    }
}

/// The Lyapunov functional `V(s) = 1/2 (||x||^2 + ||v||^2)`, with `v := 0`
/// for first-order states. Stability checks compose it with the shifted
/// state `(x - x*, v)`.
pub fn lyapunov_value(s: &PhaseState) -> f64 {
    let vx = point::norm_sq(&s.x);
    let vv = s.v.as_ref().map_or(0.0, |v| point::norm_sq(v));
    0.5 * (vx + vv)
}

/// Time derivative of a [`PhaseState`] for the third-order system; errors
/// unless `params.alpha > 0` (callers must dispatch to
/// [`vector_field_reduced`] for lower orders) or the state is not third-order.
pub fn vector_field(problem: &MviProblem, params: &DynamicsParams, s: &PhaseState) -> Result<PhaseState> {
    params.validate()?;
    if params.alpha == 0.0 {
        return Err(Error::UnsupportedConfig {
            method: "vector_field",
            reason: "alpha = 0 selects a reduced order; use vector_field_reduced".to_string(),
        });
    }
    if s.order() != 3 {
        return Err(Error::InvalidParameter {
            name: "state",
            reason: format!("third-order system needs (x, v, a), got order {}", s.order()),
        });
    }
    let d = s.dim();
    let flat = s.to_flat();
    let mut out = vec![0.0; 3 * d];
    let mut stepper = Stepper::new(problem, *params, d)?;
    stepper.rhs(&flat, &mut out)?;
    Ok(PhaseState::third(
        out[..d].to_vec(),
        out[d..2 * d].to_vec(),
        out[2 * d..].to_vec(),
    ))
}

/// Time derivative for the reduced orders (`alpha = 0`): second order when
/// `beta > 0` (state `(x, v)`), first order when `beta = 0` (state `(x)`).
pub fn vector_field_reduced(
    problem: &MviProblem,
    params: &DynamicsParams,
    s: &PhaseState,
) -> Result<PhaseState> {
    params.validate()?;
    if params.alpha != 0.0 {
        return Err(Error::UnsupportedConfig {
            method: "vector_field_reduced",
            reason: "alpha > 0 selects the third-order system; use vector_field".to_string(),
        });
    }
    let order = params.order();
    if s.order() != order {
        return Err(Error::InvalidParameter {
            name: "state",
            reason: format!("order-{order} system got a state of order {}", s.order()),
        });
    }
    let d = s.dim();
    let flat = s.to_flat();
    let mut out = vec![0.0; order * d];
    let mut stepper = Stepper::new(problem, *params, d)?;
    stepper.rhs(&flat, &mut out)?;
    Ok(PhaseState::from_flat(&out, d, order))
}

/// Whether a trajectory ran to its horizon or hit the divergence guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    Diverged,
}

impl TrajectoryStatus {
    /// Stable lowercase name (matches the serialized form).
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::Diverged => "diverged",
        }
    }
}

/// A recorded trajectory: sample times, phase states, and the natural
/// residual of the position at each sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub residuals: Vec<f64>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when nothing was recorded.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final recorded position.
    pub fn last_x(&self) -> Option<&Point> {
        self.states.last().map(|s| &s.x)
    }

    /// Distances `||x(t_i) - x_star||` at every sample.
    pub fn distances_to(&self, x_star: &[f64]) -> Vec<f64> {
        self.states.iter().map(|s| point::dist(&s.x, x_star)).collect()
    }

    /// Lyapunov values of the state shifted by `x_star`:
    /// `V(x - x*, v) = 1/2 (||x - x*||^2 + ||v||^2)`.
    pub fn lyapunov_shifted(&self, x_star: &[f64]) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| {
                let shifted = PhaseState {
                    x: point::sub(&s.x, x_star),
                    v: s.v.clone(),
                    a: None, // V depends on (x, v) only
                };
                lyapunov_value(&shifted)
            })
            .collect()
    }
}

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationMethod {
    Euler,
    Rk4,
}

impl std::str::FromStr for IntegrationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(IntegrationMethod::Euler),
            "rk4" => Ok(IntegrationMethod::Rk4),
            other => Err(Error::InvalidParameter {
                name: "integrator",
                reason: format!("unknown method {other:?}; expected euler or rk4"),
            }),
        }
    }
}

/// Reusable right-hand-side evaluator holding the scratch buffers, so the
/// integrator hot loop is allocation-free.
struct Stepper<'p> {
    problem: &'p MviProblem,
    params: DynamicsParams,
    dim: usize,
    order: usize,
    prox_arg: Vec<f64>,
    prox_out: Vec<f64>,
}

impl<'p> Stepper<'p> {
    fn new(problem: &'p MviProblem, params: DynamicsParams, dim: usize) -> Result<Self> {
        if problem.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "dynamics state vs problem",
                expected: problem.dim(),
                got: dim,
            });
        }
        Ok(Stepper {
            problem,
            params,
            dim,
            order: params.order(),
            prox_arg: vec![0.0; dim],
            prox_out: vec![0.0; dim],
        })
    }

    /// Writes the derivative of the flat state `y = [x | v | a]` into `out`.
    fn rhs(&mut self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim;
        let p = &self.params;
        let x = &y[..d];
        self.problem
            .fixed_point_map_into(x, p.lambda, &mut self.prox_arg, &mut self.prox_out)?;
        match self.order {
            1 => {
                for i in 0..d {
                    out[i] = p.gamma * (self.prox_out[i] - x[i]);
                }
            }
            2 => {
                let v = &y[d..2 * d];
                for i in 0..d {
                    out[i] = v[i];
                    out[d + i] = (self.prox_out[i] - x[i] - p.gamma * v[i]) / p.beta;
                }
            }
            _ => {
                let v = &y[d..2 * d];
                let a = &y[2 * d..3 * d];
                for i in 0..d {
                    out[i] = v[i];
                    out[d + i] = a[i];
                    out[2 * d + i] =
                        (self.prox_out[i] - x[i] - p.gamma * v[i] - p.beta * a[i]) / p.alpha;
                }
            }
        }
        Ok(())
    }
}

/// Integrates the system selected by `params` from `initial` over `[0, t_end]`
/// with fixed step `dt`, recording every step. See [`integrate_sampled`] for
/// strided recording.
pub fn integrate(
    problem: &MviProblem,
    params: &DynamicsParams,
    initial: &PhaseState,
    t_end: f64,
    dt: f64,
    method: IntegrationMethod,
) -> Result<Trajectory> {
    integrate_sampled(problem, params, initial, t_end, dt, method, 1)
}

/// Like [`integrate`] but records only every `stride`-th step (plus the
/// initial state and the final step), for long stiff runs where recording
/// every step would dominate memory.
///
/// The trajectory aborts with [`TrajectoryStatus::Diverged`] when the
/// position norm exceeds [`DIVERGENCE_BOUND`] or becomes non-finite; the
/// recorded prefix is returned.
pub fn integrate_sampled(
    problem: &MviProblem,
    params: &DynamicsParams,
    initial: &PhaseState,
    t_end: f64,
    dt: f64,
    method: IntegrationMethod,
    stride: usize,
) -> Result<Trajectory> {
    params.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be positive, got {dt}"),
        });
    }
    if dt > t_end {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("step {dt} exceeds horizon {t_end}"),
        });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: "must be positive".to_string(),
        });
    }
    let order = params.order();
    if initial.order() != order {
        return Err(Error::InvalidParameter {
            name: "initial state",
            reason: format!("order-{order} system got a state of order {}", initial.order()),
        });
    }
    if initial.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: problem.dim(),
            got: initial.dim(),
        });
    }

    let d = problem.dim();
    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let mut stepper = Stepper::new(problem, *params, d)?;

    let flat_len = order * d;
    let mut y = initial.to_flat();
    let mut k1 = vec![0.0; flat_len];
    let mut k2 = vec![0.0; flat_len];
    let mut k3 = vec![0.0; flat_len];
    let mut k4 = vec![0.0; flat_len];
    let mut tmp = vec![0.0; flat_len];

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_steps / stride + 2),
        states: Vec::with_capacity(n_steps / stride + 2),
        residuals: Vec::with_capacity(n_steps / stride + 2),
        status: TrajectoryStatus::Completed,
    };
    record(problem, params, &y, 0.0, d, order, &mut traj)?;

    for step in 1..=n_steps {
        match method {
            IntegrationMethod::Euler => {
                stepper.rhs(&y, &mut k1)?;
                point::add_scaled(&mut y, dt, &k1);
            }
            IntegrationMethod::Rk4 => {
                stepper.rhs(&y, &mut k1)?;
                stage(&y, dt / 2.0, &k1, &mut tmp);
                stepper.rhs(&tmp, &mut k2)?;
                stage(&y, dt / 2.0, &k2, &mut tmp);
                stepper.rhs(&tmp, &mut k3)?;
                stage(&y, dt, &k3, &mut tmp);
                stepper.rhs(&tmp, &mut k4)?;
                for i in 0..flat_len {
                    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t = step as f64 * dt;
        let finite = y[..d].iter().all(|c| c.is_finite());
        if !finite {
            traj.status = TrajectoryStatus::Diverged;
            break;
        }
        let diverged = point::norm_sq(&y[..d]) > DIVERGENCE_BOUND * DIVERGENCE_BOUND;
        if diverged || step == n_steps || step % stride == 0 {
            record(problem, params, &y, t, d, order, &mut traj)?;
        }
        if diverged {
            traj.status = TrajectoryStatus::Diverged;
            break;
        }
    }
    Ok(traj)
}

fn stage(y: &[f64], h: f64, k: &[f64], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = y[i] + h * k[i];
    }
}

fn record(
    problem: &MviProblem,
    params: &DynamicsParams,
    y: &[f64],
    t: f64,
    d: usize,
    order: usize,
    traj: &mut Trajectory,
) -> Result<()> {
    let state = PhaseState::from_flat(y, d, order);
    let residual = problem.natural_residual(&state.x, params.lambda)?;
    traj.times.push(t);
    traj.states.push(state);
    traj.residuals.push(residual);
    Ok(())
}

/// An exponential-decay fit of `||x(t) - x*||` over the tail of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Decay exponent of the *squared* distance: `dist^2(t) ~ C e^{-eta t}`.
    pub eta: f64,
    /// Normalized amplitude `sqrt(C) / dist(t0)`.
    pub rho: f64,
    /// Root-mean-square residual of the least-squares fit in log space.
    pub fit_residual: f64,
    /// First sample index of the fit window.
    pub start_index: usize,
    /// One past the last sample index of the fit window.
    pub end_index: usize,
}

/// Fits `log dist^2(t) ~ log C - eta * (t - t0)` on the last `window`
/// fraction of the trajectory by least squares.
///
/// The window is truncated before the first sample whose distance is exactly
/// zero; an empty or nearly-empty window (fewer than 10 usable samples) is an
/// error.
pub fn estimate_decay_rate(traj: &Trajectory, x_star: &[f64], window: f64) -> Result<DecayFit> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("must lie in (0, 1], got {window}"),
        });
    }
    let n = traj.len();
    let start = ((n as f64) * (1.0 - window)).floor() as usize;
    let dists = traj.distances_to(x_star);
    // truncate before the first exact zero inside the window
    let mut end = n;
    for i in start..n {
        if dists[i] == 0.0 {
            end = i;
            break;
        }
    }
    let count = end.saturating_sub(start);
    if count < 10 {
        return Err(Error::InsufficientData {
            context: "decay-rate fit window",
            need: 10,
            got: count,
        });
    }
    let t0 = traj.times[start];
    let d0 = dists[start];

    // least squares for y = b + m * (t - t0), y = log dist^2
    let mut sum_t = 0.0;
    let mut sum_y = 0.0;
    let mut sum_tt = 0.0;
    let mut sum_ty = 0.0;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for i in start..end {
        let t = traj.times[i] - t0;
        let y = 2.0 * dists[i].ln();
        sum_t += t;
        sum_y += y;
        sum_tt += t * t;
        sum_ty += t * y;
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let nf = count as f64;
    let denom = nf * sum_tt - sum_t * sum_t;
    let (b, m) = if y_min == y_max {
        (y_min, 0.0) // constant distances: slope exactly zero
    } else if denom.abs() < 1e-300 {
        (sum_y / nf, 0.0) // all samples at one time; flat fit
    } else {
        let m = (nf * sum_ty - sum_t * sum_y) / denom;
        let b = (sum_y - m * sum_t) / nf;
        (b, m)
    };
    let mut ss = 0.0;
    for i in start..end {
        let t = traj.times[i] - t0;
        let y = 2.0 * dists[i].ln();
        let r = y - (b + m * t);
        ss += r * r;
    }
    Ok(DecayFit {
        eta: -m,
        rho: (b / 2.0).exp() / d0,
        fit_residual: (ss / nf).sqrt(),
        start_index: start,
        end_index: end,
    })
}
