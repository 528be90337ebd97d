//! Numerical verification of the convergence and stability guarantees.
//!
//! Three families of checks run over solver and trajectory output:
//!
//! * the per-step **descent inequality** of the implicit inertial method
//!   ([`descent_inequality_record`], [`descent_inequality_scan`]),
//! * **summability** of successive iterate differences
//!   ([`summability_report`]) together with the nonincreasing-distance tail
//!   check ([`tail_nonincreasing`]),
//! * the pointwise **exponential-stability envelope** of a fitted decay rate
//!   ([`exp_stability_report`]).
//!
//! All checks *measure*; none assume. Tolerances scale with the inner-solve
//! tolerance where the underlying guarantee presumes exact implicit steps.

use serde::Serialize;

use crate::dynamics::{DecayFit, Trajectory};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::solvers::{Method, SolveReport};

/// Slack factor applied to the fitted exponential envelope.
pub const STABILITY_SLACK: f64 = 1.05;

/// One evaluation of the descent inequality on a five-point stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityRecord {
    /// Index of the newest stencil point `x_{n+2}` within the iterate list.
    pub n: usize,
    /// `(alpha - beta*h + gamma*h^2) * ||x* - x_{n+2}||^2`.
    pub lhs: f64,
    /// The five-term right-hand side evaluated at `x := x*`.
    pub rhs: f64,
    /// `rhs - lhs`; negative values beyond tolerance are violations.
    pub gap: f64,
}

/// Evaluates both sides of the descent inequality
///
/// ```text
/// (a - b h + g h^2) ||x* - x_{n+2}||^2
///   <=   a ||x* - 2 x_{n+1} + 2 x_{n-1} - x_{n-2}||^2
///      - a ||x_{n+2} - 2 x_{n+1} + 2 x_{n-1} - x_{n-2}||^2
///      + b h ||x_{n+1} - 2 x_n + x_{n-1}||^2
///      + g h^2 ||x_n - x_{n-1} + x* - x_{n+2}||^2
///      - g h^2 ||x_n - x_{n-1}||^2
/// ```
///
/// on one stencil `(x_{n-2}, x_{n-1}, x_n, x_{n+1}, x_{n+2})`, oldest first.
/// The inequality is a property of the implicit method's iterates at a true
/// solution `x*`; on arbitrary points the gap may be negative.
pub fn descent_inequality_record(
    x_star: &Point,
    stencil: [&Point; 5],
    alpha: f64,
    beta: f64,
    gamma: f64,
    h: f64,
) -> Result<InequalityRecord> {
    let d = x_star.len();
    for (i, p) in stencil.iter().enumerate() {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                context: "descent inequality stencil",
                expected: d,
                got: stencil[i].len(),
            });
        }
    }
    let [xm2, xm1, x0, xp1, xp2] = stencil;
    let mut dist_sq = 0.0; // ||x* - x_{n+2}||^2
    let mut comb_star = 0.0; // ||x* - 2 x_{n+1} + 2 x_{n-1} - x_{n-2}||^2
    let mut comb_new = 0.0; // ||x_{n+2} - 2 x_{n+1} + 2 x_{n-1} - x_{n-2}||^2
    let mut second = 0.0; // ||x_{n+1} - 2 x_n + x_{n-1}||^2
    let mut mixed = 0.0; // ||x_n - x_{n-1} + x* - x_{n+2}||^2
    let mut first = 0.0; // ||x_n - x_{n-1}||^2
    for i in 0..d {
        let e = x_star[i] - xp2[i];
        dist_sq += e * e;
        let tail = -2.0 * xp1[i] + 2.0 * xm1[i] - xm2[i];
        let cs = x_star[i] + tail;
        comb_star += cs * cs;
        let cn = xp2[i] + tail;
        comb_new += cn * cn;
        let s = xp1[i] - 2.0 * x0[i] + xm1[i];
        second += s * s;
        let f = x0[i] - xm1[i];
        first += f * f;
        let m = f + e;
        mixed += m * m;
    }
    let lhs = (alpha - beta * h + gamma * h * h) * dist_sq;
    let rhs = alpha * comb_star - alpha * comb_new
        + beta * h * second
        + gamma * h * h * mixed
        - gamma * h * h * first;
    let gap = rhs - lhs;
    if !gap.is_finite() {
        return Err(Error::NonFinite {
            context: "descent inequality record".to_string(),
        });
    }
    Ok(InequalityRecord { n: 0, lhs, rhs, gap })
}

/// Outcome of scanning a full solver run against the descent inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentScan {
    pub records: Vec<InequalityRecord>,
    /// Number of records with `gap < -tol_ineq`.
    pub violations: usize,
    /// `max(1e-8, 10 * inner_tol)` of the run that produced the report.
    pub tol_ineq: f64,
}

/// Evaluates the descent inequality on every outer step of an implicit-method
/// run: each stencil step produced iterate `k >= 4` from the window
/// `iterates[k-4 ..= k]`. A report with fewer than five iterates yields an
/// empty scan with zero violations.
///
/// Only reports produced by the implicit inertial method are accepted, since
/// the inequality is a property of that method's iterates; the tolerance
/// scales with the run's inner tolerance because the guarantee presumes exact
/// inner solves.
pub fn descent_inequality_scan(report: &SolveReport, x_star: &Point) -> Result<DescentScan> {
    if report.method != Method::Algorithm1 {
        return Err(Error::MethodMismatch {
            context: "descent inequality scan",
            required: Method::Algorithm1.as_str(),
            got: report.method.as_str().to_string(),
        });
    }
    let cfg = &report.config_echo;
    let tol_ineq = (10.0 * cfg.inner_tol).max(1e-8);
    let mut records = Vec::new();
    let mut violations = 0;
    for k in 4..report.iterates.len() {
        let mut rec = descent_inequality_record(
            x_star,
            [
                &report.iterates[k - 4],
                &report.iterates[k - 3],
                &report.iterates[k - 2],
                &report.iterates[k - 1],
                &report.iterates[k],
            ],
            cfg.alpha,
            cfg.beta,
            cfg.gamma,
            cfg.h,
        )?;
        rec.n = k;
        if rec.gap < -tol_ineq {
            violations += 1;
        }
        records.push(rec);
    }
    Ok(DescentScan {
        records,
        violations,
        tol_ineq,
    })
}

/// Summary of how fast successive iterate differences die out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    /// Maximum of the last 10% (at least one) of `||x_k - x_{k-1}||`.
    pub tail_max_diff: f64,
    /// Cumulative sums of the squared differences.
    pub partial_sums: Vec<f64>,
    /// Whether the partial sums vary by at most 1e-6 over their last half.
    pub cauchy_ok: bool,
}

/// Builds a [`SummabilityReport`] from a solver run. Requires at least two
/// iterates (one difference).
pub fn summability_report(report: &SolveReport) -> Result<SummabilityReport> {
    let diffs = &report.successive_diffs;
    if diffs.is_empty() {
        return Err(Error::InsufficientData {
            context: "summability report",
            need: 2,
            got: report.iterates.len(),
        });
    }
    let m = diffs.len();
    let mut partial_sums = Vec::with_capacity(m);
    let mut acc = 0.0;
    for d in diffs {
        acc += d * d;
        partial_sums.push(acc);
    }
    let tail_start = (9 * m) / 10;
    let tail_max_diff = diffs[tail_start..]
        .iter()
        .fold(0.0_f64, |a, &d| a.max(d));
    let half = m / 2;
    let last_half = &partial_sums[half..];
    let hi = last_half.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    let lo = last_half.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let cauchy_ok = (hi - lo) <= 1e-6;
    Ok(SummabilityReport {
        tail_max_diff,
        partial_sums,
        cauchy_ok,
    })
}

/// Tail-monotonicity check of a scalar sequence (typically distances to a
/// reference solution).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMonotonicity {
    /// Whether every consecutive pair in the tail satisfies
    /// `value[k+1] <= value[k] + slack`.
    pub ok: bool,
    /// Worst observed increase `value[k+1] - value[k]` in the tail
    /// (negative when strictly decreasing throughout).
    pub max_increase: f64,
    /// First index of the examined tail.
    pub start_index: usize,
}

/// Checks that the last `max(2, n/10)` entries of `values` are nonincreasing
/// up to `slack`. Requires at least two values.
pub fn tail_nonincreasing(values: &[f64], slack: f64) -> Result<TailMonotonicity> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            context: "tail monotonicity check",
            need: 2,
            got: n,
        });
    }
    let tail_len = (n / 10).max(2);
    let start = n - tail_len;
    let mut max_increase = f64::NEG_INFINITY;
    for k in start..n - 1 {
        max_increase = max_increase.max(values[k + 1] - values[k]);
    }
    Ok(TailMonotonicity {
        ok: max_increase <= slack,
        max_increase,
        start_index: start,
    })
}

/// Result of checking a trajectory against its fitted exponential envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Whether the envelope held at every sampled time of the fit window.
    pub pass: bool,
    /// Worst multiplicative violation of the slackened envelope, clamped
    /// below at 1.0 (a passing check reports exactly 1.0).
    pub violation: f64,
}

/// Checks the exponential bound
///
/// ```text
/// ||x(t) - x*||  <=  1.05 * rho * ||x(t0) - x*|| * exp(-(eta/2) (t - t0))
/// ```
///
/// pointwise at every sampled time of the fit window (`eta` decays the
/// *squared* distance, hence `eta/2` here). Returns the pass flag and the
/// worst ratio of distance to slackened envelope.
///
/// A trajectory resting exactly at `x*` on the window passes trivially; a
/// zero starting distance followed by any departure is an unbounded
/// violation.
pub fn exp_stability_report(
    traj: &Trajectory,
    x_star: &Point,
    fit: &DecayFit,
) -> Result<StabilityReport> {
    let n = traj.len();
    if fit.start_index >= n || fit.end_index > n || fit.start_index >= fit.end_index {
        return Err(Error::InvalidParameter {
            name: "fit",
            reason: format!(
                "fit window [{}, {}) does not fit a trajectory of {} samples",
                fit.start_index, fit.end_index, n
            ),
        });
    }
    let dists = traj.distances_to(x_star);
    let t0 = traj.times[fit.start_index];
    let d0 = dists[fit.start_index];
    let mut ratio: f64 = 0.0;
    for k in fit.start_index..fit.end_index {
        let envelope = STABILITY_SLACK * fit.rho * d0 * (-(fit.eta / 2.0) * (traj.times[k] - t0)).exp();
        let r = if dists[k] == 0.0 {
            0.0
        } else if envelope > 0.0 {
            dists[k] / envelope
        } else {
            f64::INFINITY
        };
        ratio = ratio.max(r);
    }
    Ok(StabilityReport {
        pass: ratio <= 1.0,
        violation: ratio.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PhaseState, TrajectoryStatus};
    use crate::operators::MonotoneMap;
    use crate::problem::MviProblem;
    use crate::prox::ProxFunction;
    use crate::solvers::{solve, SolverConfig, Status};

    fn rec(
        x_star: f64,
        stencil: [f64; 5],
        alpha: f64,
        beta: f64,
        gamma: f64,
        h: f64,
    ) -> InequalityRecord {
        let pts: Vec<Point> = stencil.iter().map(|&v| vec![v]).collect();
        descent_inequality_record(
            &vec![x_star],
            [&pts[0], &pts[1], &pts[2], &pts[3], &pts[4]],
            alpha,
            beta,
            gamma,
            h,
        )
        .unwrap()
    }

    #[test]
    fn record_vanishes_on_constant_solution_stencil() {
        let r = rec(1.0, [1.0; 5], 1.0, 1.0, 1.0, 0.5);
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn record_reduces_to_two_terms_without_damping() {
        // alpha = 1, beta = gamma = 0: rhs keeps only the two combination norms
        let s = [0.3, -0.4, 0.8, 0.1, 0.25];
        let x_star = 0.9_f64;
        let r = rec(x_star, s, 1.0, 0.0, 0.0, 2.0);
        let tail = -2.0 * s[3] + 2.0 * s[1] - s[0];
        let expected_rhs = (x_star + tail).powi(2) - (s[4] + tail).powi(2);
        assert!((r.lhs - (x_star - s[4]).powi(2)).abs() < 1e-15);
        assert!((r.rhs - expected_rhs).abs() < 1e-15);
        assert!((r.gap - (r.rhs - r.lhs)).abs() < 1e-15);
    }

    #[test]
    fn record_cross_checked_against_independent_evaluation() {
        // independent evaluation of every norm straight from the definition
        let (a, b, g, h) = (0.7, 0.3, 1.2, 0.8);
        let s = [0.11, -0.52, 0.97, 0.63, -0.08];
        let xs = 0.4;
        let n2 = |v: f64| v * v;
        let lhs = (a - b * h + g * h * h) * n2(xs - s[4]);
        let rhs = a * n2(xs - 2.0 * s[3] + 2.0 * s[1] - s[0])
            - a * n2(s[4] - 2.0 * s[3] + 2.0 * s[1] - s[0])
            + b * h * n2(s[3] - 2.0 * s[2] + s[1])
            + g * h * h * n2(s[2] - s[1] + xs - s[4])
            - g * h * h * n2(s[2] - s[1]);
        let r = rec(xs, s, a, b, g, h);
        assert!((r.lhs - lhs).abs() < 1e-14);
        assert!((r.rhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn random_stencils_can_violate_the_inequality() {
        // the inequality holds for the method's iterates, not arbitrary
        // points: this fixed stencil yields a negative gap
        let r = rec(0.0, [0.0, 0.0, 0.0, 0.0, 5.0], 1.0, 1.0, 1.0, 1.0);
        assert!(r.gap < 0.0, "gap = {}", r.gap);
    }

    fn smooth_problem() -> MviProblem {
        MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![-1.0]).unwrap(),
            ProxFunction::zero(1),
        )
        .unwrap()
    }

    fn stable_config() -> SolverConfig {
        SolverConfig {
            h: 2.0,
            lambda: 0.9,
            tol: 1e-10,
            max_iter: 2000,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn scan_converged_run_has_zero_violations() {
        let prob = smooth_problem();
        let config = stable_config();
        let report = solve(&prob, Method::Algorithm1, &config, &vec![0.0]).unwrap();
        assert_eq!(report.status, Status::Converged);
        let scan = descent_inequality_scan(&report, &vec![1.0]).unwrap();
        assert!(!scan.records.is_empty());
        assert_eq!(scan.violations, 0);
        assert_eq!(scan.tol_ineq, 1e-8);
        // records are indexed by the iterate they certify
        assert_eq!(scan.records[0].n, 4);
        assert_eq!(scan.records.len(), report.iterates.len() - 4);
    }

    #[test]
    fn scan_tolerance_scales_with_inner_tolerance() {
        let config = SolverConfig {
            inner_tol: 1e-2,
            ..stable_config()
        };
        let report = solve(&smooth_problem(), Method::Algorithm1, &config, &vec![0.0]).unwrap();
        let scan = descent_inequality_scan(&report, &vec![1.0]).unwrap();
        assert_eq!(scan.tol_ineq, 0.1);
        assert_eq!(scan.violations, 0); // sloppy solves stay within the scaled band
    }

    #[test]
    fn scan_rejects_other_methods_and_handles_short_reports() {
        let prob = smooth_problem();
        let config = stable_config();
        let baseline = solve(&prob, Method::Baseline, &config, &vec![0.0]).unwrap();
        assert!(matches!(
            descent_inequality_scan(&baseline, &vec![1.0]),
            Err(Error::MethodMismatch { .. })
        ));
        // a zero-budget run has a single iterate: empty scan, no violations
        let stub = solve(
            &prob,
            Method::Algorithm1,
            &SolverConfig { max_iter: 0, ..config },
            &vec![0.0],
        )
        .unwrap();
        let scan = descent_inequality_scan(&stub, &vec![1.0]).unwrap();
        assert!(scan.records.is_empty());
        assert_eq!(scan.violations, 0);
    }

    fn report_from_scalars(xs: &[f64]) -> SolveReport {
        let iterates: Vec<Point> = xs.iter().map(|&v| vec![v]).collect();
        let successive_diffs = xs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        SolveReport {
            method: Method::Algorithm1,
            status: Status::Converged,
            residuals: vec![0.0; iterates.len()],
            iterates,
            successive_diffs,
            config_echo: SolverConfig::default(),
            descent_warning: false,
        }
    }

    #[test]
    fn summability_geometric_sequence_is_cauchy() {
        let xs: Vec<f64> = (0..60).map(|n| 1.0 - 0.5_f64.powi(n)).collect();
        let s = summability_report(&report_from_scalars(&xs)).unwrap();
        assert!(s.cauchy_ok);
        // differences shrink to the rounding floor near 1.0 (one ulp)
        assert!(s.tail_max_diff < 1e-15, "tail {}", s.tail_max_diff);
        assert_eq!(s.partial_sums.len(), 59);
        // partial sums of squared diffs of a geometric sequence approach 1/3
        let total = s.partial_sums.last().unwrap();
        assert!((total - 1.0 / 3.0).abs() < 1e-9, "total = {total}");
    }

    #[test]
    fn summability_constant_and_oscillating_sequences() {
        let constant = report_from_scalars(&[2.0; 25]);
        let s = summability_report(&constant).unwrap();
        assert_eq!(s.tail_max_diff, 0.0);
        assert!(s.cauchy_ok);

        let osc: Vec<f64> = (0..40).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = summability_report(&report_from_scalars(&osc)).unwrap();
        assert!(!s.cauchy_ok);
        assert_eq!(s.tail_max_diff, 2.0);
    }

    #[test]
    fn summability_requires_two_iterates() {
        let single = report_from_scalars(&[1.0]);
        assert!(matches!(
            summability_report(&single),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn tail_monotonicity_detects_late_increases() {
        let decreasing: Vec<f64> = (0..50).map(|n| 1.0 / (1.0 + n as f64)).collect();
        let t = tail_nonincreasing(&decreasing, 1e-8).unwrap();
        assert!(t.ok);
        assert!(t.max_increase < 0.0);
        assert_eq!(t.start_index, 45);

        let mut bumped = decreasing.clone();
        bumped[48] = 1.0; // a late spike lands inside the examined tail
        let t = tail_nonincreasing(&bumped, 1e-8).unwrap();
        assert!(!t.ok);
        assert!(t.max_increase > 0.9);

        assert!(tail_nonincreasing(&[1.0], 0.0).is_err());
    }

    /// A synthetic scalar trajectory with prescribed distances from x* = 0.
    fn synthetic_traj(dists: &[f64], dt: f64) -> Trajectory {
        Trajectory {
            times: (0..dists.len()).map(|k| k as f64 * dt).collect(),
            states: dists.iter().map(|&d| PhaseState::first(vec![d])).collect(),
            residuals: vec![0.0; dists.len()],
            status: TrajectoryStatus::Completed,
        }
    }

    #[test]
    fn stability_exact_exponential_passes_with_unit_violation() {
        let dists: Vec<f64> = (0..200).map(|k| (-1.5 * k as f64 * 0.05).exp()).collect();
        let traj = synthetic_traj(&dists, 0.05);
        let fit = estimate(&traj);
        assert!((fit.eta - 3.0).abs() < 1e-9);
        let s = exp_stability_report(&traj, &vec![0.0], &fit).unwrap();
        assert!(s.pass);
        assert_eq!(s.violation, 1.0);
    }

    #[test]
    fn stability_single_spike_fails_with_predicted_ratio() {
        let clean: Vec<f64> = (0..200).map(|k| (-1.5 * k as f64 * 0.05).exp()).collect();
        let fit = estimate(&synthetic_traj(&clean, 0.05));
        let mut spiked = clean;
        spiked[150] *= 10.0;
        let traj = synthetic_traj(&spiked, 0.05);
        let s = exp_stability_report(&traj, &vec![0.0], &fit).unwrap();
        assert!(!s.pass);
        assert!((s.violation - 10.0 / STABILITY_SLACK).abs() < 1e-6, "violation = {}", s.violation);
    }

    #[test]
    fn stability_resting_trajectory_passes_trivially() {
        let traj = synthetic_traj(&[0.0; 40], 0.1);
        // hand-built fit: the estimator cannot fit all-zero distances
        let fit = DecayFit {
            eta: 0.0,
            rho: 1.0,
            fit_residual: 0.0,
            start_index: 0,
            end_index: 40,
        };
        let s = exp_stability_report(&traj, &vec![0.0], &fit).unwrap();
        assert!(s.pass);
        assert_eq!(s.violation, 1.0);

        let bad_window = DecayFit { start_index: 50, ..fit };
        assert!(exp_stability_report(&traj, &vec![0.0], &bad_window).is_err());
    }

    fn estimate(traj: &Trajectory) -> DecayFit {
        crate::dynamics::estimate_decay_rate(traj, &[0.0], 0.5).unwrap()
    }
}
