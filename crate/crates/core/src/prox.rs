//! Closed-form proximal (resolvent) operators for the convex terms `phi`.
//!
//! For a proper convex `phi`, the resolvent with parameter `rho > 0` is
//!
//! ```text
//! J_phi(x; rho) = argmin_u { rho * phi(u) + 1/2 * ||u - x||^2 },
//! ```
//!
//! i.e. the proximal operator of `rho * phi`. When `phi` is the indicator of
//! a closed convex set, the resolvent is the metric projection onto that set
//! (independent of `rho`). Every kind here has an exact closed form; there
//! are no inner iterative solves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};

/// Slack used when testing membership for indicator values: points within
/// this distance of the set (componentwise / radially) are treated as inside,
/// so that projections composed with membership tests are stable under
/// floating-point rounding.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// A convex term `phi` with a closed-form resolvent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxFunction {
    /// `phi = 0`: the resolvent is the identity.
    Zero { dim: usize },
    /// Indicator of the box `[lo_i, hi_i]` per coordinate; resolvent clamps.
    IndicatorBox { lo: Point, hi: Point },
    /// Indicator of the closed Euclidean ball; resolvent is radial projection.
    IndicatorBall { center: Point, radius: f64 },
    /// Indicator of the nonnegative orthant; resolvent clamps below at zero.
    IndicatorOrthant { dim: usize },
    /// `phi(u) = tau * ||u||_1`; resolvent is componentwise soft-thresholding.
    L1 { dim: usize, tau: f64 },
    /// `phi(u) = 1/2 <diag(d) u, u> + <c, u>` with `d >= 0` componentwise;
    /// resolvent solves `(1 + rho*d_i) u_i = x_i - rho*c_i`.
    Quadratic { diag: Point, linear: Point },
}

impl ProxFunction {
    /// `phi = 0` on R^dim.
    pub fn zero(dim: usize) -> Self {
        ProxFunction::Zero { dim }
    }

    /// Indicator of a coordinate box. Errors when bounds are inverted or
    /// dimensions disagree.
    pub fn indicator_box(lo: Point, hi: Point) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "indicator_box bounds",
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i])) {
            return Err(Error::InvalidParameter {
                name: "indicator_box bounds",
                reason: format!("lo[{i}] = {} exceeds hi[{i}] = {}", lo[i], hi[i]),
            });
        }
        Ok(ProxFunction::IndicatorBox { lo, hi })
    }

    /// Indicator of the closed ball `||u - center|| <= radius`. Errors for
    /// non-positive radius.
    pub fn indicator_ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter {
                name: "indicator_ball radius",
                reason: format!("must be positive, got {radius}"),
            });
        }
        Ok(ProxFunction::IndicatorBall { center, radius })
    }

    /// Indicator of the nonnegative orthant of R^dim.
    pub fn indicator_orthant(dim: usize) -> Self {
        ProxFunction::IndicatorOrthant { dim }
    }

    /// Weighted l1 norm `tau * ||u||_1` with `tau >= 0`.
    pub fn l1(dim: usize, tau: f64) -> Result<Self> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "l1 tau",
                reason: format!("must be nonnegative, got {tau}"),
            });
        }
        Ok(ProxFunction::L1 { dim, tau })
    }

    /// Separable convex quadratic with nonnegative diagonal curvature.
    pub fn quadratic(diag: Point, linear: Point) -> Result<Self> {
        if diag.len() != linear.len() {
            return Err(Error::DimensionMismatch {
                context: "quadratic coefficients",
                expected: diag.len(),
                got: linear.len(),
            });
        }
        if let Some(i) = (0..diag.len()).find(|&i| !(diag[i] >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "quadratic diag",
                reason: format!("must be nonnegative, diag[{i}] = {}", diag[i]),
            });
        }
        Ok(ProxFunction::Quadratic { diag, linear })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ProxFunction::Zero { dim }
            | ProxFunction::IndicatorOrthant { dim }
            | ProxFunction::L1 { dim, .. } => *dim,
            ProxFunction::IndicatorBox { lo, .. } => lo.len(),
            ProxFunction::IndicatorBall { center, .. } => center.len(),
            ProxFunction::Quadratic { diag, .. } => diag.len(),
        }
    }

    /// True for indicator kinds (whose resolvent is a metric projection).
    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            ProxFunction::IndicatorBox { .. }
                | ProxFunction::IndicatorBall { .. }
                | ProxFunction::IndicatorOrthant { .. }
        )
    }

    /// Short stable name of the kind, used in error messages and reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProxFunction::Zero { .. } => "zero",
            ProxFunction::IndicatorBox { .. } => "indicator_box",
            ProxFunction::IndicatorBall { .. } => "indicator_ball",
            ProxFunction::IndicatorOrthant { .. } => "indicator_orthant",
            ProxFunction::L1 { .. } => "l1",
            ProxFunction::Quadratic { .. } => "quadratic",
        }
    }

    /// Evaluates `phi(x)`. Indicator kinds return `+inf` outside their set
    /// (membership tested with [`MEMBERSHIP_SLACK`]) and `0` inside.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            ProxFunction::Zero { .. } => 0.0,
            ProxFunction::IndicatorBox { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(&xi, (&l, &h))| xi >= l - MEMBERSHIP_SLACK && xi <= h + MEMBERSHIP_SLACK);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::IndicatorBall { center, radius } => {
                if point::dist(x, center) <= radius + MEMBERSHIP_SLACK {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::IndicatorOrthant { .. } => {
                if x.iter().all(|&xi| xi >= -MEMBERSHIP_SLACK) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFunction::L1 { tau, .. } => tau * x.iter().map(|xi| xi.abs()).sum::<f64>(),
            ProxFunction::Quadratic { diag, linear } => {
                x.iter()
                    .zip(diag.iter().zip(linear))
                    .map(|(&xi, (&d, &c))| 0.5 * d * xi * xi + c * xi)
                    .sum()
            }
        }
    }

    /// Resolvent `J_phi(x; rho)`, allocating the result.
    pub fn prox(&self, x: &[f64], rho: f64) -> Result<Point> {
        let mut out = vec![0.0; x.len()];
        self.prox_into(x, rho, &mut out)?;
        Ok(out)
    }

    /// Resolvent `J_phi(x; rho)` written into `out` (no allocation); the
    /// workhorse for integrator and solver hot loops.
    pub fn prox_into(&self, x: &[f64], rho: f64, out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "prox input",
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be positive, got {rho}"),
            });
        }
        if !point::is_finite(x) {
            return Err(Error::NonFinite {
                context: format!("prox input for kind {}", self.kind_name()),
            });
        }
        debug_assert_eq!(out.len(), x.len());
        match self {
            ProxFunction::Zero { .. } => out.copy_from_slice(x),
            ProxFunction::IndicatorBox { lo, hi } => {
                for i in 0..x.len() {
                    out[i] = x[i].clamp(lo[i], hi[i]);
                }
            }
            ProxFunction::IndicatorBall { center, radius } => {
                let d = point::dist(x, center);
                if d <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let scale = radius / d;
                    for i in 0..x.len() {
                        out[i] = center[i] + scale * (x[i] - center[i]);
                    }
                }
            }
            ProxFunction::IndicatorOrthant { .. } => {
                for i in 0..x.len() {
                    out[i] = x[i].max(0.0);
                }
            }
            ProxFunction::L1 { tau, .. } => {
                let t = rho * tau;
                for i in 0..x.len() {
                    out[i] = soft_threshold(x[i], t);
                }
            }
            ProxFunction::Quadratic { diag, linear } => {
                for i in 0..x.len() {
                    out[i] = (x[i] - rho * linear[i]) / (1.0 + rho * diag[i]);
                }
            }
        }
        Ok(())
    }

    /// Left-hand side of the resolvent characterization
    ///
    /// ```text
    /// <x - J(x), y - J(x)> + rho*phi(J(x)) - rho*phi(y) <= 0
    /// ```
    ///
    /// for any `y` with `phi(y)` finite (the subgradient inequality at the
    /// prox optimality condition `x - J(x) in rho*subdiff phi(J(x))`). A
    /// correct resolvent keeps this nonpositive for every `(x, y, rho)`; the
    /// returned value is the gap, and it is tight (zero) exactly along the
    /// supporting directions. For indicator kinds the `phi` terms vanish and
    /// the gap reduces to the projection inequality `<x - Px, y - Px> <= 0`.
    /// Errors when `phi(y) = +inf` (probe outside the domain).
    pub fn resolvent_lemma_gap(&self, x: &[f64], y: &[f64], rho: f64) -> Result<f64> {
        let phi_y = self.value(y);
        if !phi_y.is_finite() {
            return Err(Error::OutsideDomain {
                context: "resolvent_lemma_gap probe y",
            });
        }
        let j = self.prox(x, rho)?;
        let x_minus_j = point::sub(x, &j);
        let y_minus_j = point::sub(y, &j);
        Ok(point::dot(&x_minus_j, &y_minus_j) + rho * self.value(&j) - rho * phi_y)
    }

    /// The two projection inequalities for indicator kinds, returned as gaps
    /// that must both be nonpositive:
    ///
    /// * `gap_i  = ||Px - Py||^2 + ||(x - Px) - (y - Py)||^2 - ||x - y||^2`
    /// * `gap_ii = <x - Px, z - Px>` for any `z` inside the set.
    ///
    /// Errors when `self` is not an indicator kind or `z` is outside the set.
    pub fn projection_inequality_gaps(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<(f64, f64)> {
        if !self.is_indicator() {
            return Err(Error::NotIndicator {
                got: self.kind_name(),
            });
        }
        if !self.value(z).is_finite() {
            return Err(Error::OutsideDomain {
                context: "projection_inequality_gaps anchor z",
            });
        }
        // rho is irrelevant for projections; any positive value works.
        let px = self.prox(x, 1.0)?;
        let py = self.prox(y, 1.0)?;
        let res_x = point::sub(x, &px);
        let res_y = point::sub(y, &py);
        let gap_i = point::norm_sq(&point::sub(&px, &py)) + point::norm_sq(&point::sub(&res_x, &res_y))
            - point::norm_sq(&point::sub(x, y));
        let gap_ii = point::dot(&res_x, &point::sub(z, &px));
        Ok((gap_i, gap_ii))
    }
}

/// Scalar soft-threshold: the resolvent of `t * |.|`.
fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
