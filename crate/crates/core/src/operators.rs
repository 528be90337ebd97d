//! Monotone operators `T` and sampling-based estimators of their constants.
//!
//! A map `T` is monotone when `<T(x) - T(y), x - y> >= 0`, strongly monotone
//! with modulus `m` when the quotient is bounded below by `m`, and
//! `L`-Lipschitz when `||T(x) - T(y)|| <= L ||x - y||`. The solvers and the
//! stability diagnostics consume these constants; since they are rarely given
//! in closed form, this module provides seeded sampling estimators plus an
//! exact eigenvalue check for the affine case.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{self, Point};

/// Tolerance on the sampled monotonicity quotient below which a map is
/// declared non-monotone.
pub const MONOTONE_TOL: f64 = 1e-10;

/// The operator kinds supported by the toolkit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// `T(x) = A x + b`. Monotone iff the symmetric part of `A` is positive
    /// semidefinite.
    Affine { matrix: Vec<Point>, offset: Point },
    /// Gradient of the convex quadratic `1/2 <Q x, x> + <c, x>` with `Q`
    /// symmetric positive semidefinite: `T(x) = Q x + c`.
    GradientQuadratic { quadratic: Vec<Point>, linear: Point },
    /// One-dimensional polynomial map `T(x) = c3 x^3 + c1 x + c0` with
    /// `c3, c1 >= 0` (which makes it monotone on all of R).
    ScalarNonlinear { cubic: f64, linear: f64, constant: f64 },
    /// Two-dimensional rotation-plus-shrink `T(x, y) = (m x + s y, -s x + m y)`:
    /// a skew map with a small symmetric part, monotone with modulus `m`.
    Rotation { m: f64, s: f64 },
}

/// A monotone operator with optional caller-declared constants.
///
/// The hints are *claims*, validated (when present) against the sampling
/// estimators in tests: the Lipschitz estimate must not exceed the hint
/// meaningfully, and the strong-modulus estimate must not fall below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneMap {
    pub kind: MapKind,
    pub lipschitz_hint: Option<f64>,
    pub strong_modulus_hint: Option<f64>,
}

/// An axis-aligned sampling region for the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    pub lo: Point,
    pub hi: Point,
}

impl SamplingBox {
    /// Validated constructor: bounds must be finite with `lo < hi` in every
    /// coordinate (zero-volume regions make the estimators meaningless).
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "sampling box bounds",
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::DegenerateRegion {
                reason: "empty bounds".to_string(),
            });
        }
        for i in 0..lo.len() {
            if !lo[i].is_finite() || !hi[i].is_finite() || !(lo[i] < hi[i]) {
                return Err(Error::DegenerateRegion {
                    reason: format!("axis {i}: need finite lo < hi, got [{}, {}]", lo[i], hi[i]),
                });
            }
        }
        Ok(SamplingBox { lo, hi })
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for i in 0..out.len() {
            let u: f64 = rng.gen();
            out[i] = self.lo[i] + u * (self.hi[i] - self.lo[i]);
        }
    }
}

impl MonotoneMap {
    /// Affine map `x -> A x + b`, validated monotone: the symmetric part
    /// `(A + A^T)/2` must be positive semidefinite (checked by exact
    /// eigendecomposition). `matrix` is a list of rows.
    pub fn affine(matrix: Vec<Point>, offset: Point) -> Result<Self> {
        let map = Self::affine_unvalidated(matrix, offset)?;
        let min_eig = map.symmetric_part_min_eigenvalue().expect("affine kind");
        if min_eig < -1e-12 {
            return Err(Error::NotMonotone { min_eig });
        }
        Ok(map)
    }

    /// Affine map without the monotonicity check. Exists so that the sampling
    /// estimators can be demonstrated to *detect* non-monotone maps; solver
    /// behavior on such maps is unspecified.
    pub fn affine_unvalidated(matrix: Vec<Point>, offset: Point) -> Result<Self> {
        let n = offset.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "affine matrix shape",
                expected: n,
                got: matrix.len(),
            });
        }
        Ok(MonotoneMap {
            kind: MapKind::Affine { matrix, offset },
            lipschitz_hint: None,
            strong_modulus_hint: None,
        })
    }

    /// Gradient of a convex quadratic; `quadratic` must be symmetric positive
    /// semidefinite (validated by eigendecomposition).
    pub fn gradient_quadratic(quadratic: Vec<Point>, linear: Point) -> Result<Self> {
        let n = linear.len();
        if quadratic.len() != n || quadratic.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "quadratic matrix shape",
                expected: n,
                got: quadratic.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if (quadratic[i][j] - quadratic[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter {
                        name: "gradient_quadratic matrix",
                        reason: format!("not symmetric at ({i},{j})"),
                    });
                }
            }
        }
        let map = MonotoneMap {
            kind: MapKind::GradientQuadratic { quadratic, linear },
            lipschitz_hint: None,
            strong_modulus_hint: None,
        };
        let min_eig = map.symmetric_part_min_eigenvalue().expect("quadratic kind");
        if min_eig < -1e-12 {
            return Err(Error::NotMonotone { min_eig });
        }
        Ok(map)
    }

    /// One-dimensional cubic `T(x) = c3 x^3 + c1 x + c0`; requires
    /// `c3, c1 >= 0` so the derivative `3 c3 x^2 + c1` is nonnegative.
    pub fn scalar_cubic(cubic: f64, linear: f64, constant: f64) -> Result<Self> {
        if !(cubic >= 0.0) || !(linear >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "scalar_cubic coefficients",
                reason: format!("need cubic >= 0 and linear >= 0, got {cubic}, {linear}"),
            });
        }
        Ok(MonotoneMap {
            kind: MapKind::ScalarNonlinear { cubic, linear, constant },
            lipschitz_hint: None,
            strong_modulus_hint: Some(linear),
        })
    }

    /// Rotation-plus-shrink map; requires `m >= 0`.
    pub fn rotation(m: f64, s: f64) -> Result<Self> {
        if !(m >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rotation m",
                reason: format!("must be nonnegative, got {m}"),
            });
        }
        Ok(MonotoneMap {
            kind: MapKind::Rotation { m, s },
            lipschitz_hint: Some((m * m + s * s).sqrt()),
            strong_modulus_hint: Some(m),
        })
    }

    /// Attaches a Lipschitz-constant claim.
    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    /// Attaches a strong-monotonicity-modulus claim.
    pub fn with_strong_modulus_hint(mut self, m: f64) -> Self {
        self.strong_modulus_hint = Some(m);
        self
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            MapKind::Affine { offset, .. } => offset.len(),
            MapKind::GradientQuadratic { linear, .. } => linear.len(),
            MapKind::ScalarNonlinear { .. } => 1,
            MapKind::Rotation { .. } => 2,
        }
    }

    /// Stable lowercase kind name (matches the serialized tag).
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            MapKind::Affine { .. } => "affine",
            MapKind::GradientQuadratic { .. } => "gradient_quadratic",
            MapKind::ScalarNonlinear { .. } => "scalar_nonlinear",
            MapKind::Rotation { .. } => "rotation",
        }
    }

    /// Evaluates `T(x)`, allocating the result. Errors when the output is
    /// non-finite (naming the offending input) or dimensions mismatch.
    pub fn eval(&self, x: &[f64]) -> Result<Point> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluates `T(x)` into `out` without allocating.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator input",
                expected: self.dim(),
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.dim());
        match &self.kind {
            MapKind::Affine { matrix, offset } => {
                for i in 0..out.len() {
                    out[i] = point::dot(&matrix[i], x) + offset[i];
                }
            }
            MapKind::GradientQuadratic { quadratic, linear } => {
                for i in 0..out.len() {
                    out[i] = point::dot(&quadratic[i], x) + linear[i];
                }
            }
            MapKind::ScalarNonlinear { cubic, linear, constant } => {
                let t = x[0];
                out[0] = cubic * t * t * t + linear * t + constant;
            }
            MapKind::Rotation { m, s } => {
                out[0] = m * x[0] + s * x[1];
                out[1] = -s * x[0] + m * x[1];
            }
        }
        if !point::is_finite(out) {
            return Err(Error::NonFinite {
                context: format!("operator output at input {x:?}"),
            });
        }
        Ok(())
    }

    /// Exact minimum eigenvalue of the symmetric part `(A + A^T)/2` for the
    /// linear kinds; `None` for nonlinear kinds.
    pub fn symmetric_part_min_eigenvalue(&self) -> Option<f64> {
        let rows = match &self.kind {
            MapKind::Affine { matrix, .. } => matrix,
            MapKind::GradientQuadratic { quadratic, .. } => quadratic,
            _ => return None,
        };
        let n = rows.len();
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let sym = (&a + a.transpose()) * 0.5;
        let eigs = sym.symmetric_eigenvalues();
        Some(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Exact operator norm (largest singular value) for the linear kinds;
    /// `None` for nonlinear kinds.
    pub fn operator_norm(&self) -> Option<f64> {
        let rows = match &self.kind {
            MapKind::Affine { matrix, .. } => matrix,
            MapKind::GradientQuadratic { quadratic, .. } => quadratic,
            _ => return None,
        };
        let n = rows.len();
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Some(a.singular_values().iter().cloned().fold(0.0, f64::max))
    }
}

/// Minimum sampled monotonicity quotient `<Tx - Ty, x - y> / ||x - y||^2`
/// over `samples` independent uniform pairs from `region`, plus the verdict
/// `min_quotient >= -MONOTONE_TOL`. Deterministic for a fixed seed.
pub fn estimate_monotonicity(
    map: &MonotoneMap,
    region: &SamplingBox,
    samples: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    sample_quotients(map, region, samples, seed, |tx_ty, x_y| {
        point::dot(tx_ty, x_y) / point::norm_sq(x_y)
    })
    .map(|min_max| {
        let min_q = min_max.0;
        (min_q, min_q >= -MONOTONE_TOL)
    })
}

/// Maximum sampled difference quotient `||Tx - Ty|| / ||x - y||` over
/// `samples` independent uniform pairs from `region`: a lower bound on the
/// true Lipschitz constant. Deterministic for a fixed seed.
pub fn estimate_lipschitz(
    map: &MonotoneMap,
    region: &SamplingBox,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    sample_quotients(map, region, samples, seed, |tx_ty, x_y| {
        point::norm(tx_ty) / point::norm(x_y)
    })
    .map(|min_max| min_max.1)
}

/// Shared sampling loop: returns (min, max) of `quotient(Tx - Ty, x - y)`
/// over sampled pairs, skipping coincident pairs.
fn sample_quotients(
    map: &MonotoneMap,
    region: &SamplingBox,
    samples: usize,
    seed: u64,
    quotient: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<(f64, f64)> {
    if region.lo.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            context: "sampling region",
            expected: map.dim(),
            got: region.lo.len(),
        });
    }
    if samples < 2 {
        return Err(Error::InsufficientData {
            context: "operator estimator samples",
            need: 2,
            got: samples,
        });
    }
    let n = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
    let (mut tx, mut ty) = (vec![0.0; n], vec![0.0; n]);
    let (mut dxy, mut dt) = (vec![0.0; n], vec![0.0; n]);
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    let mut used = 0usize;
    for _ in 0..samples {
        region.sample(&mut rng, &mut x);
        region.sample(&mut rng, &mut y);
        for i in 0..n {
            dxy[i] = x[i] - y[i];
        }
        if point::norm_sq(&dxy) < 1e-24 {
            continue; // coincident pair carries no information
        }
        map.eval_into(&x, &mut tx)?;
        map.eval_into(&y, &mut ty)?;
        for i in 0..n {
            dt[i] = tx[i] - ty[i];
        }
        let q = quotient(&dt, &dxy);
        min_q = min_q.min(q);
        max_q = max_q.max(q);
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateRegion {
            reason: "all sampled pairs coincided".to_string(),
        });
    }
    Ok((min_q, max_q))
}
