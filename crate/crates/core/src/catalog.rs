//! Benchmark catalog: small MVI instances with validated reference solutions.
//!
//! Every entry carries a reference solution `x_star` together with its
//! provenance, a monotonicity label confirmed by the sampling estimators, and
//! run hints (a step size `recommended_lambda` safely below `0.9 / L`, a
//! starting point, and a search box for the brute-force [`grid_oracle`]).
//!
//! The instances exercise the named problem classes: unconstrained smooth
//! roots, nonsmooth l1 composites, box-constrained affine variational
//! inequalities, linear complementarity on the nonnegative orthant, a
//! near-rotation that is monotone but barely strongly so, and a nonlinear
//! (cubic) scalar operator without a global Lipschitz constant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::MonotoneMap;
use crate::point::Point;
use crate::problem::MviProblem;
use crate::prox::ProxFunction;

/// How a reference solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionProvenance {
    /// Solved in closed form (root of the operator, projection identity,
    /// or complementarity conditions verified exactly).
    ClosedForm,
    /// Located by exhaustive residual scan on a grid.
    GridOracle,
    /// Fixed point of the prox map computed by an independent
    /// per-coordinate rule (e.g. soft-thresholding).
    ProxFixedPointOracle,
}

impl SolutionProvenance {
    /// Stable lowercase name (matches the serialized form).
    pub fn as_str(&self) -> &'static str {
        match self {
            SolutionProvenance::ClosedForm => "closed_form",
            SolutionProvenance::GridOracle => "grid_oracle",
            SolutionProvenance::ProxFixedPointOracle => "prox_fixed_point_oracle",
        }
    }
}

/// Monotonicity label of the operator, confirmed by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityClass {
    Monotone,
    StronglyMonotone,
}

impl MonotonicityClass {
    /// Stable lowercase name (matches the serialized form).
    pub fn as_str(&self) -> &'static str {
        match self {
            MonotonicityClass::Monotone => "monotone",
            MonotonicityClass::StronglyMonotone => "strongly_monotone",
        }
    }
}

/// One benchmark instance.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub problem: MviProblem,
    /// Reference solution; `natural_residual(x_star, 1.0) <= 1e-8` holds for
    /// every entry.
    pub x_star: Point,
    pub solution_provenance: SolutionProvenance,
    pub monotonicity_class: MonotonicityClass,
    /// Step size below the stability threshold `0.9 / L` for the entry.
    pub recommended_lambda: f64,
    /// Standard starting point for solver and trajectory runs.
    pub recommended_start: Point,
    /// Box (lower, upper per coordinate) known to contain `x_star`, used by
    /// the grid oracle.
    pub grid_lo: Point,
    pub grid_hi: Point,
    /// Points per axis for the grid oracle.
    pub grid_resolution: usize,
}

impl CatalogEntry {
    /// Runs the grid oracle over this entry's own search box.
    pub fn grid_solution(&self) -> Result<Point> {
        grid_oracle(&self.problem, &self.grid_lo, &self.grid_hi, self.grid_resolution)
    }

    /// Width of one grid cell along each axis.
    pub fn grid_cell(&self) -> Vec<f64> {
        self.grid_lo
            .iter()
            .zip(&self.grid_hi)
            .map(|(&lo, &hi)| (hi - lo) / (self.grid_resolution as f64 - 1.0))
            .collect()
    }
}

/// The benchmark instances. Construction is pure and deterministic.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut entries = Vec::new();

    // T(x) = x - 1, no nonsmooth term; the unique root is x* = 1.
    entries.push(CatalogEntry {
        name: "scalar_smooth",
        problem: MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![-1.0]).expect("affine 1x1"),
            ProxFunction::zero(1),
        )
        .expect("scalar_smooth"),
        x_star: vec![1.0],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: 0.9,
        recommended_start: vec![0.0],
        grid_lo: vec![-2.0],
        grid_hi: vec![4.0],
        grid_resolution: 6001,
    });

    // T(x) = x with phi = |.|: 0 belongs to 0 + [-1, 1], so x* = 0.
    entries.push(CatalogEntry {
        name: "scalar_l1",
        problem: MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![0.0]).expect("affine 1x1"),
            ProxFunction::l1(1, 1.0).expect("l1 tau=1"),
        )
        .expect("scalar_l1"),
        x_star: vec![0.0],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: 0.9,
        recommended_start: vec![1.5],
        grid_lo: vec![-1.0],
        grid_hi: vec![1.0],
        grid_resolution: 2001,
    });

    // Affine strongly monotone operator on the unit box. At x* = (1, 0.5):
    // T(x*) = (-1, 0), and projecting x* - T(x*) = (2, 0.5) onto the box
    // returns x* (first coordinate clamps to its active upper bound).
    let box_a = vec![vec![2.0, 0.5], vec![0.5, 1.5]];
    // operator norm of the symmetric matrix: (3.5 + sqrt(1.25)) / 2 ~ 2.309
    let box_l = (3.5 + 1.25_f64.sqrt()) / 2.0;
    entries.push(CatalogEntry {
        name: "box_vi",
        problem: MviProblem::new(
            MonotoneMap::affine(box_a, vec![-3.25, -1.25])
                .expect("affine 2x2")
                .with_lipschitz_hint(box_l),
            ProxFunction::indicator_box(vec![0.0, 0.0], vec![1.0, 1.0]).expect("unit box"),
        )
        .expect("box_vi"),
        x_star: vec![1.0, 0.5],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: (0.9 / box_l).min(1.0),
        recommended_start: vec![0.0, 0.0],
        grid_lo: vec![-0.5, -0.5],
        grid_hi: vec![1.5, 1.5],
        grid_resolution: 401,
    });

    // Gradient of 1/2 ||x - (3, 0)||^2 with phi = ||.||_1: the minimizer of
    // the composite is the soft-threshold of (3, 0) at 1, namely (2, 0).
    entries.push(CatalogEntry {
        name: "lasso_diag",
        problem: MviProblem::new(
            MonotoneMap::gradient_quadratic(
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![-3.0, 0.0],
            )
            .expect("identity quadratic"),
            ProxFunction::l1(2, 1.0).expect("l1 tau=1"),
        )
        .expect("lasso_diag"),
        x_star: vec![2.0, 0.0],
        solution_provenance: SolutionProvenance::ProxFixedPointOracle,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: 0.9,
        recommended_start: vec![0.0, 0.0],
        grid_lo: vec![-0.5, -0.5],
        grid_hi: vec![2.5, 2.5],
        grid_resolution: 401,
    });

    // Linear complementarity: M positive definite, q = (-4, 1). At
    // x* = (2, 0): T(x*) = (0, 3) >= 0, x* >= 0, and <T(x*), x*> = 0.
    entries.push(CatalogEntry {
        name: "lcp",
        problem: MviProblem::new(
            MonotoneMap::affine(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![-4.0, 1.0])
                .expect("affine 2x2")
                .with_lipschitz_hint(3.0),
            ProxFunction::indicator_orthant(2),
        )
        .expect("lcp"),
        x_star: vec![2.0, 0.0],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: 0.3,
        recommended_start: vec![0.0, 0.0],
        grid_lo: vec![-0.5, -0.5],
        grid_hi: vec![2.5, 2.5],
        grid_resolution: 401,
    });

    // Near-rotation: skew part of unit strength plus a 0.05 multiple of the
    // identity. Monotone with a tiny modulus, so it is listed as plain
    // monotone; the unique zero is the origin.
    entries.push(CatalogEntry {
        name: "rotation_monotone",
        problem: MviProblem::new(
            MonotoneMap::rotation(0.05, 1.0).expect("rotation"),
            ProxFunction::zero(2),
        )
        .expect("rotation_monotone"),
        x_star: vec![0.0, 0.0],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::Monotone,
        // stability bound for forward steps: 2m / (m^2 + s^2) ~ 0.0997
        recommended_lambda: 0.09,
        recommended_start: vec![1.0, 1.0],
        grid_lo: vec![-1.0, -1.0],
        grid_hi: vec![1.0, 1.0],
        grid_resolution: 401,
    });

    // Nonlinear scalar operator x^3 + x - 2 = (x - 1)(x^2 + x + 2): the only
    // real root is x* = 1. Strongly monotone (derivative >= 1) but with no
    // global Lipschitz constant, so no hint is attached.
    entries.push(CatalogEntry {
        name: "scalar_cubic",
        problem: MviProblem::new(
            MonotoneMap::scalar_cubic(1.0, 1.0, -2.0).expect("cubic"),
            ProxFunction::zero(1),
        )
        .expect("scalar_cubic"),
        x_star: vec![1.0],
        solution_provenance: SolutionProvenance::ClosedForm,
        monotonicity_class: MonotonicityClass::StronglyMonotone,
        recommended_lambda: 0.1,
        recommended_start: vec![0.0],
        grid_lo: vec![-2.0],
        grid_hi: vec![4.0],
        grid_resolution: 6001,
    });

    entries
}

/// Looks up a catalog entry by name.
pub fn find(name: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidParameter {
            name: "problem",
            reason: format!(
                "unknown catalog entry {name:?}; available: {}",
                catalog().iter().map(|e| e.name).collect::<Vec<_>>().join(", ")
            ),
        })
}

/// Exhaustive search for the point of minimal natural residual (at unit step)
/// over a regular grid on the box `[lo, hi]` with `resolution` points per
/// axis. Only dimensions 1 and 2 are supported; ties resolve to the first
/// point in row-major scan order, making the result deterministic.
///
/// When the residual is continuous, the returned point lies within one grid
/// cell of any true solution inside the box.
pub fn grid_oracle(
    problem: &MviProblem,
    lo: &Point,
    hi: &Point,
    resolution: usize,
) -> Result<Point> {
    let d = problem.dim();
    if d > 2 {
        return Err(Error::UnsupportedConfig {
            method: "grid_oracle",
            reason: format!("exhaustive scan supports dimensions 1 and 2, problem has {d}"),
        });
    }
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch {
            context: "grid oracle bounds",
            expected: d,
            got: if lo.len() != d { lo.len() } else { hi.len() },
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            reason: format!("need at least 2 points per axis, got {resolution}"),
        });
    }
    for i in 0..d {
        if !(lo[i] < hi[i]) {
            return Err(Error::InvalidParameter {
                name: "bounds",
                reason: format!("lo[{i}] = {} must be below hi[{i}] = {}", lo[i], hi[i]),
            });
        }
    }
    let axis = |i: usize, k: usize| -> f64 {
        lo[i] + (hi[i] - lo[i]) * (k as f64) / (resolution as f64 - 1.0)
    };
    let mut best = f64::INFINITY;
    let mut best_point = lo.clone();
    let mut candidate = vec![0.0; d];
    if d == 1 {
        for k in 0..resolution {
            candidate[0] = axis(0, k);
            let r = problem.natural_residual(&candidate, 1.0)?;
            if r < best {
                best = r;
                best_point.copy_from_slice(&candidate);
            }
        }
    } else {
        for k0 in 0..resolution {
            candidate[0] = axis(0, k0);
            for k1 in 0..resolution {
                candidate[1] = axis(1, k1);
                let r = problem.natural_residual(&candidate, 1.0)?;
                if r < best {
                    best = r;
                    best_point.copy_from_slice(&candidate);
                }
            }
        }
    }
    Ok(best_point)
}

/// Complementarity conditions at `x` for an MVI whose nonsmooth term is the
/// indicator of the nonnegative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplementarityCheck {
    /// `x >= 0` componentwise (tolerance 1e-10).
    pub feasible: bool,
    /// `T(x) >= 0` componentwise (tolerance 1e-10).
    pub dual_feasible: bool,
    /// `<T(x), x>`; at a solution this is at most 1e-8 in magnitude.
    pub gap: f64,
}

/// Feasibility tolerance of [`complementarity_check`].
pub const COMPLEMENTARITY_TOL: f64 = 1e-10;

/// Evaluates primal feasibility, dual feasibility, and the complementarity
/// gap `<T(x), x>` at `x`. Requires the problem's nonsmooth term to be the
/// indicator of the nonnegative orthant.
pub fn complementarity_check(problem: &MviProblem, x: &Point) -> Result<ComplementarityCheck> {
    if problem.phi.kind_name() != "indicator_orthant" {
        return Err(Error::NotIndicator {
            got: problem.phi.kind_name(),
        });
    }
    let t = problem.operator.eval(x)?;
    let feasible = x.iter().all(|&v| v >= -COMPLEMENTARITY_TOL);
    let dual_feasible = t.iter().all(|&v| v >= -COMPLEMENTARITY_TOL);
    let gap = crate::point::dot(&t, x);
    Ok(ComplementarityCheck {
        feasible,
        dual_feasible,
        gap,
    })
}
