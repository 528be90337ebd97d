//! Cross-validation of the problem catalog against its independent oracles:
//! residuals at the reference solutions, grid search over each entry's
//! bounding box, complementarity at the cone entry, and the sampling
//! estimators against the advertised operator classes.

use mvi_core::catalog::{
    catalog, complementarity_check, find, grid_oracle, MonotonicityClass,
};
use mvi_core::operators::{estimate_lipschitz, estimate_monotonicity, SamplingBox};
use mvi_core::point;
use mvi_core::solvers::{solve, Method, SolverConfig, Status};

/// Every reference solution is a fixed point of the prox map to 1e-8 at
/// unit step, and its recommended step size is within (0, 1].
#[test]
fn reference_solutions_have_tiny_residual() {
    for entry in catalog() {
        let res = entry.problem.natural_residual(&entry.x_star, 1.0).unwrap();
        assert!(res <= 1e-8, "{}: residual {res}", entry.name);
        assert!(entry.recommended_lambda > 0.0 && entry.recommended_lambda <= 1.0);
    }
}

/// The grid oracle finds the reference solution to within one grid cell on
/// every entry, searching only the entry's own bounding box.
#[test]
fn grid_oracle_agrees_with_reference_solutions() {
    for entry in catalog() {
        let g = entry.grid_solution().unwrap();
        let cell = entry.grid_cell();
        for i in 0..g.len() {
            assert!(
                (g[i] - entry.x_star[i]).abs() <= cell[i] + 1e-12,
                "{}: axis {i}: grid {} vs reference {} (cell {})",
                entry.name,
                g[i],
                entry.x_star[i],
                cell[i]
            );
        }
    }
}

/// The grid oracle also brackets actual solver limits: a converged run ends
/// within one cell (plus the solver tolerance) of the grid point.
#[test]
fn grid_oracle_brackets_solver_limits() {
    for entry in catalog() {
        let cfg = SolverConfig {
            h: 2.0,
            lambda: entry.recommended_lambda,
            tol: 1e-8,
            max_iter: 50_000,
            ..SolverConfig::default()
        };
        let report = solve(&entry.problem, Method::Algorithm1, &cfg, &entry.recommended_start).unwrap();
        assert_eq!(report.status, Status::Converged, "{}", entry.name);
        let g = entry.grid_solution().unwrap();
        let cell = entry.grid_cell();
        let limit = report.final_point();
        for i in 0..g.len() {
            assert!(
                (g[i] - limit[i]).abs() <= cell[i] + 1e-5,
                "{}: axis {i}: grid {} vs solver {}",
                entry.name,
                g[i],
                limit[i]
            );
        }
    }
}

/// Running the oracle on a tighter box still brackets the solution, and
/// inputs of unsupported dimension are rejected.
#[test]
fn grid_oracle_validates_inputs() {
    let entry = find("scalar_smooth").unwrap();
    let g = grid_oracle(&entry.problem, &vec![0.0], &vec![2.0], 2001).unwrap();
    assert!((g[0] - 1.0).abs() <= 1e-3 + 1e-12);

    assert!(grid_oracle(&entry.problem, &vec![2.0], &vec![0.0], 101).is_err());
    assert!(grid_oracle(&entry.problem, &vec![0.0], &vec![2.0], 1).is_err());
}

/// The cone entry satisfies complementarity at its reference solution and at
/// a tightly converged solver limit: primal feasible, and the duality gap is
/// numerically zero.
#[test]
fn lcp_entry_passes_complementarity() {
    let entry = find("lcp").unwrap();

    let at_reference = complementarity_check(&entry.problem, &entry.x_star).unwrap();
    assert!(at_reference.feasible);
    assert!(at_reference.dual_feasible);
    assert!(at_reference.gap.abs() <= 1e-10);

    let cfg = SolverConfig {
        h: 2.0,
        lambda: entry.recommended_lambda,
        tol: 1e-13,
        max_iter: 50_000,
        ..SolverConfig::default()
    };
    let report = solve(&entry.problem, Method::Algorithm1, &cfg, &entry.recommended_start).unwrap();
    assert_eq!(report.status, Status::Converged);
    let at_limit = complementarity_check(&entry.problem, report.final_point()).unwrap();
    assert!(at_limit.feasible, "projected iterates stay in the cone");
    assert!(at_limit.gap.abs() <= 1e-8, "gap {}", at_limit.gap);
}

/// Complementarity is only defined against the orthant indicator.
#[test]
fn complementarity_rejects_other_regularizers() {
    let entry = find("scalar_l1").unwrap();
    assert!(complementarity_check(&entry.problem, &vec![0.0]).is_err());
}

/// The advertised monotonicity class of each entry is consistent with the
/// sampled Rayleigh-quotient estimator over the entry's own box.
#[test]
fn monotonicity_labels_match_sampled_estimates() {
    for entry in catalog() {
        let sbox = SamplingBox::new(entry.grid_lo.clone(), entry.grid_hi.clone()).unwrap();
        let (min_q, all_finite) =
            estimate_monotonicity(&entry.problem.operator, &sbox, 4_000, 42).unwrap();
        assert!(all_finite, "{}", entry.name);
        match entry.monotonicity_class {
            MonotonicityClass::StronglyMonotone => assert!(
                min_q >= 1e-6,
                "{}: labeled strongly monotone but min quotient {min_q}",
                entry.name
            ),
            MonotonicityClass::Monotone => assert!(
                min_q >= -1e-10,
                "{}: labeled monotone but min quotient {min_q}",
                entry.name
            ),
        }
    }
}

/// Lipschitz hints are upper bounds for the sampled difference quotients,
/// and the sampling gets reasonably close to the hint on the affine entries.
#[test]
fn lipschitz_hints_bound_sampled_quotients() {
    for entry in catalog() {
        let hint = match entry.name {
            "box_vi" => (3.5 + 1.25_f64.sqrt()) / 2.0,
            "lcp" => 3.0,
            _ => continue,
        };
        let sbox = SamplingBox::new(entry.grid_lo.clone(), entry.grid_hi.clone()).unwrap();
        let est = estimate_lipschitz(&entry.problem.operator, &sbox, 4_000, 42).unwrap();
        assert!(
            est <= hint * (1.0 + 1e-9),
            "{}: sampled constant {est} above hint {hint}",
            entry.name
        );
        assert!(
            est >= 0.9 * hint,
            "{}: sampled constant {est} far below hint {hint}",
            entry.name
        );
    }
}

/// The affine entries' spectral oracles agree with the sampled estimators.
#[test]
fn spectral_oracles_bound_estimates_on_affine_entries() {
    for name in ["box_vi", "lcp"] {
        let entry = find(name).unwrap();
        let op = &entry.problem.operator;
        let lam_min = op
            .symmetric_part_min_eigenvalue()
            .expect("affine operators expose the eigenvalue oracle");
        let norm = op.operator_norm().expect("affine operators expose the norm");
        let sbox = SamplingBox::new(entry.grid_lo.clone(), entry.grid_hi.clone()).unwrap();
        let (min_q, _) = estimate_monotonicity(op, &sbox, 4_000, 7).unwrap();
        let est_l = estimate_lipschitz(op, &sbox, 4_000, 7).unwrap();
        assert!(min_q >= lam_min - 1e-9, "{name}: {min_q} < {lam_min}");
        assert!(est_l <= norm + 1e-9, "{name}: {est_l} > {norm}");
    }
}

/// Catalog names are unique and `find` serves each of them.
#[test]
fn catalog_names_are_unique_and_findable() {
    let entries = catalog();
    assert_eq!(entries.len(), 7);
    for e in &entries {
        assert_eq!(find(e.name).unwrap().name, e.name);
    }
    let mut names: Vec<_> = entries.iter().map(|e| e.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), 7);
    assert!(find("no_such_entry").is_err());
}
