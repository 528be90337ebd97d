//! Property-based checks of the proximal library against independent
//! oracles: firm nonexpansiveness, the resolvent characterization gap,
//! idempotence of projections, and brute-force minimization of the prox
//! objective on dense grids.

use mvi_core::point;
use mvi_core::ProxFunction;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One representative instance of every prox kind, in two dimensions.
fn kinds_2d() -> Vec<ProxFunction> {
    vec![
        ProxFunction::zero(2),
        ProxFunction::indicator_box(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap(),
        ProxFunction::indicator_ball(vec![0.5, -0.5], 1.5).unwrap(),
        ProxFunction::indicator_orthant(2),
        ProxFunction::l1(2, 0.7).unwrap(),
        ProxFunction::quadratic(vec![2.0, 0.5], vec![0.3, -0.2]).unwrap(),
    ]
}

/// One-dimensional instances for the dense 1-D oracle.
fn kinds_1d() -> Vec<ProxFunction> {
    vec![
        ProxFunction::zero(1),
        ProxFunction::indicator_box(vec![-0.75], vec![1.25]).unwrap(),
        ProxFunction::indicator_ball(vec![0.25], 1.0).unwrap(),
        ProxFunction::indicator_orthant(1),
        ProxFunction::l1(1, 1.3).unwrap(),
        ProxFunction::quadratic(vec![1.7], vec![-0.4]).unwrap(),
    ]
}

fn sample_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn sample_rho(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.1..5.0)
}

/// `||Jx - Jy||^2 <= <x - y, Jx - Jy>` for every resolvent, checked on
/// seeded random pairs and parameters.
#[test]
fn firm_nonexpansiveness_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for phi in kinds_2d() {
        for _ in 0..10_000 {
            let x = sample_point(&mut rng, 2, 5.0);
            let y = sample_point(&mut rng, 2, 5.0);
            let rho = sample_rho(&mut rng);
            let jx = phi.prox(&x, rho).unwrap();
            let jy = phi.prox(&y, rho).unwrap();
            let dj = point::sub(&jx, &jy);
            let dxy = point::sub(&x, &y);
            let lhs = point::norm_sq(&dj);
            let rhs = point::dot(&dxy, &dj);
            assert!(
                lhs <= rhs + 1e-10,
                "{}: firm nonexpansiveness violated: {lhs} > {rhs} + 1e-10",
                phi.kind_name()
            );
        }
    }
}

/// The variational characterization of the resolvent,
/// `<x - Jx, y - Jx> <= rho*(phi(y) - phi(Jx))`, holds for random probes.
/// Probes are passed through the prox first so they land inside the domain
/// of indicator functions.
#[test]
fn resolvent_characterization_gap_nonpositive() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for phi in kinds_2d() {
        for _ in 0..10_000 {
            let x = sample_point(&mut rng, 2, 5.0);
            let probe_raw = sample_point(&mut rng, 2, 5.0);
            let rho = sample_rho(&mut rng);
            let probe = phi.prox(&probe_raw, 1.0).unwrap();
            let gap = phi.resolvent_lemma_gap(&x, &probe, rho).unwrap();
            assert!(
                gap <= 1e-10,
                "{}: characterization gap {gap} > 1e-10",
                phi.kind_name()
            );
        }
    }
}

/// Projections (indicator prox) are idempotent: `J(J(x)) = J(x)` up to a
/// couple of roundings from the ball rescaling.
#[test]
fn indicator_prox_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for phi in kinds_2d().into_iter().filter(|p| p.is_indicator()) {
        for _ in 0..2_000 {
            let x = sample_point(&mut rng, 2, 8.0);
            let rho = sample_rho(&mut rng);
            let once = phi.prox(&x, rho).unwrap();
            let twice = phi.prox(&once, rho).unwrap();
            let tol = 1e-12 * (1.0 + point::norm(&x));
            assert!(
                point::dist(&once, &twice) <= tol,
                "{}: projection not idempotent at {x:?}",
                phi.kind_name()
            );
        }
    }
}

/// Brute-force oracle: the prox output minimizes
/// `F(u) = rho*phi(u) + 0.5*||u - x||^2`, so its objective value can never
/// exceed the best value found on a dense grid (up to rounding).
fn assert_beats_grid_1d(phi: &ProxFunction, x: &[f64], rho: f64) {
    let j = phi.prox(x, rho).unwrap();
    let fj = rho * phi.value(&j) + 0.5 * point::norm_sq(&point::sub(&j, x));
    let (lo, hi, n) = (-6.0, 6.0, 4001);
    let mut best = f64::INFINITY;
    for i in 0..n {
        let u = [lo + (hi - lo) * i as f64 / (n - 1) as f64];
        let v = phi.value(&u);
        if !v.is_finite() {
            continue;
        }
        let f = rho * v + 0.5 * point::norm_sq(&point::sub(&u, x));
        if f < best {
            best = f;
        }
    }
    assert!(
        fj <= best + 1e-8,
        "{}: prox objective {fj} above grid best {best}",
        phi.kind_name()
    );
}

fn assert_beats_grid_2d(phi: &ProxFunction, x: &[f64], rho: f64) {
    let j = phi.prox(x, rho).unwrap();
    let fj = rho * phi.value(&j) + 0.5 * point::norm_sq(&point::sub(&j, x));
    let (lo, hi, n) = (-6.0, 6.0, 201);
    let mut best = f64::INFINITY;
    for i in 0..n {
        for k in 0..n {
            let u = [
                lo + (hi - lo) * i as f64 / (n - 1) as f64,
                lo + (hi - lo) * k as f64 / (n - 1) as f64,
            ];
            let v = phi.value(&u);
            if !v.is_finite() {
                continue;
            }
            let f = rho * v + 0.5 * point::norm_sq(&point::sub(&u, x));
            if f < best {
                best = f;
            }
        }
    }
    assert!(
        fj <= best + 1e-8,
        "{}: prox objective {fj} above grid best {best}",
        phi.kind_name()
    );
}

#[test]
fn prox_minimizes_objective_against_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for phi in kinds_1d() {
        for _ in 0..12 {
            let x = sample_point(&mut rng, 1, 4.0);
            let rho = sample_rho(&mut rng);
            assert_beats_grid_1d(&phi, &x, rho);
        }
    }
    for phi in kinds_2d() {
        for _ in 0..12 {
            let x = sample_point(&mut rng, 2, 4.0);
            let rho = sample_rho(&mut rng);
            assert_beats_grid_2d(&phi, &x, rho);
        }
    }
}

/// The prox of an indicator never leaves the feasible set, and the reported
/// value of the function is zero there.
#[test]
fn indicator_prox_lands_in_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for phi in kinds_2d().into_iter().filter(|p| p.is_indicator()) {
        for _ in 0..2_000 {
            let x = sample_point(&mut rng, 2, 8.0);
            let rho = sample_rho(&mut rng);
            let j = phi.prox(&x, rho).unwrap();
            assert_eq!(
                phi.value(&j),
                0.0,
                "{}: projection landed outside the set",
                phi.kind_name()
            );
        }
    }
}
