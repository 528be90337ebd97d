//! The mixed variational inequality problem and its residual certificates.
//!
//! The problem pairs a monotone operator `T` with a convex term `phi`: find
//! `x*` such that `<T(x*), x - x*> + phi(x) - phi(x*) >= 0` for all `x`.
//! Solutions are characterized as fixed points of the prox-gradient map
//! `p(x) = J_phi(x - lambda * T(x))` for any `lambda > 0`, which yields the
//! computable certificates below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::MonotoneMap;
use crate::point::{self, Point};
use crate::prox::ProxFunction;

/// A mixed variational inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MviProblem {
    pub operator: MonotoneMap,
    pub phi: ProxFunction,
}

impl MviProblem {
    /// Pairs an operator with a convex term; their dimensions must agree.
    pub fn new(operator: MonotoneMap, phi: ProxFunction) -> Result<Self> {
        if operator.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                context: "problem operator vs phi",
                expected: operator.dim(),
                got: phi.dim(),
            });
        }
        Ok(MviProblem { operator, phi })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// The prox-gradient map `p(x) = J_phi(x - lambda * T(x))` whose fixed
    /// points are exactly the solutions.
    pub fn fixed_point_map(&self, x: &[f64], lambda: f64) -> Result<Point> {
        let mut out = vec![0.0; self.dim()];
        let mut scratch = vec![0.0; self.dim()];
        self.fixed_point_map_into(x, lambda, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Allocation-free form of [`Self::fixed_point_map`]: `scratch` receives
    /// `x - lambda*T(x)`, `out` receives the resolvent of it.
    pub fn fixed_point_map_into(
        &self,
        x: &[f64],
        lambda: f64,
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be positive, got {lambda}"),
            });
        }
        self.operator.eval_into(x, scratch)?;
        for i in 0..scratch.len() {
            scratch[i] = x[i] - lambda * scratch[i];
        }
        self.phi.prox_into(scratch, lambda, out)
    }

    /// Natural residual `||x - J_phi(x - lambda*T(x))||`: zero exactly at
    /// solutions, continuous in `x`.
    pub fn natural_residual(&self, x: &[f64], lambda: f64) -> Result<f64> {
        let p = self.fixed_point_map(x, lambda)?;
        Ok(point::dist(x, &p))
    }

    /// Inclusion residual `natural_residual / lambda`: the norm of the
    /// prox-gradient element certifying `0 in T(x) + d(phi)(x)`.
    pub fn inclusion_residual(&self, x: &[f64], lambda: f64) -> Result<f64> {
        Ok(self.natural_residual(x, lambda)? / lambda)
    }

    /// Gap functional `min_p { <T(x), p - x> + phi(p) - phi(x) }` over the
    /// probe set. A true solution yields a nonnegative value for every probe
    /// set; a negative value certifies non-solution. Probes with
    /// `phi(p) = +inf` are skipped; an empty or fully-skipped probe set is an
    /// error, as is a candidate outside `dom phi`.
    pub fn mvi_gap(&self, candidate: &[f64], probes: &[Point]) -> Result<f64> {
        if probes.is_empty() {
            return Err(Error::NoUsableProbes {
                reason: "empty probe list".to_string(),
            });
        }
        let phi_x = self.phi.value(candidate);
        if !phi_x.is_finite() {
            return Err(Error::OutsideDomain {
                context: "mvi_gap candidate",
            });
        }
        let tx = self.operator.eval(candidate)?;
        let mut best: Option<f64> = None;
        for p in probes {
            let phi_p = self.phi.value(p);
            if !phi_p.is_finite() {
                continue;
            }
            let term = point::dot(&tx, &point::sub(p, candidate)) + phi_p - phi_x;
            best = Some(match best {
                Some(b) => b.min(term),
                None => term,
            });
        }
        best.ok_or_else(|| Error::NoUsableProbes {
            reason: "every probe lies outside dom phi".to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// T(x) = x - 1 on R with phi = 0; unique solution x* = 1.
    fn scalar_smooth() -> MviProblem {
        MviProblem::new(
            MonotoneMap::affine(vec![vec![1.0]], vec![-1.0]).unwrap(),
            ProxFunction::zero(1),
        )
        .unwrap()
    }

    #[test]
    fn residual_zero_exactly_at_solution() {
        let p = scalar_smooth();
        assert_eq!(p.natural_residual(&[1.0], 0.7).unwrap(), 0.0);
        assert!(p.natural_residual(&[0.0], 0.7).unwrap() > 0.0);
    }

    #[test]
    fn residual_worked_example() {
        // x=0, lambda=0.5: p(0) = 0 - 0.5*(-1) = 0.5, residual 0.5,
        // inclusion residual 1.0.
        let p = scalar_smooth();
        assert_eq!(p.natural_residual(&[0.0], 0.5).unwrap(), 0.5);
        assert_eq!(p.inclusion_residual(&[0.0], 0.5).unwrap(), 1.0);
    }

    #[test]
    fn inclusion_residual_is_scaled_natural_residual() {
        let p = scalar_smooth();
        for (x, lam) in [(0.3, 0.25), (-2.0, 1.0), (5.0, 0.1)] {
            let nat = p.natural_residual(&[x], lam).unwrap();
            let inc = p.inclusion_residual(&[x], lam).unwrap();
            assert_eq!(inc, nat / lam); // single extra rounding by definition
        }
    }

    #[test]
    fn gap_examples() {
        let p = scalar_smooth();
        // candidate at the solution: every term is zero
        assert_eq!(
            p.mvi_gap(&[1.0], &[vec![0.0], vec![2.0], vec![5.0]]).unwrap(),
            0.0
        );
        // candidate at 0: probe 1 gives <T(0), 1-0> = -1
        assert_eq!(p.mvi_gap(&[0.0], &[vec![1.0]]).unwrap(), -1.0);
    }

    #[test]
    fn gap_with_indicator_constraint() {
        // T = 1 (constant), phi = indicator of [2,3], candidate 2:
        // terms are 1*(p-2) >= 0 with minimum 0 at p=2.
        let prob = MviProblem::new(
            MonotoneMap::affine(vec![vec![0.0]], vec![1.0]).unwrap(),
            ProxFunction::indicator_box(vec![2.0], vec![3.0]).unwrap(),
        )
        .unwrap();
        let gap = prob
            .mvi_gap(&[2.0], &[vec![2.0], vec![2.5], vec![3.0]])
            .unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn gap_probe_handling() {
        let prob = MviProblem::new(
            MonotoneMap::affine(vec![vec![0.0]], vec![1.0]).unwrap(),
            ProxFunction::indicator_box(vec![2.0], vec![3.0]).unwrap(),
        )
        .unwrap();
        // infeasible probes are skipped
        let gap = prob.mvi_gap(&[2.0], &[vec![10.0], vec![2.5]]).unwrap();
        assert_eq!(gap, 0.5);
        // all skipped -> error; empty -> error
        assert!(matches!(
            prob.mvi_gap(&[2.0], &[vec![10.0]]),
            Err(Error::NoUsableProbes { .. })
        ));
        assert!(matches!(
            prob.mvi_gap(&[2.0], &[]),
            Err(Error::NoUsableProbes { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let op = MonotoneMap::rotation(0.1, 1.0).unwrap();
        assert!(MviProblem::new(op, ProxFunction::zero(1)).is_err());
    }
}
