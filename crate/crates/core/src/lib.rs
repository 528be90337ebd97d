//! Solver toolkit for mixed variational inequalities (MVIs).
//!
//! An MVI asks for a point `x*` with
//!
//! ```text
//! <T(x*), x - x*> + phi(x) - phi(x*) >= 0   for all x,
//! ```
//!
//! where `T` is a monotone operator and `phi` is a proper convex function.
//! Solutions are exactly the fixed points of `x -> J_phi(x - lambda * T(x))`,
//! with `J_phi = (I + rho * d(phi))^{-1}` the resolvent (proximal) operator;
//! this crate uses `rho = lambda` throughout, so a single step parameter
//! controls both the operator step and the resolvent.
//!
//! The toolkit has three layers:
//!
//! * **Continuous time** ([`dynamics`]): a third-order resolvent dynamical
//!   system `alpha*x''' + beta*x'' + gamma*x' + x = J_phi(x - lambda*T(x))`
//!   together with its second- and first-order reductions, fixed-step
//!   integrators, a Lyapunov functional, and decay-rate estimation.
//! * **Discrete time** ([`solvers`]): inertial proximal iterations obtained
//!   from finite-difference stencils of the dynamical system — two implicit
//!   variants, an explicit recurrence, the direct discretization, and the
//!   classical prox-step baseline.
//! * **Diagnostics** ([`diagnostics`]): numerical verification of the descent
//!   inequality, summability of successive differences, and exponential
//!   decay bounds along trajectories.
//!
//! [`catalog`] ships a small benchmark suite with independently validated
//! reference solutions and brute-force oracles.

pub mod catalog;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod operators;
pub mod point;
pub mod problem;
pub mod prox;
pub mod solvers;

pub use crate::error::{Error, Result};
pub use crate::operators::MonotoneMap;
pub use crate::point::Point;
pub use crate::problem::MviProblem;
pub use crate::prox::ProxFunction;
