//! Predefined-time forward-backward splitting dynamics for inclusion problems
//! `0 ∈ F(z) + G(z)` with generalized (possibly negative) monotonicity moduli.
//!
//! The residual of the forward-backward map, `Φ(z) = z − J_{γF}(z − γG(z))`,
//! drives the flow `ż = −(K_p/T_p) ω(z) Φ(z)`. With `p₃ = 0` the gain `K_p`
//! from [`dynamics::gain_kp`] guarantees settling before `T_p` from any start.
//! [`discrete::iterate`] is the explicit Euler version of the same flow.
//!
//! ```
//! use fbdyn::{integrate, DynamicsParams, ForwardOp, IntegratorConfig, ProblemInstance, ProxFunction, ResolventOp, Vector};
//! use nalgebra::dmatrix;
//!
//! let g = ForwardOp::linear(dmatrix![2.0, 1.0; -1.0, 2.0])?;
//! let f = ResolventOp::prox(ProxFunction::L1 { weight: 0.1 });
//! let problem = ProblemInstance::with_default_gamma(f, g)?;
//! let params = DynamicsParams::predefined_time(20.0, 200.0, 0.0, 0.99, 1.01, 1.0, problem.contraction())?;
//! let traj = integrate(&problem, &params, &Vector::new(vec![3.0, -1.0])?, &IntegratorConfig::for_horizon(1.0))?;
//! assert!(traj.settled_at.unwrap() <= 1.0);
//! # Ok::<(), fbdyn::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod discrete;
pub mod dynamics;
pub mod error;
mod fmt;
pub mod instances;
pub mod integrate;
pub mod operators;
pub mod parallel;
pub mod problem;
pub mod vector;

pub use discrete::{auto_step, envelope, iterate, picard_reference, DiscreteConfig, IterateLog};
pub use dynamics::{
    gain_kp, nominal_field, omega, settling_bounds, vector_field, DynamicsParams, SettlingBounds,
};
pub use error::{Error, Result};
pub use integrate::{integrate, IntegratorConfig, Method, Trajectory};
pub use operators::{ForwardOp, ProxFunction, ResolventOp};
pub use parallel::Execution;
pub use problem::{
    check_assumption_a, contraction_constant, make_cop, make_mvip, make_vip, residual_map,
    AssumptionVerdict, ProblemInstance, ProblemKind,
};
pub use vector::Vector;
