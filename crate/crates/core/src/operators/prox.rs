//! Proximity operators and projections.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::vector::Vector;

/// A proper convex lower semicontinuous function with full domain, accessed
/// through its value and a subgradient selection.
pub trait ConvexFunction: Send + Sync {
    fn value(&self, u: &DVector<f64>) -> f64;

    /// Any element of the subdifferential at `u`.
    fn subgradient(&self, u: &DVector<f64>) -> DVector<f64>;

    /// Component `i` of the subgradient. Override when it is cheaper than the
    /// full vector.
    fn partial(&self, u: &DVector<f64>, i: usize) -> f64 {
        self.subgradient(u)[i]
    }
}

/// The function φ of a prox step. Closed forms are evaluated exactly; `Custom`
/// goes through the iterative solver.
#[derive(Clone)]
pub enum ProxFunction {
    Zero,
    /// `weight · ‖u‖₁`
    L1 {
        weight: f64,
    },
    /// Indicator of the box `[lo, hi]`.
    BoxIndicator {
        lo: Vector,
        hi: Vector,
    },
    Custom(Arc<dyn ConvexFunction>),
}

impl fmt::Debug for ProxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxFunction::Zero => write!(f, "Zero"),
            ProxFunction::L1 { weight } => write!(f, "L1 {{ weight: {weight} }}"),
            ProxFunction::BoxIndicator { lo, hi } => {
                write!(
                    f,
                    "BoxIndicator {{ lo: {:?}, hi: {:?} }}",
                    lo.to_vec(),
                    hi.to_vec()
                )
            }
            ProxFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ProxFunction {
    pub fn box_indicator(lo: Vector, hi: Vector) -> Result<Self> {
        lo.ensure_dim(hi.dim())?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::invalid("box", "lo must not exceed hi"));
        }
        Ok(ProxFunction::BoxIndicator { lo, hi })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxFunction::BoxIndicator { lo, .. } => Some(lo.dim()),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProxSolverOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ProxSolverOptions {
    fn default() -> Self {
        ProxSolverOptions {
            tol: 1e-10,
            max_iters: 100_000,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "gamma",
            format!("must be positive, got {gamma}"),
        ))
    }
}

/// Resolvent of the identity: the solution `u` of `u + γu = x`.
pub fn resolvent_identity(gamma: f64, x: &Vector) -> Result<Vector> {
    check_gamma(gamma)?;
    Ok(Vector::from_raw(x.as_dvector() / (1.0 + gamma)))
}

/// Soft thresholding, the prox of `γ‖·‖₁`.
pub fn prox_l1(gamma: f64, x: &Vector) -> Result<Vector> {
    check_gamma(gamma)?;
    Ok(Vector::from_raw(soft_threshold(x.as_dvector(), gamma)))
}

pub(crate) fn soft_threshold(x: &DVector<f64>, t: f64) -> DVector<f64> {
    x.map(|xi| xi.signum() * (xi.abs() - t).max(0.0))
}

/// Componentwise clamp of `x` into `[lo, hi]`.
pub fn project_box(lo: &Vector, hi: &Vector, x: &Vector) -> Result<Vector> {
    lo.ensure_dim(x.dim())?;
    hi.ensure_dim(x.dim())?;
    let out = DVector::from_iterator(
        x.dim(),
        x.iter()
            .zip(lo.iter().zip(hi.iter()))
            .map(|(&xi, (&l, &h))| xi.max(l).min(h)),
    );
    Ok(Vector::from_raw(out))
}

/// `argmin_u φ(u) + ‖u − x‖² / (2γ)`.
pub fn prox_generic(phi: &ProxFunction, gamma: f64, x: &Vector) -> Result<Vector> {
    prox_generic_with(phi, gamma, x, ProxSolverOptions::default())
}

pub fn prox_generic_with(
    phi: &ProxFunction,
    gamma: f64,
    x: &Vector,
    opts: ProxSolverOptions,
) -> Result<Vector> {
    check_gamma(gamma)?;
    match phi {
        ProxFunction::Zero => Ok(x.clone()),
        ProxFunction::L1 { weight } => {
            if *weight < 0.0 {
                return Err(Error::invalid("weight", "l1 weight must be non-negative"));
            }
            prox_l1(gamma * weight, x)
        }
        ProxFunction::BoxIndicator { lo, hi } => project_box(lo, hi, x),
        ProxFunction::Custom(f) => coordinate_bisection(f.as_ref(), gamma, x, opts),
    }
}

/// Cyclic coordinate minimization of the strongly convex prox objective; each
/// coordinate is solved by bisection on its monotone partial subgradient.
/// Exact for smooth plus separable nonsmooth φ.
fn coordinate_bisection(
    f: &dyn ConvexFunction,
    gamma: f64,
    x: &Vector,
    opts: ProxSolverOptions,
) -> Result<Vector> {
    let n = x.dim();
    let x = x.as_dvector();
    let mut u = x.clone();
    let mut last_step = f64::INFINITY;

    for _ in 0..opts.max_iters {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let old = u[i];
            let root = solve_coordinate(f, gamma, x[i], &mut u, i);
            u[i] = root;
            max_step = max_step.max((root - old).abs());
        }
        if !max_step.is_finite() {
            return Err(Error::NonFinite {
                context: "prox solver",
            });
        }
        last_step = max_step;
        if max_step <= opts.tol {
            return Ok(Vector::from_raw(u));
        }
    }
    Err(Error::ProxNotConverged {
        iterations: opts.max_iters,
        residual: last_step,
        last: Vector::checked(u, "prox solver")?,
    })
}

fn solve_coordinate(
    f: &dyn ConvexFunction,
    gamma: f64,
    xi: f64,
    u: &mut DVector<f64>,
    i: usize,
) -> f64 {
    // h(t) = ∂ᵢφ(u with uᵢ = t) + (t − xᵢ)/γ is strongly increasing with
    // modulus 1/γ, which brackets the root from a single evaluation.
    let h = |t: f64, u: &mut DVector<f64>| {
        u[i] = t;
        f.partial(u, i) + (t - xi) / gamma
    };
    let t0 = u[i];
    let h0 = h(t0, u);
    if h0 == 0.0 {
        return t0;
    }
    let other = t0 - gamma * h0;
    let (mut lo, mut hi) = if h0 > 0.0 { (other, t0) } else { (t0, other) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid, u);
        if hm > 0.0 {
            hi = mid;
        } else if hm < 0.0 {
            lo = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}
