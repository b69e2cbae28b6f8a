use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::forward::symmetric_min_eigenvalue;
use super::prox::{prox_generic_with, ProxFunction, ProxSolverOptions};
use crate::error::{Error, Result};
use crate::vector::Vector;

type ResolventFn = dyn Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync;

/// A set-valued operator `F`, represented only through its resolvent
/// `J_{γF} = (Id + γF)⁻¹` and its monotonicity modulus `η_F`.
///
/// Maximality is a caller-asserted certificate: every constructor promises a
/// full-domain resolvent whenever `1 + γη_F > 0`.
#[derive(Clone)]
pub struct ResolventOp {
    eta: f64,
    dim: Option<usize>,
    kind: ResolventKind,
    prox_opts: ProxSolverOptions,
}

#[derive(Clone)]
enum ResolventKind {
    /// F = a·Id
    ScaledIdentity {
        a: f64,
    },
    /// F = A, a linear map
    Linear {
        matrix: DMatrix<f64>,
    },
    /// F = a·Id + ∂φ
    ShiftedProx {
        shift: f64,
        phi: ProxFunction,
    },
    Custom(Arc<ResolventFn>),
}

impl fmt::Debug for ResolventOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("ResolventOp");
        match &self.kind {
            ResolventKind::ScaledIdentity { a } => s.field("scaled_identity", a),
            ResolventKind::Linear { matrix } => s.field("linear_dim", &matrix.nrows()),
            ResolventKind::ShiftedProx { shift, phi } => s.field("shift", shift).field("phi", phi),
            ResolventKind::Custom(_) => s.field("custom", &true),
        };
        s.field("eta", &self.eta).finish()
    }
}

impl ResolventOp {
    /// `F = Id`, so `J_{γF}(x) = x / (1 + γ)`.
    pub fn identity() -> Self {
        Self::scaled_identity(1.0)
    }

    pub fn scaled_identity(a: f64) -> Self {
        ResolventOp {
            eta: a,
            dim: None,
            kind: ResolventKind::ScaledIdentity { a },
            prox_opts: ProxSolverOptions::default(),
        }
    }

    /// `F = A` for a square matrix; `η_F` is the smallest eigenvalue of the
    /// symmetric part.
    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("matrix", "resolvent matrix must be square"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "resolvent matrix",
            });
        }
        Ok(ResolventOp {
            eta: symmetric_min_eigenvalue(&matrix),
            dim: Some(matrix.nrows()),
            kind: ResolventKind::Linear { matrix },
            prox_opts: ProxSolverOptions::default(),
        })
    }

    /// `F = ∂φ`; the resolvent is `prox_{γφ}`.
    pub fn prox(phi: ProxFunction) -> Self {
        Self::shifted_prox(0.0, phi)
    }

    /// `F = a·Id + ∂φ`, which is `a`-monotone. Negative `a` gives a weakly
    /// monotone operator.
    pub fn shifted_prox(shift: f64, phi: ProxFunction) -> Self {
        ResolventOp {
            eta: shift,
            dim: phi.dim(),
            kind: ResolventKind::ShiftedProx { shift, phi },
            prox_opts: ProxSolverOptions::default(),
        }
    }

    /// Normal cone of the box `[lo, hi]`; the resolvent is the projection.
    pub fn normal_cone_box(lo: Vector, hi: Vector) -> Result<Self> {
        Ok(Self::prox(ProxFunction::box_indicator(lo, hi)?))
    }

    pub fn from_fn<F>(eta: f64, f: F) -> Self
    where
        F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        ResolventOp {
            eta,
            dim: None,
            kind: ResolventKind::Custom(Arc::new(f)),
            prox_opts: ProxSolverOptions::default(),
        }
    }

    pub fn with_prox_options(mut self, opts: ProxSolverOptions) -> Self {
        self.prox_opts = opts;
        self
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Fixed dimension, if the operator carries one.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// The prox function when `F = a·Id + ∂φ`.
    pub fn prox_function(&self) -> Option<&ProxFunction> {
        match &self.kind {
            ResolventKind::ShiftedProx { phi, .. } => Some(phi),
            _ => None,
        }
    }

    pub fn resolve(&self, gamma: f64, x: &Vector) -> Result<Vector> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(
                "gamma",
                format!("must be positive, got {gamma}"),
            ));
        }
        if 1.0 + gamma * self.eta <= 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!(
                    "1 + gamma*eta_F = {} is not positive",
                    1.0 + gamma * self.eta
                ),
            ));
        }
        if let Some(d) = self.dim {
            x.ensure_dim(d)?;
        }
        let out = match &self.kind {
            ResolventKind::ScaledIdentity { a } => x.as_dvector() / (1.0 + gamma * a),
            ResolventKind::Linear { matrix } => {
                let n = matrix.nrows();
                let sys = DMatrix::identity(n, n) + matrix * gamma;
                sys.lu()
                    .solve(x.as_dvector())
                    .ok_or_else(|| Error::invalid("matrix", "Id + gamma*A is singular"))?
            }
            ResolventKind::ShiftedProx { shift, phi } => {
                let scale = 1.0 + gamma * shift;
                let inner = Vector::checked(x.as_dvector() / scale, "resolvent")?;
                prox_generic_with(phi, gamma / scale, &inner, self.prox_opts)?.into_inner()
            }
            ResolventKind::Custom(f) => f(gamma, x.as_dvector())?,
        };
        if out.len() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: out.len(),
            });
        }
        Vector::checked(out, "resolvent")
    }
}
