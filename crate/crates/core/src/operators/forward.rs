use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::Vector;

type ForwardFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// Single-valued operator `G` with its monotonicity modulus `η_G` and
/// Lipschitz constant `L`.
#[derive(Clone)]
pub struct ForwardOp {
    dim: usize,
    eta: f64,
    lipschitz: f64,
    kind: ForwardKind,
}

#[derive(Clone)]
enum ForwardKind {
    Zero,
    Affine {
        matrix: DMatrix<f64>,
        offset: DVector<f64>,
    },
    Custom(Arc<ForwardFn>),
}

impl fmt::Debug for ForwardOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ForwardKind::Zero => "zero",
            ForwardKind::Affine { .. } => "affine",
            ForwardKind::Custom(_) => "custom",
        };
        f.debug_struct("ForwardOp")
            .field("kind", &kind)
            .field("dim", &self.dim)
            .field("eta", &self.eta)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl ForwardOp {
    pub fn zero(dim: usize) -> Self {
        ForwardOp {
            dim,
            eta: 0.0,
            lipschitz: 0.0,
            kind: ForwardKind::Zero,
        }
    }

    /// `G(z) = A z`, with certificates computed from `A`.
    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::affine(matrix, DVector::zeros(n))
    }

    /// `G(z) = A z + q`. `η_G` is the smallest eigenvalue of the symmetric
    /// part of `A`, `L` its spectral norm.
    pub fn affine(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid(
                "matrix",
                "forward operator matrix must be square",
            ));
        }
        if offset.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: offset.len(),
            });
        }
        if matrix.iter().chain(offset.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "forward operator",
            });
        }
        Ok(ForwardOp {
            dim: matrix.nrows(),
            eta: symmetric_min_eigenvalue(&matrix),
            lipschitz: spectral_norm(&matrix),
            kind: ForwardKind::Affine { matrix, offset },
        })
    }

    /// Wraps a closure. The certificates are caller-asserted; use
    /// [`crate::operators::spot_check_forward`] to sample them.
    pub fn from_fn<F>(dim: usize, eta: f64, lipschitz: f64, f: F) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid(
                "lipschitz",
                "must be finite and non-negative",
            ));
        }
        if !eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite"));
        }
        Ok(ForwardOp {
            dim,
            eta,
            lipschitz,
            kind: ForwardKind::Custom(Arc::new(f)),
        })
    }

    /// Overrides the computed monotonicity modulus, e.g. with a tighter
    /// analytic value.
    pub fn with_certificates(mut self, eta: f64, lipschitz: f64) -> Self {
        self.eta = eta;
        self.lipschitz = lipschitz;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            ForwardKind::Affine { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    pub fn eval(&self, z: &Vector) -> Result<Vector> {
        z.ensure_dim(self.dim)?;
        Vector::checked(self.eval_raw(z.as_dvector()), "forward operator")
    }

    pub(crate) fn eval_raw(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ForwardKind::Zero => DVector::zeros(z.len()),
            ForwardKind::Affine { matrix, offset } => matrix * z + offset,
            ForwardKind::Custom(f) => f(z),
        }
    }
}

pub fn symmetric_min_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    let sym = (matrix + matrix.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub fn spectral_norm(matrix: &DMatrix<f64>) -> f64 {
    if matrix.is_empty() {
        return 0.0;
    }
    matrix.singular_values().max()
}
