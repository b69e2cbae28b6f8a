//! Problem families used by the experiments and the test suites.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::operators::{ForwardOp, ProxFunction, ResolventOp};
use crate::problem::{check_assumption_a, ProblemInstance};
use crate::vector::Vector;

pub const EXAMPLE1_ROWS: usize = 10;
pub const EXAMPLE1_COLS: usize = 8;

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// `F = Id`, `G = MᵀM` with `M ∈ ℝ^{m×n}` i.i.d. standard normal; the unique
/// solution is `z* = 0`.
#[derive(Clone, Debug)]
pub struct Example1 {
    pub seed: u64,
    pub matrix: DMatrix<f64>,
    pub problem: ProblemInstance,
    pub z0: Vector,
}

impl Example1 {
    pub fn sample(seed: u64, m: usize, n: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = gaussian_matrix(&mut rng, m, n);
        let z0 = Vector::from_raw(gaussian_vector(&mut rng, n, 1.0));
        Self::from_matrix(seed, matrix, z0)
    }

    pub fn from_matrix(seed: u64, matrix: DMatrix<f64>, z0: Vector) -> Result<Self> {
        let gram = matrix.transpose() * &matrix;
        let g = ForwardOp::linear(gram)?;
        let problem = ProblemInstance::with_default_gamma(ResolventOp::identity(), g)?;
        Ok(Example1 {
            seed,
            matrix,
            problem,
            z0,
        })
    }

    pub fn solution(&self) -> Vector {
        Vector::zeros(self.problem.dim())
    }
}

/// `F = a·Id + λ∂‖·‖₁` (weakly monotone for `a < 0`), `G(z) = Az + q` with a
/// nonsymmetric `A`, and a random feasible `γ`.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub problem: ProblemInstance,
    pub z0: Vector,
}

impl RandomInstance {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        loop {
            if let Some(inst) = Self::try_sample(rng, n)? {
                return Ok(inst);
            }
        }
    }

    pub fn from_seed(seed: u64, n: usize) -> Result<Self> {
        Self::sample(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }

    fn try_sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Option<Self>> {
        let shift: f64 = rng.random_range(-0.5..1.0);
        let weight: f64 = rng.random_range(0.0..0.5);
        // total modulus η_F + η_G in [0.1, 2]
        let total: f64 = rng.random_range(0.1..2.0);
        let mu = total - shift;
        let spread: f64 = rng.random_range(0.0..3.0);
        let q = gaussian_matrix(rng, n, n).qr().q();
        let eig = DVector::from_fn(n, |_, _| mu + spread * rng.random::<f64>());
        let sym = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        let skew_scale: f64 = rng.random_range(0.0..1.0);
        let w = gaussian_matrix(rng, n, n);
        let skew = (&w - w.transpose()) * (0.5 * skew_scale);
        let offset = gaussian_vector(rng, n, 1.0);
        let g = ForwardOp::affine(sym + skew, offset)?;

        let (eta_g, l) = (g.eta(), g.lipschitz());
        let mut gamma_max = f64::INFINITY;
        if shift < 0.0 {
            gamma_max = gamma_max.min(-1.0 / shift);
        }
        if l * l > shift * shift {
            gamma_max = gamma_max.min(2.0 * (shift + eta_g) / (l * l - shift * shift));
        }
        if !(gamma_max > 0.0) {
            return Ok(None);
        }
        let gamma_max = gamma_max.min(10.0);
        let gamma = gamma_max * rng.random_range(0.05..0.95);
        if !check_assumption_a(shift, eta_g, l, gamma).holds() {
            return Ok(None);
        }
        let f = ResolventOp::shifted_prox(shift, ProxFunction::L1 { weight });
        let problem = ProblemInstance::new(f, g, gamma)?;
        let z0 = Vector::from_raw(gaussian_vector(rng, n, 3.0));
        Ok(Some(RandomInstance { problem, z0 }))
    }
}
