//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "problem": { "kind": "example1", "m": 10, "n": 8 },
//!   "dynamics": { "b1": 20, "b2": 200, "b3": 5, "p1": 0.99, "p2": 1.01, "p3": 0, "t_p": 5 },
//!   "seed": 1
//! }
//! ```
//!
//! Missing `k_p` is filled in from [`gain_kp`]; missing `gamma` from the
//! default step rule of the problem family.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::discrete::{picard_reference, DiscreteConfig};
use crate::dynamics::{gain_kp, DynamicsParams};
use crate::error::{Error, Result};
use crate::instances::{Example1, RandomInstance, EXAMPLE1_COLS, EXAMPLE1_ROWS};
use crate::integrate::IntegratorConfig;
use crate::operators::{ForwardOp, ProxFunction, ResolventOp};
use crate::problem::{default_gamma, make_cop, make_mvip, make_vip, ProblemInstance};
use crate::vector::Vector;

/// Accuracy of the Picard `z*` oracle for configs without a known solution.
pub const REFERENCE_TOL: f64 = 1e-10;
const REFERENCE_MAX_ITERS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrete: Option<DiscreteConfig>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Initial point; drawn from the seeded RNG when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub repetitions: usize,
}

fn one() -> usize {
    1
}

fn is_one(n: &usize) -> bool {
    *n == 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub family: ProblemFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemFamily {
    Example1 {
        #[serde(default = "example1_rows")]
        m: usize,
        #[serde(default = "example1_cols")]
        n: usize,
    },
    Random {
        n: usize,
    },
    Inclusion {
        resolvent: ResolventSpec,
        forward: ForwardSpec,
    },
    Cop {
        gradient: ForwardSpec,
        phi: ProxSpec,
    },
    Mvip {
        operator: ForwardSpec,
        phi: ProxSpec,
    },
    Vip {
        operator: ForwardSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<Vec<f64>>,
    },
}

fn example1_rows() -> usize {
    EXAMPLE1_ROWS
}

fn example1_cols() -> usize {
    EXAMPLE1_COLS
}

/// Row-major matrix payload.
pub type MatrixRows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForwardSpec {
    Zero {
        dim: usize,
    },
    Linear {
        matrix: MatrixRows,
    },
    Affine {
        matrix: MatrixRows,
        offset: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResolventSpec {
    Identity,
    ScaledIdentity { a: f64 },
    Linear { matrix: MatrixRows },
    Prox { phi: ProxSpec },
    ShiftedProx { shift: f64, phi: ProxSpec },
    NormalConeBox { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProxSpec {
    Zero,
    L1 { weight: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub t_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_p: Option<f64>,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        DynamicsSpec {
            b1: 20.0,
            b2: 200.0,
            b3: 0.0,
            p1: 0.99,
            p2: 1.01,
            p3: 0.0,
            t_p: 5.0,
            k_p: None,
        }
    }
}

impl DynamicsSpec {
    pub fn resolve(&self, c: f64) -> Result<DynamicsParams> {
        let k_p = match self.k_p {
            Some(k) => k,
            None => gain_kp(self.b1, self.b2, self.b3, self.p1, self.p2, c)?,
        };
        DynamicsParams::new(
            self.b1, self.b2, self.b3, self.p1, self.p2, self.p3, self.t_p, k_p,
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub format: Format,
}

/// A config turned into operators, start point and parameters.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub problem: ProblemInstance,
    pub z0: Vector,
    /// Known solution, or the Picard oracle's approximation of it.
    pub z_star: Option<Vector>,
    pub params: DynamicsParams,
    pub integrator: IntegratorConfig,
    pub discrete: DiscreteConfig,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn matrix(rows: &MatrixRows) -> Result<DMatrix<f64>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Err(config_err("matrix payload must be non-empty"));
    }
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(config_err("matrix rows must have equal length"));
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

fn vector(values: &[f64]) -> Result<Vector> {
    Vector::new(values.to_vec())
}

impl ForwardSpec {
    pub fn build(&self) -> Result<ForwardOp> {
        match self {
            ForwardSpec::Zero { dim } => {
                if *dim == 0 {
                    return Err(config_err("zero operator needs dim > 0"));
                }
                Ok(ForwardOp::zero(*dim))
            }
            ForwardSpec::Linear { matrix: m } => ForwardOp::linear(matrix(m)?),
            ForwardSpec::Affine { matrix: m, offset } => {
                ForwardOp::affine(matrix(m)?, DVector::from_column_slice(offset))
            }
        }
    }
}

impl ProxSpec {
    pub fn build(&self) -> Result<ProxFunction> {
        match self {
            ProxSpec::Zero => Ok(ProxFunction::Zero),
            ProxSpec::L1 { weight } => {
                if !(*weight >= 0.0 && weight.is_finite()) {
                    return Err(Error::invalid("weight", "must be >= 0"));
                }
                Ok(ProxFunction::L1 { weight: *weight })
            }
            ProxSpec::Box { lo, hi } => ProxFunction::box_indicator(vector(lo)?, vector(hi)?),
        }
    }
}

impl ResolventSpec {
    pub fn build(&self) -> Result<ResolventOp> {
        match self {
            ResolventSpec::Identity => Ok(ResolventOp::identity()),
            ResolventSpec::ScaledIdentity { a } => Ok(ResolventOp::scaled_identity(*a)),
            ResolventSpec::Linear { matrix: m } => ResolventOp::linear(matrix(m)?),
            ResolventSpec::Prox { phi } => Ok(ResolventOp::prox(phi.build()?)),
            ResolventSpec::ShiftedProx { shift, phi } => {
                Ok(ResolventOp::shifted_prox(*shift, phi.build()?))
            }
            ResolventSpec::NormalConeBox { lo, hi } => {
                ResolventOp::normal_cone_box(vector(lo)?, vector(hi)?)
            }
        }
    }
}

/// Default step for the optimization and variational-inequality adapters,
/// `γ = η/L²`, inside their gate `γL² < 2η`.
fn adapter_gamma(g: &ForwardOp) -> Result<f64> {
    let l = g.lipschitz();
    if l == 0.0 {
        return default_gamma(0.0, g.eta(), l);
    }
    Ok(g.eta() / (l * l))
}

impl ProblemSpec {
    fn needs_seed(&self) -> bool {
        matches!(
            self.family,
            ProblemFamily::Example1 { .. } | ProblemFamily::Random { .. }
        )
    }

    /// Builds the instance; randomized families also return their sampled
    /// start point and, for Example 1, the known solution.
    fn build(
        &self,
        seed: Option<u64>,
    ) -> Result<(ProblemInstance, Option<Vector>, Option<Vector>)> {
        if self.needs_seed() && seed.is_none() {
            return Err(config_err("randomized problem families need a `seed`"));
        }
        let seed = seed.unwrap_or(0);
        match &self.family {
            ProblemFamily::Example1 { m, n } => {
                if *m == 0 || *n == 0 {
                    return Err(config_err("example1 needs m, n > 0"));
                }
                let ex = Example1::sample(seed, *m, *n)?;
                let solution = ex.solution();
                let problem = match self.gamma {
                    Some(g) => ProblemInstance::new(
                        ex.problem.resolvent().clone(),
                        ex.problem.forward().clone(),
                        g,
                    )?,
                    None => ex.problem,
                };
                Ok((problem, Some(ex.z0), Some(solution)))
            }
            ProblemFamily::Random { n } => {
                if *n == 0 {
                    return Err(config_err("random family needs n > 0"));
                }
                let inst = RandomInstance::from_seed(seed, *n)?;
                let problem = match self.gamma {
                    Some(g) => ProblemInstance::new(
                        inst.problem.resolvent().clone(),
                        inst.problem.forward().clone(),
                        g,
                    )?,
                    None => inst.problem,
                };
                Ok((problem, Some(inst.z0), None))
            }
            ProblemFamily::Inclusion { resolvent, forward } => {
                let f = resolvent.build()?;
                let g = forward.build()?;
                let problem = match self.gamma {
                    Some(gamma) => ProblemInstance::new(f, g, gamma)?,
                    None => ProblemInstance::with_default_gamma(f, g)?,
                };
                Ok((problem, None, None))
            }
            ProblemFamily::Cop { gradient, phi } => {
                let g = gradient.build()?;
                let gamma = self.gamma.map_or_else(|| adapter_gamma(&g), Ok)?;
                Ok((make_cop(g, phi.build()?, gamma)?, None, None))
            }
            ProblemFamily::Mvip { operator, phi } => {
                let g = operator.build()?;
                let gamma = self.gamma.map_or_else(|| adapter_gamma(&g), Ok)?;
                Ok((make_mvip(g, phi.build()?, gamma)?, None, None))
            }
            ProblemFamily::Vip { operator, lo, hi } => {
                let g = operator.build()?;
                let gamma = self.gamma.map_or_else(|| adapter_gamma(&g), Ok)?;
                let bounds = match (lo, hi) {
                    (Some(lo), Some(hi)) => Some((vector(lo)?, vector(hi)?)),
                    (None, None) => None,
                    _ => return Err(config_err("vip needs both `lo` and `hi`, or neither")),
                };
                Ok((make_vip(g, bounds, gamma)?, None, None))
            }
        }
    }
}

impl ExperimentConfig {
    /// The Example 1 configuration with the default dynamics.
    pub fn example1(seed: u64) -> Self {
        ExperimentConfig {
            problem: ProblemSpec {
                family: ProblemFamily::Example1 {
                    m: EXAMPLE1_ROWS,
                    n: EXAMPLE1_COLS,
                },
                gamma: None,
            },
            dynamics: DynamicsSpec::default(),
            integrator: None,
            discrete: None,
            output: OutputSpec::default(),
            seed: Some(seed),
            start: None,
            repetitions: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The problem instance alone, without start point or reference solution.
    pub fn build_problem(&self) -> Result<ProblemInstance> {
        Ok(self.problem.build(self.seed)?.0)
    }

    /// Builds repetition `rep`; repetitions use consecutive seeds.
    pub fn build_repetition(&self, rep: usize) -> Result<Experiment> {
        let seed = self.seed.map(|s| s.wrapping_add(rep as u64));
        let (problem, sampled_z0, known) = self.problem.build(seed)?;
        let z0 = match (&self.start, sampled_z0) {
            (Some(start), _) => vector(start)?,
            (None, Some(z0)) => z0,
            (None, None) => {
                let seed =
                    seed.ok_or_else(|| config_err("either `start` or `seed` is required"))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let values: Vec<f64> = (0..problem.dim())
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                vector(&values)?
            }
        };
        z0.ensure_dim(problem.dim())?;
        let z_star = match known {
            Some(z) => Some(z),
            None => Some(picard_reference(
                &problem,
                &z0,
                REFERENCE_TOL,
                REFERENCE_MAX_ITERS,
            )?),
        };
        let params = self.dynamics.resolve(problem.contraction())?;
        let integrator = self
            .integrator
            .unwrap_or_else(|| IntegratorConfig::for_horizon(params.t_p));
        integrator.validate()?;
        let discrete = self.discrete.unwrap_or_default().with_alpha_of(&params);
        discrete.validate()?;
        Ok(Experiment {
            problem,
            z0,
            z_star,
            params,
            integrator,
            discrete,
        })
    }

    pub fn build(&self) -> Result<Experiment> {
        self.build_repetition(0)
    }
}
