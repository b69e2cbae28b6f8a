//! Inclusion problem instances `0 ∈ F(z) + G(z)`, the assumption check, the
//! contraction constant of the forward-backward map and the residual map.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{ForwardOp, ProxFunction, ResolventOp};
use crate::vector::Vector;

/// Which inequality of the standing assumption failed, and its value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum AssumptionViolation {
    /// `1 + γη_F > 0`
    ResolventModulus { value: f64 },
    /// `2(η_F + η_G) + γη_F² − γL² > 0`
    Contraction { value: f64 },
    /// `γL² < 2η` for the optimization and variational-inequality adapters;
    /// `value` is `γL² − 2η`.
    StepGate { value: f64 },
    /// The adapters need a strongly monotone operator.
    StrongMonotonicity { eta: f64 },
}

impl fmt::Display for AssumptionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssumptionViolation::ResolventModulus { value } => {
                write!(f, "clause 1 fails: 1 + gamma*eta_F = {value} is not > 0")
            }
            AssumptionViolation::Contraction { value } => write!(
                f,
                "clause 2 fails: 2(eta_F + eta_G) + gamma*eta_F^2 - gamma*L^2 = {value} is not > 0"
            ),
            AssumptionViolation::StepGate { value } => {
                write!(f, "step gate fails: gamma*L^2 - 2*eta = {value} is not < 0")
            }
            AssumptionViolation::StrongMonotonicity { eta } => {
                write!(f, "operator must be strongly monotone, eta = {eta}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AssumptionVerdict {
    Holds,
    Fails(AssumptionViolation),
}

impl AssumptionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, AssumptionVerdict::Holds)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            AssumptionVerdict::Holds => Ok(()),
            AssumptionVerdict::Fails(v) => Err(Error::Assumption(v)),
        }
    }
}

/// Both inequalities of the standing assumption, strictly.
pub fn check_assumption_a(eta_f: f64, eta_g: f64, lipschitz: f64, gamma: f64) -> AssumptionVerdict {
    let first = 1.0 + gamma * eta_f;
    if !(first > 0.0) {
        return AssumptionVerdict::Fails(AssumptionViolation::ResolventModulus { value: first });
    }
    let second = assumption_margin(eta_f, eta_g, lipschitz, gamma);
    if !(second > 0.0) {
        return AssumptionVerdict::Fails(AssumptionViolation::Contraction { value: second });
    }
    AssumptionVerdict::Holds
}

/// `2(η_F + η_G) + γη_F² − γL²`.
pub fn assumption_margin(eta_f: f64, eta_g: f64, lipschitz: f64, gamma: f64) -> f64 {
    2.0 * (eta_f + eta_g) + gamma * eta_f * eta_f - gamma * lipschitz * lipschitz
}

/// `√max(0, 1 − 2γη_G + γ²L²) / (1 + γη_F)` without any validity gate.
///
/// `Id − γG` is Lipschitz with the numerator and `J_{γF}` with
/// `1/(1 + γη_F)`. Given `1 + γη_F > 0`, the value is `< 1` exactly when the
/// contraction clause holds.
pub fn contraction_bound(eta_f: f64, eta_g: f64, lipschitz: f64, gamma: f64) -> f64 {
    let radicand = 1.0 - 2.0 * gamma * eta_g + gamma * gamma * lipschitz * lipschitz;
    radicand.max(0.0).sqrt() / (1.0 + gamma * eta_f)
}

/// Lipschitz constant of `B = J_{γF} ∘ (Id − γG)`; errors when the standing
/// assumption fails.
pub fn contraction_constant(eta_f: f64, eta_g: f64, lipschitz: f64, gamma: f64) -> Result<f64> {
    validate_scalars(lipschitz, gamma)?;
    check_assumption_a(eta_f, eta_g, lipschitz, gamma).into_result()?;
    Ok(contraction_bound(eta_f, eta_g, lipschitz, gamma))
}

fn validate_scalars(lipschitz: f64, gamma: f64) -> Result<()> {
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(
            "lipschitz",
            format!("must be >= 0, got {lipschitz}"),
        ));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    Ok(())
}

/// Default step: `γ = 1/(1+L)`, halved until the standing assumption holds.
pub fn default_gamma(eta_f: f64, eta_g: f64, lipschitz: f64) -> Result<f64> {
    let mut gamma = 1.0 / (1.0 + lipschitz);
    let mut verdict = check_assumption_a(eta_f, eta_g, lipschitz, gamma);
    for _ in 0..200 {
        if verdict.holds() {
            return Ok(gamma);
        }
        gamma *= 0.5;
        verdict = check_assumption_a(eta_f, eta_g, lipschitz, gamma);
    }
    match verdict {
        AssumptionVerdict::Holds => Ok(gamma),
        AssumptionVerdict::Fails(v) => Err(Error::Assumption(v)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Inclusion,
    /// `min h + φ`, with `F = ∂φ` and `G = ∇h`.
    Cop,
    /// Mixed variational inequality, `F = ∂φ`.
    Mvip,
    /// Variational inequality over a box (or all of ℝⁿ), `F = N_Ω`.
    Vip,
}

/// An inclusion problem with a validated step `γ` and its contraction
/// constant. Immutable once built.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    resolvent: ResolventOp,
    forward: ForwardOp,
    gamma: f64,
    c: f64,
    kind: ProblemKind,
}

impl ProblemInstance {
    pub fn new(resolvent: ResolventOp, forward: ForwardOp, gamma: f64) -> Result<Self> {
        Self::with_kind(resolvent, forward, gamma, ProblemKind::Inclusion)
    }

    /// Picks `γ` with [`default_gamma`].
    pub fn with_default_gamma(resolvent: ResolventOp, forward: ForwardOp) -> Result<Self> {
        let gamma = default_gamma(resolvent.eta(), forward.eta(), forward.lipschitz())?;
        Self::new(resolvent, forward, gamma)
    }

    fn with_kind(
        resolvent: ResolventOp,
        forward: ForwardOp,
        gamma: f64,
        kind: ProblemKind,
    ) -> Result<Self> {
        if let Some(d) = resolvent.dim() {
            if d != forward.dim() {
                return Err(Error::DimensionMismatch {
                    expected: forward.dim(),
                    found: d,
                });
            }
        }
        let c = contraction_constant(resolvent.eta(), forward.eta(), forward.lipschitz(), gamma)?;
        Ok(ProblemInstance {
            resolvent,
            forward,
            gamma,
            c,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn contraction(&self) -> f64 {
        self.c
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn resolvent(&self) -> &ResolventOp {
        &self.resolvent
    }

    pub fn forward(&self) -> &ForwardOp {
        &self.forward
    }

    pub fn eta_f(&self) -> f64 {
        self.resolvent.eta()
    }

    pub fn eta_g(&self) -> f64 {
        self.forward.eta()
    }

    pub fn lipschitz(&self) -> f64 {
        self.forward.lipschitz()
    }

    pub fn verdict(&self) -> AssumptionVerdict {
        check_assumption_a(self.eta_f(), self.eta_g(), self.lipschitz(), self.gamma)
    }

    /// `B(z) = J_{γF}(z − γG(z))`.
    pub fn forward_backward(&self, z: &Vector) -> Result<Vector> {
        let g = self.forward.eval(z)?;
        let step = Vector::checked(z.as_dvector() - g.as_dvector() * self.gamma, "forward step")?;
        self.resolvent.resolve(self.gamma, &step)
    }

    /// `Φ(z) = z − B(z)`.
    pub fn residual(&self, z: &Vector) -> Result<Vector> {
        let b = self.forward_backward(z)?;
        Vector::checked(z.as_dvector() - b.as_dvector(), "residual")
    }
}

pub fn residual_map(p: &ProblemInstance, z: &Vector) -> Result<Vector> {
    p.residual(z)
}

fn step_gate(g: &ForwardOp, gamma: f64) -> Result<()> {
    validate_scalars(g.lipschitz(), gamma)?;
    if !(g.eta() > 0.0) {
        return Err(Error::Assumption(AssumptionViolation::StrongMonotonicity {
            eta: g.eta(),
        }));
    }
    let value = gamma * g.lipschitz() * g.lipschitz() - 2.0 * g.eta();
    if !(value < 0.0) {
        return Err(Error::Assumption(AssumptionViolation::StepGate { value }));
    }
    Ok(())
}

/// `min h(z) + φ(z)` with `Φ(z) = z − prox_{γφ}(z − γ∇h(z))`.
pub fn make_cop(grad_h: ForwardOp, phi: ProxFunction, gamma: f64) -> Result<ProblemInstance> {
    step_gate(&grad_h, gamma)?;
    ProblemInstance::with_kind(ResolventOp::prox(phi), grad_h, gamma, ProblemKind::Cop)
}

/// Mixed variational inequality, `Φ(z) = z − prox_{γφ}(z − γG(z))`.
pub fn make_mvip(g: ForwardOp, phi: ProxFunction, gamma: f64) -> Result<ProblemInstance> {
    step_gate(&g, gamma)?;
    ProblemInstance::with_kind(ResolventOp::prox(phi), g, gamma, ProblemKind::Mvip)
}

/// Variational inequality over `Ω = [lo, hi]`, or `ℝⁿ` when `bounds` is
/// `None`: `Φ(z) = z − P_Ω(z − γG(z))`.
pub fn make_vip(
    g: ForwardOp,
    bounds: Option<(Vector, Vector)>,
    gamma: f64,
) -> Result<ProblemInstance> {
    step_gate(&g, gamma)?;
    let f = match bounds {
        Some((lo, hi)) => ResolventOp::normal_cone_box(lo, hi)?,
        None => ResolventOp::prox(ProxFunction::Zero),
    };
    ProblemInstance::with_kind(f, g, gamma, ProblemKind::Vip)
}
