//! The weighted residual flow `ż = −(K_p/T_p) ω(z) Φ(z)`, its predefined-time
//! gain and settling-time bounds.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::vector::Vector;

/// `‖Φ(z)‖ ≤ ZERO_BAND · (1 + ‖z‖)` counts as a zero of `Φ`.
pub const ZERO_BAND: f64 = 1e-12;

/// Configuration of the weight
/// `ω = b₁‖Φ‖^{p₁−1} + b₂‖Φ‖^{p₂−1} + b₃‖Φ‖^{−p₃}` and the gain `K_p/T_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub t_p: f64,
    pub k_p: f64,
}

impl DynamicsParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b1: f64,
        b2: f64,
        b3: f64,
        p1: f64,
        p2: f64,
        p3: f64,
        t_p: f64,
        k_p: f64,
    ) -> Result<Self> {
        let p = DynamicsParams {
            b1,
            b2,
            b3,
            p1,
            p2,
            p3,
            t_p,
            k_p,
        };
        p.validate()?;
        Ok(p)
    }

    /// Predefined-time configuration (`p₃ = 0`) with `K_p` from [`gain_kp`].
    pub fn predefined_time(
        b1: f64,
        b2: f64,
        b3: f64,
        p1: f64,
        p2: f64,
        t_p: f64,
        c: f64,
    ) -> Result<Self> {
        let k_p = gain_kp(b1, b2, b3, p1, p2, c)?;
        Self::new(b1, b2, b3, p1, p2, 0.0, t_p, k_p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.b1, self.b2, self.b3, self.p1, self.p2, self.p3, self.t_p, self.k_p,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                context: "dynamics parameters",
            });
        }
        let checks: [(bool, &'static str, &str); 8] = [
            (self.b1 > 0.0, "b1", "must be > 0"),
            (self.b2 > 0.0, "b2", "must be > 0"),
            (self.b3 >= 0.0, "b3", "must be >= 0"),
            (self.p1 > 0.0 && self.p1 < 1.0, "p1", "must lie in (0, 1)"),
            (self.p2 > 1.0, "p2", "must be > 1"),
            (self.p3 >= 0.0, "p3", "must be >= 0"),
            (self.t_p > 0.0, "t_p", "must be > 0"),
            (self.k_p > 0.0, "k_p", "must be > 0"),
        ];
        for (ok, name, reason) in checks {
            if !ok {
                return Err(Error::invalid(name, reason));
            }
        }
        Ok(())
    }

    /// With `p₃ = 0` and `K_p` from [`gain_kp`] the settling time is bounded
    /// by `T_p`.
    pub fn is_predefined_time(&self) -> bool {
        self.p3 == 0.0
    }

    /// For `p₃ ≥ 1` the `b₃` term of `ω Φ` does not vanish at the equilibrium,
    /// so the field is discontinuous there.
    pub fn discontinuous_at_equilibrium(&self) -> bool {
        self.b3 > 0.0 && self.p3 >= 1.0
    }

    pub fn gain(&self) -> f64 {
        self.k_p / self.t_p
    }

    /// Exponents tied to the discretization exponent `α > 2`:
    /// `p₁ = 1 − 2/α`, `p₂ = 1 + 2/α`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be > 2, got {alpha}")));
        }
        self.p1 = 1.0 - 2.0 / alpha;
        self.p2 = 1.0 + 2.0 / alpha;
        self.validate()?;
        Ok(self)
    }

    /// The `α` with `p₁ = 1 − 2/α`.
    pub fn alpha(&self) -> f64 {
        2.0 / (1.0 - self.p1)
    }
}

/// `ω` as a function of `r = ‖Φ(z)‖`; zero at `r = 0`.
pub fn omega(params: &DynamicsParams, phi_norm: f64) -> f64 {
    if phi_norm <= 0.0 {
        return 0.0;
    }
    let r = phi_norm;
    let mut w = params.b1 * r.powf(params.p1 - 1.0) + params.b2 * r.powf(params.p2 - 1.0);
    if params.b3 != 0.0 {
        w += params.b3 * r.powf(-params.p3);
    }
    w
}

pub fn is_zero_residual(phi_norm: f64, z_norm: f64) -> bool {
    phi_norm <= ZERO_BAND * (1.0 + z_norm)
}

/// Field value at `z` together with `‖Φ(z)‖`.
pub(crate) fn field_with_residual(
    p: &ProblemInstance,
    params: &DynamicsParams,
    z: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let zv = Vector::checked(z.clone(), "state")?;
    let phi = p.residual(&zv)?.into_inner();
    let r = phi.norm();
    if is_zero_residual(r, z.norm()) {
        return Ok((DVector::zeros(z.len()), r));
    }
    let scale = -params.gain() * omega(params, r);
    Ok((phi * scale, r))
}

/// `−(K_p/T_p) ω(z) Φ(z)`, exactly zero inside the equilibrium band.
pub fn vector_field(p: &ProblemInstance, params: &DynamicsParams, z: &Vector) -> Result<Vector> {
    z.ensure_dim(p.dim())?;
    let (f, _) = field_with_residual(p, params, z.as_dvector())?;
    Vector::checked(f, "vector field")
}

/// `−μ Φ(z)`.
pub fn nominal_field(p: &ProblemInstance, mu: f64, z: &Vector) -> Result<Vector> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid("mu", "must be > 0"));
    }
    let phi = p.residual(z)?;
    Vector::checked(phi.into_inner() * -mu, "nominal field")
}

/// Predefined-time gain for `p₃ = 0`:
/// `K_p = 2/(a₃(1−p₁)) ln(1 + a₃/a₁) + 2/(a₃(p₂−1)) ln(1 + a₃/a₂)` with
/// `a₁ = √2^{1+p₁} b₁(1−c)/(1+c)^{1−p₁}`, `a₂ = √2^{1+p₂} b₂(1−c)^{p₂}`,
/// `a₃ = 2b₃(1−c)`. At `b₃ = 0` this is the limit
/// `2/(a₁(1−p₁)) + 2/(a₂(p₂−1))`.
pub fn gain_kp(b1: f64, b2: f64, b3: f64, p1: f64, p2: f64, c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::invalid(
            "c",
            format!("contraction constant must lie in [0, 1), got {c}"),
        ));
    }
    if !(b3 >= 0.0 && b3.is_finite()) {
        return Err(Error::invalid("b3", "must be >= 0"));
    }
    if !(b1 > 0.0 && b2 > 0.0) {
        return Err(Error::invalid("b1/b2", "must be > 0"));
    }
    if !(p1 > 0.0 && p1 < 1.0 && p2 > 1.0) {
        return Err(Error::invalid("p1/p2", "need p1 in (0, 1) and p2 > 1"));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let a1 = sqrt2.powf(1.0 + p1) * b1 * (1.0 - c) / (1.0 + c).powf(1.0 - p1);
    let a2 = sqrt2.powf(1.0 + p2) * b2 * (1.0 - c).powf(p2);
    let a3 = 2.0 * b3 * (1.0 - c);
    let k = if a3 == 0.0 {
        2.0 / (a1 * (1.0 - p1)) + 2.0 / (a2 * (p2 - 1.0))
    } else {
        2.0 / (a3 * (1.0 - p1)) * (a3 / a1).ln_1p() + 2.0 / (a3 * (p2 - 1.0)) * (a3 / a2).ln_1p()
    };
    if !k.is_finite() {
        return Err(Error::NonFinite {
            context: "gain K_p",
        });
    }
    Ok(k)
}

/// Lyapunov constants for `V = ½‖z − z*‖²`:
/// `V̇ ≤ −(M₁V^{r₁} + M₂V^{r₂})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SettlingBounds {
    pub m1: f64,
    pub m2: f64,
    pub r1: f64,
    pub r2: f64,
    /// `1/(M₁(1−r₁)) + 1/(M₂(r₂−1))`.
    pub t_max: f64,
    /// `ζ = 1/(1−p₁)` when the exponents are symmetric (`p₂ − 1 = 1 − p₁`).
    pub zeta: Option<f64>,
    /// `πζ/√(M₁M₂)`.
    pub bound_polyakov: Option<f64>,
    /// `πζ/√(b₁b₂)`, the form printed without the `M` constants.
    pub bound_statement: Option<f64>,
}

pub fn settling_bounds(params: &DynamicsParams, c: f64) -> Result<SettlingBounds> {
    params.validate()?;
    if !(0.0..1.0).contains(&c) {
        return Err(Error::invalid(
            "c",
            format!("contraction constant must lie in [0, 1), got {c}"),
        ));
    }
    let (p1, p2) = (params.p1, params.p2);
    let gain = params.gain();
    let m1 = 2f64.powf((1.0 + p1) / 2.0) * gain * params.b1 * (1.0 - c) / (1.0 + c).powf(1.0 - p1);
    let m2 = 2f64.powf((1.0 + p2) / 2.0) * gain * (1.0 - c).powf(p2) * params.b2;
    let r1 = (1.0 + p1) / 2.0;
    let r2 = (1.0 + p2) / 2.0;
    let t_max = 1.0 / (m1 * (1.0 - r1)) + 1.0 / (m2 * (r2 - 1.0));
    let symmetric = ((p2 - 1.0) - (1.0 - p1)).abs() <= 1e-9 * (1.0 - p1).max(1e-300);
    let zeta = symmetric.then(|| 1.0 / (1.0 - p1));
    Ok(SettlingBounds {
        m1,
        m2,
        r1,
        r2,
        t_max,
        zeta,
        bound_polyakov: zeta.map(|z| PI * z / (m1 * m2).sqrt()),
        bound_statement: zeta.map(|z| PI * z / (params.b1 * params.b2).sqrt()),
    })
}
