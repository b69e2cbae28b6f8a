//! Sampled spot-checks of monotonicity, Lipschitz and cocoercivity
//! certificates. These refute wrong certificates; they prove nothing.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{ForwardOp, ResolventOp};
use crate::error::Result;
use crate::vector::Vector;

/// Relative slack allowed for rounding when comparing sampled quotients to
/// certificates.
const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ForwardCertificateCheck {
    pub samples: usize,
    /// Smallest sampled `⟨G(x)−G(y), x−y⟩ / ‖x−y‖²`.
    pub min_monotonicity_ratio: f64,
    /// Largest sampled `‖G(x)−G(y)‖ / ‖x−y‖`.
    pub max_lipschitz_ratio: f64,
    pub eta_ok: bool,
    pub lipschitz_ok: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolventCertificateCheck {
    pub samples: usize,
    pub gamma: f64,
    /// Smallest sampled `⟨J(x)−J(y), x−y⟩ / ‖J(x)−J(y)‖²`, to be compared
    /// with `1 + γη_F`.
    pub min_cocoercivity_ratio: f64,
    pub cocoercive_ok: bool,
}

pub(crate) fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Vector {
    let v = DVector::from_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    Vector::from_raw(v)
}

pub fn spot_check_forward<R: Rng + ?Sized>(
    g: &ForwardOp,
    samples: usize,
    scale: f64,
    rng: &mut R,
) -> Result<ForwardCertificateCheck> {
    let mut min_mono = f64::INFINITY;
    let mut max_lip: f64 = 0.0;
    for _ in 0..samples {
        let x = random_vector(rng, g.dim(), scale);
        let y = random_vector(rng, g.dim(), scale);
        let d = x.as_dvector() - y.as_dvector();
        let d2 = d.norm_squared();
        if d2 == 0.0 {
            continue;
        }
        let gd = g.eval(&x)?.into_inner() - g.eval(&y)?.into_inner();
        min_mono = min_mono.min(gd.dot(&d) / d2);
        max_lip = max_lip.max(gd.norm() / d2.sqrt());
    }
    let tol = SLACK * (1.0 + g.lipschitz());
    Ok(ForwardCertificateCheck {
        samples,
        min_monotonicity_ratio: min_mono,
        max_lipschitz_ratio: max_lip,
        eta_ok: min_mono >= g.eta() - tol,
        lipschitz_ok: max_lip <= g.lipschitz() + tol,
    })
}

pub fn spot_check_resolvent<R: Rng + ?Sized>(
    f: &ResolventOp,
    gamma: f64,
    dim: usize,
    samples: usize,
    scale: f64,
    rng: &mut R,
) -> Result<ResolventCertificateCheck> {
    let modulus = 1.0 + gamma * f.eta();
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let x = random_vector(rng, dim, scale);
        let y = random_vector(rng, dim, scale);
        let jd = f.resolve(gamma, &x)?.into_inner() - f.resolve(gamma, &y)?.into_inner();
        let jd2 = jd.norm_squared();
        if jd2 == 0.0 {
            continue;
        }
        let d = x.as_dvector() - y.as_dvector();
        min_ratio = min_ratio.min(jd.dot(&d) / jd2);
    }
    Ok(ResolventCertificateCheck {
        samples,
        gamma,
        min_cocoercivity_ratio: min_ratio,
        cocoercive_ok: min_ratio >= modulus * (1.0 - SLACK),
    })
}
