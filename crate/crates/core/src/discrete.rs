//! Forward-Euler discretization of the weighted flow,
//! `z_{n+1} = z_n − β (K_p/T_p) ω(z_n) Φ(z_n)`, its tan-shaped error
//! envelope, and a Banach–Picard reference solver used as the `z*` oracle.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{is_zero_residual, omega, settling_bounds, DynamicsParams};
use crate::error::{Error, Result};
use crate::fmt::Num;
use crate::problem::ProblemInstance;
use crate::vector::Vector;

/// Iteration error above `DIVERGENCE_FACTOR` times the initial error aborts.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscreteConfig {
    /// Step size.
    pub beta: f64,
    /// Exponent with `p₁ = 1 − 2/α`, `p₂ = 1 + 2/α`.
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once `‖Φ(z_n)‖ ≤ tol`.
    pub tol: f64,
    /// Additive slack `ε` of the envelope.
    pub epsilon: f64,
}

impl Default for DiscreteConfig {
    fn default() -> Self {
        DiscreteConfig {
            beta: 0.005,
            alpha: 200.0,
            max_iters: 1_000_000,
            tol: 1e-12,
            epsilon: 1e-4,
        }
    }
}

impl DiscreteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", "must be > 0"));
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be > 2"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be > 0"));
        }
        Ok(())
    }

    /// `α` matching the exponents of `params`, i.e. `2/(1 − p₁)`.
    pub fn with_alpha_of(mut self, params: &DynamicsParams) -> Self {
        self.alpha = params.alpha();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterateLog {
    pub beta: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// `‖Φ(z_n)‖` for `n = 0..=iterations`.
    pub residual_norms: Vec<f64>,
    /// `‖z_n − z*‖`, when an oracle was supplied.
    pub errors: Option<Vec<f64>>,
    pub envelope: Vec<f64>,
    /// `⌈απ / (2β√(M₁M₂))⌉`.
    pub n_star: u64,
    pub m1: f64,
    pub m2: f64,
    pub converged: bool,
    pub final_state: Vector,
}

impl IterateLog {
    pub fn iterations(&self) -> usize {
        self.residual_norms.len().saturating_sub(1)
    }

    /// Every logged error lies below `envelope(n) + ε` (the envelope already
    /// carries `ε`). `None` without an oracle.
    pub fn within_envelope(&self) -> Option<bool> {
        let errs = self.errors.as_ref()?;
        Some(errs.iter().zip(&self.envelope).all(|(e, b)| e <= b))
    }

    /// CSV with header `n,err,envelope`; `err` is empty without an oracle.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,err,envelope\n");
        for (n, env) in self.envelope.iter().enumerate() {
            match &self.errors {
                Some(e) => {
                    let _ = writeln!(out, "{n},{},{}", Num(e[n]), Num(*env));
                }
                None => {
                    let _ = writeln!(out, "{n},,{}", Num(*env));
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// `⌈απ / (2β√(M₁M₂))⌉`.
pub fn n_star(cfg: &DiscreteConfig, m1: f64, m2: f64) -> u64 {
    (cfg.alpha * PI / (2.0 * cfg.beta * (m1 * m2).sqrt())).ceil() as u64
}

/// `√2 (√(M₁/M₂) tan(π/2 − √(M₁M₂) β n / α))^{α/2} + ε` up to the knee,
/// `ε` after it, `+∞` at `n = 0`.
pub fn envelope(n: u64, cfg: &DiscreteConfig, m1: f64, m2: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    if n > n_star(cfg, m1, m2) {
        return cfg.epsilon;
    }
    let arg = FRAC_PI_2 - (m1 * m2).sqrt() / cfg.alpha * cfg.beta * n as f64;
    if arg <= 0.0 || arg >= FRAC_PI_2 {
        return cfg.epsilon;
    }
    let base = (m1 / m2).sqrt() * arg.tan();
    SQRT_2 * base.powf(cfg.alpha / 2.0) + cfg.epsilon
}

fn check_exponents(params: &DynamicsParams, cfg: &DiscreteConfig) -> Result<()> {
    let p1 = 1.0 - 2.0 / cfg.alpha;
    let p2 = 1.0 + 2.0 / cfg.alpha;
    let tol = 1e-12;
    if (params.p1 - p1).abs() > tol || (params.p2 - p2).abs() > tol {
        return Err(Error::invalid(
            "alpha",
            format!(
                "exponents (p1, p2) = ({}, {}) do not match alpha = {} (expected ({p1}, {p2}))",
                params.p1, params.p2, cfg.alpha
            ),
        ));
    }
    Ok(())
}

/// Runs the forward-Euler recursion until `‖Φ(z_n)‖ ≤ tol` or `max_iters`.
pub fn iterate(
    problem: &ProblemInstance,
    params: &DynamicsParams,
    z0: &Vector,
    cfg: &DiscreteConfig,
    z_star: Option<&Vector>,
) -> Result<IterateLog> {
    run(problem, params, z0, cfg, z_star, false)
}

fn run(
    problem: &ProblemInstance,
    params: &DynamicsParams,
    z0: &Vector,
    cfg: &DiscreteConfig,
    z_star: Option<&Vector>,
    stop_outside_envelope: bool,
) -> Result<IterateLog> {
    cfg.validate()?;
    params.validate()?;
    check_exponents(params, cfg)?;
    z0.ensure_dim(problem.dim())?;
    if let Some(zs) = z_star {
        zs.ensure_dim(problem.dim())?;
    }
    let bounds = settling_bounds(params, problem.contraction())?;
    let (m1, m2) = (bounds.m1, bounds.m2);

    let step_gain = cfg.beta * params.gain();
    let mut z = z0.clone();
    let mut residual_norms = Vec::new();
    let mut errors = z_star.map(|_| Vec::new());
    let mut envelope_values = Vec::new();
    let mut converged = false;
    let mut initial_measure = None;

    for n in 0..=cfg.max_iters {
        let phi = problem.residual(&z)?;
        let r = phi.norm();
        residual_norms.push(r);
        envelope_values.push(envelope(n as u64, cfg, m1, m2));
        let measure = match (&mut errors, z_star) {
            (Some(errs), Some(zs)) => {
                let e = z.distance(zs);
                errs.push(e);
                e
            }
            _ => r,
        };
        if stop_outside_envelope
            && z_star.is_some()
            && measure > *envelope_values.last().expect("pushed")
        {
            break;
        }
        let reference = *initial_measure.get_or_insert(measure);
        if reference > 0.0 && measure > DIVERGENCE_FACTOR * reference {
            return Err(Error::Divergence { n, err: measure });
        }
        if r <= cfg.tol {
            converged = true;
            break;
        }
        if n == cfg.max_iters {
            break;
        }
        if is_zero_residual(r, z.norm()) {
            // Inside the equilibrium band the weight is zero and the iterate stays put.
            converged = true;
            break;
        }
        let scale = step_gain * omega(params, r);
        z = Vector::checked(z.as_dvector() - phi.as_dvector() * scale, "iterate").map_err(
            |_| Error::Divergence {
                n: n + 1,
                err: f64::INFINITY,
            },
        )?;
    }

    Ok(IterateLog {
        beta: cfg.beta,
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        residual_norms,
        errors,
        envelope: envelope_values,
        n_star: n_star(cfg, m1, m2),
        m1,
        m2,
        converged,
        final_state: z,
    })
}

/// Largest step in `{β₀/2ᵏ : k = 0..=max_halvings}` whose run converges,
/// and, when `z_star` is given, stays inside the envelope. A trial is cut
/// short at its first error outside the envelope.
pub fn auto_step(
    problem: &ProblemInstance,
    params: &DynamicsParams,
    z0: &Vector,
    cfg: &DiscreteConfig,
    z_star: Option<&Vector>,
    max_halvings: u32,
) -> Result<IterateLog> {
    let mut last_err = None;
    for k in 0..=max_halvings {
        let trial = DiscreteConfig {
            beta: cfg.beta / 2f64.powi(k as i32),
            ..*cfg
        };
        match run(problem, params, z0, &trial, z_star, true) {
            Ok(log) if log.converged && log.within_envelope().unwrap_or(true) => return Ok(log),
            Ok(_) => {}
            Err(e @ Error::Divergence { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::invalid(
            "beta",
            format!("no step in {max_halvings} halvings satisfied the envelope"),
        )
    }))
}

/// All Picard iterates `z_{k+1} = B(z_k)` up to the a-posteriori stop
/// `‖z_{k+1} − z_k‖ ≤ tol (1 − c)/c`, which guarantees `‖z_k − z*‖ ≤ tol`.
pub fn picard_iterates(
    problem: &ProblemInstance,
    z0: &Vector,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<Vector>> {
    z0.ensure_dim(problem.dim())?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let c = problem.contraction();
    let threshold = if c == 0.0 {
        f64::INFINITY
    } else {
        tol * (1.0 - c) / c
    };
    let mut iterates = vec![z0.clone()];
    let mut last_step = f64::INFINITY;
    for _ in 0..max_iters {
        let z = iterates.last().expect("non-empty");
        let next = problem.forward_backward(z)?;
        last_step = next.distance(z);
        iterates.push(next);
        if last_step <= threshold {
            return Ok(iterates);
        }
    }
    Err(Error::MaxIterations {
        iterations: max_iters,
        residual: last_step,
    })
}

/// The `z*` oracle: Picard iteration on `B` to accuracy `tol`.
pub fn picard_reference(
    problem: &ProblemInstance,
    z0: &Vector,
    tol: f64,
    max_iters: usize,
) -> Result<Vector> {
    let mut it = picard_iterates(problem, z0, tol, max_iters)?;
    Ok(it.pop().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{ForwardOp, ResolventOp};
    use nalgebra::DMatrix;

    fn params(c: f64) -> DynamicsParams {
        DynamicsParams::predefined_time(20.0, 200.0, 5.0, 0.99, 1.01, 5.0, c).unwrap()
    }

    #[test]
    fn envelope_shape() {
        let cfg = DiscreteConfig {
            beta: 0.01,
            alpha: 4.0,
            ..DiscreteConfig::default()
        };
        let (m1, m2) = (2.0, 3.0);
        let ns = n_star(&cfg, m1, m2);
        assert_eq!(ns, (4.0 * PI / (2.0 * 0.01 * 6f64.sqrt())).ceil() as u64);
        assert_eq!(envelope(0, &cfg, m1, m2), f64::INFINITY);
        assert_eq!(envelope(ns, &cfg, m1, m2), cfg.epsilon);
        assert_eq!(envelope(ns + 10, &cfg, m1, m2), cfg.epsilon);
        let mid = envelope(ns / 2, &cfg, m1, m2);
        assert!(mid.is_finite() && mid > cfg.epsilon);
        let mut last = f64::INFINITY;
        for n in 1..ns {
            let e = envelope(n, &cfg, m1, m2);
            assert!(e <= last, "not decreasing at n = {n}");
            last = e;
        }
    }

    #[test]
    fn equilibrium_start_terminates_at_zero() {
        let p = ProblemInstance::new(ResolventOp::identity(), ForwardOp::zero(2), 1.0).unwrap();
        let params = params(p.contraction());
        let cfg = DiscreteConfig::default().with_alpha_of(&params);
        let log = iterate(
            &p,
            &params,
            &Vector::zeros(2),
            &cfg,
            Some(&Vector::zeros(2)),
        )
        .unwrap();
        assert_eq!(log.iterations(), 0);
        assert!(log.converged);
    }

    #[test]
    fn exponents_must_match_alpha() {
        let p = ProblemInstance::new(ResolventOp::identity(), ForwardOp::zero(1), 1.0).unwrap();
        let params = params(p.contraction());
        let cfg = DiscreteConfig {
            alpha: 4.0,
            ..DiscreteConfig::default()
        };
        assert!(iterate(&p, &params, &Vector::zeros(1), &cfg, None).is_err());
    }

    #[test]
    fn large_step_diverges() {
        let p = ProblemInstance::new(ResolventOp::identity(), ForwardOp::zero(1), 1.0).unwrap();
        let params = params(p.contraction());
        let cfg = DiscreteConfig {
            beta: 10.0,
            ..DiscreteConfig::default().with_alpha_of(&params)
        };
        let z0 = Vector::new(vec![1.0]).unwrap();
        assert!(matches!(
            iterate(&p, &params, &z0, &cfg, None),
            Err(Error::Divergence { .. })
        ));
        let log = auto_step(&p, &params, &z0, &cfg, Some(&Vector::zeros(1)), 40).unwrap();
        assert!(log.beta < 10.0 && log.converged);
        assert_eq!(log.within_envelope(), Some(true));
    }

    #[test]
    fn picard_on_homogeneous_linear_instance() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.0, 2.0]));
        let p = ProblemInstance::with_default_gamma(
            ResolventOp::identity(),
            ForwardOp::linear(d).unwrap(),
        )
        .unwrap();
        let z0 = Vector::new(vec![1.0, -2.0, 3.0]).unwrap();
        let z = picard_reference(&p, &z0, 1e-10, 100_000).unwrap();
        assert!(z.norm() <= 1e-10);
        assert!(matches!(
            picard_reference(&p, &z0, 1e-10, 3),
            Err(Error::MaxIterations { iterations: 3, .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let p = ProblemInstance::new(ResolventOp::identity(), ForwardOp::zero(1), 1.0).unwrap();
        let params = params(p.contraction());
        let cfg = DiscreteConfig {
            beta: 1e-4,
            ..DiscreteConfig::default().with_alpha_of(&params)
        };
        let z0 = Vector::new(vec![1.0]).unwrap();
        let log = iterate(&p, &params, &z0, &cfg, Some(&Vector::zeros(1))).unwrap();
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,err,envelope"));
        assert_eq!(lines.next(), Some("0,1,inf"));
        assert_eq!(csv.lines().count(), log.iterations() + 2);
        let log = iterate(&p, &params, &z0, &cfg, None).unwrap();
        assert!(log.to_csv().lines().nth(1).unwrap().starts_with("0,,"));
        assert_eq!(log.within_envelope(), None);
    }
}
