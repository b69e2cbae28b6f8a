//! Explicit integrators for the weighted residual flow, terminating once
//! `‖Φ(z)‖` drops to the configured residual.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{field_with_residual, DynamicsParams};
use crate::error::{Error, Result};
use crate::fmt::Num;
use crate::problem::ProblemInstance;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step, or the initial step for `rk45`.
    pub dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Stop once `‖Φ(z)‖` is at or below this value.
    pub stop_residual: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::for_horizon(5.0)
    }
}

impl IntegratorConfig {
    /// Adaptive 5(4) pair over `[0, t_p]` with `dt_max = t_p/100`.
    pub fn for_horizon(t_p: f64) -> Self {
        let dt_max = t_p / 100.0;
        IntegratorConfig {
            method: Method::Rk45,
            dt: dt_max.min(1e-4),
            rtol: 1e-8,
            atol: 1e-10,
            dt_min: 1e-14,
            dt_max,
            t_end: t_p,
            stop_residual: 1e-10,
        }
    }

    pub fn fixed(method: Method, dt: f64, t_end: f64, stop_residual: f64) -> Self {
        IntegratorConfig {
            method,
            dt,
            rtol: 1e-8,
            atol: 1e-10,
            dt_min: dt * 1e-12,
            dt_max: dt,
            t_end,
            stop_residual,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("t_end", self.t_end),
            ("stop_residual", self.stop_residual),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        if !(self.dt_min <= self.dt && self.dt <= self.dt_max) {
            return Err(Error::invalid("dt", "need dt_min <= dt <= dt_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub residual_norms: Vec<f64>,
    /// First accepted time with `‖Φ‖ ≤ stop_residual`.
    pub settled_at: Option<f64>,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&Vector> {
        self.states.last()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, t: f64, z: &DVector<f64>, r: f64) {
        self.times.push(t);
        self.states.push(Vector::from_raw(z.clone()));
        self.residual_norms.push(r);
    }

    /// `‖z(t) − z*‖²` at every stored time.
    pub fn err_sq(&self, z_star: &Vector) -> Vec<f64> {
        self.states
            .iter()
            .map(|z| (z.as_dvector() - z_star.as_dvector()).norm_squared())
            .collect()
    }

    /// First time `‖z − z*‖²` reaches `threshold`, interpolating linearly in
    /// `log err²` between the bracketing steps.
    pub fn time_to_err_sq(&self, z_star: &Vector, threshold: f64) -> Option<f64> {
        let e = self.err_sq(z_star);
        first_crossing(&self.times, &e, threshold)
    }

    /// CSV with header `t,residual_norm,err_sq,x_0..x_{n-1}`; the `err_sq`
    /// column is empty without `z_star`.
    pub fn to_csv(&self, z_star: Option<&Vector>) -> String {
        let n = self.states.first().map_or(0, |z| z.dim());
        let mut out = String::from("t,residual_norm,err_sq");
        for i in 0..n {
            let _ = write!(out, ",x_{i}");
        }
        out.push('\n');
        let errs = z_star.map(|zs| self.err_sq(zs));
        for (k, (t, z)) in self.times.iter().zip(&self.states).enumerate() {
            let _ = write!(out, "{},{}", Num(*t), Num(self.residual_norms[k]));
            match &errs {
                Some(e) => {
                    let _ = write!(out, ",{}", Num(e[k]));
                }
                None => out.push(','),
            }
            for x in z.iter() {
                let _ = write!(out, ",{}", Num(*x));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, z_star: Option<&Vector>) -> io::Result<()> {
        std::fs::write(path, self.to_csv(z_star))
    }
}

pub(crate) fn first_crossing(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let k = values.iter().position(|&e| e <= threshold)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (e0, e1) = (values[k - 1], values[k]);
    let (t0, t1) = (times[k - 1], times[k]);
    if e1 <= 0.0 || e0 <= 0.0 {
        return Some(t1);
    }
    let (l0, l1, lt) = (e0.ln(), e1.ln(), threshold.ln());
    if l0 == l1 {
        return Some(t1);
    }
    Some(t0 + (t1 - t0) * (l0 - lt) / (l0 - l1))
}

/// Rejects a step that grows `‖Φ‖` by more than this factor.
const OVERSHOOT_FACTOR: f64 = 10.0;

/// The 5(4) error estimate must also stay below this fraction of the step's
/// own displacement. Near the equilibrium `rtol·‖z‖` exceeds the residual
/// being resolved, and without this bound the controller parks on the
/// stability boundary where stiff components neither grow nor decay.
const DISPLACEMENT_TOL: f64 = 0.1;

// Dormand–Prince 5(4)
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper<'a> {
    problem: &'a ProblemInstance,
    params: &'a DynamicsParams,
}

impl Stepper<'_> {
    fn f(&self, z: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        field_with_residual(self.problem, self.params, z)
    }

    fn field(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.f(z)?.0)
    }

    fn euler(&self, z: &DVector<f64>, k1: &DVector<f64>, h: f64) -> DVector<f64> {
        z + k1 * h
    }

    fn rk4(&self, z: &DVector<f64>, k1: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
        let k2 = self.field(&(z + k1 * (h / 2.0)))?;
        let k3 = self.field(&(z + &k2 * (h / 2.0)))?;
        let k4 = self.field(&(z + &k3 * h))?;
        Ok(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
    }

    /// 5th-order state and the embedded error estimate.
    fn dopri(
        &self,
        z: &DVector<f64>,
        k1: &DVector<f64>,
        h: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let k2 = self.field(&(z + k1 * (h * A21)))?;
        let k3 = self.field(&(z + (k1 * A31 + &k2 * A32) * h))?;
        let k4 = self.field(&(z + (k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = self.field(&(z + (k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 =
            self.field(&(z + (k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h))?;
        let y = z + (k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h;
        let k7 = self.field(&y)?;
        let err = (k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        Ok((y, err))
    }
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `ż = −(K_p/T_p) ω(z) Φ(z)` from `z0` until `t_end` or until
/// `‖Φ(z)‖ ≤ stop_residual`.
pub fn integrate(
    problem: &ProblemInstance,
    params: &DynamicsParams,
    z0: &Vector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    z0.ensure_dim(problem.dim())?;

    let stepper = Stepper { problem, params };
    let mut traj = Trajectory::default();
    let mut z = z0.as_dvector().clone();
    let (mut k, mut r) = stepper.f(&z)?;
    let mut t = 0.0;
    traj.push(t, &z, r);
    if r <= cfg.stop_residual {
        traj.settled_at = Some(0.0);
        return Ok(traj);
    }

    let mut h = cfg.dt;
    while t < cfg.t_end {
        let remaining = cfg.t_end - t;
        // Avoid a sliver step from rounding at the end of the horizon.
        let h_try = if remaining <= h * (1.0 + 1e-12) {
            remaining
        } else {
            h
        };

        let proposal = match cfg.method {
            Method::Euler => {
                let y = stepper.euler(&z, &k, h_try);
                if all_finite(&y) {
                    Some((y, 0.0))
                } else {
                    None
                }
            }
            Method::Rk4 => {
                let y = stepper.rk4(&z, &k, h_try).ok().filter(all_finite);
                y.map(|y| (y, 0.0))
            }
            Method::Rk45 => match stepper.dopri(&z, &k, h_try) {
                Ok((y, e)) if all_finite(&y) => {
                    let e = e.norm();
                    let scale = cfg.atol + cfg.rtol * z.norm().max(y.norm());
                    let ratio = if e == 0.0 {
                        0.0
                    } else {
                        (e / scale).max(e / (DISPLACEMENT_TOL * (&y - &z).norm()))
                    };
                    Some((y, ratio))
                }
                _ => None,
            },
        };

        let (accepted, err_ratio) = match proposal {
            Some((y, err)) if err <= 1.0 => {
                let (k_new, r_new) = stepper.f(&y)?;
                if r_new > OVERSHOOT_FACTOR * r {
                    (None, err)
                } else {
                    (Some((y, k_new, r_new)), err)
                }
            }
            Some((_, err)) => (None, err),
            None => (None, f64::INFINITY),
        };

        match accepted {
            Some((y, k_new, r_new)) => {
                t = if h_try == remaining {
                    cfg.t_end
                } else {
                    t + h_try
                };
                z = y;
                k = k_new;
                r = r_new;
                traj.push(t, &z, r);
                if r <= cfg.stop_residual {
                    traj.settled_at = Some(t);
                    break;
                }
                h = match cfg.method {
                    Method::Rk45 => {
                        let factor = if err_ratio == 0.0 {
                            5.0
                        } else {
                            (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        (h_try * factor).clamp(cfg.dt_min, cfg.dt_max)
                    }
                    _ => cfg.dt,
                };
            }
            None => {
                traj.rejected_steps += 1;
                let shrink = if err_ratio.is_finite() && err_ratio > 1.0 {
                    (0.9 * err_ratio.powf(-0.2)).clamp(0.1, 0.5)
                } else {
                    0.5
                };
                h = h_try * shrink;
                if h < cfg.dt_min {
                    if err_ratio.is_infinite() {
                        return Err(Error::NonFinite {
                            context: "integrated state",
                        });
                    }
                    return Err(Error::StepUnderflow {
                        t,
                        dt: h,
                        partial: Box::new(traj),
                    });
                }
            }
        }
    }
    Ok(traj)
}
