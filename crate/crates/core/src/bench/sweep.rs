//! `(b₃, p₃)` sweeps at a fixed gain, aligned on a shared time grid.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bench::config::Experiment;
use crate::error::{Error, Result};
use crate::fmt::Num;
use crate::integrate::{integrate, Trajectory};
use crate::parallel::{self, Execution};

pub const DEFAULT_GRID: &str = "0:0,5:0,5:1";
pub const DEFAULT_THRESHOLD: f64 = 1e-6;
pub const GRID_POINTS: usize = 401;

/// Parses `"b3:p3,b3:p3,..."`.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>> {
    let cells: Result<Vec<(f64, f64)>> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|cell| {
            let (b3, p3) = cell.split_once(':').ok_or_else(|| {
                Error::Config(format!("grid cell `{cell}` is not of the form b3:p3"))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("grid cell `{cell}` is not numeric")))
            };
            Ok((parse(b3)?, parse(p3)?))
        })
        .collect();
    let cells = cells?;
    if cells.is_empty() {
        return Err(Error::Config("empty sweep grid".into()));
    }
    Ok(cells)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub b3: f64,
    pub p3: f64,
    /// First time `‖z − z*‖²` reaches the sweep threshold.
    pub time_to_threshold: Option<f64>,
    pub settled_at: Option<f64>,
    pub steps: usize,
    /// `p₃ ≥ 1` with `b₃ > 0`.
    pub discontinuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepCell {
    pub fn label(&self) -> String {
        format!("b3={};p3={}", self.b3, self.p3)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub threshold: f64,
    pub k_p: f64,
    pub cells: Vec<SweepCell>,
    pub times: Vec<f64>,
    /// `‖z − z*‖²` per cell on `times`; `None` past a cell's last sample.
    pub columns: Vec<Vec<Option<f64>>>,
}

impl SweepReport {
    /// CSV `t,<cell>,<cell>,...` with empty entries past a cell's horizon.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.cells {
            let _ = write!(out, ",{}", c.label());
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{}", Num(*t));
            for col in &self.columns {
                match col.get(k).copied().flatten() {
                    Some(v) => {
                        let _ = write!(out, ",{}", Num(v));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Time to threshold per cell, in grid order.
    pub fn times_to_threshold(&self) -> Vec<Option<f64>> {
        self.cells.iter().map(|c| c.time_to_threshold).collect()
    }
}

/// Value at `t` by linear interpolation of `ln v` (linear in `v` when a
/// bracketing value is zero); `None` outside `[times₀, times_last]`.
pub fn interpolate_log(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let (&first, &last) = (times.first()?, times.last()?);
    if t < first || t > last {
        return None;
    }
    let k = times.partition_point(|&s| s < t);
    if k < times.len() && times[k] == t {
        return Some(values[k]);
    }
    let (t0, t1, v0, v1) = (times[k - 1], times[k], values[k - 1], values[k]);
    let w = (t - t0) / (t1 - t0);
    if v0 > 0.0 && v1 > 0.0 {
        Some((v0.ln() + w * (v1.ln() - v0.ln())).exp())
    } else {
        Some(v0 + w * (v1 - v0))
    }
}

/// Sample times and `‖z − z*‖²` of one cell.
type Curve = (Vec<f64>, Vec<f64>);

fn run_cell(exp: &Experiment, b3: f64, p3: f64, threshold: f64) -> (SweepCell, Option<Curve>) {
    let mut cell = SweepCell {
        b3,
        p3,
        time_to_threshold: None,
        settled_at: None,
        steps: 0,
        discontinuous: false,
        error: None,
    };
    let mut params = exp.params;
    params.b3 = b3;
    params.p3 = p3;
    if let Err(e) = params.validate() {
        cell.error = Some(e.to_string());
        return (cell, None);
    }
    cell.discontinuous = params.discontinuous_at_equilibrium();
    let z_star = exp.z_star.as_ref().expect("checked by caller");
    let traj: Option<Trajectory> = match integrate(&exp.problem, &params, &exp.z0, &exp.integrator)
    {
        Ok(t) => Some(t),
        Err(Error::StepUnderflow { partial, t, .. }) => {
            cell.error = Some(format!("step size underflow at t = {t:e}"));
            Some(*partial)
        }
        Err(e) => {
            cell.error = Some(e.to_string());
            None
        }
    };
    let Some(traj) = traj else {
        return (cell, None);
    };
    cell.settled_at = traj.settled_at;
    cell.steps = traj.len().saturating_sub(1);
    cell.time_to_threshold = traj.time_to_err_sq(z_star, threshold);
    let err = traj.err_sq(z_star);
    (cell, Some((traj.times, err)))
}

/// Integrates one trajectory per `(b₃, p₃)` with the gain `K_p` of `base`
/// held fixed. Per-cell failures are recorded in the cell.
pub fn run_sweep_b3p3(
    base: &Experiment,
    grid: &[(f64, f64)],
    threshold: f64,
    exec: Execution,
) -> Result<SweepReport> {
    if base.z_star.is_none() {
        return Err(Error::Config("a sweep needs a reference solution".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold", "must be > 0"));
    }
    let results = parallel::map(grid, exec, |&(b3, p3)| run_cell(base, b3, p3, threshold));

    let horizon = results
        .iter()
        .filter_map(|(_, curve)| curve.as_ref().and_then(|(t, _)| t.last().copied()))
        .fold(0.0, f64::max);
    let times: Vec<f64> = if horizon > 0.0 {
        (0..GRID_POINTS)
            .map(|k| horizon * k as f64 / (GRID_POINTS - 1) as f64)
            .collect()
    } else {
        vec![0.0]
    };
    let mut cells = Vec::with_capacity(results.len());
    let mut columns = Vec::with_capacity(results.len());
    for (cell, curve) in results {
        let col = match &curve {
            Some((t, e)) => times.iter().map(|&s| interpolate_log(t, e, s)).collect(),
            None => vec![None; times.len()],
        };
        cells.push(cell);
        columns.push(col);
    }
    Ok(SweepReport {
        threshold,
        k_p: base.params.k_p,
        cells,
        times,
        columns,
    })
}
