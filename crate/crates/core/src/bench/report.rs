//! Solver runs on a built [`Experiment`] and their reports.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::bench::config::{DynamicsSpec, Experiment, ExperimentConfig};
use crate::discrete::{auto_step, DiscreteConfig, IterateLog};
use crate::dynamics::settling_bounds;
use crate::error::{Error, Result};
use crate::fmt::Num;
use crate::integrate::{integrate, IntegratorConfig, Method, Trajectory};
use crate::parallel::{self, Execution};
use crate::problem::AssumptionVerdict;

/// Step halvings tried by the discrete scheme before giving up.
pub const MAX_HALVINGS: u32 = 40;

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub solver: String,
    /// Settling time; `n·β` for the discrete scheme.
    pub settled_at: Option<f64>,
    /// Accepted steps or iterations.
    pub iterations: usize,
    pub final_residual: f64,
    pub t_p: f64,
    pub bound_statement: Option<f64>,
    pub bound_polyakov: Option<f64>,
    pub k_p: f64,
    pub c: f64,
    pub verdict: AssumptionVerdict,
    /// Seconds.
    pub wall_time: f64,
    /// Settled, and before `T_p` when the parameters are predefined-time.
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SolveReport {
    fn skeleton(exp: &Experiment, solver: &str) -> Self {
        let bounds = settling_bounds(&exp.params, exp.problem.contraction()).ok();
        SolveReport {
            solver: solver.to_string(),
            settled_at: None,
            iterations: 0,
            final_residual: f64::NAN,
            t_p: exp.params.t_p,
            bound_statement: bounds.and_then(|b| b.bound_statement),
            bound_polyakov: bounds.and_then(|b| b.bound_polyakov),
            k_p: exp.params.k_p,
            c: exp.problem.contraction(),
            verdict: exp.problem.verdict(),
            wall_time: 0.0,
            success: false,
            step: None,
            error: None,
        }
    }

    fn judge(&mut self, predefined_time: bool) {
        self.success = match self.settled_at {
            Some(t) => !predefined_time || t <= self.t_p,
            None => false,
        };
    }

    pub const CSV_HEADER: &'static str =
        "solver,settled_at,iterations,final_residual,t_p,bound_statement,bound_polyakov,k_p,c,verdict,wall_time,success,step,error";

    pub fn csv_row(&self) -> String {
        fn opt(x: Option<f64>) -> String {
            x.map(|v| Num(v).to_string()).unwrap_or_default()
        }
        let verdict = match self.verdict {
            AssumptionVerdict::Holds => "holds".to_string(),
            AssumptionVerdict::Fails(v) => format!("\"{v}\""),
        };
        let error = self
            .error
            .as_ref()
            .map(|e| format!("\"{}\"", e.replace('"', "'")))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            opt(self.settled_at),
            self.iterations,
            Num(self.final_residual),
            Num(self.t_p),
            opt(self.bound_statement),
            opt(self.bound_polyakov),
            Num(self.k_p),
            Num(self.c),
            verdict,
            Num(self.wall_time),
            self.success,
            opt(self.step),
            error
        )
    }
}

pub fn reports_csv(reports: &[SolveReport]) -> String {
    let mut out = String::from(SolveReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Euler => "euler",
        Method::Rk4 => "rk4",
        Method::Rk45 => "rk45",
    }
}

/// Continuous and discrete runs on one experiment. Solver failures are kept
/// in the reports; a partially integrated trajectory is kept too.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub experiment: Experiment,
    pub continuous: SolveReport,
    pub trajectory: Option<Trajectory>,
    pub discrete: SolveReport,
    pub iterates: Option<IterateLog>,
}

impl SolveOutcome {
    pub fn reports(&self) -> [&SolveReport; 2] {
        [&self.continuous, &self.discrete]
    }

    pub fn trajectory_csv(&self) -> Option<String> {
        self.trajectory
            .as_ref()
            .map(|t| t.to_csv(self.experiment.z_star.as_ref()))
    }

    pub fn iterates_csv(&self) -> Option<String> {
        self.iterates.as_ref().map(IterateLog::to_csv)
    }
}

pub fn run_continuous(exp: &Experiment) -> (SolveReport, Option<Trajectory>) {
    let mut report = SolveReport::skeleton(exp, method_name(exp.integrator.method));
    let start = Instant::now();
    let result = integrate(&exp.problem, &exp.params, &exp.z0, &exp.integrator);
    report.wall_time = start.elapsed().as_secs_f64();
    let traj = match result {
        Ok(t) => Some(t),
        Err(Error::StepUnderflow { partial, .. }) => {
            report.error = Some("step size underflow".to_string());
            Some(*partial)
        }
        Err(e) => {
            report.error = Some(e.to_string());
            None
        }
    };
    if let Some(t) = &traj {
        report.settled_at = t.settled_at;
        report.iterations = t.len().saturating_sub(1);
        report.final_residual = t.residual_norms.last().copied().unwrap_or(f64::NAN);
    }
    report.judge(exp.params.is_predefined_time());
    (report, traj)
}

pub fn run_discrete(exp: &Experiment) -> (SolveReport, Option<IterateLog>) {
    let mut report = SolveReport::skeleton(exp, "discrete");
    let start = Instant::now();
    let result = auto_step(
        &exp.problem,
        &exp.params,
        &exp.z0,
        &exp.discrete,
        exp.z_star.as_ref(),
        MAX_HALVINGS,
    );
    report.wall_time = start.elapsed().as_secs_f64();
    let log = match result {
        Ok(log) => Some(log),
        Err(e) => {
            report.error = Some(e.to_string());
            None
        }
    };
    if let Some(log) = &log {
        let n = log.iterations();
        report.iterations = n;
        report.step = Some(log.beta);
        report.final_residual = log.residual_norms.last().copied().unwrap_or(f64::NAN);
        report.settled_at = log.converged.then_some(n as f64 * log.beta);
    }
    report.judge(exp.params.is_predefined_time());
    (report, log)
}

pub fn run_experiment(exp: Experiment) -> SolveOutcome {
    let (continuous, trajectory) = run_continuous(&exp);
    let (discrete, iterates) = run_discrete(&exp);
    SolveOutcome {
        experiment: exp,
        continuous,
        trajectory,
        discrete,
        iterates,
    }
}

/// One solve per repetition of `cfg` (consecutive seeds), in order.
pub fn run_repetitions(cfg: &ExperimentConfig, exec: Execution) -> Vec<Result<SolveOutcome>> {
    let reps: Vec<usize> = (0..cfg.repetitions.max(1)).collect();
    parallel::map(&reps, exec, |&rep| {
        cfg.build_repetition(rep).map(run_experiment)
    })
}

#[derive(Clone, Debug, Default)]
pub struct Example1Overrides {
    pub dynamics: Option<DynamicsSpec>,
    pub integrator: Option<IntegratorConfig>,
    pub discrete: Option<DiscreteConfig>,
    pub gamma: Option<f64>,
}

impl Example1Overrides {
    pub fn config(&self, seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::example1(seed);
        if let Some(d) = self.dynamics {
            cfg.dynamics = d;
        }
        cfg.integrator = self.integrator;
        cfg.discrete = self.discrete;
        cfg.problem.gamma = self.gamma;
        cfg
    }
}

/// Example 1 (`F = Id`, `G = MᵀM`, `M` 10×8 standard normal) with the
/// continuous flow and the discrete scheme started from `β = 0.005`.
pub fn run_example1(seed: u64, overrides: &Example1Overrides) -> Result<SolveOutcome> {
    Ok(run_experiment(overrides.config(seed).build()?))
}
