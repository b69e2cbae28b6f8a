//! `fbdyn` command line. Exit status: 0 on success, 1 on a solver error,
//! 2 on a configuration error (including a violated assumption).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::config::{DynamicsSpec, ExperimentConfig, Format};
use crate::bench::report::{reports_csv, run_repetitions, SolveOutcome, SolveReport, MAX_HALVINGS};
use crate::bench::sweep::{parse_grid, run_sweep_b3p3, DEFAULT_GRID, DEFAULT_THRESHOLD};
use crate::discrete::{auto_step, iterate, DiscreteConfig};
use crate::error::Error;
use crate::operators::{spot_check_forward, spot_check_resolvent};
use crate::parallel::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "fbdyn",
    version,
    about = "Predefined-time forward-backward splitting dynamics"
)]
struct Cli {
    /// Output format for reports and tables.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// RNG seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV/JSON output instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress warnings and progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Run repetitions and sweep cells on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config.
    Solve { config: PathBuf },
    /// Example 1: F = Id, G = MᵀM with a seeded 10×8 Gaussian M.
    Example1 {
        #[arg(long)]
        b3: Option<f64>,
        #[arg(long)]
        p3: Option<f64>,
        #[arg(long)]
        t_p: Option<f64>,
    },
    /// Error decay for several (b3, p3) at a fixed gain.
    Sweep {
        /// Base config; Example 1 when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated `b3:p3` cells.
        #[arg(long, default_value = DEFAULT_GRID)]
        grid: String,
        /// Squared-error level for the time-to-threshold column.
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Check the standing assumption and spot-check the operator constants.
    Check {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Radius of the sampled points.
        #[arg(long, default_value_t = 10.0)]
        scale: f64,
    },
    /// Discrete iterates against their error envelope.
    Envelope {
        /// Base config; Example 1 when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Fixed step; halved from the config's step until the envelope holds when absent.
        #[arg(long)]
        beta: Option<f64>,
    },
}

/// Exit status for an error: configuration problems map to 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Assumption(_)
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

struct Ctx {
    format: Format,
    out: Option<PathBuf>,
    quiet: bool,
    exec: Execution,
}

impl Ctx {
    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn info(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    /// Writes `name` under the output directory, or prints it when there is none.
    fn emit(&self, name: &str, contents: &str) -> Result<(), Error> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), contents)?;
                Ok(())
            }
            None => {
                print!("{contents}");
                Ok(())
            }
        }
    }

    /// Like [`Ctx::emit`] but only written to the output directory.
    fn emit_file(&self, name: &str, contents: &str) -> Result<(), Error> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::example1(DEFAULT_SEED),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn ctx_for(cli: &Cli, cfg: Option<&ExperimentConfig>) -> Ctx {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    Ctx {
        format: cli
            .format
            .or(cfg.map(|c| c.output.format))
            .unwrap_or_default(),
        out: cli
            .out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.dir.clone())),
        quiet: cli.quiet,
        exec,
    }
}

fn warn_dynamics(ctx: &Ctx, d: &DynamicsSpec) {
    if d.b3 > 0.0 && d.p3 >= 1.0 {
        ctx.warn(&format!(
            "p3 = {} >= 1: the vector field is discontinuous at the equilibrium",
            d.p3
        ));
    }
}

fn emit_outcomes(ctx: &Ctx, outcomes: &[SolveOutcome]) -> Result<(), Error> {
    let single = outcomes.len() == 1;
    for (rep, o) in outcomes.iter().enumerate() {
        let suffix = if single {
            String::new()
        } else {
            format!("_{rep}")
        };
        if let Some(csv) = o.trajectory_csv() {
            ctx.emit_file(&format!("trajectory{suffix}.csv"), &csv)?;
        }
        if let Some(csv) = o.iterates_csv() {
            ctx.emit_file(&format!("iterates{suffix}.csv"), &csv)?;
        }
    }
    let reports: Vec<SolveReport> = outcomes
        .iter()
        .flat_map(|o| o.reports().into_iter().cloned())
        .collect();
    match ctx.format {
        Format::Csv => ctx.emit("report.csv", &reports_csv(&reports)),
        Format::Json => ctx.emit("report.json", &to_json(&reports)),
    }
}

fn solve(ctx: &Ctx, cfg: &ExperimentConfig) -> Result<i32, Error> {
    warn_dynamics(ctx, &cfg.dynamics);
    let results = run_repetitions(cfg, ctx.exec);
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r?);
    }
    emit_outcomes(ctx, &outcomes)?;
    let failed = outcomes
        .iter()
        .flat_map(|o| o.reports())
        .filter(|r| r.error.is_some())
        .count();
    for o in &outcomes {
        for r in o.reports() {
            if let Some(e) = &r.error {
                ctx.warn(&format!("{}: {e}", r.solver));
            }
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_SOLVER })
}

fn sweep(ctx: &Ctx, cfg: &ExperimentConfig, grid: &str, threshold: f64) -> Result<i32, Error> {
    let grid = parse_grid(grid)?;
    let exp = cfg.build()?;
    for &(b3, p3) in &grid {
        if b3 > 0.0 && p3 >= 1.0 {
            ctx.warn(&format!(
                "cell b3={b3};p3={p3}: the vector field is discontinuous at the equilibrium"
            ));
        }
    }
    let report = run_sweep_b3p3(&exp, &grid, threshold, ctx.exec)?;
    for c in &report.cells {
        if let Some(e) = &c.error {
            ctx.warn(&format!("cell {}: {e}", c.label()));
        }
        let t = c
            .time_to_threshold
            .map_or_else(|| "not reached".to_string(), |t| format!("{t:e}"));
        ctx.info(&format!(
            "{}: time to err^2 <= {threshold:e}: {t}",
            c.label()
        ));
    }
    match ctx.format {
        Format::Csv => ctx.emit("sweep.csv", &report.to_csv())?,
        Format::Json => ctx.emit("sweep.json", &to_json(&report))?,
    }
    let all_failed = report
        .cells
        .iter()
        .all(|c| c.time_to_threshold.is_none() && c.error.is_some());
    Ok(if all_failed { EXIT_SOLVER } else { EXIT_OK })
}

#[derive(Serialize)]
struct CheckReport {
    gamma: f64,
    eta_f: f64,
    eta_g: f64,
    lipschitz: f64,
    contraction: f64,
    verdict: crate::problem::AssumptionVerdict,
    forward: crate::operators::ForwardCertificateCheck,
    resolvent: crate::operators::ResolventCertificateCheck,
}

fn check(ctx: &Ctx, cfg: &ExperimentConfig, samples: usize, scale: f64) -> Result<i32, Error> {
    let problem = match cfg.build_problem() {
        Ok(p) => p,
        Err(Error::Assumption(v)) => {
            eprintln!("assumption violated: {v}");
            return Ok(EXIT_CONFIG);
        }
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(DEFAULT_SEED));
    let forward = spot_check_forward(problem.forward(), samples, scale, &mut rng)?;
    let resolvent = spot_check_resolvent(
        problem.resolvent(),
        problem.gamma(),
        problem.dim(),
        samples,
        scale,
        &mut rng,
    )?;
    let report = CheckReport {
        gamma: problem.gamma(),
        eta_f: problem.eta_f(),
        eta_g: problem.eta_g(),
        lipschitz: problem.lipschitz(),
        contraction: problem.contraction(),
        verdict: problem.verdict(),
        forward,
        resolvent,
    };
    let text = match ctx.format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "gamma,eta_f,eta_g,lipschitz,contraction,verdict,eta_ok,lipschitz_ok,cocoercive_ok\n{},{},{},{},{},holds,{},{},{}\n",
            report.gamma,
            report.eta_f,
            report.eta_g,
            report.lipschitz,
            report.contraction,
            forward.eta_ok,
            forward.lipschitz_ok,
            resolvent.cocoercive_ok
        ),
    };
    ctx.emit(
        match ctx.format {
            Format::Json => "check.json",
            Format::Csv => "check.csv",
        },
        &text,
    )?;
    let certified = forward.eta_ok && forward.lipschitz_ok && resolvent.cocoercive_ok;
    if !certified {
        eprintln!("operator constants are contradicted by sampled pairs");
        return Ok(EXIT_CONFIG);
    }
    Ok(EXIT_OK)
}

fn envelope(ctx: &Ctx, cfg: &ExperimentConfig, beta: Option<f64>) -> Result<i32, Error> {
    let exp = cfg.build()?;
    let log = match beta {
        Some(beta) => {
            let dc = DiscreteConfig {
                beta,
                ..exp.discrete
            };
            iterate(&exp.problem, &exp.params, &exp.z0, &dc, exp.z_star.as_ref())?
        }
        None => auto_step(
            &exp.problem,
            &exp.params,
            &exp.z0,
            &exp.discrete,
            exp.z_star.as_ref(),
            MAX_HALVINGS,
        )?,
    };
    ctx.info(&format!(
        "beta = {}, n* = {}, iterations = {}, within envelope: {:?}",
        crate::fmt::Num(log.beta),
        log.n_star,
        log.iterations(),
        log.within_envelope()
    ));
    match ctx.format {
        Format::Csv => ctx.emit("envelope.csv", &log.to_csv())?,
        Format::Json => ctx.emit("envelope.json", &to_json(&log))?,
    }
    Ok(if log.converged { EXIT_OK } else { EXIT_SOLVER })
}

fn dispatch(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Solve { config } => {
            let cfg = load_config(Some(config), cli.seed)?;
            solve(&ctx_for(cli, Some(&cfg)), &cfg)
        }
        Command::Example1 { b3, p3, t_p } => {
            let mut cfg = ExperimentConfig::example1(cli.seed.unwrap_or(DEFAULT_SEED));
            if let Some(b3) = b3 {
                cfg.dynamics.b3 = *b3;
            }
            if let Some(p3) = p3 {
                cfg.dynamics.p3 = *p3;
            }
            if let Some(t_p) = t_p {
                cfg.dynamics.t_p = *t_p;
            }
            solve(&ctx_for(cli, None), &cfg)
        }
        Command::Sweep {
            config,
            grid,
            threshold,
        } => {
            let cfg = load_config(config.as_deref(), cli.seed)?;
            sweep(&ctx_for(cli, Some(&cfg)), &cfg, grid, *threshold)
        }
        Command::Check {
            config,
            samples,
            scale,
        } => {
            let cfg = load_config(Some(config), cli.seed)?;
            check(&ctx_for(cli, Some(&cfg)), &cfg, *samples, *scale)
        }
        Command::Envelope { config, beta } => {
            let cfg = load_config(config.as_deref(), cli.seed)?;
            envelope(&ctx_for(cli, Some(&cfg)), &cfg, *beta)
        }
    }
}

/// Runs the command line given by `args` (including the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
