//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};

use common::oracle::GAIN_POINTS;
use fbdyn::bench::report::run_continuous;
use fbdyn::bench::{run_sweep_b3p3, Experiment, ExperimentConfig};
use fbdyn::discrete::{auto_step, picard_iterates, picard_reference};
use fbdyn::dynamics::{gain_kp, DynamicsParams};
use fbdyn::instances::RandomInstance;
use fbdyn::integrate::{integrate, IntegratorConfig};
use fbdyn::operators::{project_box, prox_generic, prox_l1, ProxFunction};
use fbdyn::parallel::{self, Execution};
use fbdyn::problem::contraction_bound;
use fbdyn::{ProblemInstance, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::new(
        (0..n)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
    .unwrap()
}

fn example1(seed: u64) -> Experiment {
    ExperimentConfig::example1(seed).build().unwrap()
}

fn random_instances(count: usize, seed: u64) -> Vec<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| RandomInstance::sample(&mut rng, 2 + k % 7).unwrap())
        .collect()
}

fn example1_predefined_time() -> Outcome {
    let seeds: Vec<u64> = SEEDS.collect();
    let times = parallel::map(&seeds, Execution::Parallel, |&seed| {
        let exp = example1(seed);
        let (report, traj) = run_continuous(&exp);
        let traj = traj.expect("trajectory");
        let t = traj.time_to_err_sq(exp.z_star.as_ref().unwrap(), 1e-8);
        (t, report.k_p)
    });
    let ok = times
        .iter()
        .filter(|(t, _)| t.is_some_and(|t| t <= 5.0))
        .count();
    let worst = times.iter().filter_map(|(t, _)| *t).fold(0.0, f64::max);
    outcome(
        ok == seeds.len(),
        format!(
            "{ok}/{} seeds reach ||z||^2 <= 1e-8 by t = 5 (latest at t = {worst:.3e})",
            seeds.len()
        ),
    )
}

fn sweep_ordering() -> Outcome {
    let grid = [(0.0, 0.0), (5.0, 0.0), (5.0, 1.0), (5.0, 0.5), (5.0, 1.2)];
    let seeds: Vec<u64> = SEEDS.collect();
    let verdicts = parallel::map(&seeds, Execution::Parallel, |&seed| {
        let rep = run_sweep_b3p3(&example1(seed), &grid, 1e-6, Execution::Sequential).unwrap();
        let t: Vec<f64> = rep
            .times_to_threshold()
            .iter()
            .map(|t| t.unwrap_or(f64::INFINITY))
            .collect();
        let b3_order = t[2] < t[1] && t[1] < t[0];
        let p3_order = t[3] > t[2] && t[2] > t[4];
        (b3_order, p3_order)
    });
    let b3 = verdicts.iter().filter(|v| v.0).count();
    let p3 = verdicts.iter().filter(|v| v.1).count();
    let both = verdicts.iter().filter(|v| v.0 && v.1).count();
    outcome(
        both >= 8,
        format!("orderings hold in {both}/10 seeds ((5,1)<(5,0)<(0,0): {b3}/10, p3 in 0.5,1,1.2: {p3}/10)"),
    )
}

fn contraction_suite() -> Outcome {
    let instances = random_instances(50, 31);
    let results = parallel::map(&instances, Execution::Parallel, |inst| {
        let p = &inst.problem;
        let n = p.dim();
        let c = p.contraction();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 7919 + (c * 1e9) as u64);
        let mut worst_excess = f64::NEG_INFINITY;
        for _ in 0..100 {
            let (x, y) = (gaussian(&mut rng, n, 5.0), gaussian(&mut rng, n, 5.0));
            let q = p
                .forward_backward(&x)
                .unwrap()
                .distance(&p.forward_backward(&y).unwrap())
                / x.distance(&y);
            worst_excess = worst_excess.max(q - c);
        }
        let zs = picard_reference(p, &inst.z0, 1e-10, 100_000_000).unwrap();
        let mut sandwich = true;
        for _ in 0..100 {
            let z = gaussian(&mut rng, n, 5.0);
            let d = z.distance(&zs);
            let r = p.residual(&z).unwrap().norm();
            sandwich &= (1.0 - c) * d <= r + 1e-9 && r <= (1.0 + c) * d + 1e-9;
        }
        (worst_excess, sandwich)
    });
    let worst = results
        .iter()
        .map(|r| r.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let sandwich = results.iter().filter(|r| r.1).count();
    outcome(
        worst <= 1e-9 && sandwich == 50,
        format!("max(quotient - c) = {worst:.3e} over 5000 pairs; residual sandwich holds on {sandwich}/50 instances"),
    )
}

fn algebraic_gate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut below = 0;
    let total = 10_000;
    for _ in 0..total {
        let (eta_f, l, gamma) = loop {
            let eta_f: f64 = rng.random_range(-5.0..5.0);
            let gamma: f64 = rng.random_range(1e-3..5.0);
            if 1.0 + gamma * eta_f > 0.0 {
                break (eta_f, rng.random_range(0.0..10.0), gamma);
            }
        };
        let eta_g: f64 = l * rng.random_range(-1.0..1.0);
        let clause2 = 2.0 * (eta_f + eta_g) + gamma * eta_f * eta_f - gamma * l * l;
        let c = contraction_bound(eta_f, eta_g, l, gamma);
        if c < 1.0 {
            below += 1;
        }
        if (c < 1.0) != (clause2 > 0.0) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches between c < 1 and clause 2 on {total} points ({below} with c < 1)"),
    )
}

fn max_lyapunov_increase(
    problem: &ProblemInstance,
    params: &DynamicsParams,
    z0: &Vector,
    zs: &Vector,
) -> f64 {
    let traj = integrate(
        problem,
        params,
        z0,
        &IntegratorConfig::for_horizon(params.t_p),
    )
    .unwrap();
    let v: Vec<f64> = traj.err_sq(zs).iter().map(|e| 0.5 * e).collect();
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn lyapunov_decrease() -> Outcome {
    let seeds: Vec<u64> = SEEDS.collect();
    let ex = parallel::map(&seeds, Execution::Parallel, |&seed| {
        let exp = example1(seed);
        max_lyapunov_increase(
            &exp.problem,
            &exp.params,
            &exp.z0,
            exp.z_star.as_ref().unwrap(),
        )
    });
    let instances = random_instances(20, 77);
    let rnd = parallel::map(&instances, Execution::Parallel, |inst| {
        let p = &inst.problem;
        let params =
            DynamicsParams::predefined_time(20.0, 200.0, 0.0, 0.99, 1.01, 5.0, p.contraction())
                .unwrap();
        let zs = picard_reference(p, &inst.z0, 1e-12, 100_000_000).unwrap();
        max_lyapunov_increase(p, &params, &inst.z0, &zs)
    });
    let worst_ex = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst_rnd = rnd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst_ex <= 1e-9 && worst_rnd <= 1e-9,
        format!("max V(t_k+1) - V(t_k): {worst_ex:.3e} on Example 1 (10 seeds), {worst_rnd:.3e} on 20 random instances"),
    )
}

fn discrete_envelope() -> Outcome {
    let seeds: Vec<u64> = SEEDS.collect();
    let runs = parallel::map(&seeds, Execution::Parallel, |&seed| {
        let exp = example1(seed);
        let zs = exp.z_star.clone().unwrap();
        let log = auto_step(
            &exp.problem,
            &exp.params,
            &exp.z0,
            &exp.discrete,
            Some(&zs),
            40,
        )
        .unwrap();
        let inside = log.within_envelope() == Some(true) && log.converged;

        let c = exp.problem.contraction();
        let it = picard_iterates(&exp.problem, &exp.z0, 1e-10, 100_000_000).unwrap();
        let worst_rate = it
            .windows(2)
            .map(|w| w[1].distance(&zs) / w[0].distance(&zs))
            .fold(f64::NEG_INFINITY, f64::max);
        (inside, log.beta, worst_rate - c)
    });
    let instances = random_instances(20, 13);
    let rnd = parallel::map(&instances, Execution::Parallel, |inst| {
        let p = &inst.problem;
        let zs = picard_reference(p, &inst.z0, 1e-12, 100_000_000).unwrap();
        let it = picard_iterates(p, &inst.z0, 1e-10, 100_000_000).unwrap();
        it.windows(2)
            .filter(|w| w[0].distance(&zs) > 1e-5)
            .map(|w| w[1].distance(&zs) / w[0].distance(&zs) - p.contraction())
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let inside = runs.iter().filter(|r| r.0).count();
    let beta_min = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let rate = runs
        .iter()
        .map(|r| r.2)
        .chain(rnd.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        inside == seeds.len() && rate <= 1e-6,
        format!(
            "iterates inside envelope on {inside}/10 seeds (smallest step {beta_min:.3e}); max(Picard rate - c) = {rate:.3e}"
        ),
    )
}

fn prox_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let step = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: f64 = rng.random_range(-5.0..5.0);
        let gamma: f64 = rng.random_range(0.1..2.0);
        let p = prox_l1(gamma, &Vector::new(vec![x]).unwrap()).unwrap()[0];
        let n = (12.0 / step) as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let u = -6.0 + step * k as f64;
            let val = u.abs() + (u - x) * (u - x) / (2.0 * gamma);
            if val < best.0 {
                best = (val, u);
            }
        }
        worst = worst.max((p - best.1).abs());
    }
    let mut exact = true;
    for _ in 0..100 {
        let x = gaussian(&mut rng, 4, 5.0);
        let a = gaussian(&mut rng, 4, 2.0);
        let w = gaussian(&mut rng, 4, 2.0);
        let lo = Vector::new(a.iter().zip(w.iter()).map(|(a, w)| a - w.abs()).collect()).unwrap();
        let hi = Vector::new(a.iter().zip(w.iter()).map(|(a, w)| a + w.abs()).collect()).unwrap();
        let phi = ProxFunction::box_indicator(lo.clone(), hi.clone()).unwrap();
        let p = prox_generic(&phi, 0.7, &x).unwrap();
        let q = project_box(&lo, &hi, &x).unwrap();
        exact &= (0..4).all(|i| p[i] == x[i].clamp(lo[i], hi[i]) && q[i] == p[i]);
    }
    outcome(
        worst <= 2.0 * step && exact,
        format!("max |prox_l1 - grid argmin| = {worst:.2e} (limit {:.0e}); box prox equals clamp: {exact}", 2.0 * step),
    )
}

fn settling_formulas() -> Outcome {
    let worst = GAIN_POINTS
        .iter()
        .map(|&[b1, b2, b3, p1, p2, c, k]| (gain_kp(b1, b2, b3, p1, p2, c).unwrap() - k).abs() / k)
        .fold(0.0, f64::max);
    let monotone = GAIN_POINTS.iter().all(|&[b1, b2, b3, p1, p2, c, _]| {
        let k = gain_kp(b1, b2, b3, p1, p2, c).unwrap();
        gain_kp(b1 * 1.5, b2, b3, p1, p2, c).unwrap() < k
            && gain_kp(b1, b2 * 1.5, b3, p1, p2, c).unwrap() < k
    });
    let ks: Vec<f64> = (1..=12)
        .map(|j| gain_kp(20.0, 200.0, 5.0, 0.99, 1.01, 1.0 - 10f64.powi(-j)).unwrap())
        .collect();
    let diverges = ks.windows(2).all(|w| w[1] > w[0]) && ks[11] > 1e9;
    outcome(
        worst <= 1e-12 && monotone && diverges,
        format!(
            "max relative gain error {worst:.2e} at 20 points; decreasing in b1, b2: {monotone}; K_p(c = 1 - 1e-12) = {:.3e}",
            ks[11]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("Example 1 settles before T_p", example1_predefined_time),
        ("(b3, p3) sweep orderings", sweep_ordering),
        ("contraction and residual bounds", contraction_suite),
        ("c < 1 iff the second assumption clause", algebraic_gate),
        ("Lyapunov decrease along accepted steps", lyapunov_decrease),
        ("discrete envelope and Picard rate", discrete_envelope),
        ("prox oracles", prox_oracles),
        ("settling-time formulas", settling_formulas),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} of {} acceptance criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
