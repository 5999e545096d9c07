//! Solver runtime oracles: measured statistics against the values the
//! target algorithms are known to produce.

use anyhow::{anyhow, Result};
use exprtune_core::problems::{ProblemInstance, ProblemKind};
use exprtune_core::rng::derive_seed;
use exprtune_core::solvers::{run_many, run_traced, SolverKind, UNLIMITED_BUDGET};

/// Outcome of one oracle check.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl OracleOutcome {
    fn within(name: &str, measured: f64, expected: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            measured,
            expected,
            tolerance,
            pass: (measured - expected).abs() <= tolerance,
            detail,
        }
    }
}

pub const CHECK_NAMES: [&str; 5] = [
    "leadingones-rls1",
    "leadingones-ea1",
    "leadingones-ea159",
    "binvalue-rls-n",
    "onemax-ea-hit",
];

fn mean_hitting_time(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    runs: usize,
    seed: u64,
) -> Result<f64> {
    let results = run_many(kind, instance, param, UNLIMITED_BUDGET, runs, seed)?;
    let total: u64 = results
        .iter()
        .map(|r| r.hitting_time.expect("unlimited budget runs hit the optimum"))
        .sum();
    Ok(total as f64 / runs as f64)
}

/// Runs one named check. `n` and `runs` default to the check's standard
/// setting (n = 100, 200 runs; the two-point check uses n = 40 where
/// double arithmetic is exact).
pub fn run_check(name: &str, n: Option<usize>, runs: Option<usize>, seed: u64) -> Result<OracleOutcome> {
    let runs = runs.unwrap_or(200);
    match name {
        "leadingones-rls1" => {
            let n = n.unwrap_or(100);
            let inst = ProblemInstance::new(ProblemKind::LeadingOnes, n)?;
            let expected = (n * n) as f64 / 2.0;
            let measured =
                mean_hitting_time(SolverKind::Rls, &inst, 1.0, runs, derive_seed(seed, 1))?;
            Ok(OracleOutcome::within(
                name,
                measured,
                expected,
                0.05 * expected,
                format!("mean hitting time of RLS(1) on LeadingOnes(n={n}) over {runs} runs"),
            ))
        }
        "leadingones-ea1" => {
            let n = n.unwrap_or(100);
            let inst = ProblemInstance::new(ProblemKind::LeadingOnes, n)?;
            let expected = 0.86 * (n * n) as f64;
            let measured = mean_hitting_time(
                SolverKind::OneOneEa,
                &inst,
                1.0 / n as f64,
                runs,
                derive_seed(seed, 2),
            )?;
            Ok(OracleOutcome::within(
                name,
                measured,
                expected,
                0.05 * expected,
                format!("mean hitting time of (1+1) EA(1/n) on LeadingOnes(n={n}) over {runs} runs"),
            ))
        }
        "leadingones-ea159" => {
            let n = n.unwrap_or(100);
            let inst = ProblemInstance::new(ProblemKind::LeadingOnes, n)?;
            let expected = 0.77 * (n * n) as f64;
            let measured = mean_hitting_time(
                SolverKind::OneOneEa,
                &inst,
                1.59 / n as f64,
                runs,
                derive_seed(seed, 3),
            )?;
            Ok(OracleOutcome::within(
                name,
                measured,
                expected,
                0.05 * expected,
                format!("mean hitting time of (1+1) EA(1.59/n) on LeadingOnes(n={n}) over {runs} runs"),
            ))
        }
        "binvalue-rls-n" => {
            // RLS(k = n) only ever sees the initial point and its
            // complement; with n <= 52 the two BinValue fitnesses sum to
            // 2^n - 1 exactly, so the trace pins both values.
            let n = n.unwrap_or(40);
            if n > 52 {
                return Err(anyhow!("binvalue-rls-n needs n <= 52 for exact arithmetic"));
            }
            let inst = ProblemInstance::new(ProblemKind::BinValue, n)?;
            let optimum = inst.optimum();
            let runs = runs.min(1000);
            let mut failures = 0usize;
            for r in 0..runs {
                let mut rng =
                    exprtune_core::rng::stream_from_seed(derive_seed(seed, 4) ^ r as u64);
                let (result, trace) =
                    run_traced(SolverKind::Rls, &inst, n as f64, 50, &mut rng)?;
                let f0 = trace[0].1;
                let complement_fitness = optimum - f0;
                let expected_best = f0.max(complement_fitness);
                let stuck = trace[1..].iter().all(|&(_, f)| f == expected_best);
                if result.best_fitness != expected_best || !stuck {
                    failures += 1;
                }
            }
            Ok(OracleOutcome {
                name: name.to_string(),
                measured: failures as f64,
                expected: 0.0,
                tolerance: 0.0,
                pass: failures == 0,
                detail: format!(
                    "runs where RLS(n) on BinValue(n={n}) left the two-point set: {failures}/{runs}"
                ),
            })
        }
        "onemax-ea-hit" => {
            let n = n.unwrap_or(100);
            let inst = ProblemInstance::new(ProblemKind::OneMax, n)?;
            let nf = n as f64;
            let budget = (exprtune_core::expr::EULER * nf * nf.ln()).floor() as u64;
            let results = run_many(
                SolverKind::OneOneEa,
                &inst,
                1.0 / nf,
                budget,
                runs,
                derive_seed(seed, 5),
            )?;
            let fraction =
                results.iter().filter(|r| r.hit_optimum).count() as f64 / runs as f64;
            Ok(OracleOutcome {
                name: name.to_string(),
                measured: fraction,
                expected: 0.5,
                tolerance: 0.0,
                pass: fraction >= 0.5,
                detail: format!(
                    "fraction of {runs} EA(1/n) runs reaching the OneMax(n={n}) optimum within budget {budget}"
                ),
            })
        }
        other => Err(anyhow!(
            "unknown oracle check `{other}` (available: {})",
            CHECK_NAMES.join(", ")
        )),
    }
}
