//! Parallel execution of independent jobs (tuning runs and evaluation
//! cells). Every job is a pure function of a derived seed and results are
//! assembled in job order, so the output is identical to the sequential
//! protocol at any worker count.

use anyhow::{anyhow, Result};
use exprtune_core::engine::{tune, Population, TunerConfig};
use exprtune_core::expr::Expr;
use exprtune_core::harness::{
    aggregate_elites, cell_seed, evaluate_cell, protocol_seeds, ElitePool, EliteReport,
    EvaluationCell, EvaluationTable,
};
use exprtune_core::problems::ProblemInstance;
use exprtune_core::solvers::SolverKind;
use rayon::prelude::*;

/// A rayon pool honouring an optional explicit worker count.
pub fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(anyhow!("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| anyhow!("worker pool: {e}"))
}

/// The training protocol with tuning runs executed in parallel;
/// result-identical to `exprtune_core::harness::train_protocol`.
pub fn train_protocol_parallel(
    pool: &rayon::ThreadPool,
    config: &TunerConfig,
    tuner_runs: usize,
    elite_pool: ElitePool,
) -> Result<EliteReport> {
    let seeds = protocol_seeds(config.master_seed, tuner_runs);
    let populations: Vec<Population> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let mut run_config = config.clone();
                run_config.master_seed = seed;
                tune(&run_config)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(aggregate_elites(config, &seeds, &populations, elite_pool))
}

/// Evaluation table with cells executed in parallel; result-identical to
/// `exprtune_core::harness::evaluate_expressions`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_expressions_parallel(
    pool: &rayon::ThreadPool,
    solver: SolverKind,
    expressions: &[Expr],
    instances: &[ProblemInstance],
    budget: &Expr,
    runs: usize,
    seed: u64,
) -> Result<EvaluationTable> {
    let jobs: Vec<(usize, usize)> = (0..expressions.len())
        .flat_map(|e| (0..instances.len()).map(move |i| (e, i)))
        .collect();
    let cells: Vec<EvaluationCell> = pool.install(|| {
        jobs.par_iter()
            .map(|&(e, i)| {
                let samples = evaluate_cell(
                    solver,
                    &expressions[e],
                    &instances[i],
                    budget,
                    runs,
                    cell_seed(seed, e, instances.len(), i),
                )?;
                Ok(EvaluationCell {
                    expression: expressions[e].clone(),
                    instance: instances[i],
                    samples,
                })
            })
            .collect::<Result<Vec<_>, exprtune_core::engine::EngineError>>()
    })?;
    Ok(EvaluationTable {
        solver,
        budget_text: budget.to_string(),
        runs,
        seed,
        cells,
    })
}
