//! The experimental protocol around the tuner: repeated tuning runs with
//! frequency-based aggregation of elite expressions, evaluation tables for
//! expression families, and the baseline comparison expressions.
//!
//! A *training protocol* runs the tuner several times with derived seeds,
//! takes the best expressions of every final population, converts them to
//! their reporting form (integer flooring for RLS, additive-constant
//! pruning for the EA), and tallies how often each canonical expression
//! occurs. Report consumers typically read the three most frequent
//! entries.
//!
//! Protocol runs and evaluation cells are independent jobs: everything
//! here is either a pure function of one seed or a deterministic
//! aggregation over results in a fixed order, so callers may execute the
//! jobs concurrently and still reproduce the sequential output exactly.
//!
//! Normalization note: for the built-in problems the reference values
//! never move past the seeded optima (no fitness can exceed them), so
//! reports normalize against fresh optimum-seeded tables.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::engine::{tune, EngineError, Population, ReferenceTable, TunerConfig};
use crate::expr::{eval_budget, Expr};
use crate::problems::{ProblemInstance, ProblemKind};
use crate::rng::derive_seed;
use crate::solvers::{run_many, SolverKind};

const TAG_PROTOCOL: u64 = 3;
const TAG_EVALUATION_TABLE: u64 = 4;

/// Which candidates of each final population enter the frequency tally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElitePool {
    /// The five highest-scoring members per tuning run (the default).
    Top5,
    /// Every member of every final population.
    FullPopulation,
}

impl ElitePool {
    pub fn name(self) -> &'static str {
        match self {
            ElitePool::Top5 => "top5",
            ElitePool::FullPopulation => "full",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "top5" => Some(ElitePool::Top5),
            "full" => Some(ElitePool::FullPopulation),
            _ => None,
        }
    }
}

/// One tallied expression with its occurrence count and the normalized
/// score samples of every contributing candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct EliteEntry {
    /// Canonical reporting-form expression.
    pub expression: Expr,
    /// Number of pooled candidates whose reporting form equals it.
    pub frequency: usize,
    /// Concatenated normalized samples of the contributing candidates.
    pub samples: Vec<f64>,
}

impl EliteEntry {
    /// Mean normalized score over all contributing samples.
    pub fn mean_score(&self) -> f64 {
        crate::stats::mean(&self.samples)
    }
}

/// Aggregated outcome of a training protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct EliteReport {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub budget_text: String,
    pub pool: ElitePool,
    pub tuner_runs: usize,
    /// The derived master seed of every tuning run, in run order.
    pub seeds: Vec<u64>,
    /// Total number of pooled candidates (the frequencies sum to this).
    pub pool_size: usize,
    /// Entries sorted by frequency descending, ties by expression order.
    pub entries: Vec<EliteEntry>,
}

impl EliteReport {
    /// The `k` most frequent expressions.
    pub fn top(&self, k: usize) -> &[EliteEntry] {
        &self.entries[..k.min(self.entries.len())]
    }
}

/// Converts an evolved expression into its reporting form for the given
/// solver: canonicalization plus integer flooring (RLS) or
/// additive-constant elimination (EA).
pub fn reporting_form(expr: &Expr, solver: SolverKind) -> Expr {
    match solver {
        SolverKind::Rls => expr.to_rls_form(),
        SolverKind::OneOneEa => expr.to_ea_form(),
    }
}

/// The master seeds for the individual tuning runs of a protocol.
pub fn protocol_seeds(master_seed: u64, tuner_runs: usize) -> Vec<u64> {
    let base = derive_seed(master_seed, TAG_PROTOCOL);
    (0..tuner_runs)
        .map(|j| derive_seed(base, j as u64))
        .collect()
}

/// Tallies the elite expressions of already-computed final populations.
/// `populations[j]` must be the outcome of tuning with `seeds[j]`; order
/// defines the tally order, so concurrent producers collecting into run
/// order reproduce the sequential report exactly.
pub fn aggregate_elites(
    config: &TunerConfig,
    seeds: &[u64],
    populations: &[Population],
    pool: ElitePool,
) -> EliteReport {
    debug_assert_eq!(seeds.len(), populations.len());
    let refs = ReferenceTable::from_instances(&config.instances());
    let mut tally: BTreeMap<Expr, EliteEntry> = BTreeMap::new();
    let mut pool_size = 0usize;
    for population in populations {
        let take = match pool {
            ElitePool::Top5 => 5.min(population.len()),
            ElitePool::FullPopulation => population.len(),
        };
        for candidate in &population.members[..take] {
            let form = reporting_form(&candidate.expr, config.solver);
            let entry = tally.entry(form.clone()).or_insert_with(|| EliteEntry {
                expression: form,
                frequency: 0,
                samples: Vec::new(),
            });
            entry.frequency += 1;
            entry.samples.extend(candidate.normalized_samples(&refs));
            pool_size += 1;
        }
    }
    let mut entries: Vec<EliteEntry> = tally.into_values().collect();
    // BTreeMap iteration is expression-ordered; the stable sort keeps that
    // order among equal frequencies.
    entries.sort_by(|a, b| b.frequency.cmp(&a.frequency));
    EliteReport {
        problem: config.problem,
        solver: config.solver,
        budget_text: config.budget.to_string(),
        pool,
        tuner_runs: populations.len(),
        seeds: seeds.to_vec(),
        pool_size,
        entries,
    }
}

/// Runs the tuner `tuner_runs` times with derived seeds and aggregates the
/// elites. Sequential reference implementation of the protocol.
pub fn train_protocol(
    config: &TunerConfig,
    tuner_runs: usize,
    pool: ElitePool,
) -> Result<EliteReport, EngineError> {
    let seeds = protocol_seeds(config.master_seed, tuner_runs);
    let mut populations = Vec::with_capacity(tuner_runs);
    for &seed in &seeds {
        let mut run_config = config.clone();
        run_config.master_seed = seed;
        populations.push(tune(&run_config)?);
    }
    Ok(aggregate_elites(config, &seeds, &populations, pool))
}

/// One (expression, instance) cell of an evaluation table.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationCell {
    pub expression: Expr,
    pub instance: ProblemInstance,
    /// Best fitness of each run, normalized by the instance optimum.
    pub samples: Vec<f64>,
}

impl EvaluationCell {
    /// Median of the normalized samples.
    pub fn median(&self) -> f64 {
        let mut v = self.samples.clone();
        v.sort_unstable_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Evaluation results for a family of expressions over an instance set.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationTable {
    pub solver: SolverKind,
    pub budget_text: String,
    pub runs: usize,
    pub seed: u64,
    /// Cells in expression-major, instance-minor order.
    pub cells: Vec<EvaluationCell>,
}

impl EvaluationTable {
    /// All samples of one expression pooled across the instance set.
    pub fn pooled_samples(&self, expression: &Expr) -> Vec<f64> {
        let mut out = Vec::new();
        for cell in &self.cells {
            if &cell.expression == expression {
                out.extend_from_slice(&cell.samples);
            }
        }
        out
    }
}

/// Evaluates one (expression, instance) cell: `runs` seeded solver runs
/// with the parameter taken from the expression, best fitness normalized
/// by the instance optimum.
pub fn evaluate_cell(
    solver: SolverKind,
    expression: &Expr,
    instance: &ProblemInstance,
    budget: &Expr,
    runs: usize,
    cell_seed: u64,
) -> Result<Vec<f64>, EngineError> {
    let env = instance.features();
    let raw_param = expression.eval(&env)?;
    let param = solver.clamp_param(raw_param, instance.n());
    let evals = eval_budget(budget, &env)?;
    if evals < 1.0 {
        return Err(EngineError::Config(
            crate::engine::ConfigError::BudgetTooSmall {
                instance: instance.to_string(),
                value: evals,
            },
        ));
    }
    let optimum = instance.optimum();
    let results = run_many(solver, instance, param, evals as u64, runs, cell_seed)?;
    Ok(results
        .iter()
        .map(|r| r.best_fitness / optimum)
        .collect())
}

/// Deterministic seed for the cell at (expression `e`, instance `i`).
pub fn cell_seed(table_seed: u64, expr_index: usize, instance_count: usize, inst_index: usize) -> u64 {
    let base = derive_seed(table_seed, TAG_EVALUATION_TABLE);
    derive_seed(base, (expr_index * instance_count + inst_index) as u64)
}

/// Runs every (expression, instance) cell sequentially and assembles the
/// table.
pub fn evaluate_expressions(
    solver: SolverKind,
    expressions: &[Expr],
    instances: &[ProblemInstance],
    budget: &Expr,
    runs: usize,
    seed: u64,
) -> Result<EvaluationTable, EngineError> {
    let mut cells = Vec::with_capacity(expressions.len() * instances.len());
    for (e, expression) in expressions.iter().enumerate() {
        for (i, instance) in instances.iter().enumerate() {
            let samples = evaluate_cell(
                solver,
                expression,
                instance,
                budget,
                runs,
                cell_seed(seed, e, instances.len(), i),
            )?;
            cells.push(EvaluationCell {
                expression: expression.clone(),
                instance: *instance,
                samples,
            });
        }
    }
    Ok(EvaluationTable {
        solver,
        budget_text: budget.to_string(),
        runs,
        seed,
        cells,
    })
}

/// The comparison expression families: `mu = i/n` with
/// `i` in {1, 3/2, 2, 5/2, 3, 4} for the EA, and
/// `k` in {1, 2, 3, m, 2m, n} for RLS (the `m` entries only where the
/// problem exposes a jump width).
pub fn baseline_expressions(solver: SolverKind, problem: ProblemKind) -> Vec<Expr> {
    let texts: Vec<&str> = match solver {
        SolverKind::OneOneEa => {
            alloc::vec!["1/n", "3/(2*n)", "2/n", "5/(2*n)", "3/n", "4/n"]
        }
        SolverKind::Rls => {
            let mut v = alloc::vec!["1", "2", "3"];
            if problem.feature_names().contains(&"m") {
                v.push("m");
                v.push("2*m");
            }
            v.push("n");
            v
        }
    };
    texts
        .into_iter()
        .map(|t| Expr::parse(t, crate::expr::Dialect::Gp).expect("baseline family parses"))
        .collect()
}

/// The larger unseen instance sizes used for generalization studies:
/// OneMax at n in {1000, 2000, 5000} and LeadingOnes at n in {750, 1000}.
/// Other problems have no built-in generalization set.
pub fn generalization_set(problem: ProblemKind) -> Vec<ProblemInstance> {
    let sizes: &[usize] = match problem {
        ProblemKind::OneMax => &[1000, 2000, 5000],
        ProblemKind::LeadingOnes => &[750, 1000],
        _ => &[],
    };
    sizes
        .iter()
        .map(|&n| ProblemInstance::new(problem, n).expect("positive sizes"))
        .collect()
}
