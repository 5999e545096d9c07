//! The genetic-programming tuning loop.
//!
//! A population of parameter expressions is evolved against a training set
//! of problem instances. Each candidate is scored by running the target
//! algorithm on every instance several times and normalizing the best
//! fitness values by per-instance reference values; the scalar score is
//! the mean of those normalized samples.
//!
//! Selection is by tournament on the scalar score. Replacement is gated
//! statistically: a newcomer replaces the worst member it beats at the
//! configured significance level, or — failing significance in either
//! direction — the worst member it undercuts in tree size (bloat
//! control). Per generation at most `replacement_cap * population_size`
//! members are replaced.
//!
//! Solver runs use common random numbers: the run seed depends on the
//! (instance, run) pair but not on the candidate, so candidate comparisons
//! share randomness and the rank-sum gate sees less noise.
//!
//! Reference values start at the known instance optima and are max-merged
//! with every observed fitness; normalization reads the current reference
//! at scoring time, so scores are comparable within a generation and
//! non-increasing in retrospect. Candidate evaluations inside a generation
//! are independent and may be computed concurrently; replacement decisions
//! are applied sequentially in offspring creation order, which keeps the
//! result identical for any evaluation schedule.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::expr::{
    crossover, eval_budget, mutate, random_tree, Dialect, Expr, InitMethod, TerminalSet,
    UnboundFeature,
};
use crate::problems::{training_set, ProblemInstance, ProblemKind};
use crate::rng::{derive_seed, stream_from_seed, RandomStream};
use crate::solvers::{run_many, SolverError, SolverKind};
use crate::stats::{mean, rank_sum_test, Alternative};

/// Sub-stream tags for the engine's seed derivation.
const TAG_VARIATION: u64 = 1;
const TAG_EVALUATION: u64 = 2;

/// Everything the tuning loop needs. `new` fills in the standard GP
/// defaults; construct it, then adjust fields as needed and let
/// [`TunerConfig::validate`] check the invariants.
#[derive(Clone, Debug)]
pub struct TunerConfig {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    /// Budget formula over the instance features (budget dialect), floored
    /// to an evaluation count per instance.
    pub budget: Expr,
    pub generations: usize,
    pub population_size: usize,
    pub tournament_size: usize,
    /// Per-generation cap on the fraction of members replaced.
    pub replacement_cap: f64,
    pub mutation_probability: f64,
    pub crossover_rate: f64,
    /// Independent solver runs per (candidate, instance).
    pub runs_per_candidate: usize,
    /// Significance threshold for the rank-sum replacement gate.
    pub alpha: f64,
    pub master_seed: u64,
    pub max_depth: usize,
}

impl TunerConfig {
    /// Standard setup: 100 generations, population 20, tournament 5,
    /// replacement cap 0.75, mutation probability 0.2, crossover rate 0.8,
    /// 10 runs per candidate, alpha 0.02, max depth 8.
    pub fn new(problem: ProblemKind, solver: SolverKind, budget: Expr, master_seed: u64) -> Self {
        Self {
            problem,
            solver,
            budget,
            generations: 100,
            population_size: 20,
            tournament_size: 5,
            replacement_cap: 0.75,
            mutation_probability: 0.2,
            crossover_rate: 0.8,
            runs_per_candidate: 10,
            alpha: 0.02,
            master_seed,
            max_depth: 8,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.crossover_rate > 0.0 && self.crossover_rate <= 1.0) {
            return Err(ConfigError::RateOutOfRange {
                name: "crossover_rate",
                value: self.crossover_rate,
            });
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(ConfigError::RateOutOfRange {
                name: "mutation_probability",
                value: self.mutation_probability,
            });
        }
        if !(0.0..=1.0).contains(&self.replacement_cap) {
            return Err(ConfigError::RateOutOfRange {
                name: "replacement_cap",
                value: self.replacement_cap,
            });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::RateOutOfRange {
                name: "alpha",
                value: self.alpha,
            });
        }
        if self.population_size == 0 || self.tournament_size == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if self.tournament_size > self.population_size {
            return Err(ConfigError::TournamentTooLarge {
                tournament: self.tournament_size,
                population: self.population_size,
            });
        }
        if self.runs_per_candidate == 0 {
            return Err(ConfigError::NoRuns);
        }
        if self.max_depth == 0 {
            return Err(ConfigError::ZeroDepth);
        }
        if !self.budget.in_dialect(Dialect::Budget) {
            return Err(ConfigError::MalformedBudget);
        }
        let known = self.problem.feature_names();
        for feature in self.budget.features() {
            if !known.contains(&feature) {
                return Err(ConfigError::UnknownBudgetFeature {
                    feature: feature.to_string(),
                });
            }
        }
        // Every training instance must receive a usable budget.
        for inst in self.instances() {
            let budget = eval_budget(&self.budget, &inst.features())
                .expect("budget features validated above");
            if budget < 1.0 {
                return Err(ConfigError::BudgetTooSmall {
                    instance: inst.to_string(),
                    value: budget,
                });
            }
        }
        Ok(())
    }

    /// The training instances for the configured problem.
    pub fn instances(&self) -> Vec<ProblemInstance> {
        training_set(self.problem)
    }

    /// Terminal alphabet for evolved trees: the GP constants plus the
    /// problem's features.
    pub fn terminal_set(&self) -> TerminalSet {
        TerminalSet::new(self.problem.feature_names().iter().copied())
    }
}

/// Configuration rejected by [`TunerConfig::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    RateOutOfRange { name: &'static str, value: f64 },
    EmptyPopulation,
    TournamentTooLarge { tournament: usize, population: usize },
    NoRuns,
    ZeroDepth,
    MalformedBudget,
    UnknownBudgetFeature { feature: String },
    BudgetTooSmall { instance: String, value: f64 },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::RateOutOfRange { name, value } => {
                write!(f, "{name}={value} is out of range")
            }
            ConfigError::EmptyPopulation => {
                write!(f, "population and tournament sizes must be at least 1")
            }
            ConfigError::TournamentTooLarge {
                tournament,
                population,
            } => write!(
                f,
                "tournament size {tournament} exceeds population size {population}"
            ),
            ConfigError::NoRuns => write!(f, "runs per candidate must be at least 1"),
            ConfigError::ZeroDepth => write!(f, "max depth must be at least 1"),
            ConfigError::MalformedBudget => {
                write!(f, "budget expression must be in the budget dialect")
            }
            ConfigError::UnknownBudgetFeature { feature } => {
                write!(f, "budget references feature `{feature}` the problem does not expose")
            }
            ConfigError::BudgetTooSmall { instance, value } => {
                write!(f, "budget evaluates to {value} (< 1) on {instance}")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Any failure during tuning.
#[derive(Clone, Debug, PartialEq)]
pub enum EngineError {
    Config(ConfigError),
    UnboundFeature(UnboundFeature),
    Solver(SolverError),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Config(e) => write!(f, "invalid configuration: {e}"),
            EngineError::UnboundFeature(e) => write!(f, "{e}"),
            EngineError::Solver(e) => write!(f, "solver failure: {e}"),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<ConfigError> for EngineError {
    fn from(e: ConfigError) -> Self {
        EngineError::Config(e)
    }
}

impl From<UnboundFeature> for EngineError {
    fn from(e: UnboundFeature) -> Self {
        EngineError::UnboundFeature(e)
    }
}

impl From<SolverError> for EngineError {
    fn from(e: SolverError) -> Self {
        EngineError::Solver(e)
    }
}

/// Per-instance reference values used to normalize raw fitness. Seeded
/// with the known optima and max-merged with every observation, so
/// references never decrease and always dominate the observed fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTable {
    values: Vec<f64>,
}

impl ReferenceTable {
    pub fn from_instances(instances: &[ProblemInstance]) -> Self {
        let values = instances.iter().map(|i| i.optimum()).collect::<Vec<_>>();
        debug_assert!(values.iter().all(|&r| r > 0.0));
        Self { values }
    }

    /// Explicit reference values (fixtures and custom instance sets).
    pub fn with_values(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|&r| r > 0.0));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, instance_index: usize) -> f64 {
        self.values[instance_index]
    }

    /// Max-merge a new observation; commutative, so evaluation order never
    /// affects the final table.
    pub fn update_max(&mut self, instance_index: usize, observed: f64) {
        let slot = &mut self.values[instance_index];
        if observed > *slot {
            *slot = observed;
        }
    }
}

/// An evaluated candidate: the expression plus its raw per-(instance, run)
/// best-fitness samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub expr: Expr,
    /// Raw best fitness, indexed `[instance][run]`.
    pub raw_fitness: Vec<Vec<f64>>,
    /// Cached tree size.
    pub size: usize,
}

impl Candidate {
    /// All `L * runs` normalized samples, row by row; normalization uses
    /// the current reference values (lazy normalization).
    pub fn normalized_samples(&self, refs: &ReferenceTable) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.raw_fitness.len() * self.runs_per_instance());
        for (i, row) in self.raw_fitness.iter().enumerate() {
            let r = refs.get(i);
            out.extend(row.iter().map(|&f| f / r));
        }
        out
    }

    /// Scalar score: the mean of the normalized samples. Equals the
    /// average over instances of the per-instance mean normalized fitness
    /// when every instance has the same run count.
    pub fn score(&self, refs: &ReferenceTable) -> f64 {
        mean(&self.normalized_samples(refs))
    }

    fn runs_per_instance(&self) -> usize {
        self.raw_fitness.first().map_or(0, Vec::len)
    }
}

/// The fixed-capacity population of evaluated candidates.
#[derive(Clone, Debug)]
pub struct Population {
    pub members: Vec<Candidate>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sorts members best-first: score descending, then size ascending,
    /// then original order (stable).
    pub fn sort_canonical(&mut self, refs: &ReferenceTable) {
        let mut keyed: Vec<(f64, usize, usize)> = self
            .members
            .iter()
            .enumerate()
            .map(|(i, c)| (c.score(refs), c.size, i))
            .collect();
        keyed.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut order: Vec<usize> = keyed.into_iter().map(|(_, _, i)| i).collect();
        // Apply the permutation by draining into a new vector.
        let mut taken: Vec<Option<Candidate>> = self.members.drain(..).map(Some).collect();
        self.members = order
            .drain(..)
            .map(|i| taken[i].take().expect("each index used once"))
            .collect();
    }
}

/// Runs the target algorithm for one expression over all instances and
/// collects the raw fitness matrix. The per-run seed depends on the
/// instance index and run index only, so every candidate in a tuning run
/// sees the same randomness (common random numbers). Reference values are
/// max-merged with the observations.
pub fn evaluate_candidate(
    expr: &Expr,
    instances: &[ProblemInstance],
    config: &TunerConfig,
    refs: &mut ReferenceTable,
) -> Result<Candidate, EngineError> {
    let eval_seed = derive_seed(config.master_seed, TAG_EVALUATION);
    let mut raw_fitness = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let env = inst.features();
        let raw_param = expr.eval(&env)?;
        let param = config.solver.clamp_param(raw_param, inst.n());
        let budget = eval_budget(&config.budget, &env)?;
        if budget < 1.0 {
            return Err(ConfigError::BudgetTooSmall {
                instance: inst.to_string(),
                value: budget,
            }
            .into());
        }
        let seed_base = derive_seed(eval_seed, i as u64);
        let results = run_many(
            config.solver,
            inst,
            param,
            budget as u64,
            config.runs_per_candidate,
            seed_base,
        )?;
        let row: Vec<f64> = results.iter().map(|r| r.best_fitness).collect();
        for &observed in &row {
            refs.update_max(i, observed);
        }
        raw_fitness.push(row);
    }
    Ok(Candidate {
        size: expr.size(),
        expr: expr.clone(),
        raw_fitness,
    })
}

/// Compares candidates best-first under the tie rules: score descending,
/// size ascending, then lower index.
fn better(
    (score_a, size_a, idx_a): (f64, usize, usize),
    (score_b, size_b, idx_b): (f64, usize, usize),
) -> bool {
    match score_a.total_cmp(&score_b) {
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Equal => match size_a.cmp(&size_b) {
            core::cmp::Ordering::Less => true,
            core::cmp::Ordering::Greater => false,
            core::cmp::Ordering::Equal => idx_a < idx_b,
        },
    }
}

/// Tournament selection: draws `tournament_size` members uniformly
/// without replacement and returns the index of the best by scalar score
/// (ties: smaller tree, then earlier slot).
pub fn tournament_select(
    population: &Population,
    refs: &ReferenceTable,
    config: &TunerConfig,
    rng: &mut RandomStream,
) -> usize {
    debug_assert!(config.tournament_size <= population.len());
    let drawn = rand::seq::index::sample(rng, population.len(), config.tournament_size);
    let mut best: Option<(f64, usize, usize)> = None;
    for idx in drawn {
        let c = &population.members[idx];
        let key = (c.score(refs), c.size, idx);
        if best.is_none_or(|b| better(key, b)) {
            best = Some(key);
        }
    }
    best.expect("tournament_size >= 1").2
}

/// Outcome of a replacement attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplaceOutcome {
    pub replaced: bool,
    pub victim_index: Option<usize>,
}

/// Offers `newcomer` to the population under the two replacement rules,
/// scanning members from the lowest scalar score upward:
///
/// 1. the newcomer is significantly better than the member (one-sided
///    rank-sum p below alpha): replace regardless of sizes;
/// 2. no significance in either direction but the newcomer's tree is
///    smaller: replace (bloat control);
///
/// otherwise move on to the next member. At most
/// `floor(replacement_cap * population_size)` replacements are allowed per
/// generation; `replaced_so_far` is this generation's count.
pub fn try_replace(
    population: &mut Population,
    newcomer: Candidate,
    replaced_so_far: usize,
    config: &TunerConfig,
    refs: &ReferenceTable,
) -> ReplaceOutcome {
    let cap = (config.replacement_cap * config.population_size as f64) as usize;
    if replaced_so_far >= cap {
        return ReplaceOutcome {
            replaced: false,
            victim_index: None,
        };
    }

    let newcomer_samples = newcomer.normalized_samples(refs);

    // Worst-first scan order: score ascending, larger trees first among
    // equals, then slot order.
    let mut order: Vec<(f64, usize, usize)> = population
        .members
        .iter()
        .enumerate()
        .map(|(i, c)| (c.score(refs), c.size, i))
        .collect();
    order.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
    });

    for (_, member_size, index) in order {
        let member_samples = population.members[index].normalized_samples(refs);
        let newcomer_better =
            rank_sum_test(&member_samples, &newcomer_samples, Alternative::BGreater).p_value;
        if newcomer_better < config.alpha {
            population.members[index] = newcomer;
            return ReplaceOutcome {
                replaced: true,
                victim_index: Some(index),
            };
        }
        let member_better =
            rank_sum_test(&newcomer_samples, &member_samples, Alternative::BGreater).p_value;
        if member_better >= config.alpha && newcomer.size < member_size {
            population.members[index] = newcomer;
            return ReplaceOutcome {
                replaced: true,
                victim_index: Some(index),
            };
        }
    }
    ReplaceOutcome {
        replaced: false,
        victim_index: None,
    }
}

/// Runs the full tuning loop and returns the final population sorted
/// best-first. Deterministic in `config.master_seed`.
pub fn tune(config: &TunerConfig) -> Result<Population, EngineError> {
    let instances = config.instances();
    // Run seeds are candidate-independent, so two candidates with equal
    // clamped parameter vectors receive bit-identical raw fitness; caching
    // by that vector skips the repeat solver work without changing any
    // result (converged populations re-evaluate the same few vectors over
    // and over).
    let mut cache: BTreeMap<Vec<u64>, Vec<Vec<f64>>> = BTreeMap::new();
    tune_impl(config, move |expr, refs| {
        let mut key = Vec::with_capacity(instances.len());
        for inst in &instances {
            let raw = expr.eval(&inst.features())?;
            key.push(config.solver.clamp_param(raw, inst.n()).to_bits());
        }
        if let Some(raw_fitness) = cache.get(&key) {
            return Ok(Candidate {
                size: expr.size(),
                expr: expr.clone(),
                raw_fitness: raw_fitness.clone(),
            });
        }
        let candidate = evaluate_candidate(expr, &instances, config, refs)?;
        cache.insert(key, candidate.raw_fitness.clone());
        Ok(candidate)
    })
}

/// The loop itself, generic over candidate evaluation so tests can inject
/// synthetic fitness landscapes.
fn tune_impl<F>(config: &TunerConfig, mut eval: F) -> Result<Population, EngineError>
where
    F: FnMut(&Expr, &mut ReferenceTable) -> Result<Candidate, EngineError>,
{
    config.validate()?;
    let instances = config.instances();
    let terminals = config.terminal_set();
    let mut refs = ReferenceTable::from_instances(&instances);
    let mut var_rng = stream_from_seed(derive_seed(config.master_seed, TAG_VARIATION));

    // Classic ramped half-and-half initialization: alternate grow/full,
    // cycling depths 2..=6 (clamped to the configured maximum).
    let mut members = Vec::with_capacity(config.population_size);
    for j in 0..config.population_size {
        let method = if j % 2 == 0 {
            InitMethod::Grow
        } else {
            InitMethod::Full
        };
        let depth = (2 + (j / 2) % 5).min(config.max_depth).max(1);
        let expr = random_tree(method, depth, &terminals, &mut var_rng);
        members.push(eval(&expr, &mut refs)?);
    }
    let mut population = Population { members };

    let cap = (config.replacement_cap * config.population_size as f64) as usize;
    for _generation in 0..config.generations {
        // Creation: all offspring are bred from the generation-start
        // population.
        let mut offspring = Vec::with_capacity(config.population_size);
        for _ in 0..config.population_size {
            let mut child = if var_rng.random::<f64>() < config.crossover_rate {
                let a = tournament_select(&population, &refs, config, &mut var_rng);
                let b = tournament_select(&population, &refs, config, &mut var_rng);
                crossover(
                    &population.members[a].expr,
                    &population.members[b].expr,
                    config.max_depth,
                    &mut var_rng,
                )
            } else {
                let a = tournament_select(&population, &refs, config, &mut var_rng);
                population.members[a].expr.clone()
            };
            if var_rng.random::<f64>() < config.mutation_probability {
                child = mutate(&child, &terminals, config.max_depth, &mut var_rng);
            }
            offspring.push(child);
        }

        // Evaluation: independent of one another; reference updates are
        // max-merges, so any evaluation order yields this exact state.
        let evaluated: Result<Vec<Candidate>, EngineError> = offspring
            .iter()
            .map(|expr| eval(expr, &mut refs))
            .collect();

        // Replacement: sequential, in creation order, capped.
        let mut replaced = 0usize;
        for candidate in evaluated? {
            if replaced >= cap {
                break;
            }
            let outcome = try_replace(&mut population, candidate, replaced, config, &refs);
            if outcome.replaced {
                replaced += 1;
            }
        }
    }

    population.sort_canonical(&refs);
    Ok(population)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Dialect;
    use alloc::string::String;

    fn small_config(seed: u64) -> TunerConfig {
        let budget = Expr::parse("n", Dialect::Budget).unwrap();
        let mut config = TunerConfig::new(ProblemKind::OneMax, SolverKind::Rls, budget, seed);
        config.generations = 3;
        config.population_size = 8;
        config.tournament_size = 3;
        config.runs_per_candidate = 4;
        config
    }

    fn fixture_candidate(text: &str, rows: &[&[f64]]) -> Candidate {
        let expr = Expr::parse(text, Dialect::Gp).unwrap();
        Candidate {
            size: expr.size(),
            expr,
            raw_fitness: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    #[test]
    fn clamp_rules() {
        // mu below range clamps to 1/n^2, above range to 1.
        assert_eq!(SolverKind::OneOneEa.clamp_param(-1.0, 10), 0.01);
        assert_eq!(SolverKind::OneOneEa.clamp_param(7.0, 10), 1.0);
        assert_eq!(SolverKind::OneOneEa.clamp_param(0.05, 10), 0.05);
        // k rounds and clamps to [1, n].
        assert_eq!(SolverKind::Rls.clamp_param(20.0, 10), 10.0);
        assert_eq!(SolverKind::Rls.clamp_param(0.2, 10), 1.0);
        assert_eq!(SolverKind::Rls.clamp_param(2.6, 10), 3.0);
    }

    #[test]
    fn score_fixture_single_instance() {
        let c = fixture_candidate("1", &[&[5.0, 10.0]]);
        let refs = ReferenceTable::with_values(alloc::vec![10.0]);
        assert_eq!(c.normalized_samples(&refs), alloc::vec![0.5, 1.0]);
        assert!((c.score(&refs) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn score_fixture_two_instances() {
        let c = fixture_candidate("1", &[&[8.0, 8.0], &[3.0, 3.0]]);
        let refs = ReferenceTable::with_values(alloc::vec![10.0, 4.0]);
        assert!((c.score(&refs) - 0.775).abs() < 1e-12);
    }

    #[test]
    fn score_is_one_when_all_runs_hit_reference() {
        let c = fixture_candidate("1", &[&[10.0, 10.0], &[4.0, 4.0]]);
        let refs = ReferenceTable::with_values(alloc::vec![10.0, 4.0]);
        assert_eq!(c.score(&refs), 1.0);
    }

    #[test]
    fn reference_table_max_merges() {
        let mut refs = ReferenceTable::with_values(alloc::vec![5.0]);
        refs.update_max(0, 3.0);
        assert_eq!(refs.get(0), 5.0);
        refs.update_max(0, 8.0);
        assert_eq!(refs.get(0), 8.0);
    }

    #[test]
    fn evaluate_candidate_shapes_and_common_randomness() {
        let config = {
            let budget = Expr::parse("n", Dialect::Budget).unwrap();
            let mut c = TunerConfig::new(
                ProblemKind::OneMax,
                SolverKind::Rls,
                budget,
                77,
            );
            c.runs_per_candidate = 10;
            c
        };
        let instances = config.instances();
        let mut refs = ReferenceTable::from_instances(&instances);
        let expr = Expr::parse("1", Dialect::Gp).unwrap();
        let cand = evaluate_candidate(&expr, &instances, &config, &mut refs).unwrap();
        assert_eq!(cand.raw_fitness.len(), 6);
        assert!(cand.raw_fitness.iter().all(|row| row.len() == 10));

        // Same candidate evaluated twice sees identical randomness.
        let again = evaluate_candidate(&expr, &instances, &config, &mut refs).unwrap();
        assert_eq!(cand.raw_fitness, again.raw_fitness);

        // Scores stay within [0, 1] under optimum-seeded references.
        let samples = cand.normalized_samples(&refs);
        assert!(samples.iter().all(|&s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn tournament_prefers_score_then_size() {
        // All-equal scores: the smallest tree must win.
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let members = alloc::vec![
            fixture_candidate("1/(n+1)", &[&[0.5, 0.5]]),
            fixture_candidate("1/n", &[&[0.5, 0.5]]),
            fixture_candidate("1", &[&[0.5, 0.5]]),
            fixture_candidate("2/n", &[&[0.5, 0.5]]),
        ];
        let population = Population { members };
        let mut config = small_config(0);
        config.population_size = 4;
        config.tournament_size = 4; // everyone participates
        let mut rng = stream_from_seed(1);
        for _ in 0..20 {
            let winner = tournament_select(&population, &refs, &config, &mut rng);
            assert_eq!(winner, 2, "single-node tree wins ties");
        }
    }

    #[test]
    fn full_tournament_always_returns_best() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let members: Vec<Candidate> = (0..6)
            .map(|i| {
                let v = 0.1 + 0.1 * i as f64;
                fixture_candidate("1", &[&[v, v]])
            })
            .collect();
        let population = Population { members };
        let mut config = small_config(0);
        config.population_size = 6;
        config.tournament_size = 6;
        let mut rng = stream_from_seed(2);
        for _ in 0..20 {
            assert_eq!(tournament_select(&population, &refs, &config, &mut rng), 5);
        }
    }

    #[test]
    fn tournament_inclusion_probability() {
        // The best member wins whenever drawn; with 5 of 20 drawn that is
        // a 1/4 chance, so the win frequency must sit near 0.25.
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let members: Vec<Candidate> = (0..20)
            .map(|i| {
                let v = 0.05 * (i + 1) as f64;
                fixture_candidate("1", &[&[v, v]])
            })
            .collect();
        let population = Population { members };
        let mut config = small_config(0);
        config.population_size = 20;
        config.tournament_size = 5;
        let mut rng = stream_from_seed(3);
        let trials = 10_000;
        let wins = (0..trials)
            .filter(|_| tournament_select(&population, &refs, &config, &mut rng) == 19)
            .count();
        let freq = wins as f64 / trials as f64;
        assert!((freq - 0.25).abs() <= 0.02, "win frequency {freq}");
    }

    #[test]
    fn replace_dominant_newcomer_takes_lowest() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let members = alloc::vec![
            fixture_candidate("1/n", &[&[0.3, 0.3, 0.3, 0.3]]),
            fixture_candidate("2/n", &[&[0.1, 0.1, 0.1, 0.1]]),
            fixture_candidate("n", &[&[0.5, 0.5, 0.5, 0.5]]),
        ];
        let mut population = Population { members };
        let mut config = small_config(0);
        config.population_size = 3;
        let newcomer = fixture_candidate("2", &[&[1.0, 1.0, 1.0, 1.0]]);
        let outcome = try_replace(&mut population, newcomer, 0, &config, &refs);
        assert!(outcome.replaced);
        assert_eq!(outcome.victim_index, Some(1), "lowest-scored member goes");
        assert_eq!(population.members[1].expr, Expr::constant(2.0));
    }

    #[test]
    fn replace_by_size_when_indistinguishable() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let samples: &[f64] = &[0.4, 0.5, 0.6, 0.7];
        let members = alloc::vec![
            fixture_candidate("1/(n+1)", &[samples]), // size 5
            fixture_candidate("1/(n+1)", &[samples]),
        ];
        let mut population = Population { members };
        let mut config = small_config(0);
        config.population_size = 2;
        let newcomer = fixture_candidate("1", &[samples]); // size 1, same data
        let outcome = try_replace(&mut population, newcomer, 0, &config, &refs);
        assert!(outcome.replaced, "smaller tree replaces an equal one");
        assert_eq!(outcome.victim_index, Some(0));
    }

    #[test]
    fn no_replacement_when_equal_sizes_and_no_significance() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let samples: &[f64] = &[0.4, 0.5, 0.6, 0.7];
        let members = alloc::vec![fixture_candidate("1/n", &[samples])];
        let mut population = Population { members };
        let mut config = small_config(0);
        config.population_size = 1;
        let newcomer = fixture_candidate("2/n", &[samples]);
        let outcome = try_replace(&mut population, newcomer, 0, &config, &refs);
        assert!(!outcome.replaced);
    }

    #[test]
    fn replacement_cap_blocks_further_replacements() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let members = alloc::vec![fixture_candidate("1/n", &[&[0.1, 0.1, 0.1, 0.1]])];
        let mut population = Population { members };
        let mut config = small_config(0);
        config.population_size = 20;
        config.replacement_cap = 0.75;
        let newcomer = fixture_candidate("1", &[&[1.0, 1.0, 1.0, 1.0]]);
        // floor(0.75 * 20) = 15 replacements allowed.
        let outcome = try_replace(&mut population, newcomer.clone(), 15, &config, &refs);
        assert!(!outcome.replaced);
        let outcome = try_replace(&mut population, newcomer, 14, &config, &refs);
        assert!(outcome.replaced);
    }

    #[test]
    fn rule_one_replacement_never_lowers_minimum_score() {
        let refs = ReferenceTable::with_values(alloc::vec![1.0]);
        let mut config = small_config(0);
        config.population_size = 3;
        let members = alloc::vec![
            fixture_candidate("1/n", &[&[0.30, 0.31, 0.29, 0.30]]),
            fixture_candidate("2/n", &[&[0.50, 0.52, 0.49, 0.51]]),
            fixture_candidate("n", &[&[0.70, 0.69, 0.71, 0.70]]),
        ];
        let mut population = Population { members };
        let min_before = population
            .members
            .iter()
            .map(|c| c.score(&refs))
            .fold(f64::INFINITY, f64::min);
        let newcomer = fixture_candidate("2", &[&[0.90, 0.91, 0.89, 0.92]]);
        let outcome = try_replace(&mut population, newcomer, 0, &config, &refs);
        assert!(outcome.replaced);
        let min_after = population
            .members
            .iter()
            .map(|c| c.score(&refs))
            .fold(f64::INFINITY, f64::min);
        assert!(min_after >= min_before);
    }

    #[test]
    fn zero_generations_returns_evaluated_initial_population() {
        let mut config = small_config(11);
        config.generations = 0;
        let population = tune(&config).unwrap();
        assert_eq!(population.len(), config.population_size);
        assert!(population
            .members
            .iter()
            .all(|c| c.raw_fitness.len() == 6
                && c.raw_fitness.iter().all(|r| r.len() == config.runs_per_candidate)));
    }

    #[test]
    fn parameter_cache_does_not_change_results() {
        let config = small_config(55);
        let instances = config.instances();
        let cached = tune(&config).unwrap();
        let uncached = tune_impl(&config, |expr, refs| {
            evaluate_candidate(expr, &instances, &config, refs)
        })
        .unwrap();
        assert_eq!(cached.members, uncached.members);
    }

    #[test]
    fn tune_is_deterministic_in_the_seed() {
        let config = small_config(37);
        let a = tune(&config).unwrap();
        let b = tune(&config).unwrap();
        let exprs_a: Vec<String> = a.members.iter().map(|c| c.expr.to_string()).collect();
        let exprs_b: Vec<String> = b.members.iter().map(|c| c.expr.to_string()).collect();
        assert_eq!(exprs_a, exprs_b);
        for (x, y) in a.members.iter().zip(&b.members) {
            assert_eq!(x.raw_fitness, y.raw_fitness);
        }
    }

    #[test]
    fn final_population_is_sorted_by_score() {
        let config = small_config(5);
        let instances = config.instances();
        let refs = ReferenceTable::from_instances(&instances);
        let population = tune(&config).unwrap();
        let scores: Vec<f64> = population.members.iter().map(|c| c.score(&refs)).collect();
        assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn cap_enforced_within_generations() {
        // population 8, cap 0.75 -> at most 6 replacements per generation;
        // verified indirectly: a tune run with an always-dominant injected
        // newcomer stream can replace at most cap members per generation.
        // Here we check the arithmetic only.
        let config = small_config(0);
        let cap = (config.replacement_cap * config.population_size as f64) as usize;
        assert_eq!(cap, 6);
    }

    #[test]
    fn neutral_landscape_shrinks_mean_tree_size() {
        // Under constant fitness the rank-sum gate never fires, so only
        // the smaller-size rule replaces members and the mean tree size
        // cannot grow.
        let mut config = small_config(13);
        config.generations = 0;
        config.population_size = 12;

        let constant_eval = |expr: &Expr, _refs: &mut ReferenceTable| {
            Ok(Candidate {
                size: expr.size(),
                expr: expr.clone(),
                raw_fitness: alloc::vec![alloc::vec![0.5; 4]; 6],
            })
        };

        let initial = tune_impl(&config, constant_eval).unwrap();
        let mean_size_initial: f64 = initial.members.iter().map(|c| c.size as f64).sum::<f64>()
            / initial.len() as f64;

        config.generations = 100;
        let evolved = tune_impl(&config, constant_eval).unwrap();
        let mean_size_final: f64 = evolved.members.iter().map(|c| c.size as f64).sum::<f64>()
            / evolved.len() as f64;

        assert!(
            mean_size_final <= mean_size_initial,
            "mean size grew from {mean_size_initial} to {mean_size_final}"
        );
        // With 100 generations of pure bloat pressure the population
        // should actually collapse to single-terminal trees.
        assert!(mean_size_final <= 2.0, "mean size {mean_size_final}");
    }

    #[test]
    fn reference_values_never_decrease_during_tuning() {
        // Run a tuning step manually and watch the table.
        let config = small_config(21);
        let instances = config.instances();
        let mut refs = ReferenceTable::from_instances(&instances);
        let before: Vec<f64> = (0..refs.len()).map(|i| refs.get(i)).collect();
        let expr = Expr::parse("1", Dialect::Gp).unwrap();
        evaluate_candidate(&expr, &instances, &config, &mut refs).unwrap();
        let after: Vec<f64> = (0..refs.len()).map(|i| refs.get(i)).collect();
        assert!(before.iter().zip(&after).all(|(b, a)| a >= b));
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let budget = Expr::parse("n", Dialect::Budget).unwrap();
        let base = TunerConfig::new(ProblemKind::OneMax, SolverKind::Rls, budget, 0);

        let mut c = base.clone();
        c.crossover_rate = 0.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::RateOutOfRange { name: "crossover_rate", .. })
        ));

        let mut c = base.clone();
        c.tournament_size = 21;
        assert!(matches!(c.validate(), Err(ConfigError::TournamentTooLarge { .. })));

        let mut c = base.clone();
        c.budget = Expr::parse("m", Dialect::Budget).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::UnknownBudgetFeature { .. })));

        let mut c = base.clone();
        c.budget = Expr::parse("n-n", Dialect::Budget).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::BudgetTooSmall { .. })));

        assert!(base.validate().is_ok());
    }
}
