//! Fixed-budget stochastic target algorithms.
//!
//! Two single-trajectory hill climbers are provided:
//!
//! - the (1+1) EA with standard bit mutation: every bit flips
//!   independently with probability `mu`, implemented by drawing the flip
//!   count from Bin(n, mu) and then choosing that many distinct positions
//!   (distributionally identical, and much faster for small `mu · n`);
//! - RLS(k), which always flips exactly `k` distinct uniformly chosen
//!   positions.
//!
//! Both accept offspring with fitness greater than *or equal to* the
//! parent (the usual plateau rule) and stop early once the instance
//! optimum is reached. The budget counts fitness evaluations including the
//! one spent on the random initial point.
//!
//! A single run is sequential; distinct runs are independent given
//! derived seeds and may execute in parallel.

use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::problems::{Bitstring, ProblemInstance};
use crate::rng::{stream_from_seed, RandomStream};

/// Marker budget for runs that should continue until the optimum is hit
/// (used by the runtime oracles). Only meaningful for configurations that
/// reach the optimum with probability 1.
pub const UNLIMITED_BUDGET: u64 = u64::MAX;

/// The target algorithm family. The parameter interpretation differs:
/// `mu` is a bit-flip probability for the EA, `k` an exact flip count for
/// RLS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolverKind {
    /// (1+1) EA with standard bit mutation rate `mu`, `0 < mu <= 1`.
    OneOneEa,
    /// Randomized local search with fixed mutation strength `k`,
    /// `1 <= k <= n`.
    Rls,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::OneOneEa => "ea",
            SolverKind::Rls => "rls",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ea" => Some(SolverKind::OneOneEa),
            "rls" => Some(SolverKind::Rls),
            _ => None,
        }
    }

    /// The name of the tuned parameter (`mu` or `k`).
    pub fn parameter_name(self) -> &'static str {
        match self {
            SolverKind::OneOneEa => "mu",
            SolverKind::Rls => "k",
        }
    }

    /// Clamps a raw expression value into the solver's parameter domain
    /// for an instance with `n` bits: `mu` into `[1/n^2, 1]`, `k` rounded
    /// and clamped into `[1, n]`. Keeps every evolved expression usable as
    /// a parameter, so the search space has no hard cliffs.
    pub fn clamp_param(self, raw: f64, n: usize) -> f64 {
        let n = n as f64;
        match self {
            SolverKind::OneOneEa => raw.clamp(1.0 / (n * n), 1.0),
            SolverKind::Rls => libm::round(raw).clamp(1.0, n),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one fixed-budget run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunResult {
    /// Best (= final, by elitism) fitness reached within the budget.
    pub best_fitness: f64,
    /// Fitness evaluations spent, including the initial point.
    pub evaluations_used: u64,
    /// Whether the instance optimum was reached.
    pub hit_optimum: bool,
    /// Evaluation index at which the optimum was first evaluated; present
    /// iff `hit_optimum`.
    pub hitting_time: Option<u64>,
}

/// Invalid run request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverError {
    /// The budget must allow at least the initial evaluation.
    BudgetTooSmall,
    /// Parameter outside the solver's domain for this instance.
    ParamOutOfDomain { name: &'static str, value: f64 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::BudgetTooSmall => write!(f, "budget must be at least 1 evaluation"),
            SolverError::ParamOutOfDomain { name, value } => {
                write!(f, "parameter {name}={value} outside the solver domain")
            }
        }
    }
}

impl core::error::Error for SolverError {}

/// Draws from Bin(n, p) exactly; the EA's per-offspring flip count is one
/// such draw (standard bit mutation flips each bit independently, so the
/// flip count is binomial and the positions are uniform distinct — the
/// two-step implementation is distributionally identical).
///
/// Uses CDF inversion (expected O(1 + n·p) work) when the starting mass
/// does not underflow, the symmetry Bin(n, p) = n - Bin(n, 1-p) to keep
/// p <= 1/2, and falls back to per-trial counting in the extreme regime
/// where inversion would underflow.
pub fn sample_binomial(n: u64, p: f64, rng: &mut RandomStream) -> u64 {
    if p <= 0.0 || n == 0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let (q, flipped) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let ln_q0 = n as f64 * libm::log1p(-q);
    let k = if ln_q0 > -700.0 {
        let ratio = q / (1.0 - q);
        let mut pmf = libm::exp(ln_q0);
        let mut cdf = pmf;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf && k < n {
            k += 1;
            pmf *= ratio * (n - k + 1) as f64 / k as f64;
            cdf += pmf;
        }
        k
    } else {
        (0..n).filter(|_| rng.random::<f64>() < q).count() as u64
    };
    if flipped {
        n - k
    } else {
        k
    }
}

/// Draws from the hypergeometric distribution: the number of successes
/// among `draws` distinct uniform picks from a population of `total`
/// items containing `successes` marked ones.
///
/// The three exact identities
///
/// - successes among the *unpicked* items are `successes - X` with
///   `total - draws` picks,
/// - failures among the picked items are `draws - X` with the classes
///   swapped,
/// - the roles of `draws` and `successes` are symmetric,
///
/// reduce the work to `O(min(draws, total-draws, successes,
/// total-successes))` sequential draws.
pub(crate) fn sample_hypergeometric(
    total: u64,
    successes: u64,
    draws: u64,
    rng: &mut RandomStream,
) -> u64 {
    debug_assert!(successes <= total && draws <= total);
    if draws == 0 || successes == 0 {
        return 0;
    }
    if draws == total {
        return successes;
    }
    if successes == total {
        return draws;
    }
    if 2 * draws > total {
        return successes - sample_hypergeometric(total, successes, total - draws, rng);
    }
    if 2 * successes > total {
        return draws - sample_hypergeometric(total, total - successes, draws, rng);
    }
    let (marked, picks) = if draws > successes {
        (draws, successes)
    } else {
        (successes, draws)
    };
    let mut hits = 0u64;
    let mut left_marked = marked;
    let mut left_total = total;
    for _ in 0..picks {
        if rng.random::<f64>() * (left_total as f64) < left_marked as f64 {
            hits += 1;
            left_marked -= 1;
        }
        left_total -= 1;
    }
    hits
}

/// Ones count of a uniformly random bitstring of length `n`, drawn
/// without materialising the string (popcount of random words).
fn random_ones_count(n: usize, rng: &mut RandomStream) -> usize {
    let mut ones = 0usize;
    let full_words = n / 64;
    for _ in 0..full_words {
        ones += rng.random::<u64>().count_ones() as usize;
    }
    let rest = n % 64;
    if rest > 0 {
        let word: u64 = rng.random();
        ones += (word & ((1u64 << rest) - 1)).count_ones() as usize;
    }
    ones
}

/// Uniform sampling of `k` distinct positions out of `n` via partial
/// Fisher-Yates over a persistent index buffer (O(k) per draw, no
/// per-draw allocation).
struct PositionSampler {
    indices: Vec<u32>,
}

impl PositionSampler {
    fn new(n: usize) -> Self {
        Self {
            indices: (0..n as u32).collect(),
        }
    }

    fn sample_into(&mut self, k: usize, rng: &mut RandomStream, out: &mut Vec<u32>) {
        let n = self.indices.len();
        debug_assert!(k <= n);
        out.clear();
        for i in 0..k {
            let j = i + rng.random_range(0..n - i);
            self.indices.swap(i, j);
            out.push(self.indices[i]);
        }
    }
}

/// Fitness via the incrementally maintained ones count where the problem
/// allows it; always equal to `instance.fitness(x)`.
fn state_fitness(instance: &ProblemInstance, x: &Bitstring, ones: usize) -> f64 {
    debug_assert_eq!(ones, x.count_ones());
    instance.fitness_from_state(x, ones)
}

fn validate(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
) -> Result<(), SolverError> {
    if budget < 1 {
        return Err(SolverError::BudgetTooSmall);
    }
    let name = kind.parameter_name();
    match kind {
        // mu = 0 is degenerate but allowed (useful in tests); the engine
        // clamps to strictly positive rates.
        SolverKind::OneOneEa if !(0.0..=1.0).contains(&param) => {
            Err(SolverError::ParamOutOfDomain { name, value: param })
        }
        SolverKind::Rls
            if param < 1.0 || param > instance.n() as f64 || libm::round(param) != param =>
        {
            Err(SolverError::ParamOutOfDomain { name, value: param })
        }
        _ => Ok(()),
    }
}

/// Bookkeeping shared by both search-state representations.
struct RunAccounting<'t> {
    optimum: f64,
    budget: u64,
    evals: u64,
    best: f64,
    hit: bool,
    hitting_time: Option<u64>,
    trace: Option<&'t mut Vec<(u64, f64)>>,
}

impl<'t> RunAccounting<'t> {
    fn start(optimum: f64, budget: u64, f0: f64, trace: Option<&'t mut Vec<(u64, f64)>>) -> Self {
        let mut acc = Self {
            optimum,
            budget,
            evals: 1,
            best: f0,
            hit: false,
            hitting_time: None,
            trace,
        };
        if f0 == optimum {
            acc.hit = true;
            acc.hitting_time = Some(1);
        }
        acc.record();
        acc
    }

    fn record(&mut self) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.push((self.evals, self.best));
        }
    }

    fn keep_going(&self) -> bool {
        !self.hit && self.evals < self.budget
    }

    /// Accounts one offspring evaluation; returns whether it is accepted.
    fn offspring(&mut self, fy: f64) -> bool {
        self.evals += 1;
        let accepted = fy >= self.best;
        if accepted {
            self.best = fy;
            if fy == self.optimum {
                self.hit = true;
                self.hitting_time = Some(self.evals);
            }
        }
        self.record();
        accepted
    }

    fn finish(self) -> RunResult {
        RunResult {
            best_fitness: self.best,
            evaluations_used: self.evals,
            hit_optimum: self.hit,
            hitting_time: self.hitting_time,
        }
    }
}

/// Mutation strength for one offspring.
fn flip_count(kind: SolverKind, param: f64, n: usize, rng: &mut RandomStream) -> usize {
    match kind {
        SolverKind::Rls => param as usize,
        SolverKind::OneOneEa => sample_binomial(n as u64, param, rng) as usize,
    }
}

/// Search over explicit bitstrings (general problems).
fn run_bits(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    rng: &mut RandomStream,
    trace: Option<&mut Vec<(u64, f64)>>,
) -> RunResult {
    let n = instance.n();
    let mut x = Bitstring::random(n, rng);
    let mut ones = x.count_ones();
    let f0 = state_fitness(instance, &x, ones);
    let mut acc = RunAccounting::start(instance.optimum(), budget, f0, trace);

    let mut sampler = PositionSampler::new(n);
    let mut flips: Vec<u32> = Vec::new();
    while acc.keep_going() {
        let k = flip_count(kind, param, n, rng);
        sampler.sample_into(k, rng, &mut flips);
        let mut offspring_ones = ones;
        for &i in &flips {
            if x.flip(i as usize) {
                offspring_ones += 1;
            } else {
                offspring_ones -= 1;
            }
        }
        let fy = state_fitness(instance, &x, offspring_ones);
        if acc.offspring(fy) {
            ones = offspring_ones;
        } else {
            for &i in &flips {
                x.flip(i as usize);
            }
        }
    }
    acc.finish()
}

/// Search over the ones count alone.
///
/// For problems whose fitness depends on the bitstring only through its
/// number of ones, uniform distinct-position mutation makes the state
/// exchangeable: the ones count is a Markov chain whose transition flips
/// `X ~ Hypergeometric(n, ones, k)` one-bits (and `k - X` zero-bits).
/// The induced law of every run statistic is identical to the explicit
/// bitstring search, at O(1)-ish cost per evaluation independent of `k`.
fn run_ones(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    rng: &mut RandomStream,
    trace: Option<&mut Vec<(u64, f64)>>,
) -> RunResult {
    let n = instance.n();
    let mut ones = random_ones_count(n, rng);
    let f0 = instance.fitness_from_ones(ones);
    let mut acc = RunAccounting::start(instance.optimum(), budget, f0, trace);

    while acc.keep_going() {
        let k = flip_count(kind, param, n, rng);
        let ones_flipped = sample_hypergeometric(n as u64, ones as u64, k as u64, rng) as usize;
        let offspring_ones = ones - ones_flipped + (k - ones_flipped);
        let fy = instance.fitness_from_ones(offspring_ones);
        if acc.offspring(fy) {
            ones = offspring_ones;
        }
    }
    acc.finish()
}

fn run_impl(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    rng: &mut RandomStream,
    trace: Option<&mut Vec<(u64, f64)>>,
) -> Result<RunResult, SolverError> {
    validate(kind, instance, param, budget)?;
    if instance.fitness_is_ones_determined() {
        Ok(run_ones(kind, instance, param, budget, rng, trace))
    } else {
        Ok(run_bits(kind, instance, param, budget, rng, trace))
    }
}

/// One run of the target algorithm on `instance` with the given parameter
/// (`mu` for the EA, `k` for RLS) and evaluation budget.
pub fn run(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    rng: &mut RandomStream,
) -> Result<RunResult, SolverError> {
    run_impl(kind, instance, param, budget, rng, None)
}

/// Like [`run`], additionally returning the trajectory of
/// `(evaluation_index, best_fitness)` pairs. Diagnostic/test use.
pub fn run_traced(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    rng: &mut RandomStream,
) -> Result<(RunResult, Vec<(u64, f64)>), SolverError> {
    let mut trace = Vec::new();
    let result = run_impl(kind, instance, param, budget, rng, Some(&mut trace))?;
    Ok((result, trace))
}

/// Renders a trace as CSV lines `eval_index,best_fitness`.
pub fn trace_csv(trace: &[(u64, f64)]) -> alloc::string::String {
    use core::fmt::Write;
    let mut out = alloc::string::String::from("eval_index,best_fitness\n");
    for &(index, best) in trace {
        let _ = writeln!(out, "{index},{best}");
    }
    out
}

/// `runs` independent runs with seeds `seed_base ^ run_index`. The result
/// list is identical to performing the runs sequentially, regardless of
/// any execution order a caller might choose for the derived seeds.
pub fn run_many(
    kind: SolverKind,
    instance: &ProblemInstance,
    param: f64,
    budget: u64,
    runs: usize,
    seed_base: u64,
) -> Result<Vec<RunResult>, SolverError> {
    (0..runs)
        .map(|r| {
            let mut rng = stream_from_seed(seed_base ^ r as u64);
            run(kind, instance, param, budget, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;

    fn onemax(n: usize) -> ProblemInstance {
        ProblemInstance::new(ProblemKind::OneMax, n).unwrap()
    }

    fn leadingones(n: usize) -> ProblemInstance {
        ProblemInstance::new(ProblemKind::LeadingOnes, n).unwrap()
    }

    fn binvalue(n: usize) -> ProblemInstance {
        ProblemInstance::new(ProblemKind::BinValue, n).unwrap()
    }

    #[test]
    fn validation_errors() {
        let inst = onemax(10);
        let mut rng = stream_from_seed(0);
        assert_eq!(
            run(SolverKind::Rls, &inst, 1.0, 0, &mut rng).unwrap_err(),
            SolverError::BudgetTooSmall
        );
        assert!(matches!(
            run(SolverKind::Rls, &inst, 11.0, 10, &mut rng),
            Err(SolverError::ParamOutOfDomain { name: "k", .. })
        ));
        assert!(matches!(
            run(SolverKind::Rls, &inst, 1.5, 10, &mut rng),
            Err(SolverError::ParamOutOfDomain { name: "k", .. })
        ));
        assert!(matches!(
            run(SolverKind::OneOneEa, &inst, 1.1, 10, &mut rng),
            Err(SolverError::ParamOutOfDomain { name: "mu", .. })
        ));
    }

    #[test]
    fn ea_zero_rate_keeps_initial_fitness() {
        let inst = onemax(40);
        for seed in 0..20 {
            let mut rng = stream_from_seed(seed);
            let (result, trace) =
                run_traced(SolverKind::OneOneEa, &inst, 0.0, 25, &mut rng).unwrap();
            assert_eq!(result.best_fitness, trace[0].1);
            assert_eq!(result.evaluations_used, 25);
        }
    }

    #[test]
    fn rls_full_strength_on_binvalue_sees_two_points() {
        // With k = n the only reachable points are the initial string and
        // its complement, whose BinValue fitnesses sum to 2^n - 1.
        let n = 30;
        let inst = binvalue(n);
        let optimum = inst.optimum();
        for seed in 0..100 {
            let mut rng = stream_from_seed(seed);
            let (result, trace) =
                run_traced(SolverKind::Rls, &inst, n as f64, 50, &mut rng).unwrap();
            let f0 = trace[0].1;
            let f1 = optimum - f0; // complement fitness, exact for n <= 53
            let expected_best = f0.max(f1);
            assert_eq!(trace[1].1, expected_best);
            assert_eq!(result.best_fitness, expected_best);
            // No further improvement after the second evaluation.
            assert!(trace[2..].iter().all(|&(_, f)| f == expected_best));
        }
    }

    #[test]
    fn elitism_trace_is_non_decreasing() {
        let cases: [(SolverKind, ProblemInstance, f64); 4] = [
            (SolverKind::OneOneEa, onemax(60), 1.0 / 60.0),
            (SolverKind::Rls, onemax(60), 2.0),
            (SolverKind::OneOneEa, leadingones(40), 0.025),
            (SolverKind::Rls, binvalue(70), 3.0),
        ];
        for (kind, inst, param) in cases {
            for seed in 0..10 {
                let mut rng = stream_from_seed(seed);
                let (_, trace) = run_traced(kind, &inst, param, 400, &mut rng).unwrap();
                assert!(trace.windows(2).all(|w| w[0].1 <= w[1].1));
                assert!(trace.windows(2).all(|w| w[0].0 + 1 == w[1].0));
            }
        }
    }

    #[test]
    fn evaluation_accounting() {
        let inst = onemax(50);
        let mut rng = stream_from_seed(3);
        let result = run(SolverKind::Rls, &inst, 1.0, 1, &mut rng).unwrap();
        assert_eq!(result.evaluations_used, 1);
        for budget in [5u64, 50, 5000] {
            let mut rng = stream_from_seed(4);
            let result = run(SolverKind::Rls, &inst, 1.0, budget, &mut rng).unwrap();
            assert!(result.evaluations_used <= budget);
            assert_eq!(result.hit_optimum, result.best_fitness == inst.optimum());
            assert_eq!(result.hit_optimum, result.hitting_time.is_some());
            if let Some(t) = result.hitting_time {
                assert_eq!(t, result.evaluations_used);
            }
        }
    }

    #[test]
    fn ea_standard_rate_hits_onemax_with_decent_probability() {
        // Pilot-established bound: with budget floor(e n ln n) the EA at
        // mu = 1/n reaches the OneMax optimum in at least half of 200
        // seeded runs (measured ~0.75-0.8).
        let n = 100usize;
        let inst = onemax(n);
        let nf = n as f64;
        let budget = (crate::expr::EULER * nf * nf.ln()) as u64;
        assert_eq!(budget, 1251);
        let results =
            run_many(SolverKind::OneOneEa, &inst, 1.0 / nf, budget, 200, 0xEA11).unwrap();
        let fraction = results.iter().filter(|r| r.hit_optimum).count() as f64 / 200.0;
        assert!(fraction >= 0.5, "hit fraction {fraction}");
    }

    #[test]
    fn trace_csv_renders_lines() {
        let text = trace_csv(&[(1, 3.0), (2, 5.0)]);
        assert_eq!(text, "eval_index,best_fitness\n1,3\n2,5\n");
    }

    #[test]
    fn run_many_is_reproducible() {
        let inst = onemax(30);
        let a = run_many(SolverKind::OneOneEa, &inst, 1.0 / 30.0, 200, 10, 99).unwrap();
        let b = run_many(SolverKind::OneOneEa, &inst, 1.0 / 30.0, 200, 10, 99).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        // Each entry matches an individual run with the derived seed.
        let mut rng = stream_from_seed(99 ^ 3);
        let third = run(SolverKind::OneOneEa, &inst, 1.0 / 30.0, 200, &mut rng).unwrap();
        assert_eq!(a[3], third);
    }

    #[test]
    fn position_sampler_draws_distinct_positions() {
        let mut rng = stream_from_seed(5);
        let mut sampler = PositionSampler::new(80);
        let mut out = Vec::new();
        for k in [1usize, 2, 7, 40, 80] {
            for _ in 0..50 {
                sampler.sample_into(k, &mut rng, &mut out);
                assert_eq!(out.len(), k);
                let mut sorted = out.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), k, "positions must be pairwise distinct");
                assert!(sorted.iter().all(|&i| (i as usize) < 80));
            }
        }
    }

    #[test]
    fn rls_offspring_at_exact_hamming_distance() {
        // Flipping k distinct positions moves the offspring exactly k away.
        let inst = onemax(64);
        for k in [1.0, 3.0, 64.0] {
            let mut rng = stream_from_seed(6);
            // budget 2: initial + one mutation; compare via the ones delta
            // parity instead of internals: |ones(y) - ones(x)| <= k and
            // ones changes by k mod 2.
            let (result, trace) = run_traced(SolverKind::Rls, &inst, k, 2, &mut rng).unwrap();
            let _ = result;
            let delta = (trace[1].1 - trace[0].1).abs() as usize;
            assert!(delta <= k as usize);
            // fitness recorded is best-so-far; accepted/rejected parity is
            // checked through the sampler test above.
        }
    }

    #[test]
    fn binomial_moments_inversion_branch() {
        let mut rng = stream_from_seed(7);
        let (n, p) = (20u64, 0.1f64);
        let samples = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let k = sample_binomial(n, p, &mut rng) as f64;
            sum += k;
            sum_sq += k * k;
        }
        let mean = sum / samples as f64;
        let var = sum_sq / samples as f64 - mean * mean;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
        assert!((var - 1.8).abs() < 0.05, "var {var}");
    }

    #[test]
    fn binomial_moments_counting_branch() {
        // n * |log1p(-q)| >= 700 forces the per-trial branch.
        let mut rng = stream_from_seed(8);
        let (n, p) = (3000u64, 0.3f64);
        assert!((n as f64) * libm::log1p(-0.3) <= -700.0);
        let samples = 2_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let k = sample_binomial(n, p, &mut rng) as f64;
            sum += k;
            sum_sq += k * k;
        }
        let mean = sum / samples as f64;
        let var = sum_sq / samples as f64 - mean * mean;
        let expect_mean = 900.0;
        let expect_var = 630.0;
        assert!((mean - expect_mean).abs() < 2.0, "mean {mean}");
        assert!((var / expect_var - 1.0).abs() < 0.15, "var {var}");
    }

    #[test]
    fn binomial_symmetry_branch() {
        let mut rng = stream_from_seed(9);
        let (n, p) = (50u64, 0.9f64);
        let samples = 100_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            sum += sample_binomial(n, p, &mut rng) as f64;
        }
        let mean = sum / samples as f64;
        assert!((mean - 45.0).abs() < 0.05, "mean {mean}");
        assert_eq!(sample_binomial(10, 1.0, &mut rng), 10);
        assert_eq!(sample_binomial(10, 0.0, &mut rng), 0);
    }

    #[test]
    fn ea_flip_counts_match_binomial_chi_square() {
        // Smaller companion to the acceptance-level check: Bin(20, 0.1)
        // against exact probabilities, chi-square at alpha = 0.01.
        let mut rng = stream_from_seed(10);
        let (n, p) = (20usize, 0.1f64);
        let samples = 100_000usize;
        let mut counts = [0u64; 21];
        for _ in 0..samples {
            counts[sample_binomial(n as u64, p, &mut rng) as usize] += 1;
        }
        // Exact pmf via the multiplicative recurrence.
        let mut pmf = alloc::vec![0.0f64; n + 1];
        pmf[0] = libm::pow(1.0 - p, n as f64);
        for k in 1..=n {
            pmf[k] = pmf[k - 1] * (p / (1.0 - p)) * (n - k + 1) as f64 / k as f64;
        }
        // Merge k >= 9 where expected counts drop below 5.
        let mut chi2 = 0.0;
        let mut tail_obs = 0.0;
        let mut tail_exp = 0.0;
        for k in 0..=n {
            let expected = pmf[k] * samples as f64;
            if k < 9 {
                let obs = counts[k] as f64;
                chi2 += (obs - expected) * (obs - expected) / expected;
            } else {
                tail_obs += counts[k] as f64;
                tail_exp += expected;
            }
        }
        chi2 += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
        // 10 cells -> 9 degrees of freedom; critical value at 0.01.
        assert!(chi2 < 21.666, "chi-square statistic {chi2}");
    }

    /// Exact hypergeometric pmf via multiplicative binomial ratios.
    fn hypergeom_pmf(total: u64, successes: u64, draws: u64, x: u64) -> f64 {
        fn ln_choose(n: u64, k: u64) -> f64 {
            if k > n {
                return f64::NEG_INFINITY;
            }
            let mut acc = 0.0f64;
            for i in 0..k {
                acc += libm::log((n - i) as f64) - libm::log((i + 1) as f64);
            }
            acc
        }
        let ln = ln_choose(successes, x) + ln_choose(total - successes, draws - x)
            - ln_choose(total, draws);
        libm::exp(ln)
    }

    #[test]
    fn hypergeometric_matches_exact_pmf() {
        // Covers every reduction branch: large draws, large success class,
        // draws > successes, and the plain sequential case.
        let cases = [
            (10u64, 3u64, 2u64),
            (10, 3, 8),  // complement-of-draws branch
            (10, 8, 3),  // class-swap branch
            (10, 2, 5),  // draws > successes branch
            (12, 6, 6),
            (7, 7, 3),   // all successes
            (7, 0, 3),   // no successes
        ];
        let mut rng = stream_from_seed(12);
        for (total, successes, draws) in cases {
            let samples = 60_000usize;
            let mut counts = alloc::vec![0u64; (draws + 1) as usize];
            for _ in 0..samples {
                let x = sample_hypergeometric(total, successes, draws, &mut rng);
                counts[x as usize] += 1;
            }
            for (x, &count) in counts.iter().enumerate() {
                let expected = hypergeom_pmf(total, successes, draws, x as u64);
                let freq = count as f64 / samples as f64;
                assert!(
                    (freq - expected).abs() < 0.01,
                    "Hyp({total},{successes},{draws}) at {x}: {freq} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn ones_chain_matches_bitstring_law() {
        // The exchangeability shortcut must reproduce the bitstring
        // search in distribution. Compare summary statistics over many
        // seeded runs for both representations.
        let cases: [(SolverKind, ProblemInstance, f64, u64); 3] = [
            (SolverKind::Rls, onemax(50), 2.0, 150),
            (SolverKind::OneOneEa, onemax(50), 0.02, 150),
            (SolverKind::Rls, ProblemInstance::jump(2, 30).unwrap(), 1.0, 120),
        ];
        for (kind, inst, param, budget) in cases {
            let runs = 4000usize;
            let mut best = [0.0f64; 2];
            let mut evals = [0.0f64; 2];
            for r in 0..runs {
                let mut rng_a = stream_from_seed(1000 + r as u64);
                let a = run_ones(kind, &inst, param, budget, &mut rng_a, None);
                let mut rng_b = stream_from_seed(777_000 + r as u64);
                let b = run_bits(kind, &inst, param, budget, &mut rng_b, None);
                best[0] += a.best_fitness;
                best[1] += b.best_fitness;
                evals[0] += a.evaluations_used as f64;
                evals[1] += b.evaluations_used as f64;
            }
            let mean_best = [best[0] / runs as f64, best[1] / runs as f64];
            let mean_evals = [evals[0] / runs as f64, evals[1] / runs as f64];
            assert!(
                (mean_best[0] - mean_best[1]).abs() / mean_best[1] < 0.02,
                "{kind:?} {inst}: mean best {mean_best:?}"
            );
            assert!(
                (mean_evals[0] - mean_evals[1]).abs() / mean_evals[1] < 0.05,
                "{kind:?} {inst}: mean evals {mean_evals:?}"
            );
        }
    }

    #[test]
    fn fast_fitness_equals_reference_fitness() {
        let mut rng = stream_from_seed(11);
        let instances = [
            onemax(77),
            binvalue(77),
            leadingones(77),
            ProblemInstance::jump(3, 77).unwrap(),
        ];
        for inst in &instances {
            for _ in 0..50 {
                let x = Bitstring::random(77, &mut rng);
                let ones = x.count_ones();
                assert_eq!(state_fitness(inst, &x, ones), inst.fitness(&x).unwrap());
            }
        }
    }
}
