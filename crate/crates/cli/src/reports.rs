//! Report documents: the JSON schemas written by `tune` and `eval`, the
//! evaluation CSV, and the summary merger behind `report`.

use std::collections::BTreeMap;

use exprtune_core::harness::{EliteReport, EvaluationTable};
use exprtune_core::problems::ProblemInstance;
use serde::{Deserialize, Serialize};

use crate::config::{InstanceSpec, TunerConfigFile};

/// Five-number summary of a sample (quantiles by linear interpolation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl SampleSummary {
    pub fn of(samples: &[f64]) -> Self {
        assert!(!samples.is_empty());
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Self {
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
        }
    }
}

/// Linear-interpolation quantile of an already sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let position = q * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let upper = position.ceil() as usize;
    let weight = position - lower as f64;
    sorted[lower] * (1.0 - weight) + sorted[upper] * weight
}

/// One tallied expression in an elite report document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliteEntryDoc {
    pub expression: String,
    pub frequency: usize,
    pub score: SampleSummary,
    /// All normalized samples of the contributing candidates, for
    /// downstream plots.
    pub samples: Vec<f64>,
}

/// The `tune` output document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliteReportDoc {
    /// The exact resolved configuration the protocol ran with.
    pub config: TunerConfigFile,
    pub pool: String,
    pub tuner_runs: usize,
    pub seeds: Vec<u64>,
    pub pool_size: usize,
    pub entries: Vec<EliteEntryDoc>,
}

impl EliteReportDoc {
    pub fn new(config: &TunerConfigFile, report: &EliteReport) -> Self {
        Self {
            config: config.clone(),
            pool: report.pool.name().to_string(),
            tuner_runs: report.tuner_runs,
            seeds: report.seeds.clone(),
            pool_size: report.pool_size,
            entries: report
                .entries
                .iter()
                .map(|e| EliteEntryDoc {
                    expression: e.expression.to_string(),
                    frequency: e.frequency,
                    score: SampleSummary::of(&e.samples),
                    samples: e.samples.clone(),
                })
                .collect(),
        }
    }
}

/// Provenance block of an evaluation document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfigEcho {
    pub solver: String,
    pub budget: String,
    pub runs: usize,
    pub seed: u64,
    pub expressions: Vec<String>,
    pub instances: Vec<InstanceSpec>,
}

/// One (expression, instance) row of the evaluation summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRowDoc {
    pub expression: String,
    pub instance: InstanceSpec,
    pub normalized_fitness: SampleSummary,
}

/// The `eval` output document (summary side; raw samples go to CSV).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDoc {
    pub config: EvaluationConfigEcho,
    pub rows: Vec<EvaluationRowDoc>,
}

impl EvaluationDoc {
    pub fn new(table: &EvaluationTable, instances: &[ProblemInstance]) -> Self {
        let expressions: Vec<String> = {
            let mut seen = Vec::new();
            for cell in &table.cells {
                let text = cell.expression.to_string();
                if !seen.contains(&text) {
                    seen.push(text);
                }
            }
            seen
        };
        Self {
            config: EvaluationConfigEcho {
                solver: table.solver.name().to_string(),
                budget: table.budget_text.clone(),
                runs: table.runs,
                seed: table.seed,
                expressions,
                instances: instances.iter().map(InstanceSpec::for_instance).collect(),
            },
            rows: table
                .cells
                .iter()
                .map(|cell| EvaluationRowDoc {
                    expression: cell.expression.to_string(),
                    instance: InstanceSpec::for_instance(&cell.instance),
                    normalized_fitness: SampleSummary::of(&cell.samples),
                })
                .collect(),
        }
    }
}

/// Feature map rendered as a CSV-safe token like `m=2;n=100`.
pub fn features_token(instance: &ProblemInstance) -> String {
    instance
        .features()
        .iter()
        .map(|(name, value)| format!("{name}={value}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Same rendering for an already-serialized instance spec.
pub fn features_token_of(spec: &InstanceSpec) -> String {
    spec.features
        .iter()
        .map(|(name, value)| format!("{name}={value}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Renders the evaluation CSV: a `#`-prefixed provenance line with the
/// config echo, a header, then one row per (expression, instance, run).
pub fn evaluation_csv(table: &EvaluationTable, echo: &EvaluationConfigEcho) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&serde_json::to_string(echo).expect("echo serializes"));
    out.push('\n');
    out.push_str("expression,instance_features,run_index,normalized_fitness\n");
    for cell in &table.cells {
        let features = features_token(&cell.instance);
        for (run_index, sample) in cell.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                cell.expression, features, run_index, sample
            ));
        }
    }
    out
}

/// The `report` output: previously written documents merged into one
/// summary, keyed by their source file names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MergedSummaryDoc {
    pub elites: BTreeMap<String, EliteReportDoc>,
    pub evaluations: BTreeMap<String, EvaluationDoc>,
}
