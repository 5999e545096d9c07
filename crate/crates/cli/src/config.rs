//! Configuration and instance-set files.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use exprtune_core::expr::{Dialect, Expr};
use exprtune_core::problems::{ProblemInstance, ProblemKind};
use exprtune_core::solvers::SolverKind;
use exprtune_core::TunerConfig;
use serde::{Deserialize, Serialize};

fn d_generations() -> usize {
    100
}
fn d_population_size() -> usize {
    20
}
fn d_tournament_size() -> usize {
    5
}
fn d_replacement_cap() -> f64 {
    0.75
}
fn d_mutation_probability() -> f64 {
    0.2
}
fn d_crossover_rate() -> f64 {
    0.8
}
fn d_runs() -> usize {
    10
}
fn d_alpha() -> f64 {
    0.02
}
fn d_max_depth() -> usize {
    8
}

/// The on-disk tuner configuration. Field names are the file format;
/// everything except `problem`, `solver` and `budget` has the standard
/// default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunerConfigFile {
    pub problem: String,
    pub solver: String,
    /// Budget formula in the budget dialect, e.g. `"e*n*ln(n)"`.
    pub budget: String,
    #[serde(default = "d_generations")]
    pub generations: usize,
    #[serde(default = "d_population_size")]
    pub population_size: usize,
    #[serde(default = "d_tournament_size")]
    pub tournament_size: usize,
    #[serde(default = "d_replacement_cap")]
    pub replacement_cap: f64,
    #[serde(default = "d_mutation_probability")]
    pub mutation_probability: f64,
    #[serde(default = "d_crossover_rate")]
    pub crossover_rate: f64,
    /// Independent solver runs per (candidate, instance).
    #[serde(default = "d_runs")]
    pub runs: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_max_depth")]
    pub max_depth: usize,
}

impl TunerConfigFile {
    /// Parses a configuration document, applying `key=value` overrides
    /// before validation. Override values are parsed as JSON scalars
    /// (numbers, strings); bare words become strings.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).context("configuration is not valid JSON")?;
        let object = value
            .as_object_mut()
            .ok_or_else(|| anyhow!("configuration must be a JSON object"))?;
        for entry in overrides {
            let (key, raw) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("override `{entry}` is not of the form key=value"))?;
            let parsed: serde_json::Value = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            object.insert(key.to_string(), parsed);
        }
        let file: TunerConfigFile =
            serde_json::from_value(value).context("configuration has invalid fields")?;
        Ok(file)
    }

    pub fn problem_kind(&self) -> Result<ProblemKind> {
        ProblemKind::from_name(&self.problem)
            .ok_or_else(|| anyhow!("unknown problem `{}` (expected onemax, binvalue, leadingones or jump)", self.problem))
    }

    pub fn solver_kind(&self) -> Result<SolverKind> {
        SolverKind::from_name(&self.solver)
            .ok_or_else(|| anyhow!("unknown solver `{}` (expected ea or rls)", self.solver))
    }

    /// Builds and validates the engine configuration.
    pub fn to_engine(&self) -> Result<TunerConfig> {
        let budget = Expr::parse(&self.budget, Dialect::Budget)
            .map_err(|e| anyhow!("budget expression: {e}"))?;
        let mut config = TunerConfig::new(self.problem_kind()?, self.solver_kind()?, budget, self.seed);
        config.generations = self.generations;
        config.population_size = self.population_size;
        config.tournament_size = self.tournament_size;
        config.replacement_cap = self.replacement_cap;
        config.mutation_probability = self.mutation_probability;
        config.crossover_rate = self.crossover_rate;
        config.runs_per_candidate = self.runs;
        config.alpha = self.alpha;
        config.max_depth = self.max_depth;
        config.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(config)
    }
}

/// One instance in an instance-set file:
/// `{"kind": "jump", "features": {"m": 2, "n": 100}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: String,
    pub features: BTreeMap<String, f64>,
}

impl InstanceSpec {
    pub fn for_instance(instance: &ProblemInstance) -> Self {
        Self {
            kind: instance.kind().name().to_string(),
            features: instance.features().iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let kind = ProblemKind::from_name(&self.kind)
            .ok_or_else(|| anyhow!("unknown problem kind `{}`", self.kind))?;
        let feature = |name: &str| -> Result<usize> {
            let v = *self
                .features
                .get(name)
                .ok_or_else(|| anyhow!("{} instance needs feature `{name}`", self.kind))?;
            if v < 1.0 || v.fract() != 0.0 {
                bail!("feature {name}={v} must be a positive integer");
            }
            Ok(v as usize)
        };
        for name in self.features.keys() {
            if !kind.feature_names().contains(&name.as_str()) {
                bail!("{} instances do not take feature `{name}`", self.kind);
            }
        }
        let n = feature("n")?;
        let instance = if kind == ProblemKind::Jump {
            ProblemInstance::jump(feature("m")?, n).map_err(|e| anyhow!("{e}"))?
        } else {
            ProblemInstance::new(kind, n).map_err(|e| anyhow!("{e}"))?
        };
        Ok(instance)
    }
}

/// Parses an instance-set file (a JSON array of [`InstanceSpec`]).
pub fn parse_instance_set(text: &str) -> Result<Vec<ProblemInstance>> {
    let specs: Vec<InstanceSpec> =
        serde_json::from_str(text).context("instance set is not a JSON array of instances")?;
    specs.iter().map(InstanceSpec::to_instance).collect()
}
