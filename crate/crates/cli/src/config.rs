//! Run configuration: JSON schema, strict key checking and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use scarce_core::agents::AgentParams;
use scarce_core::engine::EngineConfig;
use scarce_core::evaluate::PoaConfig;
use scarce_core::metrics::MetricWeights;
use scarce_core::policy::{equal_shares, validate_policy, Policy, Preset};
use scarce_core::scenario::{Scenario, ScenarioSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Rule,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Participant entry rule x resource partition, 9 policies.
    #[default]
    EntryResource,
    /// The five named presets.
    Presets,
    /// Exactly the policies listed under `sweep.policies`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridKind,
    /// Base policy preset for the entry/resource grid.
    pub base: Option<Preset>,
    pub policies: Vec<Policy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub max_attempts: usize,
    pub backoff_ms: u64,
    pub in_flight: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self { max_attempts: 3, backoff_ms: 250, in_flight: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Named(String),
    Custom(BTreeMap<String, f64>),
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec::Named("satisfaction".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario_path: Option<PathBuf>,
    pub scenario_spec: Option<ScenarioSpec>,
    /// Seed of the scenario generator; independent of the run seeds.
    pub scenario_seed: u64,
    pub policy: Option<Policy>,
    pub preset: Option<Preset>,
    pub sweep: SweepConfig,
    pub backend: BackendKind,
    pub agent: AgentParams,
    pub llm: LlmConfig,
    pub seeds: Vec<u64>,
    pub max_rounds: Option<u32>,
    pub engine: EngineConfig,
    pub weights: WeightsSpec,
    pub optimize: PoaConfig,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario_path: None,
            scenario_spec: None,
            scenario_seed: 0,
            policy: None,
            preset: None,
            sweep: SweepConfig::default(),
            backend: BackendKind::Rule,
            agent: AgentParams::default(),
            llm: LlmConfig::default(),
            seeds: vec![0],
            max_rounds: None,
            engine: EngineConfig::default(),
            weights: WeightsSpec::default(),
            optimize: PoaConfig::default(),
            out: None,
            jobs: None,
        }
    }
}

/// Shape every accepted key can take; `null` accepts any value.
fn schema() -> Value {
    let policy = serde_json::to_value(Preset::Beijing.policy()).expect("policy serializes");
    json!({
        "scenario_path": null,
        "scenario_spec": serde_json::to_value(ScenarioSpec::default()).expect("spec serializes"),
        "scenario_seed": null,
        "policy": policy,
        "preset": null,
        "sweep": { "grid": null, "base": null, "policies": [policy] },
        "backend": null,
        "agent": serde_json::to_value(AgentParams::default()).expect("params serialize"),
        "llm": serde_json::to_value(LlmConfig::default()).expect("llm serializes"),
        "seeds": null,
        "max_rounds": null,
        "engine": serde_json::to_value(EngineConfig::default()).expect("engine serializes"),
        "weights": null,
        "optimize": serde_json::to_value(PoaConfig::default()).expect("poa serializes"),
        "out": null,
        "jobs": null,
    })
}

fn collect_unknown(value: &Value, shape: &Value, path: &str, out: &mut Vec<String>) {
    match (value, shape) {
        (Value::Object(obj), Value::Object(known)) => {
            for (k, v) in obj {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match known.get(k) {
                    Some(s) => collect_unknown(v, s, &here, out),
                    None => out.push(here),
                }
            }
        }
        (Value::Array(items), Value::Array(shapes)) if !shapes.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                collect_unknown(v, &shapes[0], &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Every key path in `value` that the schema does not know.
pub fn unknown_keys(value: &Value) -> Vec<String> {
    let mut out = Vec::new();
    collect_unknown(value, &schema(), "", &mut out);
    out
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config is not valid JSON: {e}")))?;
    if !value.is_object() {
        return Err(CliError::Invalid("config must be a JSON object".into()));
    }
    let unknown = unknown_keys(&value);
    if !unknown.is_empty() {
        return Err(CliError::Invalid(format!("unknown config keys: {}", unknown.join(", "))));
    }
    let config: RunConfig = serde_path_to_error::deserialize(value)
        .map_err(|e| CliError::Invalid(format!("config field `{}`: {}", e.path(), e.inner())))?;
    config.check()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn with_shares(mut p: Policy) -> Policy {
    if p.proportions.is_empty() {
        p.proportions = equal_shares(p.m);
    }
    p
}

fn checked(p: Policy, field: &str) -> Result<Policy, CliError> {
    validate_policy(with_shares(p)).map_err(|e| CliError::Invalid(format!("{field}: {e}")))
}

impl RunConfig {
    /// Cross-field invariants not expressible in the schema.
    pub fn check(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if self.scenario_path.is_some() && self.scenario_spec.is_some() {
            problems.push("scenario_path and scenario_spec are mutually exclusive".to_string());
        }
        if self.policy.is_some() && self.preset.is_some() {
            problems.push("policy and preset are mutually exclusive".to_string());
        }
        if self.seeds.is_empty() {
            problems.push("seeds must not be empty".to_string());
        }
        if self.max_rounds == Some(0) {
            problems.push("max_rounds must be at least 1".to_string());
        }
        if self.engine.max_rounds == 0 {
            problems.push("engine.max_rounds must be at least 1".to_string());
        }
        if self.jobs == Some(0) {
            problems.push("jobs must be at least 1".to_string());
        }
        if let Some(spec) = &self.scenario_spec {
            if let Err(e) = spec.validate() {
                problems.push(format!("scenario_spec: {e}"));
            }
        }
        if let Some(p) = &self.policy {
            if let Err(e) = checked(p.clone(), "policy") {
                problems.push(e.to_string());
            }
        }
        for (i, p) in self.sweep.policies.iter().enumerate() {
            if let Err(e) = checked(p.clone(), &format!("sweep.policies[{i}]")) {
                problems.push(e.to_string());
            }
        }
        if self.sweep.grid == GridKind::Explicit && self.sweep.policies.is_empty() {
            problems.push("sweep.grid = explicit needs sweep.policies".to_string());
        }
        if let Err(e) = self.weights() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(problems.join("; ")))
        }
    }

    pub fn engine_config(&self) -> EngineConfig {
        let mut e = self.engine.clone();
        if let Some(m) = self.max_rounds {
            e.max_rounds = m;
        }
        e
    }

    pub fn weights(&self) -> Result<MetricWeights<f64>, CliError> {
        match &self.weights {
            WeightsSpec::Named(n) if n == "satisfaction" => Ok(MetricWeights::satisfaction()),
            WeightsSpec::Named(n) if n == "fairness" => Ok(MetricWeights::fairness()),
            WeightsSpec::Named(n) => {
                Err(CliError::Invalid(format!("weights: unknown preset `{n}` (expected satisfaction or fairness)")))
            }
            WeightsSpec::Custom(map) => {
                MetricWeights::from_named(map).map_err(|e| CliError::Invalid(format!("weights: {e}")))
            }
        }
    }

    /// The single policy for `simulate`: explicit policy, else preset.
    pub fn policy(&self) -> Result<Policy, CliError> {
        match (&self.policy, self.preset) {
            (Some(p), _) => checked(p.clone(), "policy"),
            (None, Some(preset)) => Ok(preset.policy()),
            (None, None) => Err(CliError::Invalid("no policy: set `policy` or `preset` (or pass --preset)".into())),
        }
    }

    pub fn sweep_policies(&self) -> Result<Vec<Policy>, CliError> {
        Ok(match self.sweep.grid {
            GridKind::EntryResource => {
                let base = match (self.sweep.base, self.preset, &self.policy) {
                    (Some(b), _, _) => b.policy(),
                    (None, Some(p), _) => p.policy(),
                    (None, None, Some(p)) => checked(p.clone(), "policy")?,
                    (None, None, None) => Preset::Beijing.policy(),
                };
                scarce_core::evaluate::entry_resource_grid(&base)
            }
            GridKind::Presets => Preset::ALL.iter().map(|p| p.policy()).collect(),
            GridKind::Explicit => {
                self.sweep.policies.iter().cloned().map(|p| checked(p, "sweep.policies")).collect::<Result<_, _>>()?
            }
        })
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        if let Some(path) = &self.scenario_path {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            return Scenario::from_json(&text).map_err(|e| CliError::Invalid(format!("scenario {}: {e}", path.display())));
        }
        let spec = self.scenario_spec.clone().unwrap_or_default();
        scarce_core::scenario::generate_scenario(&spec, self.scenario_seed)
            .map_err(|e| CliError::Invalid(format!("scenario_spec: {e}")))
    }
}
