//! Subcommand implementations.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use scarce_core::agents::{DecisionBackend, EndpointConfig, HttpTransport, LlmBackend, RuleBackend};
use scarce_core::engine::{audit_trace, run_simulation, vulnerable_group};
use scarce_core::evaluate::{km_upper_bound, optimize_policy, utility_matrix};
use scarce_core::metrics::compute_metrics;
use scarce_core::optimizer::{exhaustive_assignment, write_history_csv};
use scarce_core::policy::Policy;
use scarce_core::Report;

use crate::config::{BackendKind, RunConfig};
use crate::output::OutDir;
use crate::CliError;

/// Metric columns of the sweep table: satisfaction block, then fairness block.
pub const METRIC_COLUMNS: [&str; 6] = ["avg_size", "avg_wt", "sw", "var_size", "rop", "co_gini"];
pub const POLICY_COLUMNS: [&str; 9] =
    ["policy", "m", "entry_rule", "sort_rule", "k", "c", "resource_rule", "batch_p", "batch_r"];

pub fn backend(config: &RunConfig) -> Result<Box<dyn DecisionBackend>, CliError> {
    Ok(match config.backend {
        BackendKind::Rule => Box::new(RuleBackend::new(config.agent.clone())),
        BackendKind::Llm => {
            let endpoint = EndpointConfig::from_env().map_err(CliError::Invalid)?;
            let transport = Arc::new(HttpTransport::new(endpoint));
            Box::new(
                LlmBackend::new(transport, config.agent.clone())
                    .with_retry(config.llm.max_attempts, Duration::from_millis(config.llm.backoff_ms))
                    .with_in_flight(config.llm.in_flight),
            )
        }
    })
}

fn out_dir(config: &RunConfig) -> Result<OutDir, CliError> {
    let root = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    OutDir::create(&root)
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Invalid(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn policy_cells(p: &Policy) -> Vec<String> {
    let json = serde_json::to_value(p).expect("policy serializes");
    let text = |k: &str| match &json[k] {
        serde_json::Value::String(s) => s.clone(),
        v => v.to_string(),
    };
    let mut cells = vec![p.label()];
    cells.extend(POLICY_COLUMNS[1..].iter().map(|k| text(k)));
    cells
}

fn metric_cells(r: &Report) -> Vec<String> {
    vec![
        r.avg_size.to_string(),
        r.avg_wt.to_string(),
        r.sw.to_string(),
        r.var_size.to_string(),
        r.rop.to_string(),
        r.co_gini.to_string(),
    ]
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunInfo {
    pub policy: Policy,
    pub seed: u64,
    pub backend: String,
    pub rounds: u32,
    pub violations: usize,
}

pub fn simulate(config: &RunConfig) -> Result<PathBuf, CliError> {
    let scenario = config.scenario()?;
    let policy = config.policy()?;
    let backend = backend(config)?;
    let engine = config.engine_config();
    let seed = config.seeds[0];
    let out = out_dir(config)?;

    let trace = run_simulation(&scenario, &policy, backend.as_ref(), seed, &engine)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let vulnerable = vulnerable_group(&scenario, engine.vulnerable_fraction);
    let report: Report = compute_metrics(&trace.outcome, &scenario, &vulnerable);
    let violations = audit_trace(&trace);
    for v in &violations {
        log::error!("invariant violation: {v:?}");
    }

    out.write_bytes("trace.jsonl", trace.to_jsonl().as_bytes())?;
    out.write_json("outcome.json", &trace.outcome)?;
    out.write_json("metrics.json", &report)?;
    out.write_json(
        "run.json",
        &RunInfo {
            policy,
            seed,
            backend: backend.name().to_string(),
            rounds: trace.outcome.rounds_run,
            violations: violations.len(),
        },
    )?;
    Ok(out.path("metrics.json"))
}

pub fn sweep(config: &RunConfig) -> Result<PathBuf, CliError> {
    let scenario = config.scenario()?;
    let policies = config.sweep_policies()?;
    let backend = backend(config)?;
    let engine = config.engine_config();
    let out = out_dir(config)?;
    let vulnerable = vulnerable_group(&scenario, engine.vulnerable_fraction);

    let jobs: Vec<(usize, u64)> =
        (0..policies.len()).flat_map(|i| config.seeds.iter().map(move |s| (i, *s))).collect();
    let backend = backend.as_ref();
    let results = in_pool(config.jobs, || {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let trace = run_simulation(&scenario, &policies[i], backend, seed, &engine)?;
                Ok((i, seed, compute_metrics::<f64>(&trace.outcome, &scenario, &vulnerable)))
            })
            .collect::<Result<Vec<_>, scarce_core::engine::EngineError>>()
    })?
    .map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = POLICY_COLUMNS.iter().chain(["seed"].iter()).chain(METRIC_COLUMNS.iter()).copied().collect();
    let csv_err = |e: csv::Error| CliError::Io(format!("writing sweep.csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (i, seed, report) in &results {
        let mut row = policy_cells(&policies[*i]);
        row.push(seed.to_string());
        row.extend(metric_cells(report));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("writing sweep.csv: {e}")))?;
    out.write_bytes("sweep.csv", &bytes)
}

#[derive(Debug, Serialize)]
struct BestPolicy<'a> {
    policy: &'a Policy,
    genes: &'a [f64],
    predicted_fitness: f64,
    simulated_fitness: f64,
    test_mae: f64,
    mae_threshold_reached: bool,
    dataset_rows: usize,
}

pub fn optimize(config: &RunConfig) -> Result<PathBuf, CliError> {
    let scenario = config.scenario()?;
    let backend = backend(config)?;
    let engine = config.engine_config();
    let weights = config.weights()?;
    let out = out_dir(config)?;
    let mut poa = config.optimize.clone();
    poa.ga.seed = config.seeds[0];
    poa.train.seed = config.seeds[0];

    let backend = backend.as_ref();
    let result = in_pool(config.jobs, || optimize_policy(&scenario, backend, &weights, &engine, &poa))?
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut history = Vec::new();
    write_history_csv(&result.search.history, &mut history).map_err(|e| CliError::Io(format!("history.csv: {e}")))?;
    out.write_bytes("history.csv", &history)?;
    let mut dataset = Vec::new();
    result.dataset.write_csv(&mut dataset).map_err(|e| CliError::Io(format!("dataset.csv: {e}")))?;
    out.write_bytes("dataset.csv", &dataset)?;
    out.write_json(
        "best_policy.json",
        &BestPolicy {
            policy: &result.search.best_policy,
            genes: &result.search.best_vector.genes,
            predicted_fitness: result.search.best_fitness,
            simulated_fitness: result.simulated_fitness,
            test_mae: result.test_mae,
            mae_threshold_reached: !result.warning,
            dataset_rows: result.dataset.rows.len(),
        },
    )
}

#[derive(Debug, Serialize)]
struct BaselineOut {
    participants: usize,
    resources: usize,
    km_sw: f64,
    km_pairs: Vec<(u32, u32)>,
    exhaustive_sw: Option<f64>,
    exhaustive_note: Option<String>,
}

pub fn baseline(config: &RunConfig) -> Result<PathBuf, CliError> {
    let scenario = config.scenario()?;
    let backend = backend(config)?;
    let out = out_dir(config)?;
    let km = km_upper_bound(&scenario, backend.as_ref()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let u = utility_matrix(&scenario, backend.as_ref()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let (exhaustive_sw, exhaustive_note) = match exhaustive_assignment(&u) {
        Ok(a) => (Some(a.total), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.write_json(
        "baseline.json",
        &BaselineOut {
            participants: scenario.participants.len(),
            resources: scenario.resources.len(),
            km_sw: km.sw,
            km_pairs: km.pairs,
            exhaustive_sw,
            exhaustive_note,
        },
    )
}

/// Merges `metrics.json` runs and `sweep.csv` tables from `inputs` into one CSV.
pub fn report(inputs: &[PathBuf], out: &Path) -> Result<PathBuf, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Invalid("report needs at least one run directory".into()));
    }
    let header: Vec<&str> =
        ["source"].iter().chain(POLICY_COLUMNS.iter()).chain(["seed"].iter()).chain(METRIC_COLUMNS.iter()).copied().collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io(format!("writing report: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    let mut seen = BTreeSet::new();
    for dir in inputs {
        if !seen.insert(dir.clone()) {
            continue;
        }
        let source = dir.display().to_string();
        let metrics = dir.join("metrics.json");
        let sweep = dir.join("sweep.csv");
        let mut found = false;
        if metrics.is_file() {
            found = true;
            let read = |p: &Path| {
                std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))
            };
            let report: Report = serde_json::from_str(&read(&metrics)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", metrics.display())))?;
            let info: RunInfo = serde_json::from_str(&read(&dir.join("run.json"))?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", dir.join("run.json").display())))?;
            let mut row = vec![source.clone()];
            row.extend(policy_cells(&info.policy));
            row.push(info.seed.to_string());
            row.extend(metric_cells(&report));
            w.write_record(&row).map_err(csv_err)?;
        }
        if sweep.is_file() {
            found = true;
            let mut r = csv::Reader::from_path(&sweep).map_err(|e| CliError::Io(format!("{}: {e}", sweep.display())))?;
            for rec in r.records() {
                let rec = rec.map_err(|e| CliError::Invalid(format!("{}: {e}", sweep.display())))?;
                let mut row = vec![source.clone()];
                row.extend(rec.iter().map(str::to_string));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        if !found {
            return Err(CliError::Io(format!("{} has neither metrics.json nor sweep.csv", dir.display())));
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("writing report: {e}")))?;
    let (dir, name) = match out.extension() {
        Some(_) => (out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")), out.file_name()),
        None => (out, None),
    };
    let name = name.and_then(|n| n.to_str()).unwrap_or("report.csv");
    OutDir::create(dir)?.write_bytes(name, &bytes)
}
