//! Glue between the simulator and the numeric kernels: multi-seed policy
//! evaluation, the full-visibility assignment bound, the entry x resource
//! sweep grid and the surrogate-assisted optimization pipeline.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{BackendError, DecisionBackend};
use crate::engine::{run_simulation, vulnerable_group, EngineConfig, EngineError, SimulationTrace};
use crate::metrics::{aggregate_f, compute_metrics, MetricWeights, MetricsError, MetricsReport, NormalizationStats};
use crate::optimizer::{
    km_baseline, poa_optimize, random_policy_vector, train_predictor_incremental, Assignment, AssignmentError,
    FitnessDataset, GaError, GaParams, SearchResult, SurrogateError, TrainParams,
};
use crate::policy::{decode_policy, EntryRule, Policy, PolicyError, PolicyVector, ResourceRule};
use crate::scenario::{ParticipantId, Scenario};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("{0}")]
    Params(String),
}

/// One simulated run with its metrics.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub seed: u64,
    pub trace: SimulationTrace,
    pub report: MetricsReport<f64>,
}

/// Simulates `policy` once per seed (in parallel) and scores each run.
pub fn evaluate_policy(
    scenario: &Scenario,
    policy: &Policy,
    backend: &dyn DecisionBackend,
    seeds: &[u64],
    config: &EngineConfig,
) -> Result<Vec<Evaluation>, EvalError> {
    let vulnerable = vulnerable_group(scenario, config.vulnerable_fraction);
    seeds
        .par_iter()
        .map(|&seed| {
            let trace = run_simulation(scenario, policy, backend, seed, config)?;
            let report = compute_metrics(&trace.outcome, scenario, &vulnerable);
            Ok(Evaluation { seed, trace, report })
        })
        .collect()
}

/// Satisfaction of every participant with every house, ignoring queues.
pub fn utility_matrix(scenario: &Scenario, backend: &dyn DecisionBackend) -> Result<Vec<Vec<f64>>, BackendError> {
    scenario
        .participants
        .iter()
        .map(|p| scenario.resources.iter().map(|r| Ok(backend.score(p, r, &scenario.rating_table)?.u)).collect())
        .collect()
}

/// Assignment upper bound on SW for this scenario and scoring function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub sw: f64,
    pub pairs: Vec<(ParticipantId, u32)>,
}

pub fn km_upper_bound(scenario: &Scenario, backend: &dyn DecisionBackend) -> Result<UpperBound, EvalError> {
    let u = utility_matrix(scenario, backend)?;
    let Assignment { columns, total } = km_baseline(&u)?;
    let pairs = columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| (scenario.participants[i].id, scenario.resources[j].id)))
        .collect();
    Ok(UpperBound { sw: total, pairs })
}

/// The 3 x 3 grid of participant entry rules against resource partitions,
/// with every other field taken from `base`.
pub fn entry_resource_grid(base: &Policy) -> Vec<Policy> {
    let mut out = Vec::with_capacity(9);
    for entry in [EntryRule::Select, EntryRule::Family, EntryRule::Rent] {
        for resource in [ResourceRule::Random, ResourceRule::Rent, ResourceRule::Size] {
            out.push(Policy { entry_rule: entry, resource_rule: resource, ..base.clone() });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoaConfig {
    /// Seeds each sampled policy is simulated with; fitness is their mean.
    pub eval_seeds: Vec<u64>,
    /// Policies simulated up front to fix the min-max normalization.
    pub calibration: usize,
    pub train: TrainParams,
    pub ga: GaParams,
}

impl Default for PoaConfig {
    fn default() -> Self {
        Self { eval_seeds: vec![0, 1], calibration: 20, train: TrainParams::default(), ga: GaParams::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PoaOutcome {
    pub search: SearchResult,
    pub dataset: FitnessDataset,
    pub test_mae: f64,
    pub warning: bool,
    pub stats: NormalizationStats<f64>,
    /// Simulated (not predicted) fitness of the returned policy.
    pub simulated_fitness: f64,
}

/// Weighted aggregate scaled by total weight, so fitness lies in `[0, 1]`.
pub fn scaled_fitness(
    reports: &[MetricsReport<f64>],
    weights: &MetricWeights<f64>,
    stats: &NormalizationStats<f64>,
) -> Result<f64, MetricsError> {
    let total = weights.total();
    let mut acc = 0.0;
    for r in reports {
        acc += aggregate_f(r, weights, stats)?;
    }
    Ok(acc / (reports.len().max(1) as f64 * if total > 0.0 { total } else { 1.0 }))
}

/// Calibrate normalization on random policies, grow a ridge surrogate until
/// its held-out error is small enough, then search the surrogate with the GA
/// seeded by the best simulated policies.
pub fn optimize_policy(
    scenario: &Scenario,
    backend: &dyn DecisionBackend,
    weights: &MetricWeights<f64>,
    engine: &EngineConfig,
    config: &PoaConfig,
) -> Result<PoaOutcome, EvalError> {
    if config.eval_seeds.is_empty() {
        return Err(EvalError::Params("eval_seeds must not be empty".into()));
    }
    if config.calibration < 2 {
        return Err(EvalError::Params("calibration must be at least 2".into()));
    }
    let simulate = |v: &PolicyVector| -> Result<Vec<MetricsReport<f64>>, EvalError> {
        let policy = decode_policy(v)?;
        Ok(evaluate_policy(scenario, &policy, backend, &config.eval_seeds, engine)?.into_iter().map(|e| e.report).collect())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.train.seed ^ 0x5eed);
    let mut seen = BTreeSet::new();
    let mut calibration = Vec::new();
    while calibration.len() < config.calibration && seen.len() < config.calibration * 50 {
        let v = random_policy_vector(&mut rng);
        if seen.insert(format!("{:?}", v.genes)) {
            let reports = simulate(&v)?;
            calibration.push((v, reports));
        }
    }
    let stats = NormalizationStats::from_reports(calibration.iter().flat_map(|(_, r)| r.iter()));

    let mut seed_rows = FitnessDataset { rows: Vec::new(), test_fraction: config.train.test_fraction };
    for (v, reports) in &calibration {
        seed_rows.push(v.clone(), scaled_fitness(reports, weights, &stats)?)?;
    }

    let mut failure: Option<EvalError> = None;
    let trained = train_predictor_incremental(
        |v| match simulate(v).and_then(|r| Ok(scaled_fitness(&r, weights, &stats)?)) {
            Ok(f) => f,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        seed_rows,
        &config.train,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let trained = trained?;

    let mut ranked = trained.dataset.rows.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let historical: Vec<PolicyVector> = ranked.into_iter().take(config.ga.pool_size / 2).map(|(v, _)| v).collect();
    let predictor = &trained.predictor;
    let search = poa_optimize(&historical, |v| predictor.predict(v), &config.ga)?;
    let simulated_fitness = scaled_fitness(&simulate(&search.best_vector)?, weights, &stats)?;

    Ok(PoaOutcome {
        search,
        dataset: trained.dataset,
        test_mae: trained.test_mae,
        warning: trained.warning,
        stats,
        simulated_fitness,
    })
}
