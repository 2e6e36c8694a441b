use std::collections::BTreeSet;

use scarce_core::agents::{AgentParams, RuleBackend};
use scarce_core::engine::EngineConfig;
use scarce_core::evaluate::*;
use scarce_core::metrics::MetricWeights;
use scarce_core::optimizer::{GaParams, TrainParams};
use scarce_core::policy::{validate_policy, Preset};
use scarce_core::scenario::{generate_scenario, ScenarioSpec};

#[test]
fn grid_covers_nine_distinct_valid_policies() {
    let grid = entry_resource_grid(&Preset::Beijing.policy());
    assert_eq!(grid.len(), 9);
    let labels: BTreeSet<String> = grid.iter().map(|p| p.label()).collect();
    assert_eq!(labels.len(), 9);
    assert!(grid.into_iter().all(|p| validate_policy(p).is_ok()));
}

#[test]
fn simulated_welfare_never_beats_assignment_bound() {
    let backend = RuleBackend::new(AgentParams::default());
    let s = generate_scenario(&ScenarioSpec::default(), 21).unwrap();
    let bound = km_upper_bound(&s, &backend).unwrap();
    assert_eq!(bound.pairs.len(), 28);
    for policy in entry_resource_grid(&Preset::Beijing.policy()) {
        for e in evaluate_policy(&s, &policy, &backend, &[21, 22], &EngineConfig::default()).unwrap() {
            assert!(e.report.sw <= bound.sw + 1e-9, "{} {} > {}", policy.label(), e.report.sw, bound.sw);
        }
    }
}

#[test]
fn small_optimization_run_is_deterministic() {
    let backend = RuleBackend::new(AgentParams::default());
    let s = generate_scenario(&ScenarioSpec::sized(20, 12), 3).unwrap();
    let cfg = PoaConfig {
        eval_seeds: vec![0],
        calibration: 8,
        train: TrainParams { batch: 8, max_samples: 32, ..TrainParams::default() },
        ga: GaParams { pool_size: 10, iterations: 5, ..GaParams::default() },
    };
    let w = MetricWeights::satisfaction();
    let a = optimize_policy(&s, &backend, &w, &EngineConfig::default(), &cfg).unwrap();
    let b = optimize_policy(&s, &backend, &w, &EngineConfig::default(), &cfg).unwrap();
    assert_eq!(a.search.best_vector, b.search.best_vector);
    assert_eq!(a.search.history.len(), 6);
    assert!(a.dataset.rows.len() >= 8);
    assert!((0.0..=1.0).contains(&a.simulated_fitness));
    assert!(a.search.history.windows(2).all(|w| w[1].max >= w[0].max));
}
