//! Policy search: genetic algorithm with a surrogate predictor, plus
//! assignment and particle-swarm baselines.

pub mod assignment;
pub mod ga;
pub mod pso;
pub mod ridge;
pub mod surrogate;

use std::io::Write;

pub use assignment::{exhaustive_assignment, km_baseline, Assignment, AssignmentError};
pub use ga::{
    gaussian_mutate, poa_optimize, tournament_select, two_point_crossover, two_point_crossover_at, GaError, GaParams,
    IterationStats, SearchResult,
};
pub use pso::{pso_optimize, PsoParams};
pub use ridge::{fit_ridge, solve_linear, RidgeError, RidgeModel};
pub use surrogate::{
    random_policy_vector, train_predictor_incremental, FeatureEncoder, FitnessDataset, Predictor, SurrogateError,
    TrainOutcome, TrainParams,
};

/// Writes `iteration,mean,max` rows.
pub fn write_history_csv<W: Write>(history: &[IterationStats], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "mean", "max"])?;
    for s in history {
        out.write_record([s.iteration.to_string(), s.mean.to_string(), s.max.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
