//! Particle swarm comparator on the same gene space as the GA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ga::{GaError, IterationStats, SearchResult};
use super::surrogate::random_policy_vector;
use crate::policy::{decode_policy, PolicyVector, GENE_DOMAIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { swarm_size: 24, iterations: 50, inertia: 0.7, cognitive: 1.5, social: 1.5, seed: 0 }
    }
}

/// Positions move continuously inside the gene bounds; each is repaired
/// (rounded, snapped) only when evaluated.
pub fn pso_optimize<F>(fitness: F, params: &PsoParams) -> Result<SearchResult, GaError>
where
    F: Fn(&PolicyVector) -> f64 + Sync,
{
    if params.swarm_size < 2 {
        return Err(GaError::Params("swarm_size must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let d = GENE_DOMAIN.len();
    let mut pos: Vec<Vec<f64>> = (0..params.swarm_size).map(|_| random_policy_vector(&mut rng).genes).collect();
    let mut vel: Vec<Vec<f64>> = (0..params.swarm_size)
        .map(|_| GENE_DOMAIN.iter().map(|g| rng.random_range(-0.1..=0.1) * g.range()).collect())
        .collect();

    let eval = |pos: &[Vec<f64>]| -> Result<(Vec<PolicyVector>, Vec<f64>), GaError> {
        let repaired: Vec<PolicyVector> =
            pos.iter().map(|p| PolicyVector::new(p.clone()).repaired()).collect::<Result<_, _>>()?;
        let f = repaired.par_iter().map(&fitness).collect();
        Ok((repaired, f))
    };

    let (mut pbest_vec, mut pbest_fit) = eval(&pos)?;
    let mut pbest_pos = pos.clone();
    let mut g = 0;
    for i in 1..params.swarm_size {
        if pbest_fit[i] > pbest_fit[g] {
            g = i;
        }
    }
    let summarize = |it: usize, f: &[f64]| IterationStats {
        iteration: it,
        mean: f.iter().sum::<f64>() / f.len() as f64,
        max: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let mut history = vec![summarize(0, &pbest_fit)];

    for it in 1..=params.iterations {
        for (p, v) in pos.iter_mut().zip(vel.iter_mut()).enumerate().map(|(i, (p, v))| ((i, p), v)) {
            let (i, p) = p;
            for j in 0..d {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                v[j] = params.inertia * v[j]
                    + params.cognitive * r1 * (pbest_pos[i][j] - p[j])
                    + params.social * r2 * (pbest_pos[g][j] - p[j]);
                p[j] = (p[j] + v[j]).clamp(GENE_DOMAIN[j].lower(), GENE_DOMAIN[j].upper());
            }
        }
        let (vecs, fit) = eval(&pos)?;
        for i in 0..params.swarm_size {
            if fit[i] > pbest_fit[i] {
                pbest_fit[i] = fit[i];
                pbest_vec[i] = vecs[i].clone();
                pbest_pos[i] = pos[i].clone();
            }
        }
        for i in 0..params.swarm_size {
            if pbest_fit[i] > pbest_fit[g] {
                g = i;
            }
        }
        history.push(summarize(it, &fit));
    }

    Ok(SearchResult {
        best_policy: decode_policy(&pbest_vec[g])?,
        best_vector: pbest_vec[g].clone(),
        best_fitness: pbest_fit[g],
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_dynamics_keep_initial_best() {
        let params = PsoParams { inertia: 0.0, cognitive: 0.0, social: 0.0, iterations: 10, seed: 5, ..PsoParams::default() };
        let r = pso_optimize(|v| v.genes[4], &params).unwrap();
        assert_eq!(r.best_fitness, r.history[0].max);
        assert!(r.history.windows(2).all(|w| w[0].max == w[1].max));
    }

    #[test]
    fn seeded_runs_repeat() {
        let params = PsoParams { seed: 12, ..PsoParams::default() };
        let f = |v: &PolicyVector| -(v.genes[4] - 2.5).powi(2) - v.genes[0];
        assert_eq!(pso_optimize(f, &params).unwrap(), pso_optimize(f, &params).unwrap());
    }
}
