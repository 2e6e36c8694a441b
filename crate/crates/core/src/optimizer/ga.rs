//! Genetic search over policy vectors.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::surrogate::random_policy_vector;
use crate::policy::{decode_policy, Policy, PolicyError, PolicyVector, GENE_DOMAIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("parents differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("crossover needs vectors of length >= 3, got {0}")]
    TooShort(usize),
    #[error("cut points ({0}, {1}) must satisfy 0 < p1 < p2 < len")]
    BadCuts(usize, usize),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub pool_size: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Per-gene standard deviation as a fraction of that gene's range.
    pub mutation_sigma: f64,
    pub iterations: usize,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pool_size: 24,
            tournament_size: 3,
            crossover_prob: 0.9,
            mutation_prob: 0.2,
            mutation_sigma: 0.2,
            iterations: 50,
            elitism: 2,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: &str| Err(GaError::Params(m.into()));
        if self.pool_size < 2 {
            return bad("pool_size must be at least 2");
        }
        if self.tournament_size < 1 || self.tournament_size > self.pool_size {
            return bad("tournament_size must lie in [1, pool_size]");
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::Params(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.mutation_sigma >= 0.0) {
            return bad("mutation_sigma must be non-negative");
        }
        if self.elitism > self.pool_size {
            return bad("elitism cannot exceed pool_size");
        }
        Ok(())
    }
}

/// Index of the fittest of `t` distinct members drawn uniformly; ties go to the lower index.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], t: usize, rng: &mut R) -> usize {
    assert!(t >= 1 && t <= fitness.len(), "tournament size out of range");
    let mut entrants = sample(rng, fitness.len(), t).into_vec();
    entrants.sort_unstable();
    let mut best = entrants[0];
    for &i in &entrants[1..] {
        if fitness[i] > fitness[best] {
            best = i;
        }
    }
    best
}

/// `a[..p1] ++ b[p1..p2] ++ a[p2..]`.
pub fn two_point_crossover_at(a: &[f64], b: &[f64], p1: usize, p2: usize) -> Result<Vec<f64>, GaError> {
    if a.len() != b.len() {
        return Err(GaError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(GaError::TooShort(a.len()));
    }
    if !(0 < p1 && p1 < p2 && p2 < a.len()) {
        return Err(GaError::BadCuts(p1, p2));
    }
    let mut child = a.to_vec();
    child[p1..p2].copy_from_slice(&b[p1..p2]);
    Ok(child)
}

pub fn two_point_crossover<R: Rng + ?Sized>(a: &[f64], b: &[f64], rng: &mut R) -> Result<Vec<f64>, GaError> {
    if a.len() != b.len() {
        return Err(GaError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(GaError::TooShort(a.len()));
    }
    let mut cuts = sample(rng, a.len() - 1, 2).into_vec();
    cuts.sort_unstable();
    two_point_crossover_at(a, b, cuts[0] + 1, cuts[1] + 1)
}

/// Adds `N(0, sigma·range)` to each gene with probability `prob`, then repairs.
pub fn gaussian_mutate<R: Rng + ?Sized>(
    v: &PolicyVector,
    prob: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<PolicyVector, GaError> {
    let mut genes = v.genes.clone();
    for (g, spec) in genes.iter_mut().zip(GENE_DOMAIN.iter()) {
        if rng.random::<f64>() < prob {
            let sd = sigma * spec.range();
            if sd > 0.0 {
                let noise = Normal::new(0.0, sd).expect("finite positive sd").sample(rng);
                *g += noise;
            }
        }
    }
    Ok(PolicyVector::new(genes).repaired()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_vector: PolicyVector,
    pub best_policy: Policy,
    pub best_fitness: f64,
    /// Entry 0 describes the initial pool.
    pub history: Vec<IterationStats>,
}

fn stats(iteration: usize, fitness: &[f64]) -> IterationStats {
    let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
    let max = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    IterationStats { iteration, mean, max }
}

fn evaluate<F>(pool: &[PolicyVector], fitness: &F) -> Vec<f64>
where
    F: Fn(&PolicyVector) -> f64 + Sync,
{
    pool.par_iter().map(fitness).collect()
}

fn argmax(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f > fitness[best] {
            best = i;
        }
    }
    best
}

/// Runs the GA. `historical` seeds the pool; random in-domain vectors fill the rest.
pub fn poa_optimize<F>(historical: &[PolicyVector], fitness: F, params: &GaParams) -> Result<SearchResult, GaError>
where
    F: Fn(&PolicyVector) -> f64 + Sync,
{
    params.validate()?;
    if historical.len() > params.pool_size {
        return Err(GaError::Params(format!(
            "historical pool ({}) exceeds pool_size ({})",
            historical.len(),
            params.pool_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pool: Vec<PolicyVector> = historical.iter().map(|v| v.repaired()).collect::<Result<_, _>>()?;
    while pool.len() < params.pool_size {
        pool.push(random_policy_vector(&mut rng));
    }
    let mut fit = evaluate(&pool, &fitness);
    let mut history = vec![stats(0, &fit)];

    for it in 1..=params.iterations {
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&i, &j| fit[j].total_cmp(&fit[i]).then(i.cmp(&j)));
        let mut next: Vec<PolicyVector> = order[..params.elitism].iter().map(|&i| pool[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..params.elitism].iter().map(|&i| fit[i]).collect();
        let mut offspring = Vec::new();
        while next.len() + offspring.len() < params.pool_size {
            let a = &pool[tournament_select(&fit, params.tournament_size, &mut rng)];
            let b = &pool[tournament_select(&fit, params.tournament_size, &mut rng)];
            let (c1, c2) = if rng.random::<f64>() < params.crossover_prob {
                let mut cuts = sample(&mut rng, a.len() - 1, 2).into_vec();
                cuts.sort_unstable();
                (
                    two_point_crossover_at(&a.genes, &b.genes, cuts[0] + 1, cuts[1] + 1)?,
                    two_point_crossover_at(&b.genes, &a.genes, cuts[0] + 1, cuts[1] + 1)?,
                )
            } else {
                (a.genes.clone(), b.genes.clone())
            };
            for c in [c1, c2] {
                if next.len() + offspring.len() < params.pool_size {
                    let child = PolicyVector::new(c);
                    offspring.push(gaussian_mutate(&child, params.mutation_prob, params.mutation_sigma, &mut rng)?);
                }
            }
        }
        next_fit.extend(evaluate(&offspring, &fitness));
        next.extend(offspring);
        pool = next;
        fit = next_fit;
        history.push(stats(it, &fit));
    }

    let best = argmax(&fit);
    Ok(SearchResult {
        best_policy: decode_policy(&pool[best])?,
        best_vector: pool[best].clone(),
        best_fitness: fit[best],
        history,
    })
}
