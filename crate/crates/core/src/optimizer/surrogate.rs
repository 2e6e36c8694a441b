//! Surrogate fitness predictor over encoded policy vectors.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ridge::{fit_ridge, RidgeError, RidgeModel};
use crate::policy::{GeneKind, PolicyVector, GENE_DOMAIN};

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error(transparent)]
    Ridge(#[from] RidgeError),
    #[error("vector has {got} genes, expected {expected}")]
    Width { got: usize, expected: usize },
    #[error("conflicting fitness for duplicate vector {0:?}")]
    Conflict(Vec<f64>),
    #[error("invalid training parameters: {0}")]
    Params(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed dataset row: {0}")]
    Row(String),
}

/// One-hot for categorical genes, min-max scaling for numeric genes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEncoder;

impl FeatureEncoder {
    pub fn width(&self) -> usize {
        GENE_DOMAIN
            .iter()
            .map(|g| match g.kind {
                GeneKind::Categorical { categories } => categories.len(),
                _ => 1,
            })
            .sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in GENE_DOMAIN.iter() {
            match g.kind {
                GeneKind::Categorical { categories } => {
                    out.extend(categories.iter().map(|c| format!("{}={}", g.name, c)));
                }
                _ => out.push(g.name.to_string()),
            }
        }
        out
    }

    pub fn encode(&self, v: &PolicyVector) -> Result<Vec<f64>, SurrogateError> {
        if v.len() != GENE_DOMAIN.len() {
            return Err(SurrogateError::Width { got: v.len(), expected: GENE_DOMAIN.len() });
        }
        let mut out = Vec::with_capacity(self.width());
        for (x, g) in v.genes.iter().zip(GENE_DOMAIN.iter()) {
            let x = g.repair(*x);
            match g.kind {
                GeneKind::Categorical { categories } => {
                    out.extend((0..categories.len()).map(|i| if i as f64 == x { 1.0 } else { 0.0 }));
                }
                _ => out.push((x - g.lower()) / g.range()),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub model: RidgeModel<f64>,
    pub encoder: FeatureEncoder,
}

impl Predictor {
    pub fn fit(rows: &[(PolicyVector, f64)], lambda: f64) -> Result<Self, SurrogateError> {
        let encoder = FeatureEncoder;
        let x = rows.iter().map(|(v, _)| encoder.encode(v)).collect::<Result<Vec<_>, _>>()?;
        let y: Vec<f64> = rows.iter().map(|(_, f)| *f).collect();
        Ok(Self { model: fit_ridge(&x, &y, lambda, true)?, encoder })
    }

    pub fn predict(&self, v: &PolicyVector) -> f64 {
        match self.encoder.encode(v) {
            Ok(x) => self.model.predict(&x),
            Err(_) => f64::NAN,
        }
    }

    pub fn mae(&self, rows: &[(PolicyVector, f64)]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        rows.iter().map(|(v, f)| (self.predict(v) - f).abs()).sum::<f64>() / rows.len() as f64
    }
}

/// `(policy vector, fitness)` rows; every `stride`-th row is held out for testing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitnessDataset {
    pub rows: Vec<(PolicyVector, f64)>,
    pub test_fraction: f64,
}

impl FitnessDataset {
    pub fn new(test_fraction: f64) -> Self {
        Self { rows: Vec::new(), test_fraction }
    }

    fn stride(&self) -> usize {
        if self.test_fraction <= 0.0 {
            usize::MAX
        } else {
            ((1.0 / self.test_fraction).round() as usize).max(2)
        }
    }

    pub fn contains(&self, v: &PolicyVector) -> bool {
        self.rows.iter().any(|(w, _)| w == v)
    }

    /// Adds a row; an identical duplicate is ignored, a conflicting one rejected.
    pub fn push(&mut self, v: PolicyVector, fitness: f64) -> Result<bool, SurrogateError> {
        if v.len() != GENE_DOMAIN.len() {
            return Err(SurrogateError::Width { got: v.len(), expected: GENE_DOMAIN.len() });
        }
        if let Some((_, f)) = self.rows.iter().find(|(w, _)| *w == v) {
            if *f != fitness {
                return Err(SurrogateError::Conflict(v.genes));
            }
            return Ok(false);
        }
        self.rows.push((v, fitness));
        Ok(true)
    }

    pub fn split(&self) -> (Vec<(PolicyVector, f64)>, Vec<(PolicyVector, f64)>) {
        let stride = self.stride();
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            if stride != usize::MAX && i % stride == stride - 1 {
                test.push(row.clone());
            } else {
                train.push(row.clone());
            }
        }
        (train, test)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SurrogateError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = GENE_DOMAIN.iter().map(|g| g.name.to_string()).collect();
        header.push("fitness".into());
        out.write_record(&header)?;
        for (v, f) in &self.rows {
            let mut rec: Vec<String> = v.genes.iter().map(|g| g.to_string()).collect();
            rec.push(f.to_string());
            out.write_record(&rec)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, test_fraction: f64) -> Result<Self, SurrogateError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut ds = Self::new(test_fraction);
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SurrogateError::Row(e.to_string()))?;
            let Some((fitness, genes)) = vals.split_last() else {
                return Err(SurrogateError::Row("empty record".into()));
            };
            ds.push(PolicyVector::new(genes.to_vec()), *fitness)?;
        }
        Ok(ds)
    }
}

/// Uniform draw over the gene domain.
pub fn random_policy_vector<R: Rng + ?Sized>(rng: &mut R) -> PolicyVector {
    PolicyVector::new(
        GENE_DOMAIN
            .iter()
            .map(|g| match g.kind {
                GeneKind::Real { lower, upper } => rng.random_range(lower..=upper),
                _ => rng.random_range(g.lower() as i64..=g.upper() as i64) as f64,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub mae_threshold: f64,
    pub batch: usize,
    pub max_samples: usize,
    pub test_fraction: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { mae_threshold: 0.05, batch: 20, max_samples: 400, test_fraction: 0.25, lambda: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub predictor: Predictor,
    pub dataset: FitnessDataset,
    pub test_mae: f64,
    pub evaluations: usize,
    /// Set when `max_samples` was reached with test MAE still above threshold.
    pub warning: bool,
}

/// Grows the dataset `batch` oracle samples at a time, refitting after each
/// batch, until held-out MAE reaches the threshold or `max_samples` is hit.
pub fn train_predictor_incremental<F>(
    mut oracle: F,
    seed_rows: FitnessDataset,
    params: &TrainParams,
) -> Result<TrainOutcome, SurrogateError>
where
    F: FnMut(&PolicyVector) -> f64,
{
    if !(params.mae_threshold >= 0.0) {
        return Err(SurrogateError::Params("mae_threshold must be non-negative".into()));
    }
    if params.batch < 2 {
        return Err(SurrogateError::Params("batch must be at least 2".into()));
    }
    if !(params.test_fraction > 0.0 && params.test_fraction < 1.0) {
        return Err(SurrogateError::Params("test_fraction must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut dataset = FitnessDataset { test_fraction: params.test_fraction, ..seed_rows };
    let mut best: Option<(Predictor, f64)> = None;
    let mut evaluations = 0;
    loop {
        let target = (dataset.rows.len() + params.batch).min(params.max_samples);
        let mut attempts = 0;
        while dataset.rows.len() < target && attempts < params.batch * 100 {
            attempts += 1;
            let v = random_policy_vector(&mut rng);
            if dataset.contains(&v) {
                continue;
            }
            let f = oracle(&v);
            dataset.push(v, f)?;
        }
        let (train, test) = dataset.split();
        if !train.is_empty() && !test.is_empty() {
            evaluations += 1;
            let predictor = Predictor::fit(&train, params.lambda)?;
            let mae = predictor.mae(&test);
            if best.as_ref().is_none_or(|(_, m)| mae < *m) {
                best = Some((predictor, mae));
            }
            if mae <= params.mae_threshold {
                break;
            }
        }
        if dataset.rows.len() >= params.max_samples || attempts >= params.batch * 100 {
            break;
        }
    }
    let (predictor, test_mae) = match best {
        Some(b) => b,
        None => {
            let p = Predictor::fit(&dataset.rows, params.lambda)?;
            let mae = p.mae(&dataset.rows);
            (p, mae)
        }
    };
    let warning = test_mae > params.mae_threshold;
    if warning {
        log::warn!("surrogate stopped at {} samples with test MAE {test_mae:.4}", dataset.rows.len());
    }
    Ok(TrainOutcome { predictor, dataset, test_mae, evaluations, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn linear_oracle(v: &PolicyVector) -> f64 {
        let x = FeatureEncoder.encode(v).unwrap();
        x.iter().enumerate().map(|(i, xi)| (((i * 37) % 11) as f64 / 10.0 - 0.5) * xi).sum::<f64>() + 0.3
    }

    #[test]
    fn encoder_width_matches_names() {
        let e = FeatureEncoder;
        assert_eq!(e.width(), e.feature_names().len());
        assert_eq!(e.width(), 1 + 4 + 3 + 1 + 1 + 3 + 3 + 3);
        let x = e.encode(&PolicyVector::new(vec![5.0, 0.0, 2.0, 1.0, 4.0, 1.0, 2.0, 0.0])).unwrap();
        assert_eq!(x[0], 1.0);
        assert_eq!(&x[1..5], &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn noiseless_linear_oracle_stops_at_first_evaluation() {
        let params = TrainParams { batch: 200, lambda: 1e-6, max_samples: 1000, ..TrainParams::default() };
        let out = train_predictor_incremental(linear_oracle, FitnessDataset::default(), &params).unwrap();
        assert_eq!(out.evaluations, 1);
        assert!(out.test_mae < 1e-6, "{}", out.test_mae);
        assert!(!out.warning);
    }

    #[test]
    fn noisy_oracle_reaches_threshold() {
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let oracle = |v: &PolicyVector| linear_oracle(v) + noise.sample(&mut rng);
        let out = train_predictor_incremental(oracle, FitnessDataset::default(), &TrainParams::default()).unwrap();
        assert!(out.test_mae <= 0.05, "{}", out.test_mae);
        assert!(!out.warning);
    }

    #[test]
    fn unreachable_threshold_sets_warning() {
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let oracle = |v: &PolicyVector| linear_oracle(v) + noise.sample(&mut rng);
        let params = TrainParams { mae_threshold: 0.0, max_samples: 120, ..TrainParams::default() };
        let out = train_predictor_incremental(oracle, FitnessDataset::default(), &params).unwrap();
        assert!(out.warning);
        assert_eq!(out.dataset.rows.len(), 120);
    }

    #[test]
    fn conflicting_duplicates_are_rejected() {
        let mut ds = FitnessDataset::new(0.25);
        let v = PolicyVector::new(vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(ds.push(v.clone(), 1.0).unwrap());
        assert!(!ds.push(v.clone(), 1.0).unwrap());
        assert!(matches!(ds.push(v, 2.0), Err(SurrogateError::Conflict(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut ds = FitnessDataset::new(0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..5 {
            ds.push(random_policy_vector(&mut rng), i as f64 * 0.5).unwrap();
        }
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = FitnessDataset::read_csv(buf.as_slice(), 0.25).unwrap();
        assert_eq!(back, ds);
    }
}
