//! Policy evaluation metrics and the weighted objective.
//!
//! Satisfaction block: average per-capita living area, average waiting
//! rounds, social welfare. Fairness block: variance of per-capita area,
//! reverse-ordered pairs, Gini of per-capita area and the vulnerable /
//! non-vulnerable satisfaction gap.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::AllocationOutcome;
use crate::num::Scalar;
use crate::scenario::{ParticipantId, Scenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("undefined gap: {0} group is empty")]
    UndefinedGap(&'static str),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` missing from normalization stats")]
    MissingStats(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AvgSize,
    AvgWt,
    Sw,
    VarSize,
    Rop,
    CoGini,
    FGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Metric {
    /// Satisfaction block then fairness block.
    pub const ALL: [Metric; 7] =
        [Metric::AvgSize, Metric::AvgWt, Metric::Sw, Metric::VarSize, Metric::Rop, Metric::CoGini, Metric::FGap];

    pub fn key(self) -> &'static str {
        match self {
            Metric::AvgSize => "avg_size",
            Metric::AvgWt => "avg_wt",
            Metric::Sw => "sw",
            Metric::VarSize => "var_size",
            Metric::Rop => "rop",
            Metric::CoGini => "co_gini",
            Metric::FGap => "f_gap",
        }
    }

    pub fn parse(key: &str) -> Result<Metric, MetricsError> {
        Metric::ALL.into_iter().find(|m| m.key() == key).ok_or_else(|| MetricsError::UnknownMetric(key.to_string()))
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::AvgSize | Metric::Sw | Metric::FGap => Direction::HigherBetter,
            _ => Direction::LowerBetter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    /// Mean per-capita allocated area over all participants.
    pub avg_size: T,
    pub avg_wt: T,
    pub sw: T,
    pub var_size: T,
    pub rop: u64,
    pub co_gini: T,
    /// Mean-based satisfaction gap; `None` when a group is empty.
    pub f_gap: Option<T>,
    /// Sum-based variant of the gap.
    pub f_gap_sum: Option<T>,
    pub n: usize,
    pub allocated_count: usize,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn value(&self, metric: Metric) -> Option<T> {
        match metric {
            Metric::AvgSize => Some(self.avg_size),
            Metric::AvgWt => Some(self.avg_wt),
            Metric::Sw => Some(self.sw),
            Metric::VarSize => Some(self.var_size),
            Metric::Rop => T::from_u64(self.rop),
            Metric::CoGini => Some(self.co_gini),
            Metric::FGap => self.f_gap,
        }
    }
}

/// Count of ordered pairs `(i, j)` with `family_i > family_j` and `size_i < size_j`.
pub fn rop_pairs<T: PartialOrd + Copy>(pairs: &[(u32, T)]) -> u64 {
    if pairs.len() < 2 {
        return 0;
    }
    // Rank sizes, then sweep families ascending with a Fenwick tree over size ranks.
    let mut sizes: Vec<T> = pairs.iter().map(|p| p.1).collect();
    sizes.sort_by(|a, b| a.partial_cmp(b).expect("comparable sizes"));
    sizes.dedup_by(|a, b| a == b);
    let rank = |s: T| sizes.partition_point(|x| *x < s);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| pairs[i].0);

    let mut tree = vec![0u64; sizes.len() + 1];
    let mut inserted = 0u64;
    let mut total = 0u64;
    let mut i = 0;
    while i < order.len() {
        let family = pairs[order[i]].0;
        let mut j = i;
        while j < order.len() && pairs[order[j]].0 == family {
            // earlier entries all have strictly smaller family
            let r = rank(pairs[order[j]].1);
            let mut not_larger = 0u64;
            let mut idx = r + 1;
            while idx > 0 {
                not_larger += tree[idx];
                idx -= idx & idx.wrapping_neg();
            }
            total += inserted - not_larger;
            j += 1;
        }
        for &k in &order[i..j] {
            let mut idx = rank(pairs[k].1) + 1;
            while idx < tree.len() {
                tree[idx] += 1;
                idx += idx & idx.wrapping_neg();
            }
            inserted += 1;
        }
        i = j;
    }
    total
}

/// Reverse-ordered pairs over allocated participants (house size vs family size).
pub fn rop(outcome: &AllocationOutcome, scenario: &Scenario) -> u64 {
    let pairs: Vec<(u32, f64)> = scenario
        .participants
        .iter()
        .filter_map(|p| {
            let rid = outcome.assignment.get(&p.id).copied().flatten()?;
            let house = scenario.resource(rid)?;
            Some((p.family_size, house.size))
        })
        .collect();
    rop_pairs(&pairs)
}

/// Gini coefficient `Σ_i Σ_j |x_i − x_j| / (2 n² μ)`; zero for empty or all-zero input.
pub fn gini<T: Scalar>(values: &[T]) -> T {
    let n = values.len();
    if n == 0 {
        return T::zero();
    }
    let total: T = values.iter().copied().sum();
    if total == T::zero() {
        return T::zero();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let nn = T::from_usize_lossy(n);
    let mut acc = T::zero();
    for (i, x) in sorted.iter().enumerate() {
        let coeff = T::from_usize_lossy(2 * (i + 1)) - nn - T::one();
        acc = acc + coeff * *x;
    }
    // Σ|x_i - x_j| = 2 Σ (2i - n - 1) x_(i); n² μ = n Σx
    acc / (nn * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    #[default]
    Mean,
    Sum,
}

/// Satisfaction of the vulnerable group minus that of everyone else.
pub fn group_gap<T: Scalar>(vulnerable: &[T], others: &[T], mode: GapMode) -> Result<T, MetricsError> {
    if vulnerable.is_empty() {
        return Err(MetricsError::UndefinedGap("vulnerable"));
    }
    if others.is_empty() {
        return Err(MetricsError::UndefinedGap("non-vulnerable"));
    }
    let sv: T = vulnerable.iter().copied().sum();
    let so: T = others.iter().copied().sum();
    Ok(match mode {
        GapMode::Sum => sv - so,
        GapMode::Mean => sv / T::from_usize_lossy(vulnerable.len()) - so / T::from_usize_lossy(others.len()),
    })
}

pub fn compute_metrics<T: Scalar>(
    outcome: &AllocationOutcome,
    scenario: &Scenario,
    vulnerable: &BTreeSet<ParticipantId>,
) -> MetricsReport<T> {
    let n = scenario.participants.len();
    let nn = T::from_usize_lossy(n.max(1));
    let mut per_capita = Vec::with_capacity(n);
    let mut waits = T::zero();
    let mut sw = T::zero();
    let mut sat_v = Vec::new();
    let mut sat_nv = Vec::new();
    let mut allocated = 0;
    for p in &scenario.participants {
        let house = outcome.assignment.get(&p.id).copied().flatten().and_then(|rid| scenario.resource(rid));
        let x = match house {
            Some(h) => {
                allocated += 1;
                T::from_f64_lossy(h.size) / T::from_u32(p.family_size.max(1)).expect("u32 fits")
            }
            None => T::zero(),
        };
        per_capita.push(x);
        waits = waits + T::from_u32(outcome.wait_rounds.get(&p.id).copied().unwrap_or(0)).expect("u32 fits");
        let u = if outcome.quit.contains(&p.id) {
            T::zero()
        } else {
            T::from_f64_lossy(outcome.satisfaction.get(&p.id).copied().unwrap_or(0.0))
        };
        sw = sw + u;
        if vulnerable.contains(&p.id) {
            sat_v.push(u);
        } else {
            sat_nv.push(u);
        }
    }
    let avg_size = per_capita.iter().copied().sum::<T>() / nn;
    let var_size = per_capita.iter().map(|x| (*x - avg_size) * (*x - avg_size)).sum::<T>() / nn;
    MetricsReport {
        avg_size,
        avg_wt: waits / nn,
        sw,
        var_size,
        rop: rop(outcome, scenario),
        co_gini: gini(&per_capita),
        f_gap: group_gap(&sat_v, &sat_nv, GapMode::Mean).ok(),
        f_gap_sum: group_gap(&sat_v, &sat_nv, GapMode::Sum).ok(),
        n,
        allocated_count: allocated,
    }
}

/// Per-metric weights of the scalarized objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricWeights<T> {
    pub weights: BTreeMap<Metric, T>,
}

impl<T: Scalar> MetricWeights<T> {
    fn from_list(list: [(Metric, i64); 7]) -> Self {
        Self { weights: list.into_iter().map(|(m, w)| (m, T::from_i64(w).expect("small integer"))).collect() }
    }

    /// Emphasis on satisfaction: Avg size 5, Avg WT 5, SW 10, Var 1, Rop 5, co-Gini 1, F 1.
    pub fn satisfaction() -> Self {
        use Metric::*;
        Self::from_list([(AvgSize, 5), (AvgWt, 5), (Sw, 10), (VarSize, 1), (Rop, 5), (CoGini, 1), (FGap, 1)])
    }

    /// Emphasis on fairness: Avg size 1, Avg WT 1, SW 5, Var 10, Rop 10, co-Gini 10, F 5.
    pub fn fairness() -> Self {
        use Metric::*;
        Self::from_list([(AvgSize, 1), (AvgWt, 1), (Sw, 5), (VarSize, 10), (Rop, 10), (CoGini, 10), (FGap, 5)])
    }

    pub fn from_named(named: &BTreeMap<String, T>) -> Result<Self, MetricsError> {
        let mut weights = BTreeMap::new();
        for (k, w) in named {
            weights.insert(Metric::parse(k)?, *w);
        }
        Ok(Self { weights })
    }

    pub fn total(&self) -> T {
        self.weights.values().copied().sum()
    }
}

/// Per-metric min/max over a pool of evaluated policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats<T> {
    pub min: BTreeMap<Metric, T>,
    pub max: BTreeMap<Metric, T>,
}

impl<T: Scalar> NormalizationStats<T> {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a MetricsReport<T>>) -> Self {
        let mut min = BTreeMap::new();
        let mut max = BTreeMap::new();
        for r in reports {
            for m in Metric::ALL {
                if let Some(v) = r.value(m) {
                    min.entry(m).and_modify(|x: &mut T| *x = x.min_of(v)).or_insert(v);
                    max.entry(m).and_modify(|x: &mut T| *x = x.max_of(v)).or_insert(v);
                }
            }
        }
        Self { min, max }
    }

    /// Min-max position in `[0, 1]`, inverted for lower-better metrics; 0.5 when degenerate.
    pub fn normalize(&self, metric: Metric, value: T) -> Result<T, MetricsError> {
        let half = T::one() / (T::one() + T::one());
        let (Some(&lo), Some(&hi)) = (self.min.get(&metric), self.max.get(&metric)) else {
            return Err(MetricsError::MissingStats(metric.key()));
        };
        if hi <= lo {
            return Ok(half);
        }
        let pos = ((value - lo) / (hi - lo)).max_of(T::zero()).min_of(T::one());
        Ok(match metric.direction() {
            Direction::HigherBetter => pos,
            Direction::LowerBetter => T::one() - pos,
        })
    }
}

/// Weighted sum of normalized metrics. Missing metric values (an undefined gap) count as 0.5.
pub fn aggregate_f<T: Scalar>(
    report: &MetricsReport<T>,
    weights: &MetricWeights<T>,
    stats: &NormalizationStats<T>,
) -> Result<T, MetricsError> {
    let half = T::one() / (T::one() + T::one());
    let mut f = T::zero();
    for (&metric, &w) in &weights.weights {
        let n = match report.value(metric) {
            Some(v) => match stats.normalize(metric, v) {
                Ok(x) => x,
                // a metric undefined across the whole pool carries no information
                Err(_) if metric == Metric::FGap => half,
                Err(e) => return Err(e),
            },
            None => half,
        };
        f = f + w * n;
    }
    Ok(f)
}
