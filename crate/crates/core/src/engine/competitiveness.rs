//! Per-queue scarcity summary shown to participants.

use serde::{Deserialize, Serialize, Serializer};

use super::QueueState;
use crate::scenario::{Feature, Scenario};

fn ratio_or_label<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_f64(*r),
        None => s.serialize_str("uncontested"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBandCount {
    pub band: String,
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueCompetition {
    pub queue: usize,
    pub remaining: usize,
    pub by_size_band: Vec<SizeBandCount>,
    pub waiting: usize,
    pub selection: usize,
    /// Remaining houses per contender; `None` (serialized `"uncontested"`)
    /// when nobody is waiting or selecting.
    #[serde(serialize_with = "ratio_or_label")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompetitivenessReport {
    pub queues: Vec<QueueCompetition>,
    pub text: String,
}

impl CompetitivenessReport {
    pub fn total_remaining(&self) -> usize {
        self.queues.iter().map(|q| q.remaining).sum()
    }

    pub fn total_contenders(&self) -> usize {
        self.queues.iter().map(|q| q.waiting + q.selection).sum()
    }

    /// Fewer houses than contenders overall.
    pub fn contested(&self) -> bool {
        let c = self.total_contenders();
        c > 0 && (self.total_remaining() as f64) < c as f64
    }
}

fn band_label(min: f64, max: Option<f64>) -> String {
    match max {
        Some(hi) => format!("{min:.0}-{hi:.0} m2"),
        None => format!(">={min:.0} m2"),
    }
}

pub fn compute_competitiveness(states: &[QueueState], scenario: &Scenario) -> CompetitivenessReport {
    let buckets = &scenario.rating_table.size;
    let mut queues = Vec::with_capacity(states.len());
    let mut sentences = Vec::with_capacity(states.len());
    for st in states {
        let mut counts = vec![0usize; buckets.len()];
        for rid in &st.pool {
            if let Some(h) = scenario.resource(*rid) {
                if let Some(i) = scenario.rating_table.bucket_index(Feature::Size, h.size) {
                    counts[i] += 1;
                }
            }
        }
        let by_size_band: Vec<SizeBandCount> = buckets
            .iter()
            .zip(&counts)
            .filter(|(_, c)| **c > 0)
            .map(|(b, c)| SizeBandCount { band: band_label(b.min, b.max), remaining: *c })
            .collect();
        let contenders = st.waiting.len() + st.selection.len();
        let ratio = (contenders > 0).then(|| st.pool.len() as f64 / contenders as f64);
        let bands = if by_size_band.is_empty() {
            "no houses".to_string()
        } else {
            by_size_band.iter().map(|b| format!("{} x {}", b.remaining, b.band)).collect::<Vec<_>>().join(", ")
        };
        let ratio_text = match ratio {
            Some(r) => format!("{r:.2} houses per contender"),
            None => "uncontested".to_string(),
        };
        sentences.push(format!(
            "Queue {} has {} houses left ({}), {} waiting and {} selecting, {}.",
            st.queue_id,
            st.pool.len(),
            bands,
            st.waiting.len(),
            st.selection.len(),
            ratio_text
        ));
        queues.push(QueueCompetition {
            queue: st.queue_id,
            remaining: st.pool.len(),
            by_size_band,
            waiting: st.waiting.len(),
            selection: st.selection.len(),
            ratio,
        });
    }
    CompetitivenessReport { queues, text: sentences.join(" ") }
}
