//! Queue setup and ordering: vulnerable designation, entry bands, resource
//! partition and waiting-queue sorting.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::policy::{ResourceRule, SortRule};
use crate::scenario::{per_capita_budget, HouseResource, ParticipantId, ParticipantProfile, ResourceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VulnerableMode {
    #[serde(rename = "VFA")]
    Vfa,
    #[serde(rename = "VFR")]
    Vfr,
}

/// Bottom `⌈fraction · |eligible|⌉` by per-capita budget, ties by id.
///
/// The mode only documents intent: callers pass every participant once for
/// VFA, and the currently present ones each round for VFR.
pub fn designate_vulnerable(eligible: &[&ParticipantProfile], _mode: VulnerableMode, fraction: f64) -> BTreeSet<ParticipantId> {
    assert!(fraction > 0.0 && fraction < 1.0, "fraction must lie in (0, 1)");
    let mut ranked: Vec<(f64, ParticipantId)> = eligible.iter().map(|p| (per_capita_budget(p), p.id)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let count = (fraction * ranked.len() as f64).ceil() as usize;
    ranked.into_iter().take(count).map(|(_, id)| id).collect()
}

/// Block sizes `⌊w_i · n⌋`, with the remainder added to the last block.
pub fn band_sizes(weights: &[f64], n: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = weights.iter().map(|w| (w * n as f64 + 1e-9).floor() as usize).collect();
    let used: usize = sizes.iter().sum();
    if let Some(last) = sizes.last_mut() {
        *last += n.saturating_sub(used);
    }
    sizes
}

/// Maps ranks (0 = highest key) to queue indices: queue 0 takes the top block.
pub fn band_of_rank(sizes: &[usize], rank_from_top: usize) -> usize {
    let mut acc = 0;
    for (i, s) in sizes.iter().enumerate() {
        acc += s;
        if rank_from_top < acc {
            return i;
        }
    }
    sizes.len().saturating_sub(1)
}

/// Splits resources into `weights.len()` disjoint lists. Keys are sorted
/// ascending; the lowest-key block goes to the last (lowest) queue and
/// queue 0 receives the highest-key block.
pub fn partition_resources<R: Rng + ?Sized>(
    resources: &[HouseResource],
    rule: ResourceRule,
    weights: &[f64],
    rng: &mut R,
) -> Vec<Vec<ResourceId>> {
    let m = weights.len().max(1);
    let mut order: Vec<&HouseResource> = resources.iter().collect();
    match rule {
        ResourceRule::Size => order.sort_by(|a, b| a.size.total_cmp(&b.size).then(a.id.cmp(&b.id))),
        ResourceRule::Rent => order.sort_by(|a, b| a.rent.total_cmp(&b.rent).then(a.id.cmp(&b.id))),
        ResourceRule::Random => {
            order.sort_by_key(|h| h.id);
            order.shuffle(rng);
        }
    }
    let sizes = band_sizes(weights, order.len());
    let mut out = vec![Vec::new(); m];
    let mut cursor = 0;
    for q in (0..m).rev() {
        let take = sizes.get(q).copied().unwrap_or(0);
        out[q] = order[cursor..cursor + take].iter().map(|h| h.id).collect();
        cursor += take;
    }
    out
}

/// FIFO by `(entered, id)`; VFA/VFR move vulnerable ids to the front.
pub fn sort_queue(
    waiting: &[(ParticipantId, u32)],
    rule: SortRule,
    vulnerable: &BTreeSet<ParticipantId>,
) -> Vec<ParticipantId> {
    let mut v: Vec<(ParticipantId, u32)> = waiting.to_vec();
    v.sort_by_key(|&(id, entered)| (entered, id));
    match rule {
        SortRule::Fifo => v.into_iter().map(|(id, _)| id).collect(),
        SortRule::Vfa | SortRule::Vfr => {
            let (front, back): (Vec<_>, Vec<_>) = v.into_iter().partition(|(id, _)| vulnerable.contains(id));
            front.into_iter().chain(back).map(|(id, _)| id).collect()
        }
    }
}
