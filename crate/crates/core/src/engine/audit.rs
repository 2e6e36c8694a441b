//! Post-hoc invariant checks over a finished trace. The auditor reads only
//! the logged rounds, so it is independent of the engine's bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{selection_capacity, DecisionOutcome, SimulationTrace};
use crate::policy::SortRule;
use crate::scenario::{ParticipantId, ResourceId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Violation {
    /// A house went to two participants, or one participant got two houses.
    NotInjective { round: u32, participant: ParticipantId, resource: ResourceId },
    /// The chosen house was not in the chooser's pool at decision time.
    OutsidePool { round: u32, participant: ParticipantId, resource: ResourceId },
    /// Selection queue longer than `⌈c · |pool|⌉` at round end.
    OverCapacity { round: u32, queue: usize, selection: usize, capacity: usize },
    /// More consecutive declines than `k` without a return to waiting.
    Deferral { round: u32, participant: ParticipantId, declines: u32 },
    /// A non-vulnerable participant was ordered ahead of a vulnerable one.
    Priority { round: u32, queue: usize, ahead: ParticipantId, behind: ParticipantId },
    /// Promotions did not follow the sorted waiting order.
    PromotionOrder { round: u32, queue: usize },
    /// Final outcome disagrees with the logged decisions.
    OutcomeMismatch { participant: ParticipantId },
}

/// Every violation found in `trace`; empty means the run is clean.
pub fn audit_trace(trace: &SimulationTrace) -> Vec<Violation> {
    let policy = &trace.policy;
    let mut out = Vec::new();
    let mut owner: BTreeMap<ResourceId, ParticipantId> = BTreeMap::new();
    let mut holding: BTreeMap<ParticipantId, ResourceId> = BTreeMap::new();
    let mut streak: BTreeMap<ParticipantId, u32> = BTreeMap::new();

    for log in &trace.rounds {
        let round = log.round;
        for q in &log.queues {
            for id in &q.promoted {
                streak.insert(*id, 0);
            }
            if !q.sorted_waiting.starts_with(&q.promoted) {
                out.push(Violation::PromotionOrder { round, queue: q.queue });
            }
            if policy.sort_rule != SortRule::Fifo {
                let vulnerable: BTreeSet<ParticipantId> = log.vulnerable.iter().copied().collect();
                let mut last_plain: Option<ParticipantId> = None;
                for id in &q.sorted_waiting {
                    if !vulnerable.contains(id) {
                        last_plain.get_or_insert(*id);
                    } else if let Some(ahead) = last_plain {
                        out.push(Violation::Priority { round, queue: q.queue, ahead, behind: *id });
                    }
                }
            }
        }
        for d in &log.decisions {
            match &d.outcome {
                DecisionOutcome::Chose { resource, .. } => {
                    if !d.visible.contains(resource) {
                        out.push(Violation::OutsidePool { round, participant: d.participant, resource: *resource });
                    }
                    let clash = owner.insert(*resource, d.participant).is_some();
                    let twice = holding.insert(d.participant, *resource).is_some();
                    if clash || twice {
                        out.push(Violation::NotInjective { round, participant: d.participant, resource: *resource });
                    }
                }
                DecisionOutcome::Declined => {
                    let n = streak.entry(d.participant).or_insert(0);
                    *n += 1;
                    if *n > policy.k {
                        out.push(Violation::Deferral { round, participant: d.participant, declines: *n });
                    }
                    if d.returned_to_waiting {
                        *n = 0;
                    }
                }
                DecisionOutcome::Quit | DecisionOutcome::Skipped { .. } => {}
            }
        }
        for q in &log.queues {
            let capacity = selection_capacity(policy.c, q.pool.len());
            if q.selection.len() > capacity {
                out.push(Violation::OverCapacity { round, queue: q.queue, selection: q.selection.len(), capacity });
            }
            // Trimmed members are back in waiting and restart their streak.
            for id in &q.waiting {
                streak.insert(*id, 0);
            }
        }
    }

    for (pid, got) in &trace.outcome.assignment {
        if got.as_ref() != holding.get(pid) {
            out.push(Violation::OutcomeMismatch { participant: *pid });
        }
    }
    out
}
