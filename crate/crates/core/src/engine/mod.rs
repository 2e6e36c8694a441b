//! Round-based allocation: batched entry, queue routing, resource pools,
//! waiting/selection queues with k-deferral, decisions and the social phase.

pub mod audit;
pub mod competitiveness;
pub mod queues;
mod social;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audit::{audit_trace, Violation};
pub use competitiveness::{compute_competitiveness, CompetitivenessReport, QueueCompetition, SizeBandCount};
pub use queues::{band_of_rank, band_sizes, designate_vulnerable, partition_resources, sort_queue, VulnerableMode};

use crate::agents::{
    AgentMemory, AgentView, Attribute, Decision, DecisionBackend, QueueSummary, RelationState, Source, Utterance,
};
use crate::policy::{validate_policy, EntryRule, Policy, PolicyError, SortRule};
use crate::scenario::{HouseResource, ParticipantId, ParticipantProfile, ResourceId, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("vulnerable fraction must lie in (0, 1)")]
    Fraction,
}

/// Who acts in a queue each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    /// Only the selection-queue head decides.
    Head,
    /// Every selection-queue member decides once, in queue order.
    #[default]
    AllSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialConfig {
    pub enabled: bool,
    /// Generate messages per social-graph component on the rayon pool.
    pub parallel: bool,
    pub private_fanout: usize,
    /// Each participant posts to the forum every this many rounds (0 = never).
    pub broadcast_every: u32,
    pub forum_window: usize,
}

impl Default for SocialConfig {
    fn default() -> Self {
        Self { enabled: true, parallel: false, private_fanout: 2, broadcast_every: 3, forum_window: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub max_rounds: u32,
    pub vulnerable_fraction: f64,
    pub decision_mode: DecisionMode,
    pub social: SocialConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { max_rounds: 200, vulnerable_fraction: 0.2, decision_mode: DecisionMode::default(), social: SocialConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub participant: ParticipantId,
    pub remaining_choices: u32,
    pub joined_round: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub queue_id: usize,
    pub waiting: Vec<ParticipantId>,
    pub selection: Vec<SelectionEntry>,
    /// Admitted, unallocated houses of this queue, ascending id.
    pub pool: Vec<ResourceId>,
    pub allocated: Vec<ResourceId>,
}

impl QueueState {
    fn new(queue_id: usize) -> Self {
        Self { queue_id, waiting: Vec::new(), selection: Vec::new(), pool: Vec::new(), allocated: Vec::new() }
    }
}

/// `⌈c · pool⌉`, tolerant of float noise in the product.
pub fn selection_capacity(c: f64, pool: usize) -> usize {
    let x = c * pool as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AllocationOutcome {
    pub assignment: BTreeMap<ParticipantId, Option<ResourceId>>,
    pub wait_rounds: BTreeMap<ParticipantId, u32>,
    pub satisfaction: BTreeMap<ParticipantId, f64>,
    pub quit: BTreeSet<ParticipantId>,
    pub rounds_run: u32,
}

impl AllocationOutcome {
    pub fn allocated_count(&self) -> usize {
        self.assignment.values().filter(|a| a.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DecisionOutcome {
    Chose { resource: ResourceId, satisfaction: f64 },
    Declined,
    Quit,
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub queue: usize,
    pub participant: ParticipantId,
    pub visible: Vec<ResourceId>,
    pub outcome: DecisionOutcome,
    pub remaining_choices: u32,
    pub returned_to_waiting: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSnapshot {
    pub queue: usize,
    /// Waiting order used for this round's promotion.
    pub sorted_waiting: Vec<ParticipantId>,
    pub promoted: Vec<ParticipantId>,
    /// End-of-round state.
    pub waiting: Vec<ParticipantId>,
    pub selection: Vec<SelectionEntry>,
    pub pool: Vec<ResourceId>,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: u32,
    pub admitted_participants: Vec<ParticipantId>,
    pub admitted_resources: Vec<ResourceId>,
    pub routed: Vec<(ParticipantId, usize)>,
    pub vulnerable: Vec<ParticipantId>,
    pub queues: Vec<QueueSnapshot>,
    pub decisions: Vec<DecisionRecord>,
    pub messages: Vec<Utterance>,
    pub posts: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub seed: u64,
    pub policy: Policy,
    pub backend: String,
    pub rounds: Vec<RoundLog>,
    pub outcome: AllocationOutcome,
}

impl SimulationTrace {
    /// One JSON object per round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

pub struct Simulation<'a> {
    scenario: &'a Scenario,
    policy: Policy,
    backend: &'a dyn DecisionBackend,
    config: EngineConfig,
    seed: u64,
    rng: ChaCha8Rng,
    round: u32,
    queues: Vec<QueueState>,
    resource_band: BTreeMap<ResourceId, usize>,
    participant_band: BTreeMap<ParticipantId, usize>,
    admitted_round: BTreeMap<ParticipantId, u32>,
    admitted_resources: BTreeSet<ResourceId>,
    pending_route: Vec<ParticipantId>,
    queue_of: BTreeMap<ParticipantId, usize>,
    memories: BTreeMap<ParticipantId, AgentMemory>,
    vfa: BTreeSet<ParticipantId>,
    outcome: AllocationOutcome,
    forum: Vec<Utterance>,
    finished: bool,
}

impl<'a> Simulation<'a> {
    pub fn new(
        scenario: &'a Scenario,
        policy: &Policy,
        backend: &'a dyn DecisionBackend,
        seed: u64,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        scenario.validate()?;
        let policy = validate_policy(policy.clone())?;
        if config.max_rounds == 0 {
            return Err(EngineError::NoRounds);
        }
        if !(config.vulnerable_fraction > 0.0 && config.vulnerable_fraction < 1.0) {
            return Err(EngineError::Fraction);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = policy.m as usize;
        let bands = partition_resources(&scenario.resources, policy.resource_rule, &policy.proportions, &mut rng);
        let mut resource_band = BTreeMap::new();
        for (q, ids) in bands.iter().enumerate() {
            for id in ids {
                resource_band.insert(*id, q);
            }
        }

        let mut participant_band = BTreeMap::new();
        let sizes = band_sizes(&policy.proportions, scenario.participants.len());
        let mut ranked: Vec<&ParticipantProfile> = scenario.participants.iter().collect();
        match policy.entry_rule {
            EntryRule::Rent => ranked.sort_by(|a, b| b.rent_budget.total_cmp(&a.rent_budget).then(a.id.cmp(&b.id))),
            EntryRule::Family => ranked.sort_by(|a, b| b.family_size.cmp(&a.family_size).then(a.id.cmp(&b.id))),
            _ => {}
        }
        if matches!(policy.entry_rule, EntryRule::Rent | EntryRule::Family) {
            for (rank, p) in ranked.iter().enumerate() {
                participant_band.insert(p.id, band_of_rank(&sizes, rank));
            }
        }

        let all: Vec<&ParticipantProfile> = scenario.participants.iter().collect();
        let vfa = designate_vulnerable(&all, VulnerableMode::Vfa, config.vulnerable_fraction);

        Ok(Self {
            scenario,
            policy,
            backend,
            config,
            seed,
            rng,
            round: 0,
            queues: (0..m).map(QueueState::new).collect(),
            resource_band,
            participant_band,
            admitted_round: BTreeMap::new(),
            admitted_resources: BTreeSet::new(),
            pending_route: Vec::new(),
            queue_of: BTreeMap::new(),
            memories: BTreeMap::new(),
            vfa,
            outcome: AllocationOutcome::default(),
            forum: Vec::new(),
            finished: false,
        })
    }

    pub fn queues(&self) -> &[QueueState] {
        &self.queues
    }

    pub fn memory(&self, id: ParticipantId) -> Option<&AgentMemory> {
        self.memories.get(&id)
    }

    pub fn forum(&self) -> &[Utterance] {
        &self.forum
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn profile(&self, id: ParticipantId) -> &'a ParticipantProfile {
        self.scenario.participant(id).expect("ids come from the scenario")
    }

    fn house(&self, id: ResourceId) -> &'a HouseResource {
        self.scenario.resource(id).expect("ids come from the scenario")
    }

    fn resolved(&self, id: ParticipantId) -> bool {
        self.outcome.quit.contains(&id) || self.outcome.assignment.get(&id).is_some_and(|a| a.is_some())
    }

    /// Admitted and neither allocated nor quit.
    pub fn present(&self) -> Vec<ParticipantId> {
        self.admitted_round.keys().copied().filter(|id| !self.resolved(*id)).collect()
    }

    fn visible(&self, id: ParticipantId) -> Vec<&'a HouseResource> {
        let scenario = self.scenario;
        match self.queue_of.get(&id) {
            Some(q) => self.queues[*q].pool.iter().map(|r| scenario.resource(*r).expect("pool ids exist")).collect(),
            None => Vec::new(),
        }
    }

    fn summaries(&self) -> Result<Vec<QueueSummary>, ScenarioError> {
        let mut per_queue: Vec<Vec<&HouseResource>> = vec![Vec::new(); self.queues.len()];
        for (rid, q) in &self.resource_band {
            if !self.queues[*q].allocated.contains(rid) {
                per_queue[*q].push(self.house(*rid));
            }
        }
        per_queue
            .iter()
            .enumerate()
            .map(|(i, hs)| QueueSummary::from_resources(i, hs, &self.scenario.rating_table))
            .collect()
    }

    fn admit(&mut self, log: &mut RoundLog) {
        let round = self.round;
        let mut arrivals: Vec<&ParticipantProfile> = self
            .scenario
            .participants
            .iter()
            .filter(|p| p.entry_round <= round && !self.admitted_round.contains_key(&p.id))
            .collect();
        arrivals.sort_by_key(|p| (p.entry_round, p.id));
        for p in arrivals.into_iter().take(self.policy.batch_p as usize) {
            self.admitted_round.insert(p.id, round);
            let mut memory = AgentMemory::default();
            for (peer, rel) in self.scenario.graph.neighbours(p.id) {
                memory.relations.insert(peer, RelationState::new(rel));
            }
            self.memories.insert(p.id, memory);
            self.pending_route.push(p.id);
            log.admitted_participants.push(p.id);
        }

        let mut arriving: Vec<&HouseResource> = self
            .scenario
            .resources
            .iter()
            .filter(|r| r.entry_round <= round && !self.admitted_resources.contains(&r.id))
            .collect();
        arriving.sort_by_key(|r| (r.entry_round, r.id));
        for r in arriving.into_iter().take(self.policy.batch_r as usize) {
            self.admitted_resources.insert(r.id);
            let q = self.resource_band[&r.id];
            let pool = &mut self.queues[q].pool;
            let at = pool.partition_point(|x| *x < r.id);
            pool.insert(at, r.id);
            log.admitted_resources.push(r.id);
        }
    }

    fn route(&mut self, log: &mut RoundLog) {
        let pending = std::mem::take(&mut self.pending_route);
        let summaries = if self.policy.entry_rule == EntryRule::Select {
            match self.summaries() {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("queue summaries unavailable: {e}");
                    None
                }
            }
        } else {
            None
        };
        let m = self.queues.len();
        for id in pending {
            let q = match self.policy.entry_rule {
                EntryRule::Rent | EntryRule::Family => Some(self.participant_band[&id]),
                EntryRule::Random => Some(self.rng.random_range(0..m)),
                EntryRule::Select => summaries.as_ref().and_then(|s| {
                    let view = AgentView {
                        profile: self.profile(id),
                        memory: &self.memories[&id],
                        rating_table: &self.scenario.rating_table,
                        visible: &[],
                        round: self.round,
                    };
                    match self.backend.select_queue(&view, s) {
                        Ok(q) if q < m => Some(q),
                        Ok(q) => {
                            log::warn!("participant {id} picked missing queue {q}; retrying next round");
                            None
                        }
                        Err(e) => {
                            log::warn!("queue choice for {id} failed: {e}; retrying next round");
                            None
                        }
                    }
                }),
            };
            match q {
                Some(q) => {
                    self.queue_of.insert(id, q);
                    self.queues[q].waiting.push(id);
                    log.routed.push((id, q));
                }
                None => self.pending_route.push(id),
            }
        }
    }

    fn vulnerable_now(&self) -> BTreeSet<ParticipantId> {
        match self.policy.sort_rule {
            SortRule::Fifo => BTreeSet::new(),
            SortRule::Vfa => self.vfa.clone(),
            SortRule::Vfr => {
                let present: Vec<&ParticipantProfile> = self.present().into_iter().map(|id| self.profile(id)).collect();
                designate_vulnerable(&present, VulnerableMode::Vfr, self.config.vulnerable_fraction)
            }
        }
    }

    fn finish_participant(&mut self, id: ParticipantId, resource: Option<ResourceId>, satisfaction: f64, quit: bool) {
        let entry = self.profile(id).entry_round;
        self.outcome.assignment.insert(id, resource);
        self.outcome.wait_rounds.insert(id, self.round.saturating_sub(entry));
        self.outcome.satisfaction.insert(id, satisfaction);
        if quit {
            self.outcome.quit.insert(id);
        }
        self.queue_of.remove(&id);
    }

    fn demote_liars(&mut self, who: ParticipantId, liars: &[ParticipantId]) {
        let profile = self.profile(who);
        for liar in liars {
            let memory = self.memories.get_mut(&who).expect("admitted");
            let state = memory.relations.get(liar).cloned().unwrap_or_else(|| RelationState::new(memory.relation_with(*liar)));
            let next = self.backend.evaluate_relation(profile, *liar, &state, &Default::default(), true);
            memory.relations.insert(*liar, next);
        }
    }

    fn act(&mut self, q: usize, id: ParticipantId, ed: &CompetitivenessReport, log: &mut RoundLog) {
        let profile = self.profile(id);
        let visible = self.visible(id);
        let visible_ids: Vec<ResourceId> = visible.iter().map(|h| h.id).collect();
        let threshold = self.backend.params().reflection_threshold;

        let facts = {
            let view = AgentView {
                profile,
                memory: &self.memories[&id],
                rating_table: &self.scenario.rating_table,
                visible: &visible,
                round: self.round,
            };
            self.backend.observe(&view)
        };
        let mut liars = Vec::new();
        for f in facts {
            let memory = self.memories.get_mut(&id).expect("admitted");
            liars.extend(memory.observe(f, Source::SelfObserved, self.round, threshold));
        }
        self.demote_liars(id, &liars);

        let decision = {
            let view = AgentView {
                profile,
                memory: &self.memories[&id],
                rating_table: &self.scenario.rating_table,
                visible: &visible,
                round: self.round,
            };
            self.backend.decide(&view, ed)
        };

        let pos = self.queues[q].selection.iter().position(|e| e.participant == id).expect("actor is selecting");
        let mut returned = false;
        let outcome = match decision {
            Ok(Decision::Choose(rid)) if visible_ids.contains(&rid) => {
                let house = self.house(rid);
                let satisfaction = match self.backend.score(profile, house, &self.scenario.rating_table) {
                    Ok(s) => s.u,
                    Err(e) => {
                        log::warn!("scoring house {rid} for {id} failed: {e}");
                        0.0
                    }
                };
                let queue = &mut self.queues[q];
                queue.pool.retain(|r| *r != rid);
                queue.allocated.push(rid);
                queue.selection.remove(pos);
                let memory = self.memories.get_mut(&id).expect("admitted");
                memory.observe(
                    crate::agents::Fact::new(rid, Attribute::Condition, house.undisclosed.clone()),
                    Source::SelfObserved,
                    self.round,
                    threshold,
                );
                self.finish_participant(id, Some(rid), satisfaction, false);
                DecisionOutcome::Chose { resource: rid, satisfaction }
            }
            Ok(Decision::Choose(rid)) => {
                self.rotate(q, pos);
                DecisionOutcome::Skipped { reason: format!("house {rid} is not in the visible pool") }
            }
            Ok(Decision::Decline) => {
                self.memories.get_mut(&id).expect("admitted").declines += 1;
                let queue = &mut self.queues[q];
                let mut entry = queue.selection.remove(pos);
                entry.remaining_choices = entry.remaining_choices.saturating_sub(1);
                if entry.remaining_choices == 0 {
                    queue.waiting.push(id);
                    returned = true;
                } else {
                    queue.selection.push(entry);
                }
                DecisionOutcome::Declined
            }
            Ok(Decision::Quit) => {
                self.queues[q].selection.remove(pos);
                self.finish_participant(id, None, 0.0, true);
                DecisionOutcome::Quit
            }
            Err(e) => {
                log::warn!("decision of {id} skipped: {e}");
                self.rotate(q, pos);
                DecisionOutcome::Skipped { reason: e.to_string() }
            }
        };
        let remaining_choices = self.queues[q].selection.iter().find(|e| e.participant == id).map_or(0, |e| e.remaining_choices);
        log.decisions.push(DecisionRecord {
            queue: q,
            participant: id,
            visible: visible_ids,
            outcome,
            remaining_choices,
            returned_to_waiting: returned,
        });
    }

    fn rotate(&mut self, q: usize, pos: usize) {
        let sel = &mut self.queues[q].selection;
        let e = sel.remove(pos);
        sel.push(e);
    }

    /// Executes one round and returns its log.
    pub fn step_round(&mut self) -> RoundLog {
        let mut log = RoundLog {
            round: self.round,
            admitted_participants: Vec::new(),
            admitted_resources: Vec::new(),
            routed: Vec::new(),
            vulnerable: Vec::new(),
            queues: Vec::new(),
            decisions: Vec::new(),
            messages: Vec::new(),
            posts: Vec::new(),
        };
        self.admit(&mut log);
        self.route(&mut log);

        let vulnerable = self.vulnerable_now();
        log.vulnerable = vulnerable.iter().copied().collect();

        let k = self.policy.k;
        let c = self.policy.c;
        let mut sorted_waiting = Vec::with_capacity(self.queues.len());
        let mut promoted = Vec::with_capacity(self.queues.len());
        for q in 0..self.queues.len() {
            let keyed: Vec<(ParticipantId, u32)> =
                self.queues[q].waiting.iter().map(|id| (*id, self.admitted_round[id])).collect();
            let order = sort_queue(&keyed, self.policy.sort_rule, &vulnerable);
            sorted_waiting.push(order.clone());
            let queue = &mut self.queues[q];
            queue.waiting = order;
            let cap = selection_capacity(c, queue.pool.len());
            let mut moved = Vec::new();
            while queue.selection.len() < cap && !queue.waiting.is_empty() {
                let id = queue.waiting.remove(0);
                queue.selection.push(SelectionEntry { participant: id, remaining_choices: k, joined_round: self.round });
                moved.push(id);
            }
            promoted.push(moved);
        }

        let ed = compute_competitiveness(&self.queues, self.scenario);
        for q in 0..self.queues.len() {
            let actors: Vec<ParticipantId> = match self.config.decision_mode {
                DecisionMode::Head => self.queues[q].selection.first().map(|e| e.participant).into_iter().collect(),
                DecisionMode::AllSelection => self.queues[q].selection.iter().map(|e| e.participant).collect(),
            };
            for id in actors {
                if self.queues[q].selection.iter().any(|e| e.participant == id) {
                    self.act(q, id, &ed, &mut log);
                }
            }
            let queue = &mut self.queues[q];
            let cap = selection_capacity(c, queue.pool.len());
            while queue.selection.len() > cap {
                let e = queue.selection.pop().expect("longer than cap");
                queue.waiting.push(e.participant);
            }
        }

        if self.config.social.enabled {
            self.social_phase(&ed, &mut log);
        }

        for (q, queue) in self.queues.iter().enumerate() {
            log.queues.push(QueueSnapshot {
                queue: q,
                sorted_waiting: std::mem::take(&mut sorted_waiting[q]),
                promoted: std::mem::take(&mut promoted[q]),
                waiting: queue.waiting.clone(),
                selection: queue.selection.clone(),
                pool: queue.pool.clone(),
                capacity: selection_capacity(c, queue.pool.len()),
            });
        }

        let everyone_done = self.scenario.participants.iter().all(|p| self.resolved(p.id));
        let houses_gone = self.admitted_resources.len() == self.scenario.resources.len()
            && self.queues.iter().all(|q| q.pool.is_empty());
        // Nobody left can reach a house: every remaining contender sits in a
        // queue whose pool is exhausted and no more houses will arrive.
        let stalled = self.admitted_resources.len() == self.scenario.resources.len()
            && self.admitted_round.len() == self.scenario.participants.len()
            && self.pending_route.is_empty()
            && self.queues.iter().all(|q| q.pool.is_empty() || (q.waiting.is_empty() && q.selection.is_empty()));
        self.outcome.rounds_run = self.round + 1;
        if everyone_done || houses_gone || stalled || self.round + 1 >= self.config.max_rounds {
            self.finalize();
        } else {
            self.round += 1;
        }
        log
    }

    fn finalize(&mut self) {
        self.finished = true;
        for p in &self.scenario.participants {
            if !self.resolved(p.id) {
                self.outcome.assignment.insert(p.id, None);
                self.outcome.wait_rounds.insert(p.id, self.round.saturating_sub(p.entry_round));
                self.outcome.satisfaction.insert(p.id, 0.0);
            }
        }
    }

    pub fn outcome(&self) -> &AllocationOutcome {
        &self.outcome
    }

    pub fn run(mut self) -> SimulationTrace {
        let mut rounds = Vec::new();
        while !self.finished {
            rounds.push(self.step_round());
        }
        SimulationTrace {
            seed: self.seed,
            policy: self.policy.clone(),
            backend: self.backend.name().to_string(),
            rounds,
            outcome: self.outcome,
        }
    }
}

/// Runs rounds until everyone is allocated or has quit, no houses remain,
/// or `config.max_rounds` is reached.
pub fn run_simulation(
    scenario: &Scenario,
    policy: &Policy,
    backend: &dyn DecisionBackend,
    seed: u64,
    config: &EngineConfig,
) -> Result<SimulationTrace, EngineError> {
    Ok(Simulation::new(scenario, policy, backend, seed, config.clone())?.run())
}

/// The VFA-style bottom group over all participants, used by the fairness gap metric.
pub fn vulnerable_group(scenario: &Scenario, fraction: f64) -> BTreeSet<ParticipantId> {
    let all: Vec<&ParticipantProfile> = scenario.participants.iter().collect();
    designate_vulnerable(&all, VulnerableMode::Vfa, fraction)
}
