//! Participant memory: trusted and suspicious stores, short/long-term banks,
//! and the relation ladder.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::{ParticipantId, Relation, ResourceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Rent,
    Size,
    Orientation,
    Floor,
    /// Undisclosed condition learned after selecting the house.
    Condition,
    /// Opinion: `recommended` or `avoid`.
    Verdict,
}

pub const RECOMMENDED: &str = "recommended";
pub const AVOID: &str = "avoid";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub resource: ResourceId,
    pub attribute: Attribute,
    pub value: String,
}

impl Fact {
    pub fn new(resource: ResourceId, attribute: Attribute, value: impl Into<String>) -> Self {
        Self { resource, attribute, value: value.into() }
    }

    pub fn key(&self) -> (ResourceId, Attribute) {
        (self.resource, self.attribute)
    }

    pub fn render(&self) -> String {
        match self.attribute {
            Attribute::Verdict => format!("house {} is {}", self.resource, self.value),
            a => format!("house {} {:?} is {}", self.resource, a, self.value).to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Policymaker,
    Broadcast,
    Private,
    #[serde(rename = "self")]
    SelfObserved,
}

impl Source {
    pub fn is_social(self) -> bool {
        matches!(self, Source::Broadcast | Source::Private)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub fact: Fact,
    pub source: Source,
    pub from: Option<ParticipantId>,
    pub round: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySummary {
    pub round: u32,
    pub digest: Vec<Fact>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationState {
    pub relation: Relation,
    /// Free-form relation note.
    pub note: String,
    /// Moral appraisal; the rule backend keeps it to a short ladder label.
    pub moral: String,
    pub consistent: u32,
}

impl RelationState {
    pub fn new(relation: Relation) -> Self {
        Self { relation, note: String::new(), moral: String::new(), consistent: 0 }
    }
}

/// Trust score of a relation; no edge counts as a stranger.
pub fn trust_score(relation: Relation) -> f64 {
    match relation {
        Relation::Friend | Relation::Mate => 0.9,
        Relation::Colleague => 0.6,
        Relation::Stranger => 0.4,
        Relation::Competitor => 0.2,
        Relation::Enemy => 0.1,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentMemory {
    pub trusted: Vec<MemoryEntry>,
    pub suspicious: Vec<MemoryEntry>,
    pub short_term: Vec<MemoryEntry>,
    pub long_term: Vec<MemorySummary>,
    pub relations: BTreeMap<ParticipantId, RelationState>,
    /// Recent utterance texts per peer, newest last.
    pub dialogue: BTreeMap<ParticipantId, Vec<String>>,
    pub declines: u32,
    /// Forum index up to which posts have been read.
    pub forum_cursor: usize,
    /// Peers caught in a false claim, in detection order.
    pub detected_lies: Vec<ParticipantId>,
}

pub const DIALOGUE_WINDOW: usize = 4;

impl AgentMemory {
    pub fn relation_with(&self, peer: ParticipantId) -> Relation {
        self.relations.get(&peer).map(|r| r.relation).unwrap_or(Relation::Stranger)
    }

    pub fn trusted_value(&self, resource: ResourceId, attribute: Attribute) -> Option<&str> {
        self.trusted
            .iter()
            .rev()
            .find(|e| e.fact.resource == resource && e.fact.attribute == attribute)
            .map(|e| e.fact.value.as_str())
    }

    pub fn push_dialogue(&mut self, peer: ParticipantId, text: String) {
        let lines = self.dialogue.entry(peer).or_default();
        lines.push(text);
        if lines.len() > DIALOGUE_WINDOW {
            lines.remove(0);
        }
    }

    fn remember(&mut self, entry: MemoryEntry, reflection_threshold: usize) {
        self.short_term.push(entry);
        reflect_memory(self, reflection_threshold, None);
    }

    /// Stores a first-hand or policymaker fact as trusted. Conflicting
    /// social entries are demoted and their senders returned as liars.
    pub fn observe(&mut self, fact: Fact, source: Source, round: u32, reflection_threshold: usize) -> Vec<ParticipantId> {
        debug_assert!(!source.is_social());
        let mut liars = Vec::new();
        let mut kept = Vec::with_capacity(self.trusted.len());
        for e in std::mem::take(&mut self.trusted) {
            if e.fact.key() == fact.key() && e.fact.value != fact.value {
                if e.source.is_social() {
                    if let Some(p) = e.from {
                        liars.push(p);
                    }
                    self.suspicious.push(MemoryEntry { reason: Some("contradicted by own observation".into()), ..e });
                }
                // An older first-hand value is superseded.
                continue;
            }
            if e.fact == fact && !e.source.is_social() {
                continue;
            }
            kept.push(e);
        }
        self.trusted = kept;
        let entry = MemoryEntry { fact, source, from: None, round, reason: None };
        self.trusted.push(entry.clone());
        self.remember(entry, reflection_threshold);
        self.detected_lies.extend(liars.iter().copied());
        liars
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessParams {
    pub trust_threshold: f64,
    pub reflection_threshold: usize,
}

impl Default for AssessParams {
    fn default() -> Self {
        Self { trust_threshold: 0.5, reflection_threshold: 20 }
    }
}

/// What an assessed message contributed, for relation evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Exchange {
    pub claims: usize,
    pub promoted: usize,
    pub contradictions: usize,
}

impl Exchange {
    pub fn is_empty(&self) -> bool {
        self.claims == 0
    }
}

/// Files incoming claims as suspicious, then promotes each one whose sender
/// clears the trust threshold and which no trusted entry contradicts.
pub fn assess_memory(
    memory: &mut AgentMemory,
    facts: &[Fact],
    from: ParticipantId,
    source: Source,
    round: u32,
    params: &AssessParams,
) -> Exchange {
    debug_assert!(source.is_social());
    let trust = trust_score(memory.relation_with(from));
    let mut ex = Exchange { claims: facts.len(), ..Exchange::default() };
    for fact in facts {
        let entry = MemoryEntry { fact: fact.clone(), source, from: Some(from), round, reason: None };
        let contradicted = memory.trusted.iter().any(|t| t.fact.key() == fact.key() && t.fact.value != fact.value);
        if contradicted {
            ex.contradictions += 1;
            memory.suspicious.push(MemoryEntry { reason: Some("contradicts trusted memory".into()), ..entry.clone() });
        } else if trust >= params.trust_threshold {
            ex.promoted += 1;
            if !memory.trusted.iter().any(|t| t.fact == *fact) {
                memory.trusted.push(entry.clone());
            }
        } else {
            memory.suspicious.push(MemoryEntry { reason: Some("sender below trust threshold".into()), ..entry.clone() });
        }
        memory.remember(entry, params.reflection_threshold);
    }
    if ex.contradictions > 0 {
        memory.detected_lies.push(from);
    }
    ex
}

/// Latest-wins digest of the short-term bank, applied only when it holds
/// more than `threshold` entries.
pub fn reflect_memory(memory: &mut AgentMemory, threshold: usize, round: Option<u32>) -> bool {
    if memory.short_term.len() <= threshold {
        return false;
    }
    let mut latest: BTreeMap<(ResourceId, Attribute), Fact> = BTreeMap::new();
    let mut last_round = 0;
    for e in &memory.short_term {
        latest.insert(e.fact.key(), e.fact.clone());
        last_round = last_round.max(e.round);
    }
    let digest: Vec<Fact> = latest.into_values().collect();
    let text = digest.iter().map(Fact::render).collect::<Vec<_>>().join("; ");
    memory.long_term.push(MemorySummary { round: round.unwrap_or(last_round), digest, text });
    memory.short_term.clear();
    true
}

fn rank(r: Relation) -> u8 {
    match r {
        Relation::Enemy => 0,
        Relation::Competitor => 1,
        Relation::Stranger => 2,
        Relation::Colleague => 3,
        Relation::Friend | Relation::Mate => 4,
    }
}

fn from_rank(r: u8) -> Relation {
    match r {
        0 => Relation::Enemy,
        1 => Relation::Competitor,
        2 => Relation::Stranger,
        3 => Relation::Colleague,
        _ => Relation::Friend,
    }
}

pub const PROMOTION_STREAK: u32 = 2;

/// A lie moves the relation one rung down; two consistent exchanges move a
/// stranger or colleague one rung up.
pub fn evaluate_relation(state: &RelationState, exchange: &Exchange, lie_detected: bool) -> RelationState {
    let mut next = state.clone();
    if lie_detected || exchange.contradictions > 0 {
        next.relation = from_rank(rank(state.relation).saturating_sub(1));
        next.consistent = 0;
        next.moral = "dishonest".into();
        next.note = format!("caught in a false claim; now {:?}", next.relation).to_lowercase();
        return next;
    }
    if exchange.is_empty() {
        return next;
    }
    next.consistent += 1;
    if matches!(state.relation, Relation::Stranger | Relation::Colleague) && next.consistent >= PROMOTION_STREAK {
        next.relation = from_rank(rank(state.relation) + 1);
        next.consistent = 0;
        next.moral = "reliable".into();
        next.note = format!("consistent information; now {:?}", next.relation).to_lowercase();
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(r: ResourceId, v: &str) -> Fact {
        Fact::new(r, Attribute::Rent, v)
    }

    fn memory_with(peer: ParticipantId, rel: Relation) -> AgentMemory {
        let mut m = AgentMemory::default();
        m.relations.insert(peer, RelationState::new(rel));
        m
    }

    #[test]
    fn friend_claim_is_promoted() {
        let mut m = memory_with(1, Relation::Friend);
        let ex = assess_memory(&mut m, &[fact(5, "low")], 1, Source::Private, 0, &AssessParams::default());
        assert_eq!(ex.promoted, 1);
        assert_eq!(m.trusted_value(5, Attribute::Rent), Some("low"));
    }

    #[test]
    fn contradiction_stays_suspicious() {
        let mut m = memory_with(1, Relation::Friend);
        m.observe(fact(5, "low"), Source::SelfObserved, 0, 20);
        let ex = assess_memory(&mut m, &[fact(5, "high")], 1, Source::Private, 1, &AssessParams::default());
        assert_eq!(ex.contradictions, 1);
        assert_eq!(m.trusted_value(5, Attribute::Rent), Some("low"));
        assert!(m.suspicious.iter().any(|e| e.fact.value == "high" && e.reason.is_some()));
    }

    #[test]
    fn enemy_claim_stays_suspicious() {
        let mut m = memory_with(1, Relation::Enemy);
        let ex = assess_memory(&mut m, &[fact(5, "low")], 1, Source::Private, 0, &AssessParams::default());
        assert_eq!(ex.promoted, 0);
        assert!(m.trusted.is_empty());
        assert_eq!(m.suspicious.len(), 1);
    }

    #[test]
    fn unreachable_threshold_blocks_promotion() {
        let mut m = memory_with(1, Relation::Friend);
        let params = AssessParams { trust_threshold: 1.1, ..AssessParams::default() };
        assess_memory(&mut m, &[fact(5, "low")], 1, Source::Broadcast, 0, &params);
        assert!(m.trusted.is_empty());
    }

    #[test]
    fn later_observation_demotes_social_claim() {
        let mut m = memory_with(1, Relation::Friend);
        assess_memory(&mut m, &[Fact::new(3, Attribute::Verdict, RECOMMENDED)], 1, Source::Broadcast, 0, &AssessParams::default());
        let liars = m.observe(Fact::new(3, Attribute::Verdict, AVOID), Source::SelfObserved, 2, 20);
        assert_eq!(liars, vec![1]);
        assert_eq!(m.trusted_value(3, Attribute::Verdict), Some(AVOID));
        assert!(m.trusted.iter().all(|e| !e.source.is_social() || e.fact.value != RECOMMENDED));
    }

    #[test]
    fn reflection_rules() {
        let mut m = AgentMemory::default();
        for (i, v) in ["a", "b", "c"].iter().enumerate() {
            m.short_term.push(MemoryEntry { fact: fact(1, v), source: Source::SelfObserved, from: None, round: i as u32, reason: None });
        }
        assert!(!reflect_memory(&mut m, 3, None));
        assert_eq!(m.short_term.len(), 3);
        assert!(reflect_memory(&mut m, 2, None));
        assert!(m.short_term.is_empty());
        assert_eq!(m.long_term[0].digest, vec![fact(1, "c")]);
    }

    #[test]
    fn short_term_never_exceeds_threshold() {
        let mut m = memory_with(1, Relation::Friend);
        let params = AssessParams { reflection_threshold: 3, ..AssessParams::default() };
        for i in 0..10 {
            assess_memory(&mut m, &[fact(i, "x")], 1, Source::Private, i, &params);
            assert!(m.short_term.len() <= 3);
        }
    }

    #[test]
    fn relation_ladder() {
        let one = Exchange { claims: 1, promoted: 1, contradictions: 0 };
        let s = RelationState::new(Relation::Stranger);
        let s1 = evaluate_relation(&s, &one, false);
        assert_eq!(s1.relation, Relation::Stranger);
        assert_eq!(evaluate_relation(&s1, &one, false).relation, Relation::Colleague);
        let f = RelationState::new(Relation::Friend);
        assert_eq!(evaluate_relation(&f, &one, true).relation, Relation::Colleague);
        assert_eq!(evaluate_relation(&RelationState::new(Relation::Mate), &one, true).relation, Relation::Colleague);
        assert_eq!(evaluate_relation(&RelationState::new(Relation::Enemy), &one, true).relation, Relation::Enemy);
        assert_eq!(evaluate_relation(&f, &Exchange::default(), false), f);
    }
}
