//! Private messaging and forum posts. Messages are generated from a
//! snapshot of all memories, optionally in parallel per social-graph
//! component, then applied in ascending `(speaker, listener)` order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CompetitivenessReport, RoundLog, Simulation};
use crate::agents::{AgentView, Audience, Exchange, RelationState, Utterance};
use crate::scenario::{HouseResource, ParticipantId};

const FORUM_SLOT: u64 = u32::MAX as u64;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream per `(seed, round, speaker, slot)`, so message order
/// and thread scheduling never change the draws.
pub(crate) fn message_rng(seed: u64, round: u32, speaker: ParticipantId, slot: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for part in [round as u64, speaker as u64, slot] {
        h = splitmix(h ^ part);
    }
    ChaCha8Rng::seed_from_u64(h)
}

struct Spoken {
    speaker: ParticipantId,
    private: Vec<Utterance>,
    post: Option<Utterance>,
}

impl Simulation<'_> {
    fn speak_as(&self, speaker: ParticipantId, present: &[ParticipantId], ed: &CompetitivenessReport) -> Spoken {
        let profile = self.profile(speaker);
        let memory = &self.memories[&speaker];
        let visible = self.visible(speaker);
        let view = AgentView { profile, memory, rating_table: &self.scenario.rating_table, visible: &visible, round: self.round };
        let cfg = &self.config.social;

        let neighbours: Vec<ParticipantId> = self
            .scenario
            .graph
            .neighbours(speaker)
            .into_iter()
            .map(|(id, _)| id)
            .filter(|id| present.binary_search(id).is_ok())
            .collect();
        let mut targets = Vec::new();
        if !neighbours.is_empty() {
            let start = self.round as usize % neighbours.len();
            for i in 0..cfg.private_fanout.min(neighbours.len()) {
                targets.push(neighbours[(start + i) % neighbours.len()]);
            }
            targets.sort_unstable();
        }

        let mut private = Vec::new();
        for listener in targets {
            let mut rng = message_rng(self.seed, self.round, speaker, listener as u64);
            let relation = memory.relation_with(listener);
            let relevant: Vec<&HouseResource> = self.visible(listener);
            let said = self
                .backend
                .plan(&view, Some((listener, relation)), ed, &mut rng)
                .and_then(|plan| self.backend.speak(&view, &plan, &relevant, ed));
            match said {
                Ok(u) => private.push(u),
                Err(e) => log::warn!("{speaker} -> {listener}: message dropped: {e}"),
            }
        }

        let mut post = None;
        if cfg.broadcast_every > 0 && (self.round + speaker).is_multiple_of(cfg.broadcast_every) && !visible.is_empty() {
            let mut rng = message_rng(self.seed, self.round, speaker, FORUM_SLOT);
            let said = self
                .backend
                .plan(&view, None, ed, &mut rng)
                .and_then(|plan| self.backend.speak(&view, &plan, &visible, ed));
            match said {
                Ok(u) if !u.claims.is_empty() => post = Some(u),
                Ok(_) => {}
                Err(e) => log::warn!("{speaker}: post dropped: {e}"),
            }
        }
        Spoken { speaker, private, post }
    }

    fn record_exchange(&mut self, listener: ParticipantId, speaker: ParticipantId, exchange: &Exchange) {
        if exchange.is_empty() {
            return;
        }
        let profile = self.profile(listener);
        let memory = self.memories.get_mut(&listener).expect("admitted");
        let state = memory.relations.get(&speaker).cloned().unwrap_or_else(|| RelationState::new(memory.relation_with(speaker)));
        let lie = exchange.contradictions > 0;
        let next = self.backend.evaluate_relation(profile, speaker, &state, exchange, lie);
        memory.relations.insert(speaker, next);
    }

    pub(super) fn social_phase(&mut self, ed: &CompetitivenessReport, log: &mut RoundLog) {
        let present = self.present();
        if present.is_empty() {
            return;
        }
        let mut spoken: Vec<Spoken> = if self.config.social.parallel {
            let groups = self.scenario.graph.components(&present);
            let this = &*self;
            groups
                .par_iter()
                .flat_map_iter(|g| g.iter().map(|s| this.speak_as(*s, &present, ed)).collect::<Vec<_>>())
                .collect()
        } else {
            present.iter().map(|s| self.speak_as(*s, &present, ed)).collect()
        };
        spoken.sort_by_key(|s| s.speaker);

        let round = self.round;
        for s in &spoken {
            if let Some(p) = &s.post {
                self.forum.push(p.clone());
                log.posts.push(p.clone());
            }
        }
        let mut messages: Vec<Utterance> = spoken.into_iter().flat_map(|s| s.private).collect();
        messages.sort_by_key(|u| match u.audience {
            Audience::Private { listener } => (u.speaker, listener),
            Audience::Forum { .. } => (u.speaker, u32::MAX),
        });
        for u in &messages {
            let Audience::Private { listener } = u.audience else { continue };
            let profile = self.profile(listener);
            let memory = self.memories.get_mut(&listener).expect("admitted");
            memory.push_dialogue(u.speaker, format!("{}: {}", u.speaker, u.text));
            let exchange = self.backend.assess(profile, memory, u, round);
            if let Some(sm) = self.memories.get_mut(&u.speaker) {
                sm.push_dialogue(listener, format!("{}: {}", u.speaker, u.text));
            }
            self.record_exchange(listener, u.speaker, &exchange);
        }
        log.messages = messages;

        let window = self.config.social.forum_window;
        for reader in &present {
            let mut topics: Vec<u32> = self.visible(*reader).iter().map(|h| h.community_id).collect();
            topics.sort_unstable();
            topics.dedup();
            let cursor = self.memories[reader].forum_cursor;
            let unseen: Vec<Utterance> = self.forum[cursor.min(self.forum.len())..]
                .iter()
                .filter(|p| p.speaker != *reader)
                .filter(|p| matches!(p.audience, Audience::Forum { community } if topics.binary_search(&community).is_ok()))
                .cloned()
                .collect();
            let start = unseen.len().saturating_sub(window);
            let profile = self.profile(*reader);
            for post in &unseen[start..] {
                let memory = self.memories.get_mut(reader).expect("admitted");
                let exchange = self.backend.assess(profile, memory, post, round);
                if exchange.contradictions > 0 {
                    self.record_exchange(*reader, post.speaker, &exchange);
                }
            }
            self.memories.get_mut(reader).expect("admitted").forum_cursor = self.forum.len();
        }

        for id in &present {
            let profile = self.profile(*id);
            let memory = self.memories.get_mut(id).expect("admitted");
            self.backend.reflect(profile, memory, round);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_keyed() {
        let a: u64 = message_rng(1, 2, 3, 4).random();
        let b: u64 = message_rng(1, 2, 3, 4).random();
        let c: u64 = message_rng(1, 2, 4, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
