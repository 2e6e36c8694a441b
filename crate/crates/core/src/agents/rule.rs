//! Deterministic rule-based participant.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::memory::{self, AgentMemory, Attribute, Exchange, Fact, RelationState, Source, AVOID, RECOMMENDED};
use super::{
    AgentParams, AgentView, Audience, BackendError, Claim, CommunicationPlan, Decision, DecisionBackend, Intent,
    QueueSummary, Score, Utterance,
};
use crate::engine::CompetitivenessReport;
use crate::scenario::{
    Feature, HouseResource, ParticipantId, ParticipantProfile, Personality, RatingTable, Relation, ResourceId, ScenarioError,
};

fn affordability_bonus(rent: f64, budget: f64) -> f64 {
    if rent <= 0.0 {
        return 10.0;
    }
    if budget <= 0.0 {
        return 0.0;
    }
    (10.0 * (1.0 - rent / budget)).clamp(0.0, 10.0)
}

/// `U_o` is the weight-blended rating, `U_s` the affordability bonus, `U` their sum.
pub fn score_resource(p: &ParticipantProfile, r: &HouseResource, table: &RatingTable) -> Result<Score, ScenarioError> {
    let mut u_o = 0.0;
    for f in Feature::ALL {
        let w = p.feature_weights.get(f);
        if w != 0.0 {
            u_o += w * table.score(f, r)?;
        }
    }
    let u_s = affordability_bonus(r.rent, p.rent_budget);
    Ok(Score { u_o, u_s, u: u_o + u_s })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleBackend {
    pub params: AgentParams,
}

impl RuleBackend {
    pub fn new(params: AgentParams) -> Self {
        Self { params }
    }

    fn affordable(&self, p: &ParticipantProfile, r: &HouseResource) -> bool {
        r.rent <= self.params.affordability_cap * p.rent_budget
    }

    /// Utility shifted by trusted second-hand verdicts.
    fn perceived(&self, memory: &AgentMemory, r: ResourceId, u: f64) -> f64 {
        let verdict = memory
            .trusted
            .iter()
            .rev()
            .find(|e| e.source.is_social() && e.fact.resource == r && e.fact.attribute == Attribute::Verdict);
        match verdict.map(|e| e.fact.value.as_str()) {
            Some(RECOMMENDED) => u + self.params.verdict_weight,
            Some(AVOID) => u - self.params.verdict_weight,
            _ => u,
        }
    }

    fn aspiration(&self, p: &ParticipantProfile, memory: &AgentMemory) -> f64 {
        let base = match p.personality {
            Personality::Conservative => 0.0,
            Personality::Neutral => self.params.aspiration_neutral,
            Personality::Astute => self.params.aspiration_astute,
        };
        base - self.params.aspiration_decay * memory.declines as f64
    }

    fn scored<'h>(&self, view: &AgentView<'h>) -> Result<Vec<(&'h HouseResource, f64)>, ScenarioError> {
        view.visible
            .iter()
            .map(|h| Ok((*h, score_resource(view.profile, h, view.rating_table)?.u)))
            .collect()
    }
}

/// Ranking key: higher utility first, then lower id.
fn key(u: f64, id: ResourceId) -> (f64, std::cmp::Reverse<ResourceId>) {
    (u, std::cmp::Reverse(id))
}

fn better(a: (f64, std::cmp::Reverse<ResourceId>), b: (f64, std::cmp::Reverse<ResourceId>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

fn best_of<'h, K: Ord + Copy>(
    items: &[(&'h HouseResource, f64)],
    group: impl Fn(&HouseResource) -> K,
) -> Vec<(&'h HouseResource, f64)> {
    let mut groups: BTreeMap<K, Vec<(&HouseResource, f64)>> = BTreeMap::new();
    for it in items {
        groups.entry(group(it.0)).or_default().push(*it);
    }
    let mut winner: Option<(K, (f64, std::cmp::Reverse<ResourceId>))> = None;
    for (k, members) in &groups {
        let top = members.iter().map(|(h, u)| key(*u, h.id)).fold(None, |acc: Option<_>, x| match acc {
            Some(a) if !better(x, a) => Some(a),
            _ => Some(x),
        });
        let top = top.expect("groups are non-empty");
        if winner.as_ref().is_none_or(|(_, w)| better(top, *w)) {
            winner = Some((*k, top));
        }
    }
    match winner {
        Some((k, _)) => groups.remove(&k).unwrap_or_default(),
        None => Vec::new(),
    }
}

/// Community, then house type (size bucket), then house. Each stage keeps
/// the group holding the best remaining house, so the pick is the global
/// argmax with ties to the lowest id.
pub fn staged_choice(items: &[(&HouseResource, f64)], table: &RatingTable) -> Option<ResourceId> {
    let community = best_of(items, |h| h.community_id);
    let kind = best_of(&community, |h| table.bucket_index(Feature::Size, h.size).unwrap_or(usize::MAX));
    best_of(&kind, |h| h.id).first().map(|(h, _)| h.id)
}

impl DecisionBackend for RuleBackend {
    fn name(&self) -> &'static str {
        "rule"
    }

    fn params(&self) -> &AgentParams {
        &self.params
    }

    fn score(&self, p: &ParticipantProfile, r: &HouseResource, table: &RatingTable) -> Result<Score, BackendError> {
        Ok(score_resource(p, r, table)?)
    }

    fn select_queue(&self, view: &AgentView<'_>, summaries: &[QueueSummary]) -> Result<usize, BackendError> {
        let p = view.profile;
        let t = view.rating_table;
        let mut best: Option<(usize, f64)> = None;
        for s in summaries {
            if s.resource_count == 0 {
                continue;
            }
            let size = (s.size_range.0 + s.size_range.1) / 2.0;
            let rent = (s.rent_range.0 + s.rent_range.1) / 2.0;
            let w = &p.feature_weights;
            let u = w.rent * t.score_value(Feature::Rent, rent)?
                + w.size * t.score_value(Feature::Size, size)?
                + w.orientation * s.mean_orientation_score
                + w.floor * s.mean_floor_score
                + affordability_bonus(rent, p.rent_budget);
            if best.is_none_or(|(_, b)| u > b) {
                best = Some((s.index, u));
            }
        }
        Ok(best.map(|(i, _)| i).unwrap_or_else(|| summaries.first().map_or(0, |s| s.index)))
    }

    fn decide(&self, view: &AgentView<'_>, _ed: &CompetitivenessReport) -> Result<Decision, BackendError> {
        let p = view.profile;
        let mut items = Vec::new();
        let mut best_true = f64::NEG_INFINITY;
        for (h, u) in self.scored(view)? {
            if self.affordable(p, h) {
                best_true = best_true.max(u);
                items.push((h, self.perceived(view.memory, h.id, u)));
            }
        }
        if items.is_empty() || best_true < self.params.quit_threshold {
            return Ok(Decision::Quit);
        }
        let pick = staged_choice(&items, view.rating_table).expect("non-empty candidates");
        let perceived = items.iter().find(|(h, _)| h.id == pick).map(|(_, u)| *u).expect("picked from items");
        if perceived < self.aspiration(p, view.memory) {
            return Ok(Decision::Decline);
        }
        Ok(Decision::Choose(pick))
    }

    fn observe(&self, view: &AgentView<'_>) -> Vec<Fact> {
        let Ok(scored) = self.scored(view) else {
            return Vec::new();
        };
        let top = scored.iter().fold(None, |acc: Option<(ResourceId, f64)>, (h, u)| match acc {
            Some((id, b)) if !better(key(*u, h.id), key(b, id)) => Some((id, b)),
            _ => Some((h.id, *u)),
        });
        let bottom = scored.iter().fold(None, |acc: Option<(ResourceId, f64)>, (h, u)| match acc {
            Some((id, b)) if !(*u < b) => Some((id, b)),
            _ => Some((h.id, *u)),
        });
        let mut facts = Vec::new();
        for (h, u) in &scored {
            let verdict = if Some(h.id) == top.map(|t| t.0) {
                Some(RECOMMENDED)
            } else if !self.affordable(view.profile, h)
                || *u < self.params.quit_threshold
                || (scored.len() >= 2 && Some(h.id) == bottom.map(|b| b.0))
            {
                Some(AVOID)
            } else {
                None
            };
            if let Some(v) = verdict {
                let own = view
                    .memory
                    .trusted
                    .iter()
                    .rev()
                    .find(|e| !e.source.is_social() && e.fact.key() == (h.id, Attribute::Verdict));
                if own.is_none_or(|e| e.fact.value != v) {
                    facts.push(Fact::new(h.id, Attribute::Verdict, v));
                }
            }
        }
        facts
    }

    fn plan(
        &self,
        view: &AgentView<'_>,
        listener: Option<(ParticipantId, Relation)>,
        ed: &CompetitivenessReport,
        rng: &mut ChaCha8Rng,
    ) -> Result<CommunicationPlan, BackendError> {
        let draw: f64 = rng.random();
        let audience = listener.map(|(id, _)| id);
        if let Some((_, Relation::Competitor | Relation::Enemy)) = listener {
            return Ok(CommunicationPlan { intent: Intent::Withhold, audience, goal: "keep my plans to myself".into() });
        }
        let (intent, goal) = if ed.contested() && draw < 1.0 - view.profile.honesty {
            (Intent::Deceptive, "steer attention away from the houses I want")
        } else {
            (Intent::Honest, "share what I know about the houses")
        };
        Ok(CommunicationPlan { intent, audience, goal: goal.into() })
    }

    fn speak(
        &self,
        view: &AgentView<'_>,
        plan: &CommunicationPlan,
        relevant: &[&HouseResource],
        _ed: &CompetitivenessReport,
    ) -> Result<Utterance, BackendError> {
        let speaker = view.profile.id;
        let relevant_ids: Vec<ResourceId> = relevant.iter().map(|h| h.id).collect();
        let claims: Vec<Claim> = match plan.intent {
            Intent::Withhold => Vec::new(),
            Intent::Honest => view
                .memory
                .trusted
                .iter()
                .rev()
                .find(|e| relevant_ids.contains(&e.fact.resource))
                .map(|e| vec![Claim { fact: e.fact.clone(), truthful: true }])
                .unwrap_or_default(),
            Intent::Deceptive => {
                let scored = self.scored(view)?;
                let top = staged_choice(&scored, view.rating_table);
                let mut pool: Vec<_> = scored.iter().filter(|(h, _)| relevant_ids.contains(&h.id)).collect();
                if pool.is_empty() {
                    pool = scored.iter().collect();
                }
                pool.iter()
                    .filter(|(h, _)| Some(h.id) != top)
                    .fold(None, |acc: Option<(ResourceId, f64)>, (h, u)| match acc {
                        Some((id, b)) if !(*u < b || (*u == b && h.id < id)) => Some((id, b)),
                        _ => Some((h.id, *u)),
                    })
                    .map(|(id, _)| vec![Claim { fact: Fact::new(id, Attribute::Verdict, RECOMMENDED), truthful: false }])
                    .unwrap_or_default()
            }
        };
        let text = if claims.is_empty() {
            "Good luck with the search.".to_string()
        } else {
            format!("I heard that {}.", claims.iter().map(|c| c.fact.render()).collect::<Vec<_>>().join(" and "))
        };
        let audience = match plan.audience {
            Some(listener) => Audience::Private { listener },
            None => {
                let community = claims
                    .first()
                    .and_then(|c| view.visible.iter().chain(relevant).find(|h| h.id == c.fact.resource))
                    .or_else(|| relevant.first())
                    .map_or(0, |h| h.community_id);
                Audience::Forum { community }
            }
        };
        Ok(Utterance { speaker, audience, text, claims })
    }

    fn assess(&self, _profile: &ParticipantProfile, memory: &mut AgentMemory, incoming: &Utterance, round: u32) -> Exchange {
        let source = match incoming.audience {
            Audience::Private { .. } => Source::Private,
            Audience::Forum { .. } => Source::Broadcast,
        };
        memory::assess_memory(memory, &incoming.facts(), incoming.speaker, source, round, &self.params.assess())
    }

    fn reflect(&self, _profile: &ParticipantProfile, memory: &mut AgentMemory, round: u32) -> bool {
        memory::reflect_memory(memory, self.params.reflection_threshold, Some(round))
    }

    fn evaluate_relation(
        &self,
        _profile: &ParticipantProfile,
        _peer: ParticipantId,
        state: &RelationState,
        exchange: &Exchange,
        lie_detected: bool,
    ) -> RelationState {
        memory::evaluate_relation(state, exchange, lie_detected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Bathroom, Decoration, FeatureWeights, Orientation};

    fn profile(weights: FeatureWeights, budget: f64) -> ParticipantProfile {
        ParticipantProfile {
            id: 1,
            name: "p1".into(),
            family_size: 2,
            monthly_income: budget * 3.0,
            rent_budget: budget,
            feature_weights: weights,
            personality: Personality::Conservative,
            honesty: 1.0,
            entry_round: 0,
        }
    }

    fn house(id: ResourceId, community: u32, size: f64, rent: f64) -> HouseResource {
        HouseResource {
            id,
            community_id: community,
            size,
            rent,
            orientation: Orientation::S,
            floor: 2,
            bathroom: Bathroom::Private,
            decoration: Decoration::Standard,
            disclosed: String::new(),
            undisclosed: String::new(),
            entry_round: 0,
        }
    }

    #[test]
    fn scoring_examples() {
        let t = RatingTable::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1500.0);
        let s = score_resource(&p, &house(1, 0, 60.0, 1500.0), &t).unwrap();
        assert_eq!((s.u_o, s.u_s, s.u), (8.0, 0.0, 8.0));
        assert_eq!(score_resource(&p, &house(1, 0, 60.0, 0.0), &t).unwrap().u_s, 10.0);
        // rent 2500 scores 5, size 60 scores 8
        let q = profile(FeatureWeights::new(0.5, 0.5, 0.0, 0.0), 2500.0);
        assert_eq!(score_resource(&q, &house(1, 0, 60.0, 2500.0), &t).unwrap().u_o, 6.5);
    }

    #[test]
    fn quits_when_nothing_visible_or_affordable() {
        let t = RatingTable::default();
        let m = AgentMemory::default();
        let ed = CompetitivenessReport::default();
        let b = RuleBackend::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1000.0);
        let view = AgentView { profile: &p, memory: &m, rating_table: &t, visible: &[], round: 0 };
        assert_eq!(b.decide(&view, &ed).unwrap(), Decision::Quit);
        let pricey = [house(1, 0, 60.0, 1201.0), house(2, 0, 80.0, 1500.0)];
        let refs: Vec<&HouseResource> = pricey.iter().collect();
        let view = AgentView { visible: &refs, ..view };
        assert_eq!(b.decide(&view, &ed).unwrap(), Decision::Quit);
    }

    #[test]
    fn size_lover_takes_largest_affordable() {
        let t = RatingTable::default();
        let m = AgentMemory::default();
        let b = RuleBackend::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1000.0);
        let hs = [house(1, 0, 30.0, 900.0), house(2, 1, 100.0, 900.0), house(3, 1, 120.0, 5000.0)];
        let refs: Vec<&HouseResource> = hs.iter().collect();
        let view = AgentView { profile: &p, memory: &m, rating_table: &t, visible: &refs, round: 0 };
        assert_eq!(b.decide(&view, &CompetitivenessReport::default()).unwrap(), Decision::Choose(2));
    }

    #[test]
    fn queue_choice() {
        let t = RatingTable::default();
        let m = AgentMemory::default();
        let b = RuleBackend::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1000.0);
        let view = AgentView { profile: &p, memory: &m, rating_table: &t, visible: &[], round: 0 };
        let q = |i, lo, hi| QueueSummary {
            index: i,
            resource_count: 3,
            size_range: (lo, hi),
            rent_range: (800.0, 900.0),
            mean_orientation_score: 5.0,
            mean_floor_score: 5.0,
        };
        assert_eq!(b.select_queue(&view, &[q(0, 10.0, 30.0)]).unwrap(), 0);
        assert_eq!(b.select_queue(&view, &[q(0, 10.0, 30.0), q(1, 60.0, 100.0)]).unwrap(), 1);
        assert_eq!(b.select_queue(&view, &[q(0, 10.0, 30.0), q(1, 10.0, 30.0)]).unwrap(), 0);
    }

    #[test]
    fn plan_rules() {
        let t = RatingTable::default();
        let m = AgentMemory::default();
        let b = RuleBackend::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1000.0);
        let contested = CompetitivenessReport {
            queues: vec![crate::engine::QueueCompetition {
                queue: 0,
                remaining: 1,
                by_size_band: Vec::new(),
                waiting: 5,
                selection: 0,
                ratio: Some(0.2),
            }],
            text: String::new(),
        };
        let mut rng = rand::SeedableRng::seed_from_u64(0);
        let view = AgentView { profile: &p, memory: &m, rating_table: &t, visible: &[], round: 0 };
        for _ in 0..20 {
            assert_eq!(b.plan(&view, Some((2, Relation::Friend)), &contested, &mut rng).unwrap().intent, Intent::Honest);
        }
        let mut liar = p.clone();
        liar.honesty = 0.0;
        let view = AgentView { profile: &liar, ..view };
        assert_eq!(b.plan(&view, Some((2, Relation::Friend)), &contested, &mut rng).unwrap().intent, Intent::Deceptive);
        assert_eq!(b.plan(&view, Some((2, Relation::Competitor)), &contested, &mut rng).unwrap().intent, Intent::Withhold);
    }

    #[test]
    fn utterance_rules() {
        let t = RatingTable::default();
        let mut m = AgentMemory::default();
        m.observe(Fact::new(5, Attribute::Rent, "low"), Source::SelfObserved, 0, 20);
        let b = RuleBackend::default();
        let p = profile(FeatureWeights::only(Feature::Size), 1000.0);
        let hs = [house(5, 0, 30.0, 900.0), house(6, 0, 100.0, 900.0), house(7, 0, 60.0, 900.0)];
        let refs: Vec<&HouseResource> = hs.iter().collect();
        let view = AgentView { profile: &p, memory: &m, rating_table: &t, visible: &refs, round: 0 };
        let ed = CompetitivenessReport::default();
        let plan = |intent| CommunicationPlan { intent, audience: Some(2), goal: String::new() };

        let honest = b.speak(&view, &plan(Intent::Honest), &refs, &ed).unwrap();
        assert_eq!(honest.claims, vec![Claim { fact: Fact::new(5, Attribute::Rent, "low"), truthful: true }]);

        let lie = b.speak(&view, &plan(Intent::Deceptive), &refs, &ed).unwrap();
        assert_eq!(lie.claims.len(), 1);
        assert_ne!(lie.claims[0].fact.resource, 6);
        assert!(!lie.claims[0].truthful);

        assert!(b.speak(&view, &plan(Intent::Withhold), &refs, &ed).unwrap().claims.is_empty());
    }
}
