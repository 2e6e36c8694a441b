//! Chat-completion backend driven by the prompt templates.
//!
//! Every call renders a template, sends it through a [`ChatTransport`], and
//! parses the labeled reply. Transport or parse failures are retried with
//! exponential backoff; after the last attempt each operation either
//! reports a backend failure (decisions) or falls back to the rule backend.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::memory::{self, AgentMemory, Attribute, Exchange, Fact, MemorySummary, RelationState, Source, AVOID, RECOMMENDED};
use super::prompts::{self, render_prompt, BroadcastReply, DecisionAction, PromptError, TemplateId};
use super::rule::RuleBackend;
use super::{
    AgentParams, AgentView, Audience, BackendError, Claim, CommunicationPlan, Decision, DecisionBackend, Intent,
    QueueSummary, Score, Utterance,
};
use crate::engine::CompetitivenessReport;
use crate::scenario::{HouseResource, ParticipantId, ParticipantProfile, RatingTable, Relation, ResourceId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("http: {0}")]
    Http(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no scripted reply left")]
    Exhausted,
}

pub trait ChatTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

/// Endpoint settings, read from `ALLOC_LLM_*` environment variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
}

impl EndpointConfig {
    pub const ENDPOINT: &'static str = "ALLOC_LLM_ENDPOINT";
    pub const API_KEY: &'static str = "ALLOC_LLM_API_KEY";
    pub const MODEL: &'static str = "ALLOC_LLM_MODEL";
    pub const TEMPERATURE: &'static str = "ALLOC_LLM_TEMPERATURE";

    pub fn from_env() -> Result<Self, String> {
        let endpoint = std::env::var(Self::ENDPOINT).map_err(|_| format!("{} is not set", Self::ENDPOINT))?;
        let temperature = match std::env::var(Self::TEMPERATURE) {
            Ok(t) => t.parse().map_err(|_| format!("{} must be a number", Self::TEMPERATURE))?,
            Err(_) => 0.7,
        };
        Ok(Self {
            endpoint,
            api_key: std::env::var(Self::API_KEY).ok(),
            model: std::env::var(Self::MODEL).unwrap_or_else(|_| "gpt-3.5-turbo".into()),
            temperature,
            timeout_secs: 60,
        })
    }
}

/// OpenAI-style `POST {endpoint}` with a single user message.
pub struct HttpTransport {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(config: EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Self { config, agent }
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| TransportError::Http(e.to_string()))?;
        let value: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| TransportError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))
    }
}

/// Replays canned replies in order; useful for offline runs and tests.
#[derive(Default)]
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<Result<String, TransportError>>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedTransport {
    pub fn new(replies: impl IntoIterator<Item = Result<String, TransportError>>) -> Self {
        Self { replies: Mutex::new(replies.into_iter().collect()), prompts: Mutex::default() }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().expect("poisoned").clone()
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        self.prompts.lock().expect("poisoned").push(prompt.to_string());
        self.replies.lock().expect("poisoned").pop_front().unwrap_or(Err(TransportError::Exhausted))
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut free = self.free.lock().expect("poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("poisoned");
        }
        *free -= 1;
        drop(free);
        let out = f();
        *self.free.lock().expect("poisoned") += 1;
        self.cv.notify_one();
        out
    }
}

pub struct LlmBackend {
    transport: Arc<dyn ChatTransport>,
    fallback: RuleBackend,
    pub max_attempts: usize,
    pub backoff: Duration,
    gate: Gate,
}

impl LlmBackend {
    pub fn new(transport: Arc<dyn ChatTransport>, params: AgentParams) -> Self {
        Self {
            transport,
            fallback: RuleBackend::new(params),
            max_attempts: 3,
            backoff: Duration::from_millis(250),
            gate: Gate { free: Mutex::new(4), cv: Condvar::new() },
        }
    }

    pub fn with_retry(mut self, max_attempts: usize, backoff: Duration) -> Self {
        self.max_attempts = max_attempts.max(1);
        self.backoff = backoff;
        self
    }

    pub fn with_in_flight(self, cap: usize) -> Self {
        *self.gate.free.lock().expect("poisoned") = cap.max(1);
        self
    }

    /// Render, send, parse; retried up to `max_attempts` times.
    pub fn ask<T>(
        &self,
        id: TemplateId,
        context: &BTreeMap<String, String>,
        parse: impl Fn(&str) -> Result<T, PromptError>,
    ) -> Result<T, BackendError> {
        let prompt = render_prompt(id, context)?;
        let mut last = String::new();
        for attempt in 0..self.max_attempts {
            if attempt > 0 && !self.backoff.is_zero() {
                std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt as u32 - 1));
            }
            match self.gate.run(|| self.transport.complete(&prompt)) {
                Ok(reply) => match parse(&reply) {
                    Ok(v) => return Ok(v),
                    Err(e) => last = e.to_string(),
                },
                Err(e) => last = e.to_string(),
            }
            log::warn!("{id:?} attempt {} failed: {last}", attempt + 1);
        }
        Err(BackendError::Exhausted { attempts: self.max_attempts, last })
    }
}

fn ctx(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn role(p: &ParticipantProfile) -> String {
    format!(
        "You are {}, a family of {} with a monthly income of {:.0} and a rent budget of {:.0}. Your personality is {:?}.",
        p.name, p.family_size, p.monthly_income, p.rent_budget, p.personality
    )
    .replace("Conservative", "conservative")
    .replace("Astute", "astute")
    .replace("Neutral", "neutral")
}

fn memory_text(m: &AgentMemory) -> String {
    let mut lines: Vec<String> = m.long_term.iter().map(|s| s.text.clone()).collect();
    lines.extend(m.trusted.iter().map(|e| format!("(trusted) {}", e.fact.render())));
    lines.extend(m.suspicious.iter().map(|e| format!("(doubtful) {}", e.fact.render())));
    if lines.is_empty() {
        "Nothing yet.".into()
    } else {
        lines.join("\n")
    }
}

fn house_line(h: &HouseResource) -> String {
    format!(
        "House {} (community {}): {:.0} m2, rent {:.0}, facing {:?}, floor {}, {:?} bathroom, {:?} decoration. {}",
        h.id, h.community_id, h.size, h.rent, h.orientation, h.floor, h.bathroom, h.decoration, h.disclosed
    )
}

fn first_integer(text: &str) -> Option<u32> {
    text.split(|c: char| !c.is_ascii_digit()).find(|s| !s.is_empty()).and_then(|s| s.parse().ok())
}

/// House ids mentioned in free text, restricted to `known`.
pub fn mentioned_houses(text: &str, known: &[ResourceId]) -> Vec<ResourceId> {
    let lower = text.to_ascii_lowercase();
    let mut out = Vec::new();
    for (i, _) in lower.match_indices("house") {
        if let Some(id) = first_integer(&lower[i + 5..].chars().take(8).collect::<String>()) {
            if known.contains(&id) && !out.contains(&id) {
                out.push(id);
            }
        }
    }
    out
}

fn claims_from_text(text: &str, relevant: &[&HouseResource], memory: &AgentMemory) -> Vec<Claim> {
    let ids: Vec<ResourceId> = relevant.iter().map(|h| h.id).collect();
    let lower = text.to_ascii_lowercase();
    let verdict = if lower.contains("avoid") || lower.contains("not recommend") { AVOID } else { RECOMMENDED };
    mentioned_houses(text, &ids)
        .into_iter()
        .map(|id| Claim {
            truthful: memory.trusted_value(id, Attribute::Verdict) == Some(verdict),
            fact: Fact::new(id, Attribute::Verdict, verdict),
        })
        .collect()
}

fn withheld(speaker: ParticipantId, audience: Audience) -> Utterance {
    Utterance { speaker, audience, text: "Good luck with the search.".into(), claims: Vec::new() }
}

impl DecisionBackend for LlmBackend {
    fn name(&self) -> &'static str {
        "llm"
    }

    fn params(&self) -> &AgentParams {
        &self.fallback.params
    }

    fn score(&self, p: &ParticipantProfile, r: &HouseResource, table: &RatingTable) -> Result<Score, BackendError> {
        self.fallback.score(p, r, table)
    }

    fn select_queue(&self, view: &AgentView<'_>, summaries: &[QueueSummary]) -> Result<usize, BackendError> {
        if summaries.len() == 1 {
            return Ok(summaries[0].index);
        }
        let info = summaries
            .iter()
            .map(|s| {
                format!(
                    "Queue {}: {} houses, {:.0}-{:.0} m2, rent {:.0}-{:.0}",
                    s.index, s.resource_count, s.size_range.0, s.size_range.1, s.rent_range.0, s.rent_range.1
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        let c = ctx(&[
            ("memory", memory_text(view.memory)),
            ("role_description", role(view.profile)),
            ("task", "choose the queue to join".into()),
            ("house_info", info),
            ("thought_hint", "Weigh your budget and family size against each queue.".into()),
            ("thought_type", "your reasoning".into()),
            ("choose_type", "Queue index".into()),
        ]);
        let indices: Vec<usize> = summaries.iter().map(|s| s.index).collect();
        let reply = self.ask(TemplateId::Decision, &c, |t| {
            let r = prompts::parse_decision(t)?;
            match r.action {
                DecisionAction::GiveUp => Ok(None),
                DecisionAction::Choose(input) => first_integer(&input)
                    .map(|i| i as usize)
                    .filter(|i| indices.contains(i))
                    .map(Some)
                    .ok_or_else(|| PromptError::Parse {
                        template: TemplateId::Decision,
                        message: "no valid queue index".into(),
                        text: t.into(),
                    }),
            }
        })?;
        match reply {
            Some(i) => Ok(i),
            None => self.fallback.select_queue(view, summaries),
        }
    }

    fn decide(&self, view: &AgentView<'_>, ed: &CompetitivenessReport) -> Result<Decision, BackendError> {
        if view.visible.is_empty() {
            return Ok(Decision::Quit);
        }
        let info = view.visible.iter().map(|h| house_line(h)).collect::<Vec<_>>().join("\n");
        let c = ctx(&[
            ("memory", memory_text(view.memory)),
            ("role_description", role(view.profile)),
            ("task", "choose a house".into()),
            ("house_info", format!("{info}\n\n{}", ed.text)),
            ("thought_hint", "Consider community, house type and the house itself in turn.".into()),
            ("thought_type", "your reasoning".into()),
            ("choose_type", "House id".into()),
        ]);
        let ids: Vec<ResourceId> = view.visible.iter().map(|h| h.id).collect();
        self.ask(TemplateId::Decision, &c, |t| {
            let r = prompts::parse_decision(t)?;
            match r.action {
                DecisionAction::GiveUp => Ok(Decision::Quit),
                DecisionAction::Choose(input) => first_integer(&input)
                    .filter(|id| ids.contains(id))
                    .map(Decision::Choose)
                    .ok_or_else(|| PromptError::Parse {
                        template: TemplateId::Decision,
                        message: "no visible house id".into(),
                        text: t.into(),
                    }),
            }
        })
    }

    fn observe(&self, view: &AgentView<'_>) -> Vec<Fact> {
        self.fallback.observe(view)
    }

    fn plan(
        &self,
        view: &AgentView<'_>,
        listener: Option<(ParticipantId, Relation)>,
        ed: &CompetitivenessReport,
        _rng: &mut ChaCha8Rng,
    ) -> Result<CommunicationPlan, BackendError> {
        let audience = listener.map(|(id, _)| id);
        let who = match listener {
            Some((id, rel)) => format!("You are about to talk with participant {id}, your {rel:?}.").to_lowercase(),
            None => "You are about to post on the public forum.".into(),
        };
        let c = ctx(&[
            ("role_description", role(view.profile)),
            ("acquaintance_description", who),
            ("memory", memory_text(view.memory)),
            ("competitiveness", ed.text.clone()),
            ("personality", format!("{:?}", view.profile.personality).to_lowercase()),
            ("goal", "Your goal is to rent one house that suits your family.".into()),
        ]);
        match self.ask(TemplateId::CommunicationPlan, &c, prompts::parse_plan) {
            Ok(r) => {
                let intent = match r.intent.as_str() {
                    "honest" => Intent::Honest,
                    "deceptive" => Intent::Deceptive,
                    _ => Intent::Withhold,
                };
                Ok(CommunicationPlan { intent, audience, goal: r.goal })
            }
            Err(e) => {
                log::warn!("plan fell back to withhold: {e}");
                Ok(CommunicationPlan { intent: Intent::Withhold, audience, goal: "fallback".into() })
            }
        }
    }

    fn speak(
        &self,
        view: &AgentView<'_>,
        plan: &CommunicationPlan,
        relevant: &[&HouseResource],
        _ed: &CompetitivenessReport,
    ) -> Result<Utterance, BackendError> {
        let speaker = view.profile.id;
        match plan.audience {
            Some(listener) => {
                let audience = Audience::Private { listener };
                let chats = view.memory.dialogue.get(&listener).map(|l| l.join("\n")).unwrap_or_default();
                let c = ctx(&[
                    ("role_description", role(view.profile)),
                    ("memory", memory_text(view.memory)),
                    ("utterance_plan", format!("Your plan ({:?}): {}", plan.intent, plan.goal).to_lowercase()),
                    ("acquaintances", format!("participant {listener}")),
                    ("recent_chats", if chats.is_empty() { "None.".into() } else { chats }),
                    ("example", "Thought: ...\nAcquaintance: ...\nOutput: ...".into()),
                    ("acquaintance_count", "1".into()),
                ]);
                match self.ask(TemplateId::UtteranceGeneration, &c, |t| prompts::parse_utterances(t, 1)) {
                    Ok(blocks) => {
                        let text = blocks[0].output.clone();
                        let claims = claims_from_text(&text, relevant, view.memory);
                        Ok(Utterance { speaker, audience, text, claims })
                    }
                    Err(e) => {
                        log::warn!("utterance from {speaker} fell back to withhold: {e}");
                        Ok(withheld(speaker, audience))
                    }
                }
            }
            None => {
                let mut communities: Vec<u32> = relevant.iter().map(|h| h.community_id).collect();
                communities.sort_unstable();
                communities.dedup();
                let fallback_audience = Audience::Forum { community: communities.first().copied().unwrap_or(0) };
                let c = ctx(&[
                    ("role_description", role(view.profile)),
                    ("plan", plan.goal.clone()),
                    ("memory", memory_text(view.memory)),
                    ("community_ids", communities.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")),
                ]);
                match self.ask(TemplateId::Broadcasting, &c, |t| prompts::parse_broadcast(t, &communities)) {
                    Ok(BroadcastReply::Publish { community, info, .. }) => {
                        let in_community: Vec<&HouseResource> =
                            relevant.iter().copied().filter(|h| h.community_id == community).collect();
                        let claims = claims_from_text(&info, &in_community, view.memory);
                        Ok(Utterance { speaker, audience: Audience::Forum { community }, text: info, claims })
                    }
                    Ok(BroadcastReply::GiveUp { .. }) => Ok(withheld(speaker, fallback_audience)),
                    Err(e) => {
                        log::warn!("post from {speaker} fell back to withhold: {e}");
                        Ok(withheld(speaker, fallback_audience))
                    }
                }
            }
        }
    }

    fn assess(&self, profile: &ParticipantProfile, memory: &mut AgentMemory, incoming: &Utterance, round: u32) -> Exchange {
        if incoming.claims.is_empty() {
            return Exchange::default();
        }
        let c = ctx(&[
            ("name", profile.name.clone()),
            ("memory", memory_text(memory)),
            ("forum_info", format!("[1] participant {}: {}", incoming.speaker, incoming.text)),
        ]);
        let reply = match self.ask(TemplateId::MemoryAssessment, &c, prompts::parse_assessment) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("assessment fell back to rules: {e}");
                return self.fallback.assess(profile, memory, incoming, round);
            }
        };
        let source = match incoming.audience {
            Audience::Private { .. } => Source::Private,
            Audience::Forum { .. } => Source::Broadcast,
        };
        let ids: Vec<ResourceId> = incoming.claims.iter().map(|c| c.fact.resource).collect();
        let believed = mentioned_houses(&reply.trusted, &ids);
        let (yes, no): (Vec<Fact>, Vec<Fact>) = incoming.facts().into_iter().partition(|f| believed.contains(&f.resource));
        let base = self.fallback.params.assess();
        let accept = memory::AssessParams { trust_threshold: f64::NEG_INFINITY, ..base };
        let reject = memory::AssessParams { trust_threshold: f64::INFINITY, ..base };
        let a = memory::assess_memory(memory, &yes, incoming.speaker, source, round, &accept);
        let b = memory::assess_memory(memory, &no, incoming.speaker, source, round, &reject);
        Exchange { claims: a.claims + b.claims, promoted: a.promoted, contradictions: a.contradictions + b.contradictions }
    }

    fn reflect(&self, profile: &ParticipantProfile, memory: &mut AgentMemory, round: u32) -> bool {
        if memory.short_term.len() <= self.fallback.params.reflection_threshold {
            return false;
        }
        let c = ctx(&[
            ("summary", memory.long_term.last().map(|s| s.text.clone()).unwrap_or_else(|| "None.".into())),
            ("new_lines", memory.short_term.iter().map(|e| e.fact.render()).collect::<Vec<_>>().join("\n")),
        ]);
        match self.ask(TemplateId::MemoryReflection, &c, prompts::parse_reflection) {
            Ok(text) => {
                let mut digest = BTreeMap::new();
                for e in &memory.short_term {
                    digest.insert(e.fact.key(), e.fact.clone());
                }
                memory.long_term.push(MemorySummary { round, digest: digest.into_values().collect(), text });
                memory.short_term.clear();
                true
            }
            Err(e) => {
                log::warn!("reflection fell back to rules: {e}");
                self.fallback.reflect(profile, memory, round)
            }
        }
    }

    fn evaluate_relation(
        &self,
        profile: &ParticipantProfile,
        peer: ParticipantId,
        state: &RelationState,
        exchange: &Exchange,
        lie_detected: bool,
    ) -> RelationState {
        if exchange.is_empty() && !lie_detected {
            return state.clone();
        }
        let name = format!("participant {peer}");
        let c = ctx(&[
            ("acquaintance_name", name),
            ("role_description", role(profile)),
            ("memory", format!("{} {}", state.note, state.moral).trim().to_string()),
            ("relation", format!("{:?}", state.relation).to_lowercase()),
            (
                "communication",
                format!(
                    "{} claims received, {} believed, {} contradicted what you know{}",
                    exchange.claims,
                    exchange.promoted,
                    exchange.contradictions,
                    if lie_detected { "; one of their earlier claims proved false" } else { "" }
                ),
            ),
        ]);
        match self.ask(TemplateId::RelationEvaluation, &c, prompts::parse_relation) {
            Ok(r) => RelationState { relation: r.relation, note: r.view.clone(), moral: r.view, consistent: 0 },
            Err(e) => {
                log::warn!("relation evaluation fell back to rules: {e}");
                self.fallback.evaluate_relation(profile, peer, state, exchange, lie_detected)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Bathroom, Decoration, FeatureWeights, Orientation, Personality};

    fn profile() -> ParticipantProfile {
        ParticipantProfile {
            id: 1,
            name: "Ann".into(),
            family_size: 2,
            monthly_income: 6000.0,
            rent_budget: 2000.0,
            feature_weights: FeatureWeights::new(0.25, 0.25, 0.25, 0.25),
            personality: Personality::Neutral,
            honesty: 0.5,
            entry_round: 0,
        }
    }

    fn house(id: ResourceId) -> HouseResource {
        HouseResource {
            id,
            community_id: 0,
            size: 50.0,
            rent: 1500.0,
            orientation: Orientation::S,
            floor: 3,
            bathroom: Bathroom::Private,
            decoration: Decoration::Basic,
            disclosed: String::new(),
            undisclosed: String::new(),
            entry_round: 0,
        }
    }

    fn backend(replies: Vec<Result<String, TransportError>>) -> (LlmBackend, Arc<ScriptedTransport>) {
        let t = Arc::new(ScriptedTransport::new(replies));
        (LlmBackend::new(t.clone(), AgentParams::default()).with_retry(3, Duration::ZERO), t)
    }

    #[test]
    fn decide_parses_choice_after_a_bad_reply() {
        let (b, t) = backend(vec![Ok("nonsense".into()), Ok("Thought: fine\nAction: Choose\nAction Input: House 7".into())]);
        let p = profile();
        let m = AgentMemory::default();
        let table = RatingTable::default();
        let hs = [house(3), house(7)];
        let refs: Vec<&HouseResource> = hs.iter().collect();
        let view = AgentView { profile: &p, memory: &m, rating_table: &table, visible: &refs, round: 0 };
        assert_eq!(b.decide(&view, &CompetitivenessReport::default()).unwrap(), Decision::Choose(7));
        assert_eq!(t.prompts().len(), 2);
        assert!(t.prompts()[0].contains("House 7 (community 0)"));
    }

    #[test]
    fn decide_exhausts_retries() {
        let (b, t) = backend(vec![Ok("x".into()), Err(TransportError::Http("503".into())), Ok("y".into())]);
        let p = profile();
        let m = AgentMemory::default();
        let table = RatingTable::default();
        let hs = [house(3)];
        let refs: Vec<&HouseResource> = hs.iter().collect();
        let view = AgentView { profile: &p, memory: &m, rating_table: &table, visible: &refs, round: 0 };
        let err = b.decide(&view, &CompetitivenessReport::default()).unwrap_err();
        assert!(matches!(err, BackendError::Exhausted { attempts: 3, .. }));
        assert_eq!(t.prompts().len(), 3);
    }

    #[test]
    fn speak_falls_back_to_withhold() {
        let (b, _) = backend(vec![Ok("garbage".into()); 3]);
        let p = profile();
        let m = AgentMemory::default();
        let table = RatingTable::default();
        let view = AgentView { profile: &p, memory: &m, rating_table: &table, visible: &[], round: 0 };
        let plan = CommunicationPlan { intent: Intent::Honest, audience: Some(2), goal: "share".into() };
        let u = b.speak(&view, &plan, &[], &CompetitivenessReport::default()).unwrap();
        assert!(u.claims.is_empty());
        assert_eq!(u.audience, Audience::Private { listener: 2 });
    }

    #[test]
    fn speak_extracts_claims() {
        let (b, _) = backend(vec![Ok("Thought: help\nAcquaintance: Bo\nOutput: House 7 is great, take it".into())]);
        let p = profile();
        let m = AgentMemory::default();
        let table = RatingTable::default();
        let hs = [house(3), house(7)];
        let refs: Vec<&HouseResource> = hs.iter().collect();
        let view = AgentView { profile: &p, memory: &m, rating_table: &table, visible: &refs, round: 0 };
        let plan = CommunicationPlan { intent: Intent::Honest, audience: Some(2), goal: "share".into() };
        let u = b.speak(&view, &plan, &refs, &CompetitivenessReport::default()).unwrap();
        assert_eq!(u.claims.len(), 1);
        assert_eq!(u.claims[0].fact, Fact::new(7, Attribute::Verdict, RECOMMENDED));
    }

    #[test]
    fn mentions() {
        assert_eq!(mentioned_houses("house 3 and House 12, not house 99", &[3, 12]), vec![3, 12]);
    }
}
