//! Participant behaviour: scoring, queue choice, house choice, social
//! messaging and memory upkeep, behind one backend trait.

pub mod llm;
pub mod memory;
pub mod prompts;
pub mod rule;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use llm::{ChatTransport, EndpointConfig, HttpTransport, LlmBackend, TransportError};
pub use memory::{
    assess_memory, evaluate_relation, reflect_memory, trust_score, AgentMemory, AssessParams, Attribute, Exchange, Fact,
    MemoryEntry, MemorySummary, RelationState, Source, AVOID, RECOMMENDED,
};
pub use prompts::{render_prompt, PromptError, TemplateId};
pub use rule::{score_resource, RuleBackend};

use crate::engine::CompetitivenessReport;
use crate::scenario::{HouseResource, ParticipantId, ParticipantProfile, RatingTable, Relation, ResourceId, ScenarioError};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("transport failed: {0}")]
    Transport(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: usize, last: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub u_o: f64,
    pub u_s: f64,
    pub u: f64,
}

/// Public description of one queue, shown when participants pick a queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSummary {
    pub index: usize,
    pub resource_count: usize,
    pub size_range: (f64, f64),
    pub rent_range: (f64, f64),
    pub mean_orientation_score: f64,
    pub mean_floor_score: f64,
}

impl QueueSummary {
    pub fn from_resources(index: usize, houses: &[&HouseResource], table: &RatingTable) -> Result<Self, ScenarioError> {
        let range = |f: fn(&HouseResource) -> f64| {
            houses.iter().map(|h| f(h)).fold(None, |acc: Option<(f64, f64)>, v| {
                Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
            })
        };
        let mean = |feature| -> Result<f64, ScenarioError> {
            if houses.is_empty() {
                return Ok(0.0);
            }
            let mut s = 0.0;
            for h in houses {
                s += table.score(feature, h)?;
            }
            Ok(s / houses.len() as f64)
        };
        Ok(Self {
            index,
            resource_count: houses.len(),
            size_range: range(|h| h.size).unwrap_or((0.0, 0.0)),
            rent_range: range(|h| h.rent).unwrap_or((0.0, 0.0)),
            mean_orientation_score: mean(crate::scenario::Feature::Orientation)?,
            mean_floor_score: mean(crate::scenario::Feature::Floor)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "resource")]
pub enum Decision {
    Choose(ResourceId),
    Decline,
    Quit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Honest,
    Deceptive,
    Withhold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunicationPlan {
    pub intent: Intent,
    /// `None` addresses the public forum.
    pub audience: Option<ParticipantId>,
    pub goal: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "to")]
pub enum Audience {
    Private { listener: ParticipantId },
    Forum { community: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    #[serde(flatten)]
    pub fact: Fact,
    pub truthful: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: ParticipantId,
    pub audience: Audience,
    pub text: String,
    pub claims: Vec<Claim>,
}

impl Utterance {
    pub fn facts(&self) -> Vec<Fact> {
        self.claims.iter().map(|c| c.fact.clone()).collect()
    }
}

/// Behaviour constants shared by both backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    pub quit_threshold: f64,
    pub affordability_cap: f64,
    pub trust_threshold: f64,
    pub reflection_threshold: usize,
    /// Utility a neutral participant hopes for before accepting a house.
    pub aspiration_neutral: f64,
    pub aspiration_astute: f64,
    /// Aspiration lost per recorded decline.
    pub aspiration_decay: f64,
    /// Perceived-utility shift from a trusted second-hand verdict.
    pub verdict_weight: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            quit_threshold: 2.0,
            affordability_cap: 1.2,
            trust_threshold: 0.5,
            reflection_threshold: 20,
            aspiration_neutral: 9.0,
            aspiration_astute: 12.0,
            aspiration_decay: 1.5,
            verdict_weight: 1.0,
        }
    }
}

impl AgentParams {
    pub fn assess(&self) -> AssessParams {
        AssessParams { trust_threshold: self.trust_threshold, reflection_threshold: self.reflection_threshold }
    }
}

/// What a participant can see when acting.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub profile: &'a ParticipantProfile,
    pub memory: &'a AgentMemory,
    pub rating_table: &'a RatingTable,
    /// Remaining houses of the participant's queue.
    pub visible: &'a [&'a HouseResource],
    pub round: u32,
}

/// Behaviour contract implemented by the rule-based and LLM-driven backends.
pub trait DecisionBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn params(&self) -> &AgentParams;

    fn score(&self, p: &ParticipantProfile, r: &HouseResource, table: &RatingTable) -> Result<Score, BackendError>;

    fn select_queue(&self, view: &AgentView<'_>, summaries: &[QueueSummary]) -> Result<usize, BackendError>;

    fn decide(&self, view: &AgentView<'_>, ed: &CompetitivenessReport) -> Result<Decision, BackendError>;

    /// Opinions formed while looking at the visible pool.
    fn observe(&self, view: &AgentView<'_>) -> Vec<Fact>;

    fn plan(
        &self,
        view: &AgentView<'_>,
        listener: Option<(ParticipantId, Relation)>,
        ed: &CompetitivenessReport,
        rng: &mut ChaCha8Rng,
    ) -> Result<CommunicationPlan, BackendError>;

    /// `relevant` are the houses the audience can see.
    fn speak(
        &self,
        view: &AgentView<'_>,
        plan: &CommunicationPlan,
        relevant: &[&HouseResource],
        ed: &CompetitivenessReport,
    ) -> Result<Utterance, BackendError>;

    fn assess(&self, profile: &ParticipantProfile, memory: &mut AgentMemory, incoming: &Utterance, round: u32) -> Exchange;

    fn reflect(&self, profile: &ParticipantProfile, memory: &mut AgentMemory, round: u32) -> bool;

    fn evaluate_relation(
        &self,
        profile: &ParticipantProfile,
        peer: ParticipantId,
        state: &RelationState,
        exchange: &Exchange,
        lie_detected: bool,
    ) -> RelationState;
}
