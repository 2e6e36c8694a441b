//! Prompt templates with `{placeholder}` slots and parsers for the labeled
//! reply blocks each template asks for.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    UtteranceGeneration,
    CommunicationPlan,
    Decision,
    Broadcasting,
    RelationEvaluation,
    MemoryReflection,
    MemoryAssessment,
}

impl TemplateId {
    pub const ALL: [TemplateId; 7] = [
        TemplateId::UtteranceGeneration,
        TemplateId::CommunicationPlan,
        TemplateId::Decision,
        TemplateId::Broadcasting,
        TemplateId::RelationEvaluation,
        TemplateId::MemoryReflection,
        TemplateId::MemoryAssessment,
    ];

    pub fn text(self) -> &'static str {
        match self {
            TemplateId::UtteranceGeneration => include_str!("../../templates/utterance_generation.txt"),
            TemplateId::CommunicationPlan => include_str!("../../templates/communication_plan.txt"),
            TemplateId::Decision => include_str!("../../templates/decision.txt"),
            TemplateId::Broadcasting => include_str!("../../templates/broadcasting.txt"),
            TemplateId::RelationEvaluation => include_str!("../../templates/relation_evaluation.txt"),
            TemplateId::MemoryReflection => include_str!("../../templates/memory_reflection.txt"),
            TemplateId::MemoryAssessment => include_str!("../../templates/memory_assessment.txt"),
        }
    }

    pub fn placeholders(self) -> BTreeSet<&'static str> {
        scan(self.text()).into_iter().filter_map(|s| s.1).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("unbound placeholders: {}", .0.join(", "))]
    Unbound(Vec<String>),
    #[error("could not parse {template:?} reply: {message}; reply was {text:?}")]
    Parse { template: TemplateId, message: String, text: String },
}

/// Splits a template into literal runs and `{name}` slots.
fn scan(text: &str) -> Vec<(&str, Option<&str>)> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let name_len = after.find(|c: char| !(c.is_ascii_lowercase() || c == '_')).unwrap_or(after.len());
        if name_len > 0 && after[name_len..].starts_with('}') {
            out.push((&rest[..open], Some(&after[..name_len])));
            rest = &after[name_len + 1..];
        } else {
            out.push((&rest[..=open], None));
            rest = after;
        }
    }
    out.push((rest, None));
    out
}

/// Pure substitution; every slot must be bound.
pub fn render_prompt(id: TemplateId, context: &BTreeMap<String, String>) -> Result<String, PromptError> {
    let parts = scan(id.text());
    let unbound: BTreeSet<String> = parts
        .iter()
        .filter_map(|(_, name)| *name)
        .filter(|name| !context.contains_key(*name))
        .map(str::to_string)
        .collect();
    if !unbound.is_empty() {
        return Err(PromptError::Unbound(unbound.into_iter().collect()));
    }
    let mut out = String::with_capacity(id.text().len());
    for (literal, name) in parts {
        out.push_str(literal);
        if let Some(name) = name {
            out.push_str(&context[name]);
        }
    }
    Ok(out)
}

/// Collects `Label: value` blocks for the given labels, in order. Lines that
/// start with no known label continue the previous block.
pub fn labeled_blocks(text: &str, labels: &[&str]) -> Vec<(String, String)> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim().trim_start_matches(['*', '#', '-', ' ']);
        let hit = labels.iter().find_map(|l| {
            let head = trimmed.get(..l.len())?;
            if head.eq_ignore_ascii_case(l) && trimmed[l.len()..].starts_with(':') {
                Some((*l, trimmed[l.len() + 1..].trim()))
            } else {
                None
            }
        });
        match hit {
            Some((label, value)) => blocks.push((label.to_string(), value.to_string())),
            None => {
                if let Some(last) = blocks.last_mut() {
                    let extra = line.trim();
                    if !extra.is_empty() {
                        if !last.1.is_empty() {
                            last.1.push('\n');
                        }
                        last.1.push_str(extra);
                    }
                }
            }
        }
    }
    blocks
}

fn parse_err(template: TemplateId, message: impl Into<String>, text: &str) -> PromptError {
    PromptError::Parse { template, message: message.into(), text: text.to_string() }
}

fn first<'a>(blocks: &'a [(String, String)], label: &str) -> Option<&'a str> {
    blocks.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionAction {
    Choose(String),
    GiveUp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionReply {
    pub thought: String,
    pub action: DecisionAction,
}

pub fn parse_decision(text: &str) -> Result<DecisionReply, PromptError> {
    let t = TemplateId::Decision;
    let b = labeled_blocks(text, &["Thought", "Action Input", "Action"]);
    let thought = first(&b, "Thought").ok_or_else(|| parse_err(t, "missing Thought", text))?.to_string();
    let action = first(&b, "Action").ok_or_else(|| parse_err(t, "missing Action", text))?;
    let action = match action.to_ascii_lowercase().trim_end_matches('.') {
        "choose" => {
            let input = first(&b, "Action Input").ok_or_else(|| parse_err(t, "missing Action Input", text))?;
            DecisionAction::Choose(input.trim_end_matches('.').trim().to_string())
        }
        "give up" => DecisionAction::GiveUp,
        other => return Err(parse_err(t, format!("unknown action `{other}`"), text)),
    };
    Ok(DecisionReply { thought, action })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceBlock {
    pub thought: String,
    pub acquaintance: String,
    pub output: String,
}

pub fn parse_utterances(text: &str, max_blocks: usize) -> Result<Vec<UtteranceBlock>, PromptError> {
    let t = TemplateId::UtteranceGeneration;
    let mut out = Vec::new();
    let mut current: Option<UtteranceBlock> = None;
    for (label, value) in labeled_blocks(text, &["Thought", "Acquaintance", "Output"]) {
        match label.as_str() {
            "Thought" => {
                if let Some(done) = current.take() {
                    out.push(done);
                }
                current = Some(UtteranceBlock { thought: value, acquaintance: String::new(), output: String::new() });
            }
            "Acquaintance" => match current.as_mut() {
                Some(c) => c.acquaintance = value,
                None => return Err(parse_err(t, "Acquaintance before Thought", text)),
            },
            _ => match current.as_mut() {
                Some(c) => c.output = value,
                None => return Err(parse_err(t, "Output before Thought", text)),
            },
        }
    }
    out.extend(current);
    if out.is_empty() {
        return Err(parse_err(t, "no Thought/Acquaintance/Output block", text));
    }
    if let Some(b) = out.iter().find(|b| b.acquaintance.is_empty() || b.output.is_empty()) {
        return Err(parse_err(t, format!("incomplete block after thought `{}`", b.thought), text));
    }
    out.truncate(max_blocks.max(1));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanReply {
    pub intent: String,
    pub audience: String,
    pub goal: String,
}

pub fn parse_plan(text: &str) -> Result<PlanReply, PromptError> {
    let t = TemplateId::CommunicationPlan;
    let b = labeled_blocks(text, &["Intent", "Audience", "Goal"]);
    let get = |l: &str| first(&b, l).map(str::to_string).ok_or_else(|| parse_err(t, format!("missing {l}"), text));
    let intent = get("Intent")?.to_ascii_lowercase();
    if !["honest", "deceptive", "withhold"].contains(&intent.as_str()) {
        return Err(parse_err(t, format!("unknown intent `{intent}`"), text));
    }
    Ok(PlanReply { intent, audience: get("Audience")?, goal: get("Goal")? })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BroadcastReply {
    Publish { thought: String, community: u32, info: String },
    GiveUp { thought: String },
}

pub fn parse_broadcast(text: &str, community_ids: &[u32]) -> Result<BroadcastReply, PromptError> {
    let t = TemplateId::Broadcasting;
    let b = labeled_blocks(text, &["Thought", "Action", "Community", "Info"]);
    let thought = first(&b, "Thought").ok_or_else(|| parse_err(t, "missing Thought", text))?.to_string();
    let action = first(&b, "Action").ok_or_else(|| parse_err(t, "missing Action", text))?;
    match action.to_ascii_lowercase().as_str() {
        "give up" => Ok(BroadcastReply::GiveUp { thought }),
        "publish" => {
            let raw = first(&b, "Community").ok_or_else(|| parse_err(t, "missing Community", text))?;
            let community: u32 = raw
                .trim_matches(|c: char| !c.is_ascii_digit())
                .parse()
                .map_err(|_| parse_err(t, format!("community `{raw}` is not an index"), text))?;
            if !community_ids.contains(&community) {
                return Err(parse_err(t, format!("community {community} not offered"), text));
            }
            let info = first(&b, "Info").ok_or_else(|| parse_err(t, "missing Info", text))?.to_string();
            Ok(BroadcastReply::Publish { thought, community, info })
        }
        other => Err(parse_err(t, format!("unknown action `{other}`"), text)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReply {
    pub acquaintance: String,
    pub relation: Relation,
    pub view: String,
}

pub fn parse_relation(text: &str) -> Result<RelationReply, PromptError> {
    let t = TemplateId::RelationEvaluation;
    const PREFIX: &str = "my relation with ";
    let mut lines = text.lines().map(str::trim).skip_while(|l| !l.to_ascii_lowercase().starts_with(PREFIX));
    let head = lines.next().ok_or_else(|| parse_err(t, "missing `My Relation with` line", text))?;
    let (name, rel) = head[PREFIX.len()..]
        .split_once(':')
        .ok_or_else(|| parse_err(t, "relation line lacks a colon", text))?;
    let word = rel.split(|c: char| !c.is_ascii_alphabetic()).find(|w| !w.is_empty()).unwrap_or("").to_ascii_lowercase();
    let relation = match word.as_str() {
        "friend" => Relation::Friend,
        "enemy" => Relation::Enemy,
        "competitor" => Relation::Competitor,
        "mate" => Relation::Mate,
        "colleague" => Relation::Colleague,
        "stranger" => Relation::Stranger,
        other => return Err(parse_err(t, format!("unknown relation `{other}`"), text)),
    };
    let view = lines.filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
    Ok(RelationReply { acquaintance: name.trim().to_string(), relation, view })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentReply {
    pub trusted: String,
    pub suspicious: Option<String>,
    pub reason: String,
}

pub fn parse_assessment(text: &str) -> Result<AssessmentReply, PromptError> {
    let t = TemplateId::MemoryAssessment;
    let b = labeled_blocks(text, &["Trusted", "Suspicious", "Reason"]);
    let get = |l: &str| first(&b, l).map(str::to_string).ok_or_else(|| parse_err(t, format!("missing {l}"), text));
    let suspicious = get("Suspicious")?;
    let suspicious = if suspicious.trim().trim_end_matches('.').eq_ignore_ascii_case("none") { None } else { Some(suspicious) };
    Ok(AssessmentReply { trusted: get("Trusted")?, suspicious, reason: get("Reason")? })
}

pub fn parse_reflection(text: &str) -> Result<String, PromptError> {
    let s = text.trim();
    let s = s.strip_prefix("Updated summary:").map(str::trim).unwrap_or(s);
    if s.is_empty() {
        return Err(parse_err(TemplateId::MemoryReflection, "empty summary", text));
    }
    Ok(s.to_string())
}
