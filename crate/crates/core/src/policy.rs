//! Allocation policies and their fixed-length gene encoding.
//!
//! A [`Policy`] fixes the queue count, how participants enter queues, how
//! queues are ordered, the waitlist parameters `k`/`c`, how resources are
//! split across queues and the per-round admission batches. [`GENE_DOMAIN`]
//! lists one gene per evolvable field; queue proportions are always equal
//! shares and are not part of the vector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::round_half_away;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryRule {
    Rent,
    Family,
    Select,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SortRule {
    #[serde(rename = "FIFO")]
    Fifo,
    /// Vulnerable first, group fixed once over the whole population.
    #[serde(rename = "VFA")]
    Vfa,
    /// Vulnerable first, group recomputed every round over present participants.
    #[serde(rename = "VFR")]
    Vfr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceRule {
    Size,
    Rent,
    Random,
}

pub const ENTRY_RULES: [EntryRule; 4] = [EntryRule::Rent, EntryRule::Family, EntryRule::Select, EntryRule::Random];
pub const SORT_RULES: [SortRule; 3] = [SortRule::Fifo, SortRule::Vfa, SortRule::Vfr];
pub const RESOURCE_RULES: [ResourceRule; 3] = [ResourceRule::Size, ResourceRule::Rent, ResourceRule::Random];
pub const BATCH_SIZES: [u32; 3] = [5, 10, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    /// Number of queues.
    pub m: u32,
    pub entry_rule: EntryRule,
    pub sort_rule: SortRule,
    /// Choices a participant gets per stay in the selection queue.
    pub k: u32,
    /// Selection-queue capacity multiplier over the queue's pool size.
    pub c: f64,
    pub resource_rule: ResourceRule,
    /// Max participants admitted per round.
    pub batch_p: u32,
    /// Max resources admitted per round.
    pub batch_r: u32,
    /// Queue shares of the resource partition; empty means equal shares.
    #[serde(default)]
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldViolation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("invalid policy: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldViolation>),
    #[error("policy outside gene domain: {0}")]
    OutOfDomain(String),
    #[error("gene vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

pub fn equal_shares(m: u32) -> Vec<f64> {
    vec![1.0 / m.max(1) as f64; m.max(1) as usize]
}

impl Policy {
    pub fn new(
        m: u32,
        entry_rule: EntryRule,
        sort_rule: SortRule,
        k: u32,
        c: f64,
        resource_rule: ResourceRule,
        batch_p: u32,
        batch_r: u32,
    ) -> Self {
        Self { m, entry_rule, sort_rule, k, c, resource_rule, batch_p, batch_r, proportions: equal_shares(m) }
    }

    /// Short human label, e.g. `m3-select-FIFO-k4-c4-size-p10-r10`.
    pub fn label(&self) -> String {
        format!(
            "m{}-{}-{}-k{}-c{}-{}-p{}-r{}",
            self.m,
            entry_name(self.entry_rule),
            sort_name(self.sort_rule),
            self.k,
            self.c,
            resource_name(self.resource_rule),
            self.batch_p,
            self.batch_r
        )
    }
}

pub fn entry_name(r: EntryRule) -> &'static str {
    match r {
        EntryRule::Rent => "rent",
        EntryRule::Family => "family",
        EntryRule::Select => "select",
        EntryRule::Random => "random",
    }
}

pub fn sort_name(r: SortRule) -> &'static str {
    match r {
        SortRule::Fifo => "FIFO",
        SortRule::Vfa => "VFA",
        SortRule::Vfr => "VFR",
    }
}

pub fn resource_name(r: ResourceRule) -> &'static str {
    match r {
        ResourceRule::Size => "size",
        ResourceRule::Rent => "rent",
        ResourceRule::Random => "random",
    }
}

/// Returns the policy unchanged when every invariant holds.
pub fn validate_policy(p: Policy) -> Result<Policy, PolicyError> {
    let mut v = Vec::new();
    let mut bad = |field: &'static str, message: String| v.push(FieldViolation { field, message });
    if !(1..=5).contains(&p.m) {
        bad("m", format!("m out of range: {} not in [1, 5]", p.m));
    }
    if p.k < 1 {
        bad("k", "k must be at least 1".into());
    }
    if !(p.c >= 1.0) || !p.c.is_finite() {
        bad("c", format!("c must be a finite value >= 1.0, got {}", p.c));
    }
    if p.batch_p < 1 {
        bad("batch_p", "batch_p must be at least 1".into());
    }
    if p.batch_r < 1 {
        bad("batch_r", "batch_r must be at least 1".into());
    }
    if p.proportions.len() != p.m as usize {
        bad("proportions", format!("expected {} proportions, got {}", p.m, p.proportions.len()));
    }
    if p.proportions.iter().any(|x| !(*x > 0.0)) {
        bad("proportions", "every proportion must be > 0".into());
    }
    let sum: f64 = p.proportions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        bad("proportions", format!("proportions sum ≠ 1 (sum = {sum})"));
    }
    if v.is_empty() {
        Ok(p)
    } else {
        Err(PolicyError::Invalid(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneKind {
    Integer { lower: i64, upper: i64 },
    Real { lower: f64, upper: f64 },
    /// Gene value is an index into `categories`.
    Categorical { categories: &'static [&'static str] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneSpec {
    pub name: &'static str,
    #[serde(flatten)]
    pub kind: GeneKind,
}

impl GeneSpec {
    pub fn lower(&self) -> f64 {
        match self.kind {
            GeneKind::Integer { lower, .. } => lower as f64,
            GeneKind::Real { lower, .. } => lower,
            GeneKind::Categorical { .. } => 0.0,
        }
    }

    pub fn upper(&self) -> f64 {
        match self.kind {
            GeneKind::Integer { upper, .. } => upper as f64,
            GeneKind::Real { upper, .. } => upper,
            GeneKind::Categorical { categories } => (categories.len() - 1) as f64,
        }
    }

    pub fn range(&self) -> f64 {
        self.upper() - self.lower()
    }

    /// Nearest in-domain value: reals clamped, integers and category indices
    /// rounded half away from zero then clamped.
    pub fn repair(&self, x: f64) -> f64 {
        let x = if x.is_nan() { self.lower() } else { x };
        match self.kind {
            GeneKind::Real { lower, upper } => x.clamp(lower, upper),
            _ => round_half_away(x).clamp(self.lower(), self.upper()),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            GeneKind::Real { lower, upper } => x >= lower && x <= upper,
            _ => x.fract() == 0.0 && x >= self.lower() && x <= self.upper(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, GeneKind::Categorical { .. })
    }
}

pub const GENE_M: usize = 0;
pub const GENE_ENTRY: usize = 1;
pub const GENE_SORT: usize = 2;
pub const GENE_K: usize = 3;
pub const GENE_C: usize = 4;
pub const GENE_RESOURCE: usize = 5;
pub const GENE_BATCH_P: usize = 6;
pub const GENE_BATCH_R: usize = 7;

/// Gene layout of [`PolicyVector`], one slot per evolvable policy field.
pub const GENE_DOMAIN: [GeneSpec; 8] = [
    GeneSpec { name: "m", kind: GeneKind::Integer { lower: 1, upper: 5 } },
    GeneSpec { name: "entry_rule", kind: GeneKind::Categorical { categories: &["rent", "family", "select", "random"] } },
    GeneSpec { name: "sort_rule", kind: GeneKind::Categorical { categories: &["FIFO", "VFA", "VFR"] } },
    GeneSpec { name: "k", kind: GeneKind::Integer { lower: 1, upper: 5 } },
    GeneSpec { name: "c", kind: GeneKind::Real { lower: 1.0, upper: 4.0 } },
    GeneSpec { name: "resource_rule", kind: GeneKind::Categorical { categories: &["size", "rent", "random"] } },
    GeneSpec { name: "batch_p", kind: GeneKind::Categorical { categories: &["5", "10", "20"] } },
    GeneSpec { name: "batch_r", kind: GeneKind::Categorical { categories: &["5", "10", "20"] } },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolicyVector {
    pub genes: Vec<f64>,
}

impl PolicyVector {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn in_domain(&self) -> bool {
        self.genes.len() == GENE_DOMAIN.len() && self.genes.iter().zip(GENE_DOMAIN.iter()).all(|(g, d)| d.contains(*g))
    }

    /// Gene-wise repair onto the domain without going through [`Policy`].
    pub fn repaired(&self) -> Result<PolicyVector, PolicyError> {
        check_len(self)?;
        Ok(PolicyVector::new(self.genes.iter().zip(GENE_DOMAIN.iter()).map(|(g, d)| d.repair(*g)).collect()))
    }
}

fn check_len(v: &PolicyVector) -> Result<(), PolicyError> {
    if v.genes.len() != GENE_DOMAIN.len() {
        return Err(PolicyError::LengthMismatch { got: v.genes.len(), expected: GENE_DOMAIN.len() });
    }
    Ok(())
}

fn index_of<T: PartialEq>(items: &[T], x: &T) -> usize {
    items.iter().position(|y| y == x).expect("enum listed in its category table")
}

pub fn encode_policy(p: &Policy) -> Result<PolicyVector, PolicyError> {
    let p = validate_policy(p.clone())?;
    let out_of = |what: String| Err(PolicyError::OutOfDomain(what));
    if !(1..=5).contains(&p.k) {
        return out_of(format!("k = {} outside gene range [1, 5]", p.k));
    }
    if p.c > 4.0 {
        return out_of(format!("c = {} outside gene range [1, 4]", p.c));
    }
    let bp = BATCH_SIZES.iter().position(|b| *b == p.batch_p);
    let br = BATCH_SIZES.iter().position(|b| *b == p.batch_r);
    let (Some(bp), Some(br)) = (bp, br) else {
        return out_of(format!("batch sizes ({}, {}) must be one of {:?}", p.batch_p, p.batch_r, BATCH_SIZES));
    };
    let share = 1.0 / p.m as f64;
    if p.proportions.iter().any(|x| (x - share).abs() > 1e-9) {
        return out_of("proportions must be equal shares to be encoded".into());
    }
    Ok(PolicyVector::new(vec![
        p.m as f64,
        index_of(&ENTRY_RULES, &p.entry_rule) as f64,
        index_of(&SORT_RULES, &p.sort_rule) as f64,
        p.k as f64,
        p.c,
        index_of(&RESOURCE_RULES, &p.resource_rule) as f64,
        bp as f64,
        br as f64,
    ]))
}

/// Nearest valid policy for any vector of the right length.
pub fn decode_policy(v: &PolicyVector) -> Result<Policy, PolicyError> {
    let g = v.repaired()?.genes;
    let m = g[GENE_M] as u32;
    Ok(Policy {
        m,
        entry_rule: ENTRY_RULES[g[GENE_ENTRY] as usize],
        sort_rule: SORT_RULES[g[GENE_SORT] as usize],
        k: g[GENE_K] as u32,
        c: g[GENE_C],
        resource_rule: RESOURCE_RULES[g[GENE_RESOURCE] as usize],
        batch_p: BATCH_SIZES[g[GENE_BATCH_P] as usize],
        batch_r: BATCH_SIZES[g[GENE_BATCH_R] as usize],
        proportions: equal_shares(m),
    })
}

/// Named reference policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Single FIFO queue, random entry and resources, three choices.
    #[serde(rename = "singapore")]
    Singapore,
    /// Three self-selected queues split by size, FIFO, no waitlist.
    #[serde(rename = "beijing")]
    Beijing,
    /// Single queue with waitlist and per-round vulnerable priority.
    #[serde(rename = "hong_kong")]
    HongKong,
    /// Optimized for satisfaction.
    #[serde(rename = "opt_satisfaction")]
    OptSatisfaction,
    /// Optimized for fairness.
    #[serde(rename = "opt_fairness")]
    OptFairness,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Singapore, Preset::Beijing, Preset::HongKong, Preset::OptSatisfaction, Preset::OptFairness];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Singapore => "singapore",
            Preset::Beijing => "beijing",
            Preset::HongKong => "hong_kong",
            Preset::OptSatisfaction => "opt_satisfaction",
            Preset::OptFairness => "opt_fairness",
        }
    }

    pub fn parse(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn policy(self) -> Policy {
        use EntryRule as E;
        use ResourceRule as R;
        use SortRule as S;
        match self {
            Preset::Singapore => Policy::new(1, E::Random, S::Fifo, 1, 3.0, R::Random, 10, 10),
            Preset::Beijing => Policy::new(3, E::Select, S::Fifo, 1, 2.0, R::Size, 10, 10),
            Preset::HongKong => Policy::new(1, E::Random, S::Vfr, 2, 3.0, R::Random, 10, 10),
            Preset::OptSatisfaction => Policy::new(3, E::Select, S::Fifo, 4, 4.0, R::Size, 10, 10),
            Preset::OptFairness => Policy::new(3, E::Select, S::Vfa, 3, 3.0, R::Size, 10, 10),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimized_satisfaction_policy_is_valid() {
        let p = Policy::new(3, EntryRule::Select, SortRule::Fifo, 4, 4.0, ResourceRule::Size, 10, 10);
        assert!(validate_policy(p).is_ok());
    }

    #[test]
    fn zero_queues_is_rejected_with_field() {
        let mut p = Preset::Singapore.policy();
        p.m = 0;
        p.proportions = vec![];
        match validate_policy(p) {
            Err(PolicyError::Invalid(v)) => {
                assert!(v.iter().any(|x| x.field == "m" && x.message.contains("m out of range")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn proportions_must_sum_to_one() {
        let mut p = Preset::Beijing.policy();
        p.m = 2;
        p.proportions = vec![0.5, 0.4];
        let err = validate_policy(p).unwrap_err();
        assert!(err.to_string().contains("proportions sum ≠ 1"), "{err}");
    }

    #[test]
    fn every_violation_is_listed() {
        let p = Policy { m: 9, k: 0, c: 0.5, batch_p: 0, batch_r: 0, ..Preset::Singapore.policy() };
        let Err(PolicyError::Invalid(v)) = validate_policy(p) else { panic!() };
        let fields: Vec<_> = v.iter().map(|x| x.field).collect();
        for f in ["m", "k", "c", "batch_p", "batch_r", "proportions"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn encodes_optimized_satisfaction_policy() {
        let v = encode_policy(&Preset::OptSatisfaction.policy()).unwrap();
        assert_eq!(v.genes, vec![3.0, 2.0, 0.0, 4.0, 4.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn encodes_hong_kong_policy() {
        let v = encode_policy(&Preset::HongKong.policy()).unwrap();
        assert_eq!(v.genes, vec![1.0, 3.0, 2.0, 2.0, 3.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn beijing_round_trips() {
        let p = Preset::Beijing.policy();
        assert_eq!(decode_policy(&encode_policy(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn decode_rounds_and_clamps() {
        let mut v = encode_policy(&Preset::Beijing.policy()).unwrap();
        v.genes[GENE_M] = 3.6;
        v.genes[GENE_C] = 0.2;
        let p = decode_policy(&v).unwrap();
        assert_eq!(p.m, 4);
        assert_eq!(p.c, 1.0);
        assert_eq!(p.proportions.len(), 4);
        v.genes[GENE_M] = 2.5;
        assert_eq!(decode_policy(&v).unwrap().m, 3);
    }

    #[test]
    fn decode_rejects_wrong_length() {
        assert!(matches!(
            decode_policy(&PolicyVector::new(vec![1.0; 3])),
            Err(PolicyError::LengthMismatch { got: 3, expected: 8 })
        ));
    }

    #[test]
    fn encode_rejects_values_outside_genes() {
        let p = Policy { batch_p: 7, ..Preset::Beijing.policy() };
        assert!(matches!(encode_policy(&p), Err(PolicyError::OutOfDomain(_))));
        let p = Policy { proportions: vec![0.5, 0.25, 0.25], ..Preset::Beijing.policy() };
        assert!(matches!(encode_policy(&p), Err(PolicyError::OutOfDomain(_))));
    }

    #[test]
    fn presets_are_valid() {
        for p in Preset::ALL {
            validate_policy(p.policy()).unwrap();
            encode_policy(&p.policy()).unwrap();
            assert_eq!(Preset::parse(p.name()), Some(p));
        }
    }
}
