//! Participants, houses, the social graph and seeded scenario generation.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ParticipantId = u32;
pub type ResourceId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("rating table has no bucket for feature `{feature}` (value {value})")]
    MissingBucket { feature: Feature, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Rent,
    Size,
    Orientation,
    Floor,
}

impl Feature {
    pub const ALL: [Feature; 4] = [Feature::Rent, Feature::Size, Feature::Orientation, Feature::Floor];
}

impl std::fmt::Display for Feature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Feature::Rent => "rent",
            Feature::Size => "size",
            Feature::Orientation => "orientation",
            Feature::Floor => "floor",
        };
        f.write_str(s)
    }
}

/// Per-feature importance a participant assigns to a house (sums to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub rent: f64,
    pub size: f64,
    pub orientation: f64,
    pub floor: f64,
}

impl FeatureWeights {
    pub fn new(rent: f64, size: f64, orientation: f64, floor: f64) -> Self {
        Self { rent, size, orientation, floor }
    }

    /// All weight on a single feature.
    pub fn only(feature: Feature) -> Self {
        let mut w = Self::new(0.0, 0.0, 0.0, 0.0);
        *w.get_mut(feature) = 1.0;
        w
    }

    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Rent => self.rent,
            Feature::Size => self.size,
            Feature::Orientation => self.orientation,
            Feature::Floor => self.floor,
        }
    }

    fn get_mut(&mut self, feature: Feature) -> &mut f64 {
        match feature {
            Feature::Rent => &mut self.rent,
            Feature::Size => &mut self.size,
            Feature::Orientation => &mut self.orientation,
            Feature::Floor => &mut self.floor,
        }
    }

    pub fn sum(&self) -> f64 {
        self.rent + self.size + self.orientation + self.floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Personality {
    Conservative,
    Astute,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub id: ParticipantId,
    pub name: String,
    pub family_size: u32,
    pub monthly_income: f64,
    pub rent_budget: f64,
    pub feature_weights: FeatureWeights,
    pub personality: Personality,
    pub honesty: f64,
    pub entry_round: u32,
}

/// Rent budget divided over family members.
pub fn per_capita_budget(p: &ParticipantProfile) -> f64 {
    p.rent_budget / p.family_size.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    N,
    S,
    E,
    W,
    SE,
    SW,
    NE,
    NW,
}

impl Orientation {
    pub const ALL: [Orientation; 8] = [
        Orientation::N,
        Orientation::S,
        Orientation::E,
        Orientation::W,
        Orientation::SE,
        Orientation::SW,
        Orientation::NE,
        Orientation::NW,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bathroom {
    Private,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoration {
    Basic,
    Standard,
    Premium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseResource {
    pub id: ResourceId,
    pub community_id: u32,
    /// Living area in square metres.
    pub size: f64,
    pub rent: f64,
    pub orientation: Orientation,
    pub floor: i32,
    pub bathroom: Bathroom,
    pub decoration: Decoration,
    pub disclosed: String,
    /// Revealed to a participant only after they select the house.
    pub undisclosed: String,
    pub entry_round: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Friend,
    Colleague,
    Mate,
    Competitor,
    Enemy,
    Stranger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialEdge {
    pub a: ParticipantId,
    pub b: ParticipantId,
    pub relation: Relation,
}

/// Undirected, possibly disconnected relation graph.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SocialGraph {
    pub edges: Vec<SocialEdge>,
}

impl SocialGraph {
    pub fn neighbours(&self, id: ParticipantId) -> Vec<(ParticipantId, Relation)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.a == id {
                    Some((e.b, e.relation))
                } else if e.b == id {
                    Some((e.a, e.relation))
                } else {
                    None
                }
            })
            .collect();
        out.sort_by_key(|(p, _)| *p);
        out
    }

    pub fn relation(&self, a: ParticipantId, b: ParticipantId) -> Option<Relation> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|e| e.relation)
    }

    /// Connected components over `ids`, each sorted ascending, ordered by smallest member.
    pub fn components(&self, ids: &[ParticipantId]) -> Vec<Vec<ParticipantId>> {
        let index: BTreeMap<ParticipantId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if let (Some(&i), Some(&j)) = (index.get(&e.a), index.get(&e.b)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<ParticipantId>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(*id);
        }
        let mut out: Vec<Vec<ParticipantId>> = groups
            .into_values()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

/// Half-open value range `[min, max)` with a score; `max = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBucket {
    pub min: f64,
    pub max: Option<f64>,
    pub score: f64,
}

impl RangeBucket {
    pub fn new(min: f64, max: Option<f64>, score: f64) -> Self {
        Self { min, max, score }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && self.max.is_none_or(|m| value < m)
    }
}

/// Scores in `[0, 10]` for each feature value bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    pub rent: Vec<RangeBucket>,
    pub size: Vec<RangeBucket>,
    pub orientation: BTreeMap<Orientation, f64>,
    pub floor: Vec<RangeBucket>,
}

impl Default for RatingTable {
    fn default() -> Self {
        Self {
            rent: vec![
                RangeBucket::new(0.0, Some(1000.0), 10.0),
                RangeBucket::new(1000.0, Some(2000.0), 8.0),
                RangeBucket::new(2000.0, Some(3000.0), 5.0),
                RangeBucket::new(3000.0, None, 2.0),
            ],
            size: vec![
                RangeBucket::new(0.0, Some(20.0), 2.0),
                RangeBucket::new(20.0, Some(50.0), 5.0),
                RangeBucket::new(50.0, Some(90.0), 8.0),
                RangeBucket::new(90.0, None, 10.0),
            ],
            orientation: [
                (Orientation::S, 10.0),
                (Orientation::SE, 9.0),
                (Orientation::SW, 8.0),
                (Orientation::E, 7.0),
                (Orientation::W, 6.0),
                (Orientation::NE, 4.0),
                (Orientation::NW, 4.0),
                (Orientation::N, 3.0),
            ]
            .into_iter()
            .collect(),
            floor: vec![
                RangeBucket::new(f64::from(i32::MIN), Some(1.0), 3.0),
                RangeBucket::new(1.0, Some(3.0), 5.0),
                RangeBucket::new(3.0, Some(9.0), 8.0),
                RangeBucket::new(9.0, None, 6.0),
            ],
        }
    }
}

impl RatingTable {
    fn buckets(&self, feature: Feature) -> &[RangeBucket] {
        match feature {
            Feature::Rent => &self.rent,
            Feature::Size => &self.size,
            Feature::Floor => &self.floor,
            Feature::Orientation => &[],
        }
    }

    /// Index of the bucket holding `value` for a numeric feature.
    pub fn bucket_index(&self, feature: Feature, value: f64) -> Option<usize> {
        self.buckets(feature).iter().position(|b| b.contains(value))
    }

    pub fn score_value(&self, feature: Feature, value: f64) -> Result<f64, ScenarioError> {
        self.buckets(feature)
            .iter()
            .find(|b| b.contains(value))
            .map(|b| b.score)
            .ok_or(ScenarioError::MissingBucket { feature, value: value.to_string() })
    }

    pub fn score_orientation(&self, o: Orientation) -> Result<f64, ScenarioError> {
        self.orientation
            .get(&o)
            .copied()
            .ok_or(ScenarioError::MissingBucket { feature: Feature::Orientation, value: format!("{o:?}") })
    }

    pub fn score(&self, feature: Feature, house: &HouseResource) -> Result<f64, ScenarioError> {
        match feature {
            Feature::Rent => self.score_value(feature, house.rent),
            Feature::Size => self.score_value(feature, house.size),
            Feature::Floor => self.score_value(feature, f64::from(house.floor)),
            Feature::Orientation => self.score_orientation(house.orientation),
        }
    }

    pub fn check_covers(&self, resources: &[HouseResource]) -> Result<(), ScenarioError> {
        for r in resources {
            for f in Feature::ALL {
                self.score(f, r)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub participants: Vec<ParticipantProfile>,
    pub resources: Vec<HouseResource>,
    pub graph: SocialGraph,
    pub rating_table: RatingTable,
}

impl Scenario {
    pub fn participant(&self, id: ParticipantId) -> Option<&ParticipantProfile> {
        self.participants.iter().find(|p| p.id == id)
    }

    pub fn resource(&self, id: ResourceId) -> Option<&HouseResource> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.participants.is_empty() {
            return Err(ScenarioError::Invalid("no participants".into()));
        }
        if self.resources.is_empty() {
            return Err(ScenarioError::Invalid("no resources".into()));
        }
        let mut ids = BTreeSet::new();
        for p in &self.participants {
            if !ids.insert(p.id) {
                return Err(ScenarioError::Invalid(format!("duplicate participant id {}", p.id)));
            }
            if p.family_size < 1 {
                return Err(ScenarioError::Invalid(format!("participant {} has family_size 0", p.id)));
            }
            if !(p.rent_budget >= 0.0) {
                return Err(ScenarioError::Invalid(format!("participant {} has negative budget", p.id)));
            }
            if (p.feature_weights.sum() - 1.0).abs() > 1e-9 {
                return Err(ScenarioError::Invalid(format!("participant {} feature weights do not sum to 1", p.id)));
            }
            if !(0.0..=1.0).contains(&p.honesty) {
                return Err(ScenarioError::Invalid(format!("participant {} honesty outside [0,1]", p.id)));
            }
        }
        let mut rids = BTreeSet::new();
        for r in &self.resources {
            if !rids.insert(r.id) {
                return Err(ScenarioError::Invalid(format!("duplicate resource id {}", r.id)));
            }
            if !(r.size > 0.0) {
                return Err(ScenarioError::Invalid(format!("resource {} has non-positive size", r.id)));
            }
            if !(r.rent >= 0.0) {
                return Err(ScenarioError::Invalid(format!("resource {} has negative rent", r.id)));
            }
        }
        for e in &self.graph.edges {
            if e.a == e.b {
                return Err(ScenarioError::Invalid(format!("self edge on {}", e.a)));
            }
            if !ids.contains(&e.a) || !ids.contains(&e.b) {
                return Err(ScenarioError::Invalid(format!("edge ({}, {}) names unknown participant", e.a, e.b)));
            }
        }
        self.rating_table.check_covers(&self.resources)
    }
}

/// Parameters of the synthetic scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n_participants: usize,
    pub n_resources: usize,
    /// Number of housing communities resources are spread over.
    pub community_count: u32,
    pub budget_log_mean: f64,
    pub budget_log_sd: f64,
    /// Fraction of monthly income a household spends on rent.
    pub budget_share: f64,
    pub family_min: u32,
    pub family_max: u32,
    pub size_min: f64,
    pub size_max: f64,
    pub unit_rent: f64,
    pub community_multiplier_min: f64,
    pub community_multiplier_max: f64,
    pub rent_noise: f64,
    pub participant_arrival_rounds: u32,
    pub resource_arrival_rounds: u32,
    pub social_group_size: usize,
    pub intra_group_p: f64,
    pub inter_group_p: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            n_participants: 51,
            n_resources: 28,
            community_count: 4,
            budget_log_mean: 2500f64.ln(),
            budget_log_sd: 0.6,
            budget_share: 0.3,
            family_min: 1,
            family_max: 5,
            size_min: 15.0,
            size_max: 120.0,
            unit_rent: 30.0,
            community_multiplier_min: 0.8,
            community_multiplier_max: 1.3,
            rent_noise: 0.1,
            participant_arrival_rounds: 3,
            resource_arrival_rounds: 3,
            social_group_size: 10,
            intra_group_p: 0.6,
            inter_group_p: 0.02,
        }
    }
}

impl ScenarioSpec {
    pub fn sized(n_participants: usize, n_resources: usize) -> Self {
        Self { n_participants, n_resources, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::InvalidSpec(m.to_string()));
        if self.n_participants == 0 {
            return bad("n_participants must be at least 1");
        }
        if self.n_resources == 0 {
            return bad("n_resources must be at least 1");
        }
        if self.community_count == 0 {
            return bad("community_count must be at least 1");
        }
        if !(self.budget_log_sd >= 0.0) || !self.budget_log_mean.is_finite() {
            return bad("budget distribution parameters must be finite with sd >= 0");
        }
        if !(self.budget_share > 0.0 && self.budget_share <= 1.0) {
            return bad("budget_share must lie in (0, 1]");
        }
        if self.family_min == 0 || self.family_min > self.family_max {
            return bad("family range must satisfy 1 <= family_min <= family_max");
        }
        if !(self.size_min > 0.0 && self.size_min <= self.size_max) {
            return bad("size range must satisfy 0 < size_min <= size_max");
        }
        if !(self.unit_rent >= 0.0) {
            return bad("unit_rent must be non-negative");
        }
        if !(self.community_multiplier_min > 0.0 && self.community_multiplier_min <= self.community_multiplier_max) {
            return bad("community multiplier range must be positive and ordered");
        }
        if !(0.0..1.0).contains(&self.rent_noise) {
            return bad("rent_noise must lie in [0, 1)");
        }
        if self.participant_arrival_rounds == 0 || self.resource_arrival_rounds == 0 {
            return bad("arrival rounds must be at least 1");
        }
        if self.social_group_size == 0 {
            return bad("social_group_size must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.intra_group_p) || !(0.0..=1.0).contains(&self.inter_group_p) {
            return bad("edge probabilities must lie in [0, 1]");
        }
        Ok(())
    }
}

const NAMES: [&str; 24] = [
    "Ava", "Ben", "Chloe", "Dan", "Emma", "Finn", "Grace", "Hugo", "Iris", "James", "Kate", "Leo", "Mia", "Noah",
    "Olga", "Paul", "Quinn", "Rosa", "Sam", "Tara", "Umar", "Vera", "Will", "Yara",
];

const CONDITIONS: [&str; 6] = [
    "quiet neighbours and a well kept stairwell",
    "street noise late at night",
    "some damp around the bathroom window",
    "freshly repainted with new fittings",
    "little sunlight in the afternoon",
    "the elevator is often out of service",
];

/// Deterministic synthetic scenario for `(spec, seed)`.
pub fn generate_scenario(spec: &ScenarioSpec, seed: u64) -> Result<Scenario, ScenarioError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget_dist = LogNormal::new(spec.budget_log_mean, spec.budget_log_sd)
        .map_err(|e| ScenarioError::InvalidSpec(e.to_string()))?;

    let mut participants = Vec::with_capacity(spec.n_participants);
    for i in 0..spec.n_participants {
        let id = i as ParticipantId;
        let family_size = rng.random_range(spec.family_min..=spec.family_max);
        let rent_budget = (budget_dist.sample(&mut rng) * 100.0).round() / 100.0;
        let raw: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.05..1.0));
        let total: f64 = raw.iter().sum();
        let mut w = FeatureWeights::new(raw[0] / total, raw[1] / total, raw[2] / total, 0.0);
        w.floor = 1.0 - (w.rent + w.size + w.orientation);
        let personality = match rng.random_range(0..3) {
            0 => Personality::Conservative,
            1 => Personality::Astute,
            _ => Personality::Neutral,
        };
        let name = if i < NAMES.len() { NAMES[i].to_string() } else { format!("{} {}", NAMES[i % NAMES.len()], i / NAMES.len() + 1) };
        participants.push(ParticipantProfile {
            id,
            name,
            family_size,
            monthly_income: (rent_budget / spec.budget_share).round(),
            rent_budget,
            feature_weights: w,
            personality,
            honesty: (rng.random_range(0.0..=1.0f64) * 1000.0).round() / 1000.0,
            entry_round: rng.random_range(0..spec.participant_arrival_rounds),
        });
    }
    widen_budget_spread(&mut participants, 5.0);

    let multipliers: Vec<f64> = (0..spec.community_count)
        .map(|_| rng.random_range(spec.community_multiplier_min..=spec.community_multiplier_max))
        .collect();
    let mut resources = Vec::with_capacity(spec.n_resources);
    for i in 0..spec.n_resources {
        let community_id = rng.random_range(0..spec.community_count);
        let size = (rng.random_range(spec.size_min..=spec.size_max) * 10.0).round() / 10.0;
        let noise = if spec.rent_noise > 0.0 { rng.random_range(-spec.rent_noise..=spec.rent_noise) } else { 0.0 };
        let rent = (size * spec.unit_rent * multipliers[community_id as usize] * (1.0 + noise)).round();
        let orientation = Orientation::ALL[rng.random_range(0..Orientation::ALL.len())];
        let floor = rng.random_range(1..=18);
        let bathroom = if rng.random_bool(0.8) { Bathroom::Private } else { Bathroom::Shared };
        let decoration = match rng.random_range(0..3) {
            0 => Decoration::Basic,
            1 => Decoration::Standard,
            _ => Decoration::Premium,
        };
        let condition = CONDITIONS[rng.random_range(0..CONDITIONS.len())];
        let entry_round = rng.random_range(0..spec.resource_arrival_rounds);
        resources.push(HouseResource {
            id: i as ResourceId,
            community_id,
            size,
            rent,
            orientation,
            floor,
            bathroom,
            decoration,
            disclosed: describe_house(size, rent, orientation, floor, bathroom, decoration),
            undisclosed: condition.to_string(),
            entry_round,
        });
    }

    let graph = generate_graph(spec, &mut rng);
    let scenario = Scenario { participants, resources, graph, rating_table: RatingTable::default() };
    scenario.validate()?;
    Ok(scenario)
}

fn describe_house(size: f64, rent: f64, o: Orientation, floor: i32, b: Bathroom, d: Decoration) -> String {
    let bath = match b {
        Bathroom::Private => "private",
        Bathroom::Shared => "shared",
    };
    let deco = match d {
        Decoration::Basic => "basic",
        Decoration::Standard => "standard",
        Decoration::Premium => "premium",
    };
    format!("{size} m2, rent {rent}/month, {o:?}-facing, floor {floor}, {bath} bathroom, {deco} decoration")
}

/// Lowers the smallest per-capita budget until max/min >= `ratio` (n >= 2).
fn widen_budget_spread(participants: &mut [ParticipantProfile], ratio: f64) {
    if participants.len() < 2 {
        return;
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, p) in participants.iter().enumerate() {
        if per_capita_budget(p) < per_capita_budget(&participants[lo]) {
            lo = i;
        }
        if per_capita_budget(p) > per_capita_budget(&participants[hi]) {
            hi = i;
        }
    }
    let max_pc = per_capita_budget(&participants[hi]);
    if per_capita_budget(&participants[lo]) * ratio > max_pc {
        let p = &mut participants[lo];
        p.rent_budget = ((max_pc / ratio) * f64::from(p.family_size) * 100.0).floor() / 100.0;
        p.monthly_income = p.monthly_income.min(p.rent_budget * 4.0).round();
    }
}

fn generate_graph(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> SocialGraph {
    let n = spec.n_participants;
    let groups = n.div_ceil(spec.social_group_size);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut group_of = vec![0usize; n];
    for (slot, &p) in order.iter().enumerate() {
        group_of[p] = slot % groups;
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let p = if group_of[a] == group_of[b] { spec.intra_group_p } else { spec.inter_group_p };
            if rng.random_bool(p) {
                let x: f64 = rng.random();
                let relation = if x < 0.4 {
                    Relation::Friend
                } else if x < 0.7 {
                    Relation::Colleague
                } else if x < 0.9 {
                    Relation::Competitor
                } else {
                    Relation::Stranger
                };
                edges.push(SocialEdge { a: a as ParticipantId, b: b as ParticipantId, relation });
            }
        }
    }
    SocialGraph { edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QualityVariant {
    /// Standard quality, unchanged.
    S,
    /// Half-size houses at half rent, twice as many.
    H,
    /// Shared bathrooms everywhere.
    B,
}

pub fn apply_quality_variant(resources: &[HouseResource], variant: QualityVariant) -> Vec<HouseResource> {
    match variant {
        QualityVariant::S => resources.to_vec(),
        QualityVariant::B => resources
            .iter()
            .map(|r| HouseResource { bathroom: Bathroom::Shared, ..r.clone() })
            .collect(),
        QualityVariant::H => resources
            .iter()
            .flat_map(|r| {
                (0..2).map(move |half| {
                    let size = r.size / 2.0;
                    let rent = r.rent / 2.0;
                    HouseResource {
                        id: r.id * 2 + half,
                        size,
                        rent,
                        disclosed: describe_house(size, rent, r.orientation, r.floor, r.bathroom, r.decoration),
                        ..r.clone()
                    }
                })
            })
            .collect(),
    }
}
