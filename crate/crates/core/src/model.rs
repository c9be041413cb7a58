//! Domain types shared by ingestion, matching, metrics and the sweep.
//!
//! A [`DocumentExtraction`] is a list of [`EntityGroup`]s. The group at index 0
//! is always the non-group bucket, which holds every entity that carries no
//! structural relation to other entities.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Group label. `NonGroup` is an out-of-band marker, so a user group type
/// spelled "nongroup" never collides with the bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupType {
    NonGroup,
    Named(String),
}

impl GroupType {
    pub fn named(name: impl Into<String>) -> Self {
        GroupType::Named(name.into())
    }

    pub fn is_nongroup(&self) -> bool {
        matches!(self, GroupType::NonGroup)
    }

    /// The label used in files and reports; `None` for the bucket.
    pub fn as_label(&self) -> Option<&str> {
        match self {
            GroupType::NonGroup => None,
            GroupType::Named(name) => Some(name),
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupType::NonGroup => f.write_str("-"),
            GroupType::Named(name) => f.write_str(name),
        }
    }
}

/// One `(entity type, value)` unit, optionally with a model confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedEntity {
    pub entity_type: String,
    pub value: String,
    pub confidence: Option<f64>,
}

impl ExtractedEntity {
    pub fn new(entity_type: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            entity_type: entity_type.into(),
            value: value.into(),
            confidence: None,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }
}

/// A multiset of entities. Insertion order is kept; it decides which
/// leftover entities become substitutions during labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityGroup {
    pub group_type: GroupType,
    pub entities: Vec<ExtractedEntity>,
}

impl EntityGroup {
    pub fn new(group_type: GroupType, entities: Vec<ExtractedEntity>) -> Self {
        Self { group_type, entities }
    }

    pub fn nongroup(entities: Vec<ExtractedEntity>) -> Self {
        Self::new(GroupType::NonGroup, entities)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// All groups extracted from (or annotated on) one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentExtraction {
    pub doc_id: String,
    pub groups: Vec<EntityGroup>,
}

impl DocumentExtraction {
    /// Builds a document with the bucket at index 0. Every `NonGroup` group in
    /// `groups` is merged into it in order; an empty bucket is created when
    /// none is given.
    pub fn new(doc_id: impl Into<String>, groups: Vec<EntityGroup>) -> Self {
        let mut bucket = EntityGroup::nongroup(Vec::new());
        let mut rest = Vec::with_capacity(groups.len());
        for group in groups {
            if group.group_type.is_nongroup() {
                bucket.entities.extend(group.entities);
            } else {
                rest.push(group);
            }
        }
        let mut all = Vec::with_capacity(rest.len() + 1);
        all.push(bucket);
        all.extend(rest);
        Self {
            doc_id: doc_id.into(),
            groups: all,
        }
    }

    /// A document with nothing in it but the empty bucket.
    pub fn empty(doc_id: impl Into<String>) -> Self {
        Self::new(doc_id, Vec::new())
    }

    pub fn entity_count(&self) -> usize {
        self.groups.iter().map(EntityGroup::len).sum()
    }

    pub fn entities(&self) -> impl Iterator<Item = &ExtractedEntity> {
        self.groups.iter().flat_map(|g| g.entities.iter())
    }

    /// True when some group other than the bucket exists.
    pub fn has_grouped_entities(&self) -> bool {
        self.groups.iter().any(|g| !g.group_type.is_nongroup())
    }
}

/// Value normalization applied at ingestion, before exact comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    Trim,
    Casefold,
    #[serde(rename = "trim+casefold")]
    TrimCasefold,
}

impl Normalization {
    pub fn apply(self, value: &str) -> String {
        match self {
            Normalization::None => value.to_owned(),
            Normalization::Trim => value.trim().to_owned(),
            Normalization::Casefold => value.to_lowercase(),
            Normalization::TrimCasefold => value.to_lowercase().trim().to_owned(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Trim => "trim",
            Normalization::Casefold => "casefold",
            Normalization::TrimCasefold => "trim+casefold",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Normalization::None),
            "trim" => Ok(Normalization::Trim),
            "casefold" => Ok(Normalization::Casefold),
            "trim+casefold" => Ok(Normalization::TrimCasefold),
            other => Err(format!(
                "unknown normalization '{other}' (expected none|trim|casefold|trim+casefold)"
            )),
        }
    }
}

/// What to do with a document id present in only one of the two files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingDocPolicy {
    #[default]
    Error,
    TreatAsEmpty,
}

impl MissingDocPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            MissingDocPolicy::Error => "error",
            MissingDocPolicy::TreatAsEmpty => "empty",
        }
    }
}

/// Confidence thresholds for the review sweep: strictly increasing, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TauGrid(Vec<f64>);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TauGridError {
    #[error("threshold grid is empty")]
    Empty,
    #[error("threshold {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("thresholds must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: f64, next: f64 },
}

impl TauGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, TauGridError> {
        if values.is_empty() {
            return Err(TauGridError::Empty);
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(TauGridError::OutOfRange(v));
            }
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(TauGridError::NotIncreasing { prev: w[0], next: w[1] });
            }
        }
        Ok(Self(values))
    }

    /// `steps` evenly spaced points from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Self, TauGridError> {
        match steps {
            0 => Err(TauGridError::Empty),
            1 => Self::new(vec![min]),
            _ => {
                let span = max - min;
                let last = (steps - 1) as f64;
                let values = (0..steps)
                    .map(|i| {
                        if i + 1 == steps {
                            max
                        } else {
                            min + span * i as f64 / last
                        }
                    })
                    .collect();
                Self::new(values)
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for TauGrid {
    /// 101 points, 0.00 to 1.00.
    fn default() -> Self {
        Self((0..=100).map(|i| i as f64 / 100.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalConfig {
    pub normalization: Normalization,
    pub missing_doc_policy: MissingDocPolicy,
    /// Take a missing `group_type` from the entity-type prefix before the first '.'.
    pub infer_group_type: bool,
    pub tau_grid: Option<TauGrid>,
}

/// One broken invariant found by [`validate_document`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub doc_id: String,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}: {}", self.doc_id, self.message)
        } else {
            write!(f, "{}: {}: {}", self.doc_id, self.location, self.message)
        }
    }
}

/// Checks the document invariants. An empty result means the document is well formed.
pub fn validate_document(doc: &DocumentExtraction) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: String| {
        out.push(Violation {
            doc_id: doc.doc_id.clone(),
            location,
            message,
        })
    };

    if doc.doc_id.is_empty() {
        push(String::new(), "document id is empty".into());
    }
    match doc.groups.first() {
        Some(g) if g.group_type.is_nongroup() => {}
        _ => push("groups[0]".into(), "the non-group bucket is not at index 0".into()),
    }
    let buckets = doc.groups.iter().filter(|g| g.group_type.is_nongroup()).count();
    if buckets > 1 {
        push(
            String::new(),
            format!("{buckets} non-group buckets found, expected exactly one"),
        );
    }

    for (gi, group) in doc.groups.iter().enumerate() {
        if let GroupType::Named(name) = &group.group_type {
            if name.is_empty() {
                push(format!("groups[{gi}]"), "group type is empty".into());
            }
            if group.entities.is_empty() {
                push(format!("groups[{gi}]"), format!("group '{name}' has no entities"));
            }
        }
        for (ei, entity) in group.entities.iter().enumerate() {
            let location = format!("groups[{gi}].entities[{ei}]");
            if entity.entity_type.is_empty() {
                push(location.clone(), "entity type is empty".into());
            }
            if let Some(c) = entity.confidence {
                if !(0.0..=1.0).contains(&c) {
                    push(
                        location,
                        format!("entity '{}' has confidence {c} outside [0, 1]", entity.entity_type),
                    );
                }
            }
        }
    }
    out
}
