#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::RngExt;

use kieval::model::{DocumentExtraction, EntityGroup, ExtractedEntity, GroupType};

pub const ALPHABET: [&str; 4] = ["a", "b", "c", "d"];
pub const ENTITY_TYPES: [&str; 3] = ["nm", "cnt", "price"];
pub const GROUP_TYPES: [&str; 2] = ["menu", "sub"];

/// Limits for random documents.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_groups_per_type: usize,
    pub max_entities: usize,
    pub grouped: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_groups_per_type: 5,
            max_entities: 6,
            grouped: true,
        }
    }
}

fn entity(rng: &mut StdRng) -> ExtractedEntity {
    let ty = ENTITY_TYPES[rng.random_range(0..ENTITY_TYPES.len())];
    let value = ALPHABET[rng.random_range(0..ALPHABET.len())];
    ExtractedEntity::new(ty, value).with_confidence(rng.random_range(0..=100) as f64 / 100.0)
}

fn entities(rng: &mut StdRng, min: usize, max: usize) -> Vec<ExtractedEntity> {
    let n = rng.random_range(min..=max);
    (0..n).map(|_| entity(rng)).collect()
}

pub fn random_document(rng: &mut StdRng, doc_id: &str, shape: Shape) -> DocumentExtraction {
    let mut groups = vec![EntityGroup::nongroup(entities(rng, 0, shape.max_entities))];
    if shape.grouped {
        for gt in GROUP_TYPES {
            for _ in 0..rng.random_range(0..=shape.max_groups_per_type) {
                groups.push(EntityGroup::new(
                    GroupType::named(gt),
                    entities(rng, 1, shape.max_entities),
                ));
            }
        }
    }
    DocumentExtraction::new(doc_id, groups)
}

/// A prediction derived from `gt` by random edits, so pairs share structure.
pub fn perturb(rng: &mut StdRng, gt: &DocumentExtraction, shape: Shape) -> DocumentExtraction {
    let mut groups: Vec<EntityGroup> = Vec::new();
    for g in &gt.groups {
        if !g.group_type.is_nongroup() && rng.random_range(0..6) == 0 {
            continue;
        }
        let mut es: Vec<ExtractedEntity> = Vec::new();
        for e in &g.entities {
            match rng.random_range(0..8) {
                0 => {}
                1 => es.push(ExtractedEntity::new(
                    e.entity_type.clone(),
                    ALPHABET[rng.random_range(0..ALPHABET.len())],
                )),
                _ => es.push(e.clone()),
            }
        }
        if rng.random_range(0..4) == 0 {
            es.push(entity(rng));
        }
        for e in &mut es {
            e.confidence = Some(rng.random_range(0..=100) as f64 / 100.0);
        }
        if !g.group_type.is_nongroup() && es.is_empty() {
            continue;
        }
        groups.push(EntityGroup::new(g.group_type.clone(), es));
    }
    if shape.grouped && rng.random_range(0..3) == 0 {
        let ty = GROUP_TYPES[rng.random_range(0..GROUP_TYPES.len())];
        let count = groups.iter().filter(|g| g.group_type == GroupType::named(ty)).count();
        if count < shape.max_groups_per_type {
            groups.push(EntityGroup::new(
                GroupType::named(ty),
                entities(rng, 1, shape.max_entities),
            ));
        }
    }
    // regroup by type after shuffling so group order inside a type varies
    let bucket = groups.remove(0);
    let mut rest = groups;
    for i in (1..rest.len()).rev() {
        let j = rng.random_range(0..=i);
        rest.swap(i, j);
    }
    let mut out = vec![bucket];
    out.extend(rest);
    DocumentExtraction::new(gt.doc_id.clone(), out)
}

/// Either a perturbed copy of `gt` or an independent random document.
pub fn random_prediction(rng: &mut StdRng, gt: &DocumentExtraction, shape: Shape) -> DocumentExtraction {
    if rng.random_range(0..4) == 0 {
        random_document(rng, &gt.doc_id, shape)
    } else {
        perturb(rng, gt, shape)
    }
}

/// Drops every grouping: all entities go to the bucket.
pub fn flatten(doc: &DocumentExtraction) -> DocumentExtraction {
    DocumentExtraction::new(
        doc.doc_id.clone(),
        vec![EntityGroup::nongroup(doc.entities().cloned().collect())],
    )
}
