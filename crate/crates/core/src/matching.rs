//! Group matching and per-entity error labeling.
//!
//! The score between a prediction group and a ground-truth group is the number
//! of identical `(entity type, value)` entities they share, with multiset
//! semantics. The two non-group buckets are always paired with each other;
//! every other group is assigned only to groups of the same group type so that
//! the total score is maximal.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::assignment::{max_weight_assignment, Weights};
use crate::model::{DocumentExtraction, EntityGroup, GroupType};

/// Per-entity outcome. Prediction entities get `Tp`, `Subs` or `Del`;
/// ground-truth entities get `Tp`, `Subs` or `Add`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityLabel {
    Tp,
    Subs,
    Add,
    Del,
}

/// Matching score between two groups, overall and per entity type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupScore {
    pub total: usize,
    pub per_type: BTreeMap<String, usize>,
}

/// Counts for one entity type inside one matched pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypeCell {
    /// Entities of this type in the prediction group.
    pub pred: usize,
    /// Entities of this type in the ground-truth group.
    pub gt: usize,
    /// Identical entities shared by both.
    pub matched: usize,
}

impl TypeCell {
    pub fn fp(&self) -> usize {
        self.pred - self.matched
    }

    pub fn fn_(&self) -> usize {
        self.gt - self.matched
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPair {
    pub pred: usize,
    pub gt: usize,
    pub score: usize,
    pub cells: BTreeMap<String, TypeCell>,
}

impl GroupPair {
    /// Both groups hold exactly the same entity multiset.
    pub fn is_exact(&self) -> bool {
        self.cells.values().all(|c| c.matched == c.gt && c.matched == c.pred)
    }
}

/// Result of matching one prediction document against its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMatchResult<'a> {
    pub pred: &'a DocumentExtraction,
    pub gt: &'a DocumentExtraction,
    /// `pairs[0]` is the bucket pair `(0, 0)`; the rest are sorted by `(gt, pred)`.
    pub pairs: Vec<GroupPair>,
    pub unmatched_pred_groups: Vec<usize>,
    pub unmatched_gt_groups: Vec<usize>,
    /// `pred_labels[group][entity]`
    pub pred_labels: Vec<Vec<EntityLabel>>,
    /// `gt_labels[group][entity]`
    pub gt_labels: Vec<Vec<EntityLabel>>,
}

impl GroupMatchResult<'_> {
    pub fn total_score(&self) -> usize {
        self.pairs.iter().map(|p| p.score).sum()
    }
}

fn multiset(group: &EntityGroup) -> HashMap<(&str, &str), usize> {
    let mut counts = HashMap::new();
    for e in &group.entities {
        *counts.entry((e.entity_type.as_str(), e.value.as_str())).or_insert(0) += 1;
    }
    counts
}

/// Identical-entity count between two groups, duplicates counted up to the
/// smaller multiplicity.
pub fn matching_score(pred: &EntityGroup, gt: &EntityGroup) -> GroupScore {
    let pred_counts = multiset(pred);
    let gt_counts = multiset(gt);
    let mut score = GroupScore::default();
    for (key, &p) in &pred_counts {
        if let Some(&g) = gt_counts.get(key) {
            let shared = p.min(g);
            score.total += shared;
            *score.per_type.entry(key.0.to_owned()).or_insert(0) += shared;
        }
    }
    score
}

fn pair_cells(pred: &EntityGroup, gt: &EntityGroup) -> (usize, BTreeMap<String, TypeCell>) {
    let score = matching_score(pred, gt);
    let mut cells: BTreeMap<String, TypeCell> = BTreeMap::new();
    for e in &pred.entities {
        cells.entry(e.entity_type.clone()).or_default().pred += 1;
    }
    for e in &gt.entities {
        cells.entry(e.entity_type.clone()).or_default().gt += 1;
    }
    for (ty, matched) in score.per_type {
        if let Some(cell) = cells.get_mut(&ty) {
            cell.matched = matched;
        }
    }
    (score.total, cells)
}

/// Labels the entities of one matched pair.
///
/// Per entity type: identical entities are paired greedily in input order
/// (`Tp`); the first `min(fp, fn)` leftover predictions become `Subs` and
/// consume leftover ground-truth entities in input order; remaining
/// predictions are `Del`, remaining ground-truth entities `Add`.
pub fn label_pair(pred: &EntityGroup, gt: &EntityGroup) -> (Vec<EntityLabel>, Vec<EntityLabel>) {
    let mut pred_labels = vec![EntityLabel::Del; pred.len()];
    let mut gt_labels = vec![EntityLabel::Add; gt.len()];
    let mut gt_taken = vec![false; gt.len()];

    for (pi, pe) in pred.entities.iter().enumerate() {
        let hit = gt
            .entities
            .iter()
            .enumerate()
            .position(|(gi, ge)| !gt_taken[gi] && ge.entity_type == pe.entity_type && ge.value == pe.value);
        if let Some(gi) = hit {
            gt_taken[gi] = true;
            pred_labels[pi] = EntityLabel::Tp;
            gt_labels[gi] = EntityLabel::Tp;
        }
    }

    let types: BTreeSet<&str> = pred.entities.iter().map(|e| e.entity_type.as_str()).collect();
    for ty in types {
        let leftover_pred = pred
            .entities
            .iter()
            .enumerate()
            .filter(|(i, e)| e.entity_type == ty && pred_labels[*i] != EntityLabel::Tp)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        let leftover_gt = gt
            .entities
            .iter()
            .enumerate()
            .filter(|(i, e)| e.entity_type == ty && !gt_taken[*i])
            .map(|(i, _)| i);
        for (pi, gi) in leftover_pred.into_iter().zip(leftover_gt) {
            pred_labels[pi] = EntityLabel::Subs;
            gt_labels[gi] = EntityLabel::Subs;
        }
    }
    (pred_labels, gt_labels)
}

/// Indices of non-bucket groups, keyed by group type.
fn groups_by_type(doc: &DocumentExtraction) -> BTreeMap<&GroupType, Vec<usize>> {
    let mut map: BTreeMap<&GroupType, Vec<usize>> = BTreeMap::new();
    for (i, g) in doc.groups.iter().enumerate().skip(1) {
        map.entry(&g.group_type).or_default().push(i);
    }
    map
}

fn has_bucket(doc: &DocumentExtraction) -> bool {
    doc.groups.first().is_some_and(|g| g.group_type.is_nongroup())
}

/// Matches the groups of `pred` against `gt`, assigning groups of each type
/// with the Hungarian method.
pub fn match_groups<'a>(pred: &'a DocumentExtraction, gt: &'a DocumentExtraction) -> GroupMatchResult<'a> {
    build_result(pred, gt, |weights| max_weight_assignment(weights).pairs)
}

/// Instance too large for exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("group type '{group_type}' has {count} groups on one side; exhaustive matching allows at most {limit}")]
pub struct OracleTooLarge {
    pub group_type: String,
    pub count: usize,
    pub limit: usize,
}

pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Exhaustive reference for [`match_groups`]: enumerates every
/// maximum-cardinality injection per group type.
pub fn brute_force_match<'a>(
    pred: &'a DocumentExtraction,
    gt: &'a DocumentExtraction,
) -> Result<GroupMatchResult<'a>, OracleTooLarge> {
    let pred_types = groups_by_type(pred);
    let gt_types = groups_by_type(gt);
    for (ty, idx) in pred_types.iter().chain(gt_types.iter()) {
        if idx.len() > BRUTE_FORCE_LIMIT {
            return Err(OracleTooLarge {
                group_type: ty.to_string(),
                count: idx.len(),
                limit: BRUTE_FORCE_LIMIT,
            });
        }
    }
    Ok(build_result(pred, gt, enumerate_best))
}

fn enumerate_best(weights: &Weights) -> Vec<(usize, usize)> {
    struct Search<'w> {
        weights: &'w Weights,
        need: usize,
        used: Vec<bool>,
        current: Vec<(usize, usize)>,
        best: Option<(i64, Vec<(usize, usize)>)>,
    }

    impl Search<'_> {
        fn run(&mut self, col: usize) {
            if col == self.weights.cols() {
                if self.current.len() != self.need {
                    return;
                }
                let total: i64 = self.current.iter().map(|&(r, c)| self.weights.get(r, c)).sum();
                // pairs are pushed in column order, so `current` is already (col, row) sorted
                let better = match &self.best {
                    None => true,
                    Some((bt, bp)) => {
                        total > *bt
                            || (total == *bt
                                && self
                                    .current
                                    .iter()
                                    .map(|&(r, c)| (c, r))
                                    .lt(bp.iter().map(|&(r, c)| (c, r))))
                    }
                };
                if better {
                    self.best = Some((total, self.current.clone()));
                }
                return;
            }
            self.run(col + 1);
            for row in 0..self.weights.rows() {
                if !self.used[row] {
                    self.used[row] = true;
                    self.current.push((row, col));
                    self.run(col + 1);
                    self.current.pop();
                    self.used[row] = false;
                }
            }
        }
    }

    let mut search = Search {
        weights,
        need: weights.rows().min(weights.cols()),
        used: vec![false; weights.rows()],
        current: Vec::new(),
        best: None,
    };
    search.run(0);
    search.best.map(|(_, pairs)| pairs).unwrap_or_default()
}

fn build_result<'a>(
    pred: &'a DocumentExtraction,
    gt: &'a DocumentExtraction,
    solve: impl Fn(&Weights) -> Vec<(usize, usize)>,
) -> GroupMatchResult<'a> {
    let mut index_pairs: Vec<(usize, usize)> = Vec::new();
    let mut unmatched_pred = Vec::new();
    let mut unmatched_gt = Vec::new();

    let pred_bucket = has_bucket(pred);
    let gt_bucket = has_bucket(gt);
    match (pred_bucket, gt_bucket) {
        (true, true) => index_pairs.push((0, 0)),
        (true, false) => unmatched_pred.push(0),
        (false, true) => unmatched_gt.push(0),
        (false, false) => {}
    }
    // a malformed document may have a named group at index 0; keep it in play
    let pred_types = groups_by_type_including(pred, !pred_bucket);
    let gt_types = groups_by_type_including(gt, !gt_bucket);

    let all_types: BTreeSet<&GroupType> = pred_types.keys().chain(gt_types.keys()).copied().collect();
    let mut typed_pairs = Vec::new();
    for ty in all_types {
        let p_idx = pred_types.get(ty).map(Vec::as_slice).unwrap_or(&[]);
        let g_idx = gt_types.get(ty).map(Vec::as_slice).unwrap_or(&[]);
        let weights = Weights::from_fn(p_idx.len(), g_idx.len(), |r, c| {
            matching_score(&pred.groups[p_idx[r]], &gt.groups[g_idx[c]]).total as i64
        });
        let local = solve(&weights);
        let mut pred_used = vec![false; p_idx.len()];
        let mut gt_used = vec![false; g_idx.len()];
        for (r, c) in local {
            pred_used[r] = true;
            gt_used[c] = true;
            typed_pairs.push((p_idx[r], g_idx[c]));
        }
        unmatched_pred.extend(p_idx.iter().zip(&pred_used).filter(|(_, u)| !**u).map(|(i, _)| *i));
        unmatched_gt.extend(g_idx.iter().zip(&gt_used).filter(|(_, u)| !**u).map(|(i, _)| *i));
    }
    typed_pairs.sort_by_key(|&(p, g)| (g, p));
    index_pairs.extend(typed_pairs);
    unmatched_pred.sort_unstable();
    unmatched_gt.sort_unstable();

    let mut pred_labels: Vec<Vec<EntityLabel>> = pred.groups.iter().map(|g| vec![EntityLabel::Del; g.len()]).collect();
    let mut gt_labels: Vec<Vec<EntityLabel>> = gt.groups.iter().map(|g| vec![EntityLabel::Add; g.len()]).collect();

    let pairs = index_pairs
        .into_iter()
        .map(|(p, g)| {
            let (score, cells) = pair_cells(&pred.groups[p], &gt.groups[g]);
            let (pl, gl) = label_pair(&pred.groups[p], &gt.groups[g]);
            pred_labels[p] = pl;
            gt_labels[g] = gl;
            GroupPair {
                pred: p,
                gt: g,
                score,
                cells,
            }
        })
        .collect();

    GroupMatchResult {
        pred,
        gt,
        pairs,
        unmatched_pred_groups: unmatched_pred,
        unmatched_gt_groups: unmatched_gt,
        pred_labels,
        gt_labels,
    }
}

fn groups_by_type_including(doc: &DocumentExtraction, include_first: bool) -> BTreeMap<&GroupType, Vec<usize>> {
    let mut map = groups_by_type(doc);
    if include_first {
        if let Some(first) = doc.groups.first() {
            map.entry(&first.group_type).or_default().insert(0, 0);
        }
    }
    map
}
