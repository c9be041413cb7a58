//! Entity-, group- and correction-cost statistics on top of a group match,
//! plus the grouping-blind entity F1 baseline.
//!
//! Every count type here is a commutative monoid under `merge`, so dataset
//! totals are plain sums of per-document counts (micro averaging).

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::matching::{EntityLabel, GroupMatchResult};
use crate::model::{DocumentExtraction, GroupType};

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1Triple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl F1Triple {
    pub const ZERO: F1Triple = F1Triple {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    /// Zero denominators give 0, except when all three counts are zero: an
    /// empty prediction of an empty document is perfect.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        if tp + fp + fn_ == 0 {
            return F1Triple {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            };
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        F1Triple { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct F1Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl F1Counts {
    pub fn merge(&mut self, other: &F1Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn scores(&self) -> F1Triple {
        F1Triple::from_counts(self.tp, self.fp, self.fn_)
    }
}

/// Entity-level F1 statistics and correction counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountLedger {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub subs: usize,
    pub add: usize,
    pub del: usize,
}

impl CountLedger {
    pub fn error(&self) -> usize {
        self.subs + self.add + self.del
    }

    pub fn f1_counts(&self) -> F1Counts {
        F1Counts {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
        }
    }

    pub fn merge(&mut self, other: &CountLedger) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.subs += other.subs;
        self.add += other.add;
        self.del += other.del;
    }

    /// Entity F1 computed on the group-matched counts.
    pub fn entity_f1(&self) -> F1Triple {
        self.f1_counts().scores()
    }

    /// `tp / (tp + error)`; 1 for a ledger with no entities at all.
    pub fn aligned(&self) -> f64 {
        if self.tp + self.fp + self.fn_ == 0 {
            return 1.0;
        }
        let den = self.tp + self.error();
        if den == 0 {
            0.0
        } else {
            self.tp as f64 / den as f64
        }
    }
}

impl Serialize for CountLedger {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("CountLedger", 7)?;
        s.serialize_field("tp", &self.tp)?;
        s.serialize_field("fp", &self.fp)?;
        s.serialize_field("fn", &self.fn_)?;
        s.serialize_field("subs", &self.subs)?;
        s.serialize_field("add", &self.add)?;
        s.serialize_field("del", &self.del)?;
        s.serialize_field("error", &self.error())?;
        s.end()
    }
}

/// TP/FP/FN from the matched scores: TP is the summed pair score, FP and FN
/// are whatever remains on each side.
pub fn entity_statistics(m: &GroupMatchResult<'_>) -> CountLedger {
    let tp = m.total_score();
    CountLedger {
        tp,
        fp: m.pred.entity_count() - tp,
        fn_: m.gt.entity_count() - tp,
        ..CountLedger::default()
    }
}

/// Substitutions, additions and deletions: per matched cell
/// `subs = min(fp, fn)` with the rest split into additions and deletions,
/// plus every entity of an unmatched group.
pub fn correction_costs(m: &GroupMatchResult<'_>) -> CountLedger {
    let mut ledger = CountLedger::default();
    for pair in &m.pairs {
        for cell in pair.cells.values() {
            let subs = cell.fp().min(cell.fn_());
            ledger.subs += subs;
            ledger.add += cell.fn_() - subs;
            ledger.del += cell.fp() - subs;
        }
    }
    ledger.add += m
        .unmatched_gt_groups
        .iter()
        .map(|&g| m.gt.groups[g].len())
        .sum::<usize>();
    ledger.del += m
        .unmatched_pred_groups
        .iter()
        .map(|&p| m.pred.groups[p].len())
        .sum::<usize>();
    ledger
}

/// Group-level counts over every matched pair except the bucket pair.
/// `None` when neither document has a grouped entity.
pub fn group_statistics(m: &GroupMatchResult<'_>) -> Option<F1Counts> {
    if !m.pred.has_grouped_entities() && !m.gt.has_grouped_entities() {
        return None;
    }
    let named = |doc: &DocumentExtraction| doc.groups.iter().filter(|g| !g.group_type.is_nongroup()).count();
    let tp = m
        .pairs
        .iter()
        .filter(|p| !m.pred.groups[p.pred].group_type.is_nongroup() && p.is_exact())
        .count();
    Some(F1Counts {
        tp,
        fp: named(m.pred) - tp,
        fn_: named(m.gt) - tp,
    })
}

/// Grouping-blind multiset match over the whole document, overall and per
/// entity type.
pub fn legacy_counts(pred: &DocumentExtraction, gt: &DocumentExtraction) -> (F1Counts, BTreeMap<String, F1Counts>) {
    let mut table: HashMap<(&str, &str), (usize, usize)> = HashMap::new();
    for e in pred.entities() {
        table.entry((&e.entity_type, &e.value)).or_default().0 += 1;
    }
    for e in gt.entities() {
        table.entry((&e.entity_type, &e.value)).or_default().1 += 1;
    }
    let mut overall = F1Counts::default();
    let mut per_type: BTreeMap<String, F1Counts> = BTreeMap::new();
    for ((ty, _), (p, g)) in table {
        let shared = p.min(g);
        let c = F1Counts {
            tp: shared,
            fp: p - shared,
            fn_: g - shared,
        };
        overall.merge(&c);
        per_type.entry(ty.to_owned()).or_default().merge(&c);
    }
    (overall, per_type)
}

pub fn legacy_entity_f1(pred: &DocumentExtraction, gt: &DocumentExtraction) -> F1Triple {
    legacy_counts(pred, gt).0.scores()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TypeCounts {
    pub entity: CountLedger,
    pub legacy: F1Counts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroupTypeCounts {
    pub entity: CountLedger,
    pub group: F1Counts,
}

/// Everything counted for one document (or, after merging, a dataset).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationCounts {
    pub entity: CountLedger,
    pub legacy: F1Counts,
    /// `None` while no grouped entity has been seen.
    pub group: Option<F1Counts>,
    pub per_type: BTreeMap<String, TypeCounts>,
    pub per_group_type: BTreeMap<GroupType, GroupTypeCounts>,
}

impl EvaluationCounts {
    pub fn merge(&mut self, other: &EvaluationCounts) {
        self.entity.merge(&other.entity);
        self.legacy.merge(&other.legacy);
        self.group = match (self.group, other.group) {
            (None, None) => None,
            (a, b) => {
                let mut sum = a.unwrap_or_default();
                sum.merge(&b.unwrap_or_default());
                Some(sum)
            }
        };
        for (ty, c) in &other.per_type {
            let slot = self.per_type.entry(ty.clone()).or_default();
            slot.entity.merge(&c.entity);
            slot.legacy.merge(&c.legacy);
        }
        for (ty, c) in &other.per_group_type {
            let slot = self.per_group_type.entry(ty.clone()).or_default();
            slot.entity.merge(&c.entity);
            slot.group.merge(&c.group);
        }
    }

    pub fn scores(&self) -> Scores {
        Scores {
            legacy_entity_f1: self.legacy.scores(),
            kieval_entity_f1: self.entity.entity_f1(),
            kieval_group_f1: self.group.map(|g| g.scores()),
            kieval_aligned: self.entity.aligned(),
        }
    }
}

/// Headline scores, in the order reports print them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub legacy_entity_f1: F1Triple,
    pub kieval_entity_f1: F1Triple,
    /// `None` prints as "-": no grouped entities anywhere.
    pub kieval_group_f1: Option<F1Triple>,
    pub kieval_aligned: f64,
}

impl Scores {
    /// Scores of a report with no documents.
    pub const EMPTY: Scores = Scores {
        legacy_entity_f1: F1Triple::ZERO,
        kieval_entity_f1: F1Triple::ZERO,
        kieval_group_f1: None,
        kieval_aligned: 0.0,
    };
}

/// Counts every slice of one matched document from its entity labels.
pub fn evaluate_document(m: &GroupMatchResult<'_>) -> EvaluationCounts {
    let mut counts = EvaluationCounts::default();

    let mut tally = |group_type: &GroupType, entity_type: &str, label: EntityLabel, is_pred: bool| {
        let mut delta = CountLedger::default();
        match (label, is_pred) {
            (EntityLabel::Tp, true) => delta.tp = 1,
            (EntityLabel::Tp, false) => {}
            (EntityLabel::Subs, true) => {
                delta.fp = 1;
                delta.subs = 1;
            }
            (EntityLabel::Subs, false) => delta.fn_ = 1,
            (EntityLabel::Del, _) => {
                delta.fp = 1;
                delta.del = 1;
            }
            (EntityLabel::Add, _) => {
                delta.fn_ = 1;
                delta.add = 1;
            }
        }
        counts.entity.merge(&delta);
        counts
            .per_type
            .entry(entity_type.to_owned())
            .or_default()
            .entity
            .merge(&delta);
        counts
            .per_group_type
            .entry(group_type.clone())
            .or_default()
            .entity
            .merge(&delta);
    };

    for (group, labels) in m.pred.groups.iter().zip(&m.pred_labels) {
        for (e, &label) in group.entities.iter().zip(labels) {
            tally(&group.group_type, &e.entity_type, label, true);
        }
    }
    for (group, labels) in m.gt.groups.iter().zip(&m.gt_labels) {
        for (e, &label) in group.entities.iter().zip(labels) {
            tally(&group.group_type, &e.entity_type, label, false);
        }
    }

    let (legacy, legacy_per_type) = legacy_counts(m.pred, m.gt);
    counts.legacy = legacy;
    for (ty, c) in legacy_per_type {
        counts.per_type.entry(ty).or_default().legacy = c;
    }

    counts.group = group_statistics(m);
    if counts.group.is_some() {
        for pair in &m.pairs[..] {
            let ty = &m.gt.groups[pair.gt].group_type;
            if !ty.is_nongroup() && pair.is_exact() {
                counts.per_group_type.entry(ty.clone()).or_default().group.tp += 1;
            }
        }
        for g in m.pred.groups.iter().filter(|g| !g.group_type.is_nongroup()) {
            counts.per_group_type.entry(g.group_type.clone()).or_default().group.fp += 1;
        }
        for g in m.gt.groups.iter().filter(|g| !g.group_type.is_nongroup()) {
            counts.per_group_type.entry(g.group_type.clone()).or_default().group.fn_ += 1;
        }
        for slot in counts.per_group_type.values_mut() {
            slot.group.fp -= slot.group.tp;
            slot.group.fn_ -= slot.group.tp;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocReport {
    pub doc_id: String,
    pub scores: Scores,
    #[serde(skip)]
    pub counts: EvaluationCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub documents: usize,
    pub counts: EvaluationCounts,
    pub scores: Scores,
    pub per_doc: Option<Vec<DocReport>>,
}

/// Micro-average: sums every count over the documents, then scores once.
pub fn aggregate<I>(docs: I, keep_per_doc: bool) -> MetricReport
where
    I: IntoIterator<Item = (String, EvaluationCounts)>,
{
    let mut total = EvaluationCounts::default();
    let mut documents = 0;
    let mut per_doc = keep_per_doc.then(Vec::new);
    for (doc_id, counts) in docs {
        documents += 1;
        total.merge(&counts);
        if let Some(list) = per_doc.as_mut() {
            list.push(DocReport {
                doc_id,
                scores: counts.scores(),
                counts,
            });
        }
    }
    let scores = if documents == 0 { Scores::EMPTY } else { total.scores() };
    MetricReport {
        documents,
        counts: total,
        scores,
        per_doc,
    }
}
