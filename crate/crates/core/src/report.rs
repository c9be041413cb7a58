//! Report rendering: JSON (full precision), CSV, and an aligned text table
//! (four decimals).
//!
//! JSON key order is fixed by struct field order, so identical inputs give
//! byte-identical output once the timestamp is suppressed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::metrics::{CountLedger, F1Counts, F1Triple, MetricReport, Scores};
use crate::model::EvalConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, path: &str, bytes: &[u8]) -> Self {
        Self {
            role: role.to_owned(),
            path: path.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub normalization: &'static str,
    pub missing_doc: &'static str,
    pub infer_group_type: bool,
}

impl From<&EvalConfig> for ConfigEcho {
    fn from(c: &EvalConfig) -> Self {
        Self {
            normalization: c.normalization.as_str(),
            missing_doc: c.missing_doc_policy.as_str(),
            infer_group_type: c.infer_group_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warnings {
    /// Unknown JSON keys per input role.
    pub unknown_fields: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: Option<String>,
    pub config: ConfigEcho,
    pub inputs: Vec<InputDigest>,
    pub warnings: Warnings,
}

impl RunManifest {
    pub fn new(
        config: &EvalConfig,
        inputs: Vec<InputDigest>,
        unknown_fields: BTreeMap<String, usize>,
        timestamp: bool,
    ) -> Self {
        Self {
            tool: "kieval",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            config: config.into(),
            inputs,
            warnings: Warnings { unknown_fields },
        }
    }
}

#[derive(Serialize)]
struct CountsJson<'a> {
    documents: usize,
    entity: &'a CountLedger,
    legacy: &'a F1Counts,
    group: Option<&'a F1Counts>,
}

#[derive(Serialize)]
struct TypeScores {
    legacy_entity_f1: F1Triple,
    kieval_entity_f1: F1Triple,
    kieval_aligned: f64,
}

#[derive(Serialize)]
struct TypeJson<'a> {
    counts: &'a CountLedger,
    legacy: &'a F1Counts,
    scores: TypeScores,
}

#[derive(Serialize)]
struct GroupTypeScores {
    kieval_entity_f1: F1Triple,
    kieval_group_f1: Option<F1Triple>,
    kieval_aligned: f64,
}

#[derive(Serialize)]
struct GroupTypeJson<'a> {
    group_type: Option<&'a str>,
    counts: &'a CountLedger,
    group: Option<&'a F1Counts>,
    scores: GroupTypeScores,
}

#[derive(Serialize)]
struct DocJson<'a> {
    doc_id: &'a str,
    scores: &'a Scores,
    counts: CountsJson<'a>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    manifest: &'a RunManifest,
    scores: &'a Scores,
    counts: CountsJson<'a>,
    per_type: BTreeMap<&'a str, TypeJson<'a>>,
    per_group_type: Vec<GroupTypeJson<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_doc: Option<Vec<DocJson<'a>>>,
}

pub fn render_json(report: &MetricReport, manifest: &RunManifest) -> String {
    let counts = &report.counts;
    let group_applicable = counts.group.is_some();
    let per_type = counts
        .per_type
        .iter()
        .map(|(ty, c)| {
            (
                ty.as_str(),
                TypeJson {
                    counts: &c.entity,
                    legacy: &c.legacy,
                    scores: TypeScores {
                        legacy_entity_f1: c.legacy.scores(),
                        kieval_entity_f1: c.entity.entity_f1(),
                        kieval_aligned: c.entity.aligned(),
                    },
                },
            )
        })
        .collect();
    let per_group_type = counts
        .per_group_type
        .iter()
        .map(|(ty, c)| {
            let group = (group_applicable && !ty.is_nongroup()).then_some(&c.group);
            GroupTypeJson {
                group_type: ty.as_label(),
                counts: &c.entity,
                group,
                scores: GroupTypeScores {
                    kieval_entity_f1: c.entity.entity_f1(),
                    kieval_group_f1: group.map(F1Counts::scores),
                    kieval_aligned: c.entity.aligned(),
                },
            }
        })
        .collect();
    let per_doc = report.per_doc.as_ref().map(|docs| {
        docs.iter()
            .map(|d| DocJson {
                doc_id: &d.doc_id,
                scores: &d.scores,
                counts: CountsJson {
                    documents: 1,
                    entity: &d.counts.entity,
                    legacy: &d.counts.legacy,
                    group: d.counts.group.as_ref(),
                },
            })
            .collect()
    });
    let json = JsonReport {
        manifest,
        scores: &report.scores,
        counts: CountsJson {
            documents: report.documents,
            entity: &counts.entity,
            legacy: &counts.legacy,
            group: counts.group.as_ref(),
        },
        per_type,
        per_group_type,
        per_doc,
    };
    let mut out = serde_json::to_string_pretty(&json).expect("report is always serializable");
    out.push('\n');
    out
}

/// One output row: a scope (overall, entity type, group type, document) with
/// its scores and correction counts.
struct Row {
    scope: &'static str,
    name: String,
    legacy: Option<F1Triple>,
    entity: F1Triple,
    group: Option<F1Triple>,
    aligned: f64,
    ledger: CountLedger,
}

fn rows(report: &MetricReport, per_type: bool, per_doc: bool) -> Vec<Row> {
    let mut out = vec![Row {
        scope: "overall",
        name: String::new(),
        legacy: Some(report.scores.legacy_entity_f1),
        entity: report.scores.kieval_entity_f1,
        group: report.scores.kieval_group_f1,
        aligned: report.scores.kieval_aligned,
        ledger: report.counts.entity,
    }];
    if per_type {
        for (ty, c) in &report.counts.per_type {
            out.push(Row {
                scope: "entity_type",
                name: ty.clone(),
                legacy: Some(c.legacy.scores()),
                entity: c.entity.entity_f1(),
                group: None,
                aligned: c.entity.aligned(),
                ledger: c.entity,
            });
        }
        let applicable = report.counts.group.is_some();
        for (ty, c) in &report.counts.per_group_type {
            out.push(Row {
                scope: "group_type",
                name: ty.to_string(),
                legacy: None,
                entity: c.entity.entity_f1(),
                group: (applicable && !ty.is_nongroup()).then(|| c.group.scores()),
                aligned: c.entity.aligned(),
                ledger: c.entity,
            });
        }
    }
    if per_doc {
        for d in report.per_doc.iter().flatten() {
            out.push(Row {
                scope: "document",
                name: d.doc_id.clone(),
                legacy: Some(d.scores.legacy_entity_f1),
                entity: d.scores.kieval_entity_f1,
                group: d.scores.kieval_group_f1,
                aligned: d.scores.kieval_aligned,
                ledger: d.counts.entity,
            });
        }
    }
    out
}

pub const CSV_HEADER: [&str; 13] = [
    "scope",
    "name",
    "legacy_entity_f1",
    "kieval_entity_f1",
    "kieval_group_f1",
    "kieval_aligned",
    "tp",
    "fp",
    "fn",
    "subs",
    "add",
    "del",
    "error",
];

pub fn render_csv(report: &MetricReport, per_type: bool, per_doc: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    let full = |v: f64| v.to_string();
    for row in rows(report, per_type, per_doc) {
        let l = row.ledger;
        w.write_record([
            row.scope.to_owned(),
            row.name,
            row.legacy.map_or_else(|| "-".to_owned(), |s| full(s.f1)),
            full(row.entity.f1),
            row.group.map_or_else(|| "-".to_owned(), |s| full(s.f1)),
            full(row.aligned),
            l.tp.to_string(),
            l.fp.to_string(),
            l.fn_.to_string(),
            l.subs.to_string(),
            l.add.to_string(),
            l.del.to_string(),
            l.error().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn four(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

pub fn render_table(report: &MetricReport, per_type: bool, per_doc: bool) -> String {
    let s = &report.scores;
    let c = &report.counts.entity;
    let mut out = String::new();
    let _ = writeln!(out, "documents: {}", report.documents);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<18} {:>8}", "Metric", "Score");
    let _ = writeln!(out, "{:<18} {:>8}", "Entity F1", four(Some(s.legacy_entity_f1.f1)));
    let _ = writeln!(
        out,
        "{:<18} {:>8}",
        "KIEval Entity F1",
        four(Some(s.kieval_entity_f1.f1))
    );
    let _ = writeln!(
        out,
        "{:<18} {:>8}",
        "KIEval Group F1",
        four(s.kieval_group_f1.map(|g| g.f1))
    );
    let _ = writeln!(out, "{:<18} {:>8}", "KIEval Aligned", four(Some(s.kieval_aligned)));
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>6} {:>6} {:>6} {:>8} {:>6} {:>6} {:>6} {:>10}",
        "TP", "FP", "FN", "FP + FN", "Subs", "Add", "Del", "Correction"
    );
    let _ = writeln!(
        out,
        "{:>6} {:>6} {:>6} {:>8} {:>6} {:>6} {:>6} {:>10}",
        c.tp,
        c.fp,
        c.fn_,
        c.fp + c.fn_,
        c.subs,
        c.add,
        c.del,
        c.error()
    );

    if per_type || per_doc {
        let detail: Vec<Row> = rows(report, per_type, per_doc).into_iter().skip(1).collect();
        let width = detail.iter().map(|r| r.name.len()).max().unwrap_or(0).max(4);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<11} {:<width$} {:>9} {:>9} {:>9} {:>9} {:>6} {:>6} {:>6} {:>6} {:>6}",
            "scope", "name", "EntityF1", "KIEvalF1", "GroupF1", "Aligned", "TP", "Subs", "Add", "Del", "Error"
        );
        for r in detail {
            let l = r.ledger;
            let _ = writeln!(
                out,
                "{:<11} {:<width$} {:>9} {:>9} {:>9} {:>9} {:>6} {:>6} {:>6} {:>6} {:>6}",
                r.scope,
                r.name,
                four(r.legacy.map(|s| s.f1)),
                four(Some(r.entity.f1)),
                four(r.group.map(|g| g.f1)),
                four(Some(r.aligned)),
                l.tp,
                l.subs,
                l.add,
                l.del,
                l.error()
            );
        }
    }
    out
}
