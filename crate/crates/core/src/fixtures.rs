//! Bundled scenario corpus.
//!
//! The files under `fixtures/` are plain dataset JSON so other
//! implementations can reuse them unchanged. `expected.json` holds the
//! hand-derived counts and scores for every case, each with a note on how
//! they were obtained.

use serde::Deserialize;

use crate::ingest::{parse_dataset, DatasetFile, IngestError};
use crate::model::EvalConfig;

const FILES: &[(&str, &str)] = &[
    ("cord-mini.gt.json", include_str!("../fixtures/cord-mini.gt.json")),
    ("perfect.pred.json", include_str!("../fixtures/perfect.pred.json")),
    ("swap.pred.json", include_str!("../fixtures/swap.pred.json")),
    ("missing.pred.json", include_str!("../fixtures/missing.pred.json")),
    (
        "wrong-value.pred.json",
        include_str!("../fixtures/wrong-value.pred.json"),
    ),
    ("spurious.pred.json", include_str!("../fixtures/spurious.pred.json")),
    ("empty.gt.json", include_str!("../fixtures/empty.gt.json")),
    ("empty.pred.json", include_str!("../fixtures/empty.pred.json")),
    (
        "three-vs-two.pred.json",
        include_str!("../fixtures/three-vs-two.pred.json"),
    ),
    ("sroie.gt.json", include_str!("../fixtures/sroie.gt.json")),
    ("sroie.pred.json", include_str!("../fixtures/sroie.pred.json")),
    ("fig3.gt.json", include_str!("../fixtures/fig3.gt.json")),
    ("fig3-short.gt.json", include_str!("../fixtures/fig3-short.gt.json")),
    (
        "fig3-missing.pred.json",
        include_str!("../fixtures/fig3-missing.pred.json"),
    ),
    ("fig3-wrong.pred.json", include_str!("../fixtures/fig3-wrong.pred.json")),
    (
        "fig3-spurious.pred.json",
        include_str!("../fixtures/fig3-spurious.pred.json"),
    ),
];

const EXPECTED: &str = include_str!("../fixtures/expected.json");

/// The three single-correction scenarios: a missing, a wrong and an unexpected value.
pub const FIG3_TRIO: [&str; 3] = ["fig3-missing", "fig3-wrong", "fig3-spurious"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct ExpectedLedger {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub subs: usize,
    pub add: usize,
    pub del: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct ExpectedF1Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ExpectedScores {
    pub legacy_entity_f1: f64,
    pub kieval_entity_f1: f64,
    pub kieval_group_f1: Option<f64>,
    pub kieval_aligned: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Expected {
    pub gt: String,
    pub pred: String,
    pub derivation: String,
    pub counts: ExpectedLedger,
    pub legacy: ExpectedF1Counts,
    /// `None` when group F1 does not apply.
    pub group: Option<ExpectedF1Counts>,
    pub scores: ExpectedScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureCase {
    pub name: String,
    pub gt: DatasetFile,
    pub pred: DatasetFile,
    pub expected: Expected,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown fixture '{0}'")]
    Unknown(String),
    #[error("fixture '{name}': {source}")]
    Ingest {
        name: String,
        #[source]
        source: IngestError,
    },
}

fn expected_table() -> Vec<(String, Expected)> {
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(EXPECTED).expect("bundled expected.json is valid");
    map.into_iter()
        .map(|(k, v)| {
            let e: Expected = serde_json::from_value(v).expect("bundled expectation has the right shape");
            (k, e)
        })
        .collect()
}

/// Names of every bundled fixture, sorted.
pub fn fixture_names() -> Vec<String> {
    expected_table().into_iter().map(|(k, _)| k).collect()
}

/// Raw bytes of a bundled file, e.g. `"cord-mini.gt.json"`.
pub fn fixture_file(file: &str) -> Option<&'static str> {
    FILES.iter().find(|(name, _)| *name == file).map(|(_, body)| *body)
}

/// Loads a fixture through the normal ingestion path.
pub fn load_fixture(name: &str) -> Result<FixtureCase, FixtureError> {
    let expected = expected_table()
        .into_iter()
        .find(|(k, _)| k == name)
        .map(|(_, e)| e)
        .ok_or_else(|| FixtureError::Unknown(name.to_owned()))?;
    let load = |file: &str| -> Result<DatasetFile, FixtureError> {
        let body = fixture_file(file).ok_or_else(|| FixtureError::Unknown(file.to_owned()))?;
        let mut parsed =
            parse_dataset(body.as_bytes(), &EvalConfig::default()).map_err(|source| FixtureError::Ingest {
                name: name.to_owned(),
                source,
            })?;
        parsed.source_path = format!("fixtures/{file}");
        Ok(parsed)
    };
    Ok(FixtureCase {
        name: name.to_owned(),
        gt: load(&expected.gt)?,
        pred: load(&expected.pred)?,
        expected,
    })
}
