//! Evaluation of document key information extraction with group awareness.
//!
//! Predictions and ground truth are sets of groups of `(entity type, value)`
//! entities. Groups are matched per document with the Hungarian method, then
//! scored at entity and group level and as correction costs (substitutions,
//! additions, deletions). A confidence-threshold sweep estimates how much
//! human review buys back. The grouping-blind entity F1 is reported alongside.
//!
//! ```
//! use kieval::fixtures::load_fixture;
//! use kieval::ingest::pair_documents;
//! use kieval::evaluate::{evaluate_pairs, EvaluateOptions};
//! use kieval::model::EvalConfig;
//!
//! let case = load_fixture("swap").unwrap();
//! let pairs = pair_documents(&case.gt, &case.pred, &EvalConfig::default()).unwrap();
//! let report = evaluate_pairs(&pairs, &EvaluateOptions::default());
//! assert_eq!(report.scores.legacy_entity_f1.f1, 1.0);
//! assert!((report.scores.kieval_entity_f1.f1 - 10.0 / 14.0).abs() < 1e-12);
//! ```

pub mod assignment;
pub mod cli;
pub mod evaluate;
pub mod fixtures;
pub mod ingest;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod report;
pub mod rpa;

pub use evaluate::{evaluate_pairs, EvaluateOptions};
pub use ingest::{pair_documents, parse_dataset, read_dataset, DatasetFile, DocPair, IngestError};
pub use matching::{brute_force_match, match_groups, EntityLabel, GroupMatchResult};
pub use metrics::{CountLedger, EvaluationCounts, F1Triple, MetricReport, Scores};
pub use model::{
    validate_document, DocumentExtraction, EntityGroup, EvalConfig, ExtractedEntity, GroupType, MissingDocPolicy,
    Normalization, TauGrid,
};
pub use rpa::{sweep, SweepPoint};
