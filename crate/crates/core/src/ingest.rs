//! Dataset file parsing and document pairing.
//!
//! Ground-truth and prediction files share one schema:
//!
//! ```json
//! { "documents": [
//!     { "id": "receipt-001",
//!       "groups": [
//!         { "group_type": null,
//!           "entities": [ { "type": "store.name", "value": "CAFE" } ] },
//!         { "group_type": "menu",
//!           "entities": [ { "type": "menu.nm", "value": "LATTE", "confidence": 0.93 } ] }
//!       ] } ] }
//! ```
//!
//! Groups whose `group_type` is null or absent are merged, in file order, into
//! the non-group bucket at index 0. Unknown keys are ignored and counted.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde_json::{Map, Value};

use crate::model::{DocumentExtraction, EntityGroup, EvalConfig, ExtractedEntity, GroupType, MissingDocPolicy};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation in document '{doc_id}' at {field}: {message}")]
    Schema {
        doc_id: String,
        field: String,
        message: String,
    },
    #[error("duplicate document id '{0}'")]
    DuplicateDocId(String),
    #[error("{}", unpaired_message(.missing_in_pred, .missing_in_gt))]
    Unpaired {
        /// Ground-truth ids with no prediction.
        missing_in_pred: Vec<String>,
        /// Prediction ids with no ground truth.
        missing_in_gt: Vec<String>,
    },
}

fn unpaired_message(missing_in_pred: &[String], missing_in_gt: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing_in_pred.is_empty() {
        parts.push(format!(
            "ground-truth documents without prediction: {}",
            missing_in_pred.join(", ")
        ));
    }
    if !missing_in_gt.is_empty() {
        parts.push(format!(
            "prediction documents without ground truth: {}",
            missing_in_gt.join(", ")
        ));
    }
    format!("unpaired documents ({})", parts.join("; "))
}

/// A parsed dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub documents: Vec<DocumentExtraction>,
    pub source_path: String,
    /// Number of JSON keys that are not part of the schema.
    pub unknown_fields: usize,
}

impl DatasetFile {
    pub fn entity_count(&self) -> usize {
        self.documents.iter().map(DocumentExtraction::entity_count).sum()
    }
}

pub fn read_dataset(path: impl AsRef<Path>, config: &EvalConfig) -> Result<DatasetFile, IngestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut file = parse_dataset(&bytes, config)?;
    file.source_path = path.display().to_string();
    Ok(file)
}

/// Parses dataset JSON. Values are normalized per `config.normalization`;
/// entity order is preserved.
pub fn parse_dataset(bytes: &[u8], config: &EvalConfig) -> Result<DatasetFile, IngestError> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| IngestError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut parser = Parser {
        config,
        unknown_fields: 0,
    };
    let documents = parser.documents(&root)?;
    Ok(DatasetFile {
        documents,
        source_path: String::new(),
        unknown_fields: parser.unknown_fields,
    })
}

struct Parser<'c> {
    config: &'c EvalConfig,
    unknown_fields: usize,
}

fn schema(doc_id: &str, field: impl Into<String>, message: impl Into<String>) -> IngestError {
    IngestError::Schema {
        doc_id: doc_id.to_owned(),
        field: field.into(),
        message: message.into(),
    }
}

impl Parser<'_> {
    fn count_unknown(&mut self, obj: &Map<String, Value>, known: &[&str]) {
        self.unknown_fields += obj.keys().filter(|k| !known.contains(&k.as_str())).count();
    }

    fn documents(&mut self, root: &Value) -> Result<Vec<DocumentExtraction>, IngestError> {
        let obj = root
            .as_object()
            .ok_or_else(|| schema("", "$", "top level must be an object"))?;
        self.count_unknown(obj, &["documents"]);
        let docs = obj
            .get("documents")
            .ok_or_else(|| schema("", "documents", "missing required field"))?
            .as_array()
            .ok_or_else(|| schema("", "documents", "must be an array"))?;

        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(docs.len());
        for (di, doc) in docs.iter().enumerate() {
            let parsed = self.document(di, doc)?;
            if !seen.insert(parsed.doc_id.clone()) {
                return Err(IngestError::DuplicateDocId(parsed.doc_id));
            }
            out.push(parsed);
        }
        Ok(out)
    }

    fn document(&mut self, index: usize, doc: &Value) -> Result<DocumentExtraction, IngestError> {
        let fallback = format!("documents[{index}]");
        let obj = doc
            .as_object()
            .ok_or_else(|| schema(&fallback, "$", "document must be an object"))?;
        self.count_unknown(obj, &["id", "groups"]);
        let doc_id = match obj.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(schema(&fallback, "id", "must be a string")),
            None => return Err(schema(&fallback, "id", "missing required field")),
        };
        let groups = match obj.get("groups") {
            Some(Value::Array(groups)) => groups,
            Some(_) => return Err(schema(&doc_id, "groups", "must be an array")),
            None => return Err(schema(&doc_id, "groups", "missing required field")),
        };
        let mut parsed = Vec::with_capacity(groups.len());
        for (gi, group) in groups.iter().enumerate() {
            parsed.push(self.group(&doc_id, gi, group)?);
        }
        Ok(DocumentExtraction::new(doc_id, parsed))
    }

    fn group(&mut self, doc_id: &str, gi: usize, group: &Value) -> Result<EntityGroup, IngestError> {
        let at = |f: &str| format!("groups[{gi}]{f}");
        let obj = group
            .as_object()
            .ok_or_else(|| schema(doc_id, at(""), "group must be an object"))?;
        self.count_unknown(obj, &["group_type", "entities"]);
        let entities = match obj.get("entities") {
            Some(Value::Array(list)) => list
                .iter()
                .enumerate()
                .map(|(ei, e)| self.entity(doc_id, gi, ei, e))
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(schema(doc_id, at(".entities"), "must be an array")),
            None => return Err(schema(doc_id, at(".entities"), "missing required field")),
        };
        let group_type = match obj.get("group_type") {
            Some(Value::Null) => GroupType::NonGroup,
            Some(Value::String(s)) => GroupType::Named(s.clone()),
            Some(_) => return Err(schema(doc_id, at(".group_type"), "must be a string or null")),
            None if self.config.infer_group_type => infer_group_type(&entities),
            None => GroupType::NonGroup,
        };
        if let GroupType::Named(name) = &group_type {
            if entities.is_empty() {
                return Err(schema(doc_id, at(""), format!("group '{name}' has no entities")));
            }
        }
        Ok(EntityGroup::new(group_type, entities))
    }

    fn entity(&mut self, doc_id: &str, gi: usize, ei: usize, entity: &Value) -> Result<ExtractedEntity, IngestError> {
        let at = |f: &str| format!("groups[{gi}].entities[{ei}]{f}");
        let obj = entity
            .as_object()
            .ok_or_else(|| schema(doc_id, at(""), "entity must be an object"))?;
        self.count_unknown(obj, &["type", "value", "confidence"]);
        let entity_type = match obj.get("type") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(schema(doc_id, at(".type"), "must be a string")),
            None => return Err(schema(doc_id, at(".type"), "missing required field")),
        };
        let value = match obj.get("value") {
            Some(Value::String(s)) => self.config.normalization.apply(s),
            Some(_) => return Err(schema(doc_id, at(".value"), "must be a string")),
            None => return Err(schema(doc_id, at(".value"), "missing required field")),
        };
        let confidence = match obj.get("confidence") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(_) => return Err(schema(doc_id, at(".confidence"), "must be a number")),
        };
        Ok(ExtractedEntity {
            entity_type,
            value,
            confidence,
        })
    }
}

/// Shared prefix before the first '.', when every entity has the same one.
fn infer_group_type(entities: &[ExtractedEntity]) -> GroupType {
    let mut prefixes = entities.iter().map(|e| e.entity_type.split_once('.').map(|(p, _)| p));
    match prefixes.next() {
        Some(Some(first)) if !first.is_empty() && prefixes.all(|p| p == Some(first)) => GroupType::named(first),
        _ => GroupType::NonGroup,
    }
}

/// Serializes documents back into the dataset schema.
pub fn write_dataset(documents: &[DocumentExtraction]) -> String {
    let docs: Vec<Value> = documents
        .iter()
        .map(|doc| {
            let groups: Vec<Value> = doc
                .groups
                .iter()
                .map(|g| {
                    let entities: Vec<Value> = g
                        .entities
                        .iter()
                        .map(|e| {
                            let mut m = Map::new();
                            m.insert("type".into(), Value::from(e.entity_type.clone()));
                            m.insert("value".into(), Value::from(e.value.clone()));
                            if let Some(c) = e.confidence {
                                m.insert("confidence".into(), Value::from(c));
                            }
                            Value::Object(m)
                        })
                        .collect();
                    serde_json::json!({
                        "group_type": g.group_type.as_label(),
                        "entities": entities,
                    })
                })
                .collect();
            serde_json::json!({ "id": doc.doc_id, "groups": groups })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "documents": docs }))
        .expect("dataset JSON is always serializable")
}

/// A ground-truth document and its prediction counterpart.
#[derive(Debug, Clone)]
pub struct DocPair<'a> {
    pub doc_id: String,
    pub gt: Cow<'a, DocumentExtraction>,
    pub pred: Cow<'a, DocumentExtraction>,
}

/// Pairs documents by id: ground-truth order first, then prediction-only ids
/// in prediction order.
pub fn pair_documents<'a>(
    gt: &'a DatasetFile,
    pred: &'a DatasetFile,
    config: &EvalConfig,
) -> Result<Vec<DocPair<'a>>, IngestError> {
    let pred_by_id: HashMap<&str, &DocumentExtraction> =
        pred.documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let gt_ids: HashSet<&str> = gt.documents.iter().map(|d| d.doc_id.as_str()).collect();

    let missing_in_pred: Vec<String> = gt
        .documents
        .iter()
        .filter(|d| !pred_by_id.contains_key(d.doc_id.as_str()))
        .map(|d| d.doc_id.clone())
        .collect();
    let missing_in_gt: Vec<&DocumentExtraction> = pred
        .documents
        .iter()
        .filter(|d| !gt_ids.contains(d.doc_id.as_str()))
        .collect();

    if config.missing_doc_policy == MissingDocPolicy::Error
        && (!missing_in_pred.is_empty() || !missing_in_gt.is_empty())
    {
        return Err(IngestError::Unpaired {
            missing_in_pred,
            missing_in_gt: missing_in_gt.iter().map(|d| d.doc_id.clone()).collect(),
        });
    }

    let mut pairs: Vec<DocPair<'a>> = gt
        .documents
        .iter()
        .map(|g| DocPair {
            doc_id: g.doc_id.clone(),
            gt: Cow::Borrowed(g),
            pred: match pred_by_id.get(g.doc_id.as_str()) {
                Some(p) => Cow::Borrowed(*p),
                None => Cow::Owned(DocumentExtraction::empty(g.doc_id.clone())),
            },
        })
        .collect();
    pairs.extend(missing_in_gt.into_iter().map(|p| DocPair {
        doc_id: p.doc_id.clone(),
        gt: Cow::Owned(DocumentExtraction::empty(p.doc_id.clone())),
        pred: Cow::Borrowed(p),
    }));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Normalization;

    fn parse(json: &str, config: &EvalConfig) -> Result<DatasetFile, IngestError> {
        parse_dataset(json.as_bytes(), config)
    }

    #[test]
    fn trim_normalization_strips_whitespace() {
        let config = EvalConfig {
            normalization: Normalization::Trim,
            ..EvalConfig::default()
        };
        let file = parse(
            r#"{"documents":[{"id":"a","groups":[{"group_type":"menu","entities":[{"type":"menu.nm","value":" LATTE "}]}]}]}"#,
            &config,
        )
        .unwrap();
        assert_eq!(file.documents[0].groups[1].entities[0].value, "LATTE");
    }

    #[test]
    fn grouped_only_document_gets_empty_bucket() {
        let file = parse(
            r#"{"documents":[{"id":"a","groups":[{"group_type":"menu","entities":[{"type":"menu.nm","value":"X"}]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap();
        let doc = &file.documents[0];
        assert!(doc.groups[0].group_type.is_nongroup());
        assert!(doc.groups[0].is_empty());
    }

    #[test]
    fn same_typed_groups_stay_distinct_and_ordered() {
        let file = parse(
            r#"{"documents":[{"id":"a","groups":[
                {"group_type":"menu","entities":[{"type":"menu.nm","value":"FIRST"}]},
                {"group_type":"menu","entities":[{"type":"menu.nm","value":"SECOND"}]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap();
        let doc = &file.documents[0];
        assert_eq!(doc.groups.len(), 3);
        assert_eq!(doc.groups[1].entities[0].value, "FIRST");
        assert_eq!(doc.groups[2].entities[0].value, "SECOND");
    }

    #[test]
    fn ungrouped_entities_merge_in_file_order() {
        let file = parse(
            r#"{"documents":[{"id":"a","groups":[
                {"group_type":null,"entities":[{"type":"a","value":"1"}]},
                {"group_type":"menu","entities":[{"type":"menu.nm","value":"X"}]},
                {"entities":[{"type":"b","value":"2"}]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap();
        let bucket: Vec<_> = file.documents[0].groups[0]
            .entities
            .iter()
            .map(|e| e.entity_type.as_str())
            .collect();
        assert_eq!(bucket, ["a", "b"]);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse("{\"documents\": [\n  {\"id\": }\n]}", &EvalConfig::default()).unwrap_err();
        match err {
            IngestError::Json { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_error_names_document_and_field() {
        let err = parse(
            r#"{"documents":[{"id":"r7","groups":[{"group_type":null,"entities":[{"type":"x"}]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("r7"), "{msg}");
        assert!(msg.contains("groups[0].entities[0].value"), "{msg}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = parse(
            r#"{"documents":[{"id":"a","groups":[]},{"id":"a","groups":[]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::DuplicateDocId(id) if id == "a"));
    }

    #[test]
    fn empty_named_group_is_rejected() {
        let err = parse(
            r#"{"documents":[{"id":"a","groups":[{"group_type":"menu","entities":[]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, IngestError::Schema { .. }));
    }

    #[test]
    fn unknown_fields_are_counted() {
        let file = parse(
            r#"{"version":1,"documents":[{"id":"a","meta":{},"groups":[{"group_type":null,"bbox":[],"entities":[{"type":"t","value":"v","score":1}]}]}]}"#,
            &EvalConfig::default(),
        )
        .unwrap();
        assert_eq!(file.unknown_fields, 4);
    }

    #[test]
    fn group_type_inference_needs_the_flag() {
        let json = r#"{"documents":[{"id":"a","groups":[
            {"entities":[{"type":"menu.nm","value":"X"},{"type":"menu.price","value":"1"}]},
            {"group_type":null,"entities":[{"type":"store.name","value":"S"}]}]}]}"#;
        let plain = parse(json, &EvalConfig::default()).unwrap();
        assert_eq!(plain.documents[0].groups.len(), 1);

        let config = EvalConfig {
            infer_group_type: true,
            ..EvalConfig::default()
        };
        let inferred = parse(json, &config).unwrap();
        let doc = &inferred.documents[0];
        assert_eq!(doc.groups.len(), 2);
        assert_eq!(doc.groups[1].group_type, GroupType::named("menu"));
        // explicit null keeps the entity ungrouped
        assert_eq!(doc.groups[0].entities[0].entity_type, "store.name");
    }

    #[test]
    fn mixed_prefixes_are_not_inferred() {
        let e = |t: &str| ExtractedEntity::new(t, "v");
        assert_eq!(infer_group_type(&[e("menu.nm"), e("total.price")]), GroupType::NonGroup);
        assert_eq!(infer_group_type(&[e("plain")]), GroupType::NonGroup);
        assert_eq!(infer_group_type(&[]), GroupType::NonGroup);
    }

    fn ids(json_ids: &[&str]) -> DatasetFile {
        DatasetFile {
            documents: json_ids.iter().map(|id| DocumentExtraction::empty(*id)).collect(),
            source_path: String::new(),
            unknown_fields: 0,
        }
    }

    #[test]
    fn pairing_by_id() {
        let gt = ids(&["a", "b"]);
        let pred = ids(&["b", "a"]);
        let pairs = pair_documents(&gt, &pred, &EvalConfig::default()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].doc_id, "a");
        assert_eq!(pairs[0].pred.doc_id, "a");
    }

    #[test]
    fn missing_prediction_becomes_empty_under_empty_policy() {
        let gt = ids(&["a", "b"]);
        let pred = ids(&["a"]);
        let config = EvalConfig {
            missing_doc_policy: MissingDocPolicy::TreatAsEmpty,
            ..EvalConfig::default()
        };
        let pairs = pair_documents(&gt, &pred, &config).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[1].pred.entity_count(), 0);
        assert!(matches!(pairs[1].pred, Cow::Owned(_)));
    }

    #[test]
    fn unpaired_prediction_errors_under_error_policy() {
        let gt = ids(&["a"]);
        let pred = ids(&["a", "c"]);
        let err = pair_documents(&gt, &pred, &EvalConfig::default()).unwrap_err();
        assert!(err.to_string().contains('c'), "{err}");
        match err {
            IngestError::Unpaired { missing_in_gt, .. } => assert_eq!(missing_in_gt, ["c"]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
