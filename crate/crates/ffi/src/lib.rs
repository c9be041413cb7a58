//! C ABI over the kieval engine.
//!
//! Datasets and reports are opaque handles owned by the caller and released
//! with the matching `_free` function. Every entry point returns a
//! [`KievalStatus`]; on failure `kieval_last_error_message` describes the
//! problem for the calling thread. Strings returned by the library must be
//! released with `kieval_string_free`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use kieval::evaluate::{evaluate_pairs, match_pairs, EvaluateOptions};
use kieval::ingest::{pair_documents, parse_dataset, DatasetFile, IngestError};
use kieval::metrics::MetricReport;
use kieval::model::{validate_document, EvalConfig, MissingDocPolicy, Normalization, TauGrid};
use kieval::report::{render_json, RunManifest};
use kieval::rpa::{sweep, SweepError};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KievalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SchemaError = 4,
    UnpairedDocument = 5,
    MissingConfidence = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KievalNormalization {
    None = 0,
    Trim = 1,
    Casefold = 2,
    TrimCasefold = 3,
}

fn normalization(raw: u32) -> Result<Normalization, Failure> {
    const NONE: u32 = KievalNormalization::None as u32;
    const TRIM: u32 = KievalNormalization::Trim as u32;
    const CASEFOLD: u32 = KievalNormalization::Casefold as u32;
    const BOTH: u32 = KievalNormalization::TrimCasefold as u32;
    match raw {
        NONE => Ok(Normalization::None),
        TRIM => Ok(Normalization::Trim),
        CASEFOLD => Ok(Normalization::Casefold),
        BOTH => Ok(Normalization::TrimCasefold),
        other => Err(Failure(
            KievalStatus::InvalidArgument,
            format!("unknown normalization {other}"),
        )),
    }
}

/// Options for parsing a dataset.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KievalParseOptions {
    /// One of the `KievalNormalization` values.
    pub normalization: u32,
    /// Infer a missing `group_type` from a shared entity-type prefix.
    pub infer_group_type: bool,
}

/// Options for evaluation and sweeps.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KievalEvalOptions {
    /// Treat a document present on only one side as empty on the other
    /// instead of failing with `KIEVAL_STATUS_UNPAIRED_DOCUMENT`.
    pub missing_doc_empty: bool,
    /// Worker threads; 0 uses the default pool.
    pub threads: usize,
}

/// Headline scores. `kieval_group_f1` is meaningful only when
/// `group_applicable` is true.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KievalScores {
    pub legacy_entity_f1: f64,
    pub kieval_entity_f1: f64,
    pub kieval_group_f1: f64,
    pub group_applicable: bool,
    pub kieval_aligned: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KievalCounts {
    pub documents: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub subs: usize,
    pub add: usize,
    pub del: usize,
    pub error: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KievalSweepPoint {
    pub tau: f64,
    pub auto_rate: f64,
    pub kieval_aligned_tau: f64,
    pub reviewed: usize,
    pub subs_tau: usize,
    pub del_tau: usize,
    pub add: usize,
    pub n_pr_star: usize,
}

/// A parsed dataset.
pub struct KievalDataset {
    file: DatasetFile,
    config: EvalConfig,
}

/// The result of `kieval_evaluate`.
pub struct KievalReport {
    report: MetricReport,
    config: EvalConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(KievalStatus, String);

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KievalStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KievalStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            set_error(&format!("internal panic: {message}"));
            KievalStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KievalStatus::NullPointer, format!("{what} is null"))
}

fn ingest_failure(e: IngestError) -> Failure {
    let status = match e {
        IngestError::Json { .. } | IngestError::Io { .. } => KievalStatus::ParseError,
        IngestError::Schema { .. } | IngestError::DuplicateDocId(_) => KievalStatus::SchemaError,
        IngestError::Unpaired { .. } => KievalStatus::UnpairedDocument,
    };
    Failure(status, e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller promises `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn eval_config(gt: &KievalDataset, options: Option<&KievalEvalOptions>) -> EvalConfig {
    EvalConfig {
        missing_doc_policy: if options.is_some_and(|o| o.missing_doc_empty) {
            MissingDocPolicy::TreatAsEmpty
        } else {
            MissingDocPolicy::Error
        },
        ..gt.config.clone()
    }
}

fn threads(options: Option<&KievalEvalOptions>) -> Option<usize> {
    options.map(|o| o.threads).filter(|&t| t > 0)
}

/// Parses dataset JSON (NUL-terminated UTF-8). `options` may be null for the
/// defaults. On success `*out` owns a new dataset.
///
/// # Safety
/// `json` must be a valid NUL-terminated string, `options` null or valid,
/// and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn kieval_dataset_parse(
    json: *const c_char,
    options: *const KievalParseOptions,
    out: *mut *mut KievalDataset,
) -> KievalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| Failure(KievalStatus::InvalidUtf8, e.to_string()))?;
        // SAFETY: null or valid per the contract.
        let opts = unsafe { options.as_ref() };
        let config = EvalConfig {
            normalization: opts.map_or(Ok(Normalization::None), |o| normalization(o.normalization))?,
            infer_group_type: opts.is_some_and(|o| o.infer_group_type),
            ..EvalConfig::default()
        };
        let file = parse_dataset(text.as_bytes(), &config).map_err(ingest_failure)?;
        let violations: Vec<String> = file
            .documents
            .iter()
            .flat_map(validate_document)
            .map(|v| v.to_string())
            .collect();
        if !violations.is_empty() {
            return Err(Failure(KievalStatus::SchemaError, violations.join("\n")));
        }
        let handle = Box::into_raw(Box::new(KievalDataset { file, config }));
        // SAFETY: `out` checked non-null above.
        unsafe { *out = handle };
        Ok(())
    })
}

/// Number of documents in `dataset`; 0 for null.
///
/// # Safety
/// `dataset` must be null or a live handle from `kieval_dataset_parse`.
#[no_mangle]
pub unsafe extern "C" fn kieval_dataset_len(dataset: *const KievalDataset) -> usize {
    // SAFETY: null or live per the contract.
    unsafe { dataset.as_ref() }.map_or(0, |d| d.file.documents.len())
}

/// # Safety
/// `dataset` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn kieval_dataset_free(dataset: *mut KievalDataset) {
    if !dataset.is_null() {
        // SAFETY: created by Box::into_raw in kieval_dataset_parse.
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Evaluates `pred` against `gt`. Normalization settings are taken from `gt`.
/// `options` may be null. On success `*out` owns a new report.
///
/// # Safety
/// Dataset handles must be live, `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kieval_evaluate(
    gt: *const KievalDataset,
    pred: *const KievalDataset,
    options: *const KievalEvalOptions,
    out: *mut *mut KievalReport,
) -> KievalStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: null or live per the contract.
        let (gt, pred) = unsafe { (deref(gt, "gt")?, deref(pred, "pred")?) };
        // SAFETY: null or valid per the contract.
        let options = unsafe { options.as_ref() };
        let config = eval_config(gt, options);
        let pairs = pair_documents(&gt.file, &pred.file, &config).map_err(ingest_failure)?;
        let report = evaluate_pairs(
            &pairs,
            &EvaluateOptions {
                per_doc: true,
                threads: threads(options),
            },
        );
        let handle = Box::into_raw(Box::new(KievalReport { report, config }));
        // SAFETY: checked non-null above.
        unsafe { *out = handle };
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kieval_report_scores(report: *const KievalReport, out: *mut KievalScores) -> KievalStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let r = unsafe { deref(report, "report")? };
        if out.is_null() {
            return Err(null("out"));
        }
        let s = &r.report.scores;
        let scores = KievalScores {
            legacy_entity_f1: s.legacy_entity_f1.f1,
            kieval_entity_f1: s.kieval_entity_f1.f1,
            kieval_group_f1: s.kieval_group_f1.map_or(0.0, |g| g.f1),
            group_applicable: s.kieval_group_f1.is_some(),
            kieval_aligned: s.kieval_aligned,
        };
        // SAFETY: checked non-null above.
        unsafe { *out = scores };
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kieval_report_counts(report: *const KievalReport, out: *mut KievalCounts) -> KievalStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let r = unsafe { deref(report, "report")? };
        if out.is_null() {
            return Err(null("out"));
        }
        let c = r.report.counts.entity;
        let counts = KievalCounts {
            documents: r.report.documents,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            subs: c.subs,
            add: c.add,
            del: c.del,
            error: c.error(),
        };
        // SAFETY: checked non-null above.
        unsafe { *out = counts };
        Ok(())
    })
}

/// Full JSON report, per-document section included, without a timestamp.
/// Release the string with `kieval_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kieval_report_to_json(report: *const KievalReport, out: *mut *mut c_char) -> KievalStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let r = unsafe { deref(report, "report")? };
        if out.is_null() {
            return Err(null("out"));
        }
        let manifest = RunManifest::new(&r.config, Vec::new(), BTreeMap::new(), false);
        let text = render_json(&r.report, &manifest);
        let c = CString::new(text).map_err(|e| Failure(KievalStatus::InvalidUtf8, e.to_string()))?;
        // SAFETY: checked non-null above.
        unsafe { *out = c.into_raw() };
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn kieval_report_free(report: *mut KievalReport) {
    if !report.is_null() {
        // SAFETY: created by Box::into_raw in kieval_evaluate.
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Review sweep over the `n_taus` thresholds in `taus` (strictly increasing,
/// within [0, 1]). Writes `n_taus` points to `out_points`.
///
/// # Safety
/// Dataset handles must be live, `taus` readable and `out_points` writable
/// for `n_taus` elements, `options` null or valid.
#[no_mangle]
pub unsafe extern "C" fn kieval_sweep(
    gt: *const KievalDataset,
    pred: *const KievalDataset,
    options: *const KievalEvalOptions,
    taus: *const f64,
    n_taus: usize,
    out_points: *mut KievalSweepPoint,
) -> KievalStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let (gt, pred) = unsafe { (deref(gt, "gt")?, deref(pred, "pred")?) };
        if taus.is_null() {
            return Err(null("taus"));
        }
        if out_points.is_null() {
            return Err(null("out_points"));
        }
        // SAFETY: non-null and readable for n_taus elements per the contract.
        let values = unsafe { std::slice::from_raw_parts(taus, n_taus) }.to_vec();
        let grid = TauGrid::new(values).map_err(|e| Failure(KievalStatus::InvalidArgument, e.to_string()))?;
        // SAFETY: null or valid per the contract.
        let options = unsafe { options.as_ref() };
        let config = eval_config(gt, options);
        let pairs = pair_documents(&gt.file, &pred.file, &config).map_err(ingest_failure)?;
        let matches = match_pairs(&pairs, threads(options));
        let points = sweep(&matches, &grid).map_err(|e| match e {
            SweepError::MissingConfidence { .. } => Failure(KievalStatus::MissingConfidence, e.to_string()),
        })?;
        // SAFETY: non-null and writable for n_taus elements per the contract.
        let out = unsafe { std::slice::from_raw_parts_mut(out_points, n_taus) };
        for (slot, p) in out.iter_mut().zip(points) {
            *slot = KievalSweepPoint {
                tau: p.tau,
                auto_rate: p.auto_rate,
                kieval_aligned_tau: p.kieval_aligned_tau,
                reviewed: p.reviewed,
                subs_tau: p.subs_tau,
                del_tau: p.del_tau,
                add: p.add,
                n_pr_star: p.n_pr_star,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn kieval_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn kieval_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn kieval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, KievalStatus::Panic);
        // SAFETY: just set by guard on this thread.
        let msg = unsafe { CStr::from_ptr(kieval_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }

    #[test]
    fn success_clears_error() {
        let _ = guard(|| Err(null("x")));
        assert!(!kieval_last_error_message().is_null());
        assert_eq!(guard(|| Ok(())), KievalStatus::Ok);
        assert!(kieval_last_error_message().is_null());
    }

    #[test]
    fn version_is_crate_version() {
        // SAFETY: static NUL-terminated string.
        let v = unsafe { CStr::from_ptr(kieval_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
