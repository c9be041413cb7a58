use std::ffi::{CStr, CString};
use std::ptr;

use kieval::fixtures::fixture_file;
use kieval_ffi::*;

fn parse(json: &str) -> Result<*mut KievalDataset, (KievalStatus, String)> {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    // SAFETY: valid string, null options, writable out.
    let status = unsafe { kieval_dataset_parse(c.as_ptr(), ptr::null(), &mut out) };
    if status == KievalStatus::Ok {
        Ok(out)
    } else {
        Err((status, last_error()))
    }
}

fn last_error() -> String {
    let p = kieval_last_error_message();
    assert!(!p.is_null());
    // SAFETY: non-null pointer into the thread-local error slot.
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture(file: &str) -> *mut KievalDataset {
    parse(fixture_file(file).unwrap()).unwrap()
}

struct Pair {
    gt: *mut KievalDataset,
    pred: *mut KievalDataset,
}

impl Pair {
    fn new(gt: &str, pred: &str) -> Self {
        Self {
            gt: fixture(gt),
            pred: fixture(pred),
        }
    }

    fn evaluate(&self, options: Option<&KievalEvalOptions>) -> Result<*mut KievalReport, KievalStatus> {
        let mut report = ptr::null_mut();
        let opts = options.map_or(ptr::null(), |o| o as *const _);
        // SAFETY: live handles, writable out.
        let status = unsafe { kieval_evaluate(self.gt, self.pred, opts, &mut report) };
        if status == KievalStatus::Ok {
            Ok(report)
        } else {
            Err(status)
        }
    }
}

impl Drop for Pair {
    fn drop(&mut self) {
        // SAFETY: handles came from kieval_dataset_parse.
        unsafe {
            kieval_dataset_free(self.gt);
            kieval_dataset_free(self.pred);
        }
    }
}

#[test]
fn swap_scores_through_the_c_abi() {
    let pair = Pair::new("cord-mini.gt.json", "swap.pred.json");
    // SAFETY: live handle.
    assert_eq!(unsafe { kieval_dataset_len(pair.gt) }, 1);
    let report = pair.evaluate(None).unwrap();
    let mut scores = KievalScores::default();
    let mut counts = KievalCounts::default();
    // SAFETY: live report, writable outputs.
    unsafe {
        assert_eq!(kieval_report_scores(report, &mut scores), KievalStatus::Ok);
        assert_eq!(kieval_report_counts(report, &mut counts), KievalStatus::Ok);
    }
    assert_eq!(scores.legacy_entity_f1, 1.0);
    assert!((scores.kieval_entity_f1 - 10.0 / 14.0).abs() < 1e-12);
    assert!(scores.group_applicable);
    assert_eq!(scores.kieval_group_f1, 0.0);
    assert_eq!((counts.documents, counts.tp, counts.subs, counts.error), (1, 5, 2, 2));

    let mut json = ptr::null_mut();
    // SAFETY: live report, writable out; string released below.
    unsafe {
        assert_eq!(kieval_report_to_json(report, &mut json), KievalStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        kieval_string_free(json);
        kieval_report_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["manifest"]["timestamp"].is_null());
        assert_eq!(v["per_doc"][0]["doc_id"], "receipt-001");
    }
}

#[test]
fn group_free_data_flags_group_f1() {
    let pair = Pair::new("sroie.gt.json", "sroie.pred.json");
    let report = pair.evaluate(None).unwrap();
    let mut scores = KievalScores::default();
    // SAFETY: live report, writable out.
    unsafe {
        kieval_report_scores(report, &mut scores);
        kieval_report_free(report);
    }
    assert!(!scores.group_applicable);
    assert_eq!(scores.legacy_entity_f1, 0.75);
}

#[test]
fn sweep_fills_points() {
    let pair = Pair::new("cord-mini.gt.json", "wrong-value.pred.json");
    let taus = [0.0, 0.5, 1.0];
    let mut points = [KievalSweepPoint::default(); 3];
    // SAFETY: arrays sized to n_taus.
    let status = unsafe {
        kieval_sweep(
            pair.gt,
            pair.pred,
            ptr::null(),
            taus.as_ptr(),
            taus.len(),
            points.as_mut_ptr(),
        )
    };
    assert_eq!(status, KievalStatus::Ok);
    assert_eq!(points[1].tau, 0.5);
    assert_eq!(points[1].reviewed, 1);
    assert_eq!(points[1].kieval_aligned_tau, 1.0);
    assert_eq!(points[2].auto_rate, 0.0);

    let bad = [0.5, 0.2];
    // SAFETY: arrays sized to n_taus.
    let status = unsafe { kieval_sweep(pair.gt, pair.pred, ptr::null(), bad.as_ptr(), 2, points.as_mut_ptr()) };
    assert_eq!(status, KievalStatus::InvalidArgument);
}

#[test]
fn sweep_without_confidence_fails() {
    let pair = Pair::new("cord-mini.gt.json", "cord-mini.gt.json");
    let taus = [0.5];
    let mut points = [KievalSweepPoint::default(); 1];
    // SAFETY: arrays sized to n_taus.
    let status = unsafe { kieval_sweep(pair.gt, pair.pred, ptr::null(), taus.as_ptr(), 1, points.as_mut_ptr()) };
    assert_eq!(status, KievalStatus::MissingConfidence);
    assert!(last_error().contains("confidence"));
}

#[test]
fn unpaired_documents_follow_options() {
    let pair = Pair {
        gt: fixture("cord-mini.gt.json"),
        pred: fixture("sroie.pred.json"),
    };
    assert_eq!(pair.evaluate(None).unwrap_err(), KievalStatus::UnpairedDocument);
    assert!(last_error().contains("receipt-001"));
    let options = KievalEvalOptions {
        missing_doc_empty: true,
        threads: 2,
    };
    let report = pair.evaluate(Some(&options)).unwrap();
    let mut counts = KievalCounts::default();
    // SAFETY: live report, writable out.
    unsafe {
        kieval_report_counts(report, &mut counts);
        kieval_report_free(report);
    }
    assert_eq!(counts.documents, 2);
    assert_eq!(counts.tp, 0);
}

#[test]
fn parse_errors_map_to_status() {
    assert_eq!(parse("{").unwrap_err().0, KievalStatus::ParseError);
    assert_eq!(parse(r#"{"documents": 3}"#).unwrap_err().0, KievalStatus::SchemaError);
    let dup = r#"{"documents":[{"id":"a","groups":[]},{"id":"a","groups":[]}]}"#;
    assert_eq!(parse(dup).unwrap_err().0, KievalStatus::SchemaError);
    let range = r#"{"documents":[{"id":"a","groups":[{"group_type":null,"entities":[{"type":"t","value":"v","confidence":2}]}]}]}"#;
    let (status, message) = parse(range).unwrap_err();
    assert_eq!(status, KievalStatus::SchemaError);
    assert!(message.contains("confidence"), "{message}");
}

#[test]
fn invalid_utf8_and_nulls() {
    let bytes = [b'{', 0xff, b'}', 0];
    let mut out = ptr::null_mut();
    // SAFETY: NUL-terminated buffer.
    let status = unsafe { kieval_dataset_parse(bytes.as_ptr().cast(), ptr::null(), &mut out) };
    assert_eq!(status, KievalStatus::InvalidUtf8);
    // SAFETY: null pointers are rejected before any dereference.
    unsafe {
        assert_eq!(
            kieval_dataset_parse(ptr::null(), ptr::null(), &mut out),
            KievalStatus::NullPointer
        );
        let mut report = ptr::null_mut();
        assert_eq!(
            kieval_evaluate(ptr::null(), ptr::null(), ptr::null(), &mut report),
            KievalStatus::NullPointer
        );
        assert_eq!(
            kieval_report_scores(ptr::null(), ptr::null_mut()),
            KievalStatus::NullPointer
        );
        assert_eq!(kieval_dataset_len(ptr::null()), 0);
        kieval_dataset_free(ptr::null_mut());
        kieval_report_free(ptr::null_mut());
        kieval_string_free(ptr::null_mut());
    }
}

#[test]
fn normalization_option() {
    let gt = CString::new(
        r#"{"documents":[{"id":"d","groups":[{"group_type":null,"entities":[{"type":"t","value":" Cafe"}]}]}]}"#,
    )
    .unwrap();
    let pred = CString::new(
        r#"{"documents":[{"id":"d","groups":[{"group_type":null,"entities":[{"type":"t","value":"CAFE"}]}]}]}"#,
    )
    .unwrap();
    let options = KievalParseOptions {
        normalization: KievalNormalization::TrimCasefold as u32,
        infer_group_type: false,
    };
    let (mut g, mut p, mut r) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let mut scores = KievalScores::default();
    // SAFETY: valid strings and writable outs; handles freed at the end.
    unsafe {
        assert_eq!(kieval_dataset_parse(gt.as_ptr(), &options, &mut g), KievalStatus::Ok);
        assert_eq!(kieval_dataset_parse(pred.as_ptr(), &options, &mut p), KievalStatus::Ok);
        assert_eq!(kieval_evaluate(g, p, ptr::null(), &mut r), KievalStatus::Ok);
        kieval_report_scores(r, &mut scores);
        kieval_report_free(r);
        kieval_dataset_free(g);
        kieval_dataset_free(p);

        let bad = KievalParseOptions {
            normalization: 9,
            infer_group_type: false,
        };
        assert_eq!(
            kieval_dataset_parse(gt.as_ptr(), &bad, &mut g),
            KievalStatus::InvalidArgument
        );
    }
    assert_eq!(scores.kieval_entity_f1, 1.0);
}
