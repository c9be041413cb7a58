use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("kieval.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for needle in [
        "#ifndef KIEVAL_H",
        "typedef struct KievalDataset KievalDataset;",
        "typedef struct KievalReport KievalReport;",
        "KIEVAL_STATUS_OK = 0",
        "KIEVAL_STATUS_PANIC = 8",
        "KIEVAL_NORMALIZATION_TRIM_CASEFOLD = 3",
        "enum KievalStatus kieval_dataset_parse(const char *json,",
        "size_t kieval_dataset_len(const struct KievalDataset *dataset);",
        "void kieval_dataset_free(struct KievalDataset *dataset);",
        "enum KievalStatus kieval_evaluate(",
        "enum KievalStatus kieval_report_scores(",
        "enum KievalStatus kieval_report_counts(",
        "enum KievalStatus kieval_report_to_json(const struct KievalReport *report, char **out);",
        "void kieval_report_free(struct KievalReport *report);",
        "enum KievalStatus kieval_sweep(",
        "void kieval_string_free(char *s);",
        "const char *kieval_last_error_message(void);",
        "const char *kieval_version(void);",
    ] {
        assert!(text.contains(needle), "header lacks {needle:?}");
    }
}

const SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "kieval.h"

int main(void) {
    const char *gt = "{\"documents\":[{\"id\":\"d\",\"groups\":[{\"group_type\":\"menu\",\"entities\":[{\"type\":\"nm\",\"value\":\"LATTE\"},{\"type\":\"cnt\",\"value\":\"1\"}]}]}]}";
    const char *pred = "{\"documents\":[{\"id\":\"d\",\"groups\":[{\"group_type\":\"menu\",\"entities\":[{\"type\":\"nm\",\"value\":\"LATTE\"},{\"type\":\"cnt\",\"value\":\"2\"}]}]}]}";
    KievalDataset *g = NULL, *p = NULL;
    KievalReport *r = NULL;
    KievalScores s;
    KievalCounts c;
    if (kieval_dataset_parse(gt, NULL, &g) != KIEVAL_STATUS_OK) return 10;
    if (kieval_dataset_parse(pred, NULL, &p) != KIEVAL_STATUS_OK) return 11;
    if (kieval_evaluate(g, p, NULL, &r) != KIEVAL_STATUS_OK) return 12;
    if (kieval_report_scores(r, &s) != KIEVAL_STATUS_OK) return 13;
    if (kieval_report_counts(r, &c) != KIEVAL_STATUS_OK) return 14;
    if (kieval_dataset_parse("{", NULL, &g) != KIEVAL_STATUS_PARSE_ERROR) return 15;
    if (kieval_last_error_message() == NULL) return 16;
    printf("%zu %zu %.6f %d\n", c.tp, c.subs, s.kieval_aligned, (int)s.group_applicable);
    kieval_report_free(r);
    kieval_dataset_free(g);
    kieval_dataset_free(p);
    return 0;
}
"#;

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; header compile check not run");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, SMOKE).unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

/// Builds the static library with the same profile, then links and runs the
/// smoke program against it.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; link check not run");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let target_dir = profile_dir.parent().unwrap();
    let mut build = Command::new(env!("CARGO"));
    build
        .args(["build", "--quiet", "-p", "kieval-ffi", "--lib", "--target-dir"])
        .arg(target_dir)
        .current_dir(env!("CARGO_MANIFEST_DIR"));
    if profile_dir.file_name().is_some_and(|n| n == "release") {
        build.arg("--release");
    }
    assert!(build.status().unwrap().success(), "building the static library failed");
    let archive = profile_dir.join("libkieval_ffi.a");
    assert!(archive.exists(), "{} missing after build", archive.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, SMOKE).unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1 1 0.500000 1\n");
}
