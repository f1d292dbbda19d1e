use std::path::{Path, PathBuf};

use kstab_core::caserunner::{load_corpus, render_table, run_corpus, CorpusReport, Family, RunOptions, Verdict};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run(family: Option<Family>) -> CorpusReport {
    run_corpus(&corpus_dir(), family, RunOptions::default()).unwrap()
}

fn without_timing(report: &CorpusReport) -> String {
    let mut v = serde_json::to_value(report).unwrap();
    for c in v["cases"].as_array_mut().unwrap() {
        c.as_object_mut().unwrap().remove("elapsed_ms");
    }
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn whole_corpus_loads() {
    let (cases, failures) = load_corpus(&corpus_dir()).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    assert_eq!(cases.len(), 26);
    let ids: Vec<&str> = cases.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn family_filter() {
    assert_eq!(run(Some(Family::I)).cases.len(), 6);
    assert_eq!(run(Some(Family::II)).cases.len(), 14);
    let three = run(Some(Family::III));
    assert_eq!(three.cases.len(), 6);
    assert!(three.cases.iter().all(|c| c.family == "III"));
    assert_eq!(three.exit_code(), 0);
}

#[test]
fn verdicts_over_the_corpus() {
    let report = run(None);
    for c in &report.cases {
        let want = match c.id.as_str() {
            "I.dim1a.case2" => Verdict::Mismatch,
            "II.II1b.sweep" => Verdict::AnomalousInformational,
            _ => Verdict::Match,
        };
        assert_eq!(c.verdict, want, "{}: {:?}", c.id, c.computed);
    }
    assert_eq!(report.exit_code(), 1);
    let case2 = report.cases.iter().find(|c| c.id == "I.dim1a.case2").unwrap();
    assert_eq!(case2.computed["s_curve_second_term"], "73/132");
    assert_eq!(case2.computed["s_curve_total"], "39/44");
    let ii = report.cases.iter().find(|c| c.id == "II.II1a.case2").unwrap();
    assert_eq!(ii.computed["s_curve_total"], "183/352");
    assert_eq!(ii.printed["s_curve_total"], "182/352");
    assert_eq!(ii.printed["s_curve_total.reduced"], "91/176");
}

#[test]
fn reports_are_deterministic() {
    let a = run(None);
    let b = run(None);
    assert_eq!(without_timing(&a), without_timing(&b));
    let ids: Vec<&str> = a.cases.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for c in &a.cases {
        for v in c.computed.values().chain(c.expected.values()) {
            assert!(!v.contains('.'), "{}: {v}", c.id);
        }
    }
    assert!(render_table(&a).contains("I.dim1a.case2"));
}

fn copy_into(dir: &Path, rel: &str, name: &str) {
    std::fs::copy(corpus_dir().join(rel), dir.join(name)).unwrap();
}

#[test]
fn duplicate_ids_are_corpus_errors() {
    let tmp = tempfile::tempdir().unwrap();
    copy_into(tmp.path(), "III/F_beta.toml", "a.toml");
    copy_into(tmp.path(), "III/F_beta.toml", "b.toml");
    let report = run_corpus(tmp.path(), None, RunOptions::default()).unwrap();
    assert_eq!(report.load_failures.len(), 1);
    assert_eq!(report.load_failures[0].code, "duplicate-id");
    assert_eq!(report.exit_code(), 2);
}

#[test]
fn broken_files_are_corpus_errors() {
    let tmp = tempfile::tempdir().unwrap();
    copy_into(tmp.path(), "III/F_beta.toml", "ok.toml");
    std::fs::write(tmp.path().join("bad.toml"), "schema = 1\nid = \n").unwrap();
    std::fs::write(tmp.path().join("worse.toml"), "schema = 2\nid = \"x\"\n").unwrap();
    let report = run_corpus(tmp.path(), None, RunOptions::default()).unwrap();
    assert_eq!(report.cases.len(), 1);
    let codes: Vec<&str> = report.load_failures.iter().map(|f| f.code.as_str()).collect();
    assert_eq!(codes, ["parse", "schema"]);
    assert_eq!(report.exit_code(), 2);
}

#[test]
fn wrong_expectation_is_a_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus_dir().join("III/F_beta.toml")).unwrap();
    assert!(src.contains("\"5/22\""));
    std::fs::write(tmp.path().join("x.toml"), src.replace("\"5/22\"", "\"6/22\"")).unwrap();
    let report = run_corpus(tmp.path(), None, RunOptions::default()).unwrap();
    assert_eq!(report.cases[0].verdict, Verdict::Mismatch);
    assert_eq!(report.cases[0].failed, ["beta"]);
    assert_eq!(report.exit_code(), 1);
}
