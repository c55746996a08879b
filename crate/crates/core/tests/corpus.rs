mod common;

use std::fs;

use binder::io::{expand_glob, parse_document, parse_document_str, run_check, run_corpus, CheckOptions, ErrorCode};

use common::corpus_dir;

#[test]
fn shipped_corpus_passes() {
    let s = run_corpus(corpus_dir().to_str().unwrap(), &CheckOptions::default()).unwrap();
    for f in &s.files {
        assert!(f.passed, "{}: {:?} {:?}", f.path, f.mismatches, f.error);
        assert!(f.cite.is_some(), "{} has no citation key", f.path);
    }
    assert_eq!(s.exit_code(), 0);
    for p in ["A", "Z", "B", "C"] {
        assert!(s.per_principle[p].pass > 0, "no judgments for principle {p}");
    }
}

#[test]
fn fixtures_round_trip() {
    for path in expand_glob(corpus_dir().to_str().unwrap()).unwrap() {
        let doc = parse_document(&path).unwrap();
        assert_eq!(parse_document_str(&doc.to_json()).unwrap(), doc, "{}", path.display());
    }
}

#[test]
fn one_inverted_star_gives_one_failure() {
    let dir = tempfile::tempdir().unwrap();
    for path in expand_glob(corpus_dir().to_str().unwrap()).unwrap() {
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    let target = dir.path().join("principle-b-him.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    let j = v["expected"]["judgments"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|j| j["anaphor"] == "him" && j["antecedent"] == "brother")
        .expect("starred judgment present");
    assert_eq!(j["ok"], false);
    j["ok"] = serde_json::Value::Bool(true);
    fs::write(&target, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let s = run_corpus(dir.path().to_str().unwrap(), &CheckOptions::default()).unwrap();
    let failed: Vec<_> = s.files.iter().filter(|f| !f.passed).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].path.ends_with("principle-b-him.json"));
    assert_eq!(failed[0].mismatches.len(), 1);
    assert_eq!(s.per_principle["B"].fail, 1);
    assert_eq!(s.exit_code(), 2);
}

#[test]
fn expectations_must_reference_declared_markers() {
    let text = fs::read_to_string(corpus_dir().join("principle-a-himself.json")).unwrap();
    let doc = parse_document_str(&text.replacen("\"antecedent\": \"x\"", "\"antecedent\": \"nobody\"", 1)).unwrap();
    let err = run_check(&doc, &CheckOptions::default()).unwrap_err();
    assert_eq!(err.code, ErrorCode::Ref);
    assert_eq!(err.token.as_deref(), Some("nobody"));
}

#[test]
fn invalid_structure_is_an_input_error() {
    let text = fs::read_to_string(corpus_dir().join("principle-a-himself.json")).unwrap();
    let doc = parse_document_str(&text.replacen("\"node\": \"np_anaphor\"", "\"node\": \"np_missing\"", 1)).unwrap();
    let err = run_check(&doc, &CheckOptions::default()).unwrap_err();
    assert_eq!(err.code, ErrorCode::Invalid);
    assert!(err.message.contains("np_missing"));
}
