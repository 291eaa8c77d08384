mod common;

use std::fs;

use common::{data, lincoln};
use metaqa::assets::{load_embeddings, load_unigrams};
use metaqa::io::{load_store, read_corpus, save_store, write_corpus, IoError};
use metaqa_core::MergeMode;

#[test]
fn empty_corpus_reads_as_empty() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    fs::write(&p, "").unwrap();
    assert!(read_corpus(&p).unwrap().is_empty());
    fs::write(&p, "\n  \n").unwrap();
    assert!(read_corpus(&p).unwrap().is_empty());
}

#[test]
fn lincoln_record_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    write_corpus(&p, &[lincoln()]).unwrap();
    let back = read_corpus(&p).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].tokens.len(), 10);
    assert_eq!(back[0], lincoln());
}

#[test]
fn dependency_cycle_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    let good = serde_json::to_string(&lincoln()).unwrap();
    let mut bad = lincoln();
    bad.id = "cyclic".into();
    bad.dep_heads[0] = 1;
    bad.dep_heads[1] = 0;
    bad.dep_heads[2] = 0;
    let bad = serde_json::to_string(&bad).unwrap();
    fs::write(&p, format!("{good}\n{bad}\n")).unwrap();
    match read_corpus(&p).unwrap_err() {
        IoError::Invalid { line, id, violations, .. } => {
            assert_eq!(line, 2);
            assert_eq!(id, "cyclic");
            assert!(violations.contains("not a tree"), "{violations}");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn malformed_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    let good = serde_json::to_string(&lincoln()).unwrap();
    fs::write(&p, format!("{good}\n\n{{\"id\": 3\n")).unwrap();
    let e = read_corpus(&p).unwrap_err();
    assert!(matches!(e, IoError::Record { line: 3, .. }), "{e}");
    assert!(e.to_string().contains(":3:"));
}

#[test]
fn missing_file_is_a_file_error() {
    let e = read_corpus(std::path::Path::new("/nonexistent/c.jsonl")).unwrap_err();
    assert!(matches!(e, IoError::File { .. }));
}

#[test]
fn store_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("store.json");
    let store = common::example_store(MergeMode::Ideal);
    save_store(&p, &store).unwrap();
    let back = load_store(&p).unwrap();
    assert_eq!(back, store);
    assert_eq!(back.version(), store.version());
}

#[test]
fn truncated_store_reports_byte_offset() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("store.json");
    save_store(&p, &common::example_store(MergeMode::Ideal)).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    let cut = text.len() / 2;
    fs::write(&p, &text[..cut]).unwrap();
    match load_store(&p).unwrap_err() {
        IoError::Document { offset, .. } => assert!(offset <= cut && offset + 2 >= cut, "offset {offset} cut {cut}"),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn unknown_format_version_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("store.json");
    fs::write(&p, r#"{"format_version": 9, "store_version": 0, "pairs": []}"#).unwrap();
    assert!(matches!(load_store(&p).unwrap_err(), IoError::FormatVersion { found: 9, .. }));
}

#[test]
fn embeddings_do_not_depend_on_line_order() {
    let text = fs::read_to_string(data("embeddings.txt")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.txt");
    fs::write(&p, format!("{header}\n{}\n", lines.join("\n"))).unwrap();
    let a = load_embeddings(&data("embeddings.txt")).unwrap();
    let b = load_embeddings(&p).unwrap();
    for (x, y) in [("door", "driveway"), ("news", "breaking news"), ("knowledge", "wisdom")] {
        assert_eq!(a.similarity(x, y).unwrap(), b.similarity(x, y).unwrap());
    }
    assert_eq!(a.neighbors("door", 0.6, 0.85).unwrap(), b.neighbors("door", 0.6, 0.85).unwrap());
}

#[test]
fn embedding_count_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.txt");
    fs::write(&p, "3 2\na 1 0\nb 0 1\n").unwrap();
    let e = load_embeddings(&p).unwrap_err();
    assert!(e.to_string().contains("announces 3"), "{e}");
}

#[test]
fn unigrams_skip_comments() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.tsv");
    fs::write(&p, "# word prob\npeople\t0.002\n\nstuff 0.0017\n").unwrap();
    let t = load_unigrams(&p).unwrap();
    assert_eq!(t.prob("people"), 0.002);
    assert_eq!(t.prob("stuff"), 0.0017);
    fs::write(&p, "people\tmany\n").unwrap();
    assert!(load_unigrams(&p).unwrap_err().to_string().contains(":1:"));
}
