//! Line-delimited JSON corpora, the pattern-store document and the
//! external question format.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use metaqa_core::annotation::validate_sentence;
use metaqa_core::{MsdipPair, MsdipStore, TaggedSentence};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Record { path: PathBuf, line: usize, message: String },
    #[error("{}:{line}: sentence {id}: {violations}", path.display())]
    Invalid {
        path: PathBuf,
        line: usize,
        id: String,
        violations: String,
    },
    #[error("{}: malformed document at byte {offset}: {message}", path.display())]
    Document { path: PathBuf, offset: usize, message: String },
    #[error("{}: unsupported format_version {found} (expected {STORE_FORMAT_VERSION})", path.display())]
    FormatVersion { path: PathBuf, found: u32 },
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn record(path: &Path, line: usize, message: impl Into<String>) -> Self {
        IoError::Record {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

/// Reads one JSON value per non-blank line. Errors carry the 1-based line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    read_jsonl_lines(path).map(|v| v.into_iter().map(|(_, t)| t).collect())
}

fn read_jsonl_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, IoError> {
    let f = fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| IoError::file(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| IoError::record(path, i + 1, e.to_string()))?;
        out.push((i + 1, value));
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), IoError> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).expect("in-memory serialization");
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

/// Writes through a sibling temp file so readers never see half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| IoError::file(&tmp, e))?;
    f.write_all(bytes).map_err(|e| IoError::file(&tmp, e))?;
    f.sync_all().map_err(|e| IoError::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| IoError::file(path, e))
}

fn check(path: &Path, line: usize, s: &TaggedSentence) -> Result<(), IoError> {
    let v = validate_sentence(s);
    if v.is_empty() {
        return Ok(());
    }
    Err(IoError::Invalid {
        path: path.to_path_buf(),
        line,
        id: s.id.clone(),
        violations: v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
    })
}

/// Reads and validates a tagged-sentence corpus.
pub fn read_corpus(path: &Path) -> Result<Vec<TaggedSentence>, IoError> {
    let records: Vec<(usize, TaggedSentence)> = read_jsonl_lines(path)?;
    for (line, s) in &records {
        check(path, *line, s)?;
    }
    Ok(records.into_iter().map(|(_, s)| s).collect())
}

pub fn write_corpus(path: &Path, sentences: &[TaggedSentence]) -> Result<(), IoError> {
    write_jsonl(path, sentences)
}

/// A declarative sentence with its training questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub declarative: TaggedSentence,
    pub interrogatives: Vec<TaggedSentence>,
}

pub fn read_pairs(path: &Path) -> Result<Vec<PairRecord>, IoError> {
    let records: Vec<(usize, PairRecord)> = read_jsonl_lines(path)?;
    for (line, r) in &records {
        check(path, *line, &r.declarative)?;
        for q in &r.interrogatives {
            check(path, *line, q)?;
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreDocument {
    format_version: u32,
    store_version: u64,
    pairs: Vec<MsdipPair>,
}

pub fn store_to_json(store: &MsdipStore) -> String {
    let doc = StoreDocument {
        format_version: STORE_FORMAT_VERSION,
        store_version: store.version(),
        pairs: store.iter().cloned().collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("in-memory serialization");
    s.push('\n');
    s
}

pub fn save_store(path: &Path, store: &MsdipStore) -> Result<(), IoError> {
    write_atomic(path, store_to_json(store).as_bytes())
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub(crate) fn read_document<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Document {
        path: path.to_path_buf(),
        offset: byte_offset(&text, e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn load_store(path: &Path) -> Result<MsdipStore, IoError> {
    let doc: StoreDocument = read_document(path)?;
    if doc.format_version != STORE_FORMAT_VERSION {
        return Err(IoError::FormatVersion {
            path: path.to_path_buf(),
            found: doc.format_version,
        });
    }
    Ok(MsdipStore::from_pairs(doc.pairs, doc.store_version))
}

/// An empty store when the file does not exist yet.
pub fn load_store_or_empty(path: &Path) -> Result<MsdipStore, IoError> {
    if path.exists() {
        load_store(path)
    } else {
        Ok(MsdipStore::new())
    }
}

/// A question/answer pair from any upstream generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalQa {
    pub question: String,
    pub answer: String,
    pub article: String,
    pub sentence_ordinal: u32,
}

pub fn read_external(path: &Path) -> Result<Vec<ExternalQa>, IoError> {
    read_jsonl(path)
}
