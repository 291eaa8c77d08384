//! Loaders for the lexical resources: word vectors, the lexical graph,
//! unigram probabilities and the entity knowledge base.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use metaqa_core::distractor::Resources;
use metaqa_core::resources::{EmbeddingTable, EntityKb, LexicalGraph, LexicalGraphData, UnigramTable};

use crate::io::{read_document, IoError};

/// Text vectors: a `count dim` header, then `word v1 .. vdim` per line.
/// Underscores in words stand for spaces.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, IoError> {
    let f = fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| IoError::file(path, e))?
        .ok_or_else(|| IoError::record(path, 1, "missing header"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| IoError::record(path, 1, format!("bad header {header:?}")))?;
    let [count, dim] = nums[..] else {
        return Err(IoError::record(path, 1, "header must be \"count dim\""));
    };
    let mut table = EmbeddingTable::new(dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| IoError::file(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default().replace('_', " ");
        let v: Vec<f64> = parts
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::record(path, lineno, format!("bad number: {e}")))?;
        table
            .insert(&word, v)
            .map_err(|e| IoError::record(path, lineno, e.to_string()))?;
    }
    if table.len() != count {
        return Err(IoError::record(
            path,
            1,
            format!("header announces {count} vectors, file has {}", table.len()),
        ));
    }
    Ok(table)
}

pub fn load_lexicon(path: &Path) -> Result<LexicalGraph, IoError> {
    let data: LexicalGraphData = read_document(path)?;
    LexicalGraph::new(data).map_err(|e| IoError::record(path, 0, e.to_string()))
}

/// Two columns, word and probability, separated by whitespace.
pub fn load_unigrams(path: &Path) -> Result<UnigramTable, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let mut table = UnigramTable::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, prob) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| IoError::record(path, i + 1, "expected \"word probability\""))?;
        let prob: f64 = prob
            .trim()
            .parse()
            .map_err(|e| IoError::record(path, i + 1, format!("bad probability: {e}")))?;
        table
            .insert(word.trim(), prob)
            .map_err(|e| IoError::record(path, i + 1, e.to_string()))?;
    }
    Ok(table)
}

pub fn load_kb(path: &Path) -> Result<EntityKb, IoError> {
    read_document(path)
}

/// Everything the distractor stage reads, loaded once.
#[derive(Debug, Clone)]
pub struct Assets {
    pub embeddings: EmbeddingTable,
    pub lexicon: LexicalGraph,
    pub kb: EntityKb,
}

impl Assets {
    pub fn load(embeddings: &Path, lexicon: &Path, kb: &Path) -> Result<Self, IoError> {
        Ok(Assets {
            embeddings: load_embeddings(embeddings)?,
            lexicon: load_lexicon(lexicon)?,
            kb: load_kb(kb)?,
        })
    }

    pub fn view(&self) -> Resources<'_> {
        Resources {
            embeddings: &self.embeddings,
            lexicon: &self.lexicon,
            kb: &self.kb,
        }
    }
}
