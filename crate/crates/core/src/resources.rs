//! Lexical resources: word vectors, a hypernym taxonomy with Wu-Palmer
//! similarity, unigram probabilities, and entity buckets.
//!
//! Everything here is in-memory; the text and JSON loaders are in the
//! `metaqa` crate.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Similarity used when either word is missing from the taxonomy.
pub const WUP_FALLBACK: f64 = 0.1;

/// Neighbour interval used when none is configured.
pub const DEFAULT_INTERVAL: (f64, f64) = (0.6, 0.85);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResourceError {
    #[error("vector for {word:?} has dimension {got}, expected {expected}")]
    Dimension { word: String, expected: usize, got: usize },
    #[error("vectors differ in dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("zero vector")]
    ZeroVector,
    #[error("duplicate entry {0:?}")]
    Duplicate(String),
    #[error("{0:?} is not in the vocabulary")]
    Absent(String),
    #[error("probability {prob} for {word:?} is outside [0, 1]")]
    Probability { word: String, prob: f64 },
    #[error("unknown sense {0:?}")]
    UnknownSense(String),
    #[error("hypernym cycle through {0:?}")]
    Cycle(String),
    #[error("{pos} senses have {roots} roots, expected 1")]
    Roots { pos: String, roots: usize },
}

/// Cosine similarity of two vectors of equal dimension.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, ResourceError> {
    if a.len() != b.len() {
        return Err(ResourceError::DimensionMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(ResourceError::ZeroVector);
    }
    Ok((dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            index: BTreeMap::new(),
            data: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn insert(&mut self, word: &str, v: Vec<f64>) -> Result<(), ResourceError> {
        if v.len() != self.dim {
            return Err(ResourceError::Dimension {
                word: word.to_string(),
                expected: self.dim,
                got: v.len(),
            });
        }
        if self.index.contains_key(word) {
            return Err(ResourceError::Duplicate(word.to_string()));
        }
        self.index.insert(word.to_string(), self.data.len() / self.dim.max(1));
        self.data.extend(v);
        Ok(())
    }

    /// Exact lookup, then lower-cased lookup.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        let slot = self
            .index
            .get(word)
            .or_else(|| self.index.get(&word.to_lowercase()))?;
        Some(&self.data[slot * self.dim..(slot + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Vector for a word or phrase: the entry itself, else the mean of its
    /// words' vectors when all of them are known.
    pub fn phrase_vector(&self, text: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.get(text) {
            return Some(v.to_vec());
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() < 2 {
            return None;
        }
        let mut acc = vec![0.0; self.dim];
        for w in &words {
            for (a, x) in acc.iter_mut().zip(self.get(w)?) {
                *a += x;
            }
        }
        Some(acc.into_iter().map(|a| a / words.len() as f64).collect())
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, ResourceError> {
        let va = self.phrase_vector(a).ok_or_else(|| ResourceError::Absent(a.to_string()))?;
        let vb = self.phrase_vector(b).ok_or_else(|| ResourceError::Absent(b.to_string()))?;
        cosine(&va, &vb)
    }

    /// Words whose cosine with `word` lies in `[lo, hi]`, best first
    /// (ties by word). `word` itself is excluded.
    pub fn neighbors(&self, word: &str, lo: f64, hi: f64) -> Result<Vec<(String, f64)>, ResourceError> {
        let v = self.get(word).ok_or_else(|| ResourceError::Absent(word.to_string()))?;
        let own = self.index.get(word).or_else(|| self.index.get(&word.to_lowercase())).copied();
        let mut out = Vec::new();
        for (w, &slot) in &self.index {
            if Some(slot) == own {
                continue;
            }
            let u = &self.data[slot * self.dim..(slot + 1) * self.dim];
            let Ok(c) = cosine(v, u) else { continue };
            if c >= lo && c <= hi {
                out.push((w.clone(), c));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }
}

/// One sense (synset): a set of synonymous lemmas with a POS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sense {
    pub id: String,
    /// `n`, `v`, `a` or `r`.
    pub pos: String,
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalGraphData {
    pub senses: Vec<Sense>,
    /// `[child, parent]` sense ids.
    #[serde(default)]
    pub hypernyms: Vec<(String, String)>,
    /// `[word, word]` antonym pairs.
    #[serde(default)]
    pub antonyms: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalGraph {
    senses: Vec<Sense>,
    by_lemma: BTreeMap<String, Vec<usize>>,
    parents: Vec<Vec<usize>>,
    /// Shortest-path depth, root = 1.
    depth: Vec<usize>,
    antonyms: BTreeSet<(String, String)>,
}

impl LexicalGraph {
    /// Checks that hypernyms form an acyclic graph with one root per POS.
    pub fn new(data: LexicalGraphData) -> Result<Self, ResourceError> {
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, s) in data.senses.iter().enumerate() {
            if ids.insert(s.id.as_str(), i).is_some() {
                return Err(ResourceError::Duplicate(s.id.clone()));
            }
        }
        let n = data.senses.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (c, p) in &data.hypernyms {
            let ci = *ids.get(c.as_str()).ok_or_else(|| ResourceError::UnknownSense(c.clone()))?;
            let pi = *ids.get(p.as_str()).ok_or_else(|| ResourceError::UnknownSense(p.clone()))?;
            if !parents[ci].contains(&pi) {
                parents[ci].push(pi);
                children[pi].push(ci);
            }
        }

        let mut roots_per_pos: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, s) in data.senses.iter().enumerate() {
            *roots_per_pos.entry(s.pos.as_str()).or_insert(0) += usize::from(parents[i].is_empty());
        }
        if let Some((pos, &roots)) = roots_per_pos.iter().find(|(_, &r)| r != 1) {
            return Err(ResourceError::Roots { pos: pos.to_string(), roots });
        }

        // Kahn's algorithm doubles as the cycle check
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut depth = vec![0usize; n];
        for &r in &queue {
            depth[r] = 1;
        }
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &c in &children[v] {
                let d = depth[v] + 1;
                if depth[c] == 0 || d < depth[c] {
                    depth[c] = d;
                }
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if seen < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(ResourceError::Cycle(data.senses[stuck].id.clone()));
        }

        let mut by_lemma: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, s) in data.senses.iter().enumerate() {
            for l in &s.lemmas {
                by_lemma.entry(normalize_lemma(l)).or_default().push(i);
            }
        }
        let antonyms = data
            .antonyms
            .iter()
            .flat_map(|(a, b)| {
                let (a, b) = (normalize_lemma(a), normalize_lemma(b));
                [(a.clone(), b.clone()), (b, a)]
            })
            .collect();
        Ok(LexicalGraph {
            senses: data.senses,
            by_lemma,
            parents,
            depth,
            antonyms,
        })
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    fn senses_of(&self, word: &str, pos: Option<&str>) -> Vec<usize> {
        self.by_lemma
            .get(&normalize_lemma(word))
            .map(|v| {
                v.iter()
                    .copied()
                    .filter(|&i| pos.is_none_or(|p| self.senses[i].pos == p))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.by_lemma.contains_key(&normalize_lemma(word))
    }

    /// Ancestors of a sense (itself included) with their distance.
    fn ancestors(&self, s: usize) -> BTreeMap<usize, usize> {
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::from([(s, 0usize)]);
        while let Some((v, d)) = queue.pop_front() {
            if dist.contains_key(&v) {
                continue;
            }
            dist.insert(v, d);
            for &p in &self.parents[v] {
                queue.push_back((p, d + 1));
            }
        }
        dist
    }

    fn wup_senses(&self, a: usize, b: usize) -> Option<f64> {
        let (da, db) = (self.ancestors(a), self.ancestors(b));
        da.iter()
            .filter_map(|(l, &x)| {
                let y = *db.get(l)?;
                let dl = self.depth[*l] as f64;
                Some(2.0 * dl / (2.0 * dl + x as f64 + y as f64))
            })
            .max_by(f64::total_cmp)
    }

    /// Wu-Palmer similarity over noun senses (root depth 1), maximised over
    /// sense pairs; [`WUP_FALLBACK`] when either word has no noun sense.
    pub fn wup(&self, a: &str, b: &str) -> f64 {
        let (sa, sb) = (self.senses_of(a, Some("n")), self.senses_of(b, Some("n")));
        let mut best: Option<f64> = None;
        for &x in &sa {
            for &y in &sb {
                if let Some(s) = self.wup_senses(x, y) {
                    best = Some(best.map_or(s, |b: f64| b.max(s)));
                }
            }
        }
        best.unwrap_or(WUP_FALLBACK)
    }

    pub fn are_antonyms(&self, a: &str, b: &str) -> bool {
        self.antonyms
            .contains(&(normalize_lemma(a), normalize_lemma(b)))
    }

    pub fn antonyms_of(&self, word: &str) -> Vec<String> {
        let w = normalize_lemma(word);
        self.antonyms
            .iter()
            .filter(|(a, _)| *a == w)
            .map(|(_, b)| b.clone())
            .collect()
    }

    /// Lemmas of the direct hypernyms of `word`'s senses.
    pub fn hypernyms(&self, word: &str, pos: Option<&str>) -> Vec<String> {
        let mut out = BTreeSet::new();
        for s in self.senses_of(word, pos) {
            for &p in &self.parents[s] {
                out.extend(self.senses[p].lemmas.iter().map(|l| normalize_lemma(l)));
            }
        }
        out.into_iter().collect()
    }

    /// Lemmas sharing a sense with `word`, excluding it.
    pub fn synonyms(&self, word: &str, pos: Option<&str>) -> Vec<String> {
        let w = normalize_lemma(word);
        let mut out = BTreeSet::new();
        for s in self.senses_of(word, pos) {
            for l in &self.senses[s].lemmas {
                let l = normalize_lemma(l);
                if l != w {
                    out.insert(l);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Lemmas of sibling senses (sharing a direct hypernym), excluding the
    /// word's own senses.
    pub fn cohyponyms(&self, word: &str, pos: Option<&str>) -> Vec<String> {
        let own = self.senses_of(word, pos);
        let w = normalize_lemma(word);
        let mut out = BTreeSet::new();
        for &s in &own {
            for &p in &self.parents[s] {
                for (c, ps) in self.parents.iter().enumerate() {
                    if c != s && ps.contains(&p) && !own.contains(&c) {
                        for l in &self.senses[c].lemmas {
                            let l = normalize_lemma(l);
                            if l != w {
                                out.insert(l);
                            }
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

fn normalize_lemma(s: &str) -> String {
    s.trim().replace('_', " ").to_lowercase()
}

/// Word -> probability; absent words have probability 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnigramTable {
    probs: BTreeMap<String, f64>,
}

impl UnigramTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, prob: f64) -> Result<(), ResourceError> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(ResourceError::Probability {
                word: word.to_string(),
                prob,
            });
        }
        if self.probs.insert(word.to_lowercase(), prob).is_some() {
            return Err(ResourceError::Duplicate(word.to_string()));
        }
        Ok(())
    }

    pub fn prob(&self, word: &str) -> f64 {
        self.probs.get(&word.to_lowercase()).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub name: String,
    /// NE tag of the members (`PER`, `LOC`, `ORG`).
    pub tag: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityKb {
    pub buckets: Vec<Bucket>,
}

impl EntityKb {
    /// Buckets listing `entity` (case-insensitive).
    pub fn buckets_of(&self, entity: &str) -> Vec<&Bucket> {
        self.buckets
            .iter()
            .filter(|b| b.members.iter().any(|m| m.eq_ignore_ascii_case(entity)))
            .collect()
    }

    /// Other members of the buckets that list `entity`, in bucket order.
    pub fn peers(&self, entity: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for b in self.buckets_of(entity) {
            for m in &b.members {
                if !m.eq_ignore_ascii_case(entity) && !out.contains(&m.as_str()) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Members of every bucket with the given tag, excluding `entity`.
    pub fn same_tag(&self, tag: &str, entity: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for b in self.buckets.iter().filter(|b| b.tag == tag) {
            for m in &b.members {
                if !m.eq_ignore_ascii_case(entity) && !out.contains(&m.as_str()) {
                    out.push(m);
                }
            }
        }
        out
    }
}
