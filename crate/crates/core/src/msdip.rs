//! The store of (declarative, interrogative) meta-sequence pairs and the
//! routine that learns new pairs from a sentence and its question.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::TaggedSentence;
use crate::metaseq::{self, MergeMode, MetaSeqError, MetaSequence};
use crate::preprocess::{segment, strip_leading_conjunction, SimpleSentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Seed,
    Taught,
    Imported,
}

/// One MD with all the MIs learned for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsdipPair {
    pub md: MetaSequence,
    pub mis: Vec<MetaSequence>,
    pub origin: Origin,
    /// Unix seconds when the MD was first stored.
    pub created_at: u64,
}

/// MD encoding -> pair. Every change bumps `version`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MsdipStore {
    pairs: BTreeMap<String, MsdipPair>,
    version: u64,
}

impl MsdipStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a store from saved pairs, keeping the saved version.
    pub fn from_pairs(pairs: Vec<MsdipPair>, version: u64) -> Self {
        let mut store = MsdipStore::default();
        for p in pairs {
            for mi in &p.mis {
                store.insert(&p.md, mi, p.origin, p.created_at);
            }
        }
        store.version = version;
        store
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Number of distinct MDs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of (MD, MI) pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs.values().map(|p| p.mis.len()).sum()
    }

    pub fn get(&self, md: &MetaSequence) -> Option<&MsdipPair> {
        self.pairs.get(&md.encode())
    }

    /// Pairs in MD-encoding order.
    pub fn iter(&self) -> impl Iterator<Item = &MsdipPair> {
        self.pairs.values()
    }

    pub fn mds(&self) -> impl Iterator<Item = &MetaSequence> {
        self.pairs.values().map(|p| &p.md)
    }

    /// Adds `mi` under `md`. Returns `false` if the pair was already there.
    pub fn insert(&mut self, md: &MetaSequence, mi: &MetaSequence, origin: Origin, now: u64) -> bool {
        let entry = self.pairs.entry(md.encode()).or_insert_with(|| MsdipPair {
            md: md.clone(),
            mis: Vec::new(),
            origin,
            created_at: now,
        });
        let key = mi.encode();
        if entry.mis.iter().any(|m| m.encode() == key) {
            return false;
        }
        entry.mis.push(mi.clone());
        self.version += 1;
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("declarative sentence has no main clause with subject and object")]
    NoMainClause,
    #[error("question has no predicate frame")]
    NoQuestionFrame,
    #[error("question meta sequence has no interrogative pronoun")]
    NoPronoun,
    #[error("declarative meta sequence has {0} elements, need at least 3")]
    TooShort(usize),
    #[error("declarative: {0}")]
    Declarative(MetaSeqError),
    #[error("question: {0}")]
    Question(MetaSeqError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Learned {
    pub md: MetaSequence,
    pub mi: MetaSequence,
    /// `false` when the store already had the pair.
    pub added: bool,
}

/// The clause a declarative sentence contributes: its first main clause with
/// leading conjunctions removed.
pub fn main_clause(s: &TaggedSentence) -> Option<SimpleSentence> {
    let seg = segment(s);
    let clause = seg
        .clauses
        .iter()
        .find(|c| c.clause_role == "MAIN")
        .or_else(|| seg.clauses.first())?;
    Some(strip_leading_conjunction(clause))
}

/// Builds MD and MI for a sentence/question pair and stores them.
pub fn learn(
    declarative: &TaggedSentence,
    question: &TaggedSentence,
    mode: MergeMode,
    store: &mut MsdipStore,
    origin: Origin,
    now: u64,
) -> Result<Learned, LearnError> {
    let clause = main_clause(declarative).ok_or(LearnError::NoMainClause)?;
    let (md, _) = metaseq::build(&clause, mode).map_err(LearnError::Declarative)?;
    learn_for_md(md, question, mode, store, origin, now)
}

/// Learns a question for an MD that is already built, such as the meta
/// sequence of a clause a teacher was asked about.
pub fn learn_for_md(
    md: MetaSequence,
    question: &TaggedSentence,
    mode: MergeMode,
    store: &mut MsdipStore,
    origin: Origin,
    now: u64,
) -> Result<Learned, LearnError> {
    if md.len() < 3 {
        return Err(LearnError::TooShort(md.len()));
    }
    let q = SimpleSentence::whole(question).ok_or(LearnError::NoQuestionFrame)?;
    let (mi, _) = metaseq::build(&q, mode).map_err(LearnError::Question)?;
    if !mi.has_pronoun() {
        return Err(LearnError::NoPronoun);
    }
    let added = store.insert(&md, &mi, origin, now);
    Ok(Learned { md, mi, added })
}
