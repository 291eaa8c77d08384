//! Question/answer synthesis from a matched (MD, MI) pair: builds the
//! target interrogative sequence, realizes its text, and extracts the
//! answer.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{Ssu, TaggedSentence};
use crate::matcher::{self, best_match, element_key, key_set, ssu_key, ElementKey, MatchKind};
use crate::metaseq::{self, MapEntry, MergeMode, MetaElement, MetaSequence, SsuTextMap};
use crate::msdip::MsdipStore;
use crate::preprocess::{segment, strip_leading_conjunction, SimpleSentence};
use crate::text::capitalize_first;

/// A generated question/answer pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qap {
    pub id: String,
    pub question: String,
    pub answer: String,
    /// Source sentence id.
    pub source: String,
    pub md: MetaSequence,
    pub mi_index: usize,
    pub match_kind: MatchKind,
    /// Answer token positions in the source sentence.
    #[serde(default)]
    pub answer_tokens: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QapError {
    #[error("no SSU of the sentence carries an answer role")]
    NoAnswer,
    #[error("synthesized question has no V-SSU")]
    NoVerb,
    #[error("cannot determine agreement: no subject SSU")]
    NoSubject,
    #[error("no text for {0}")]
    NoText(String),
    #[error("synthesized question does not satisfy the set identity")]
    SetIdentity,
}

/// Positions of X_s SSUs that form the answer.
///
/// Each SSU of `X' - Y'` selects the equivalent SSUs of `X_s`; one with no
/// equivalent selects the `X_s` SSUs that have its SR tag and are not in `Y'`.
pub fn answer_positions(x: &MetaSequence, y: &MetaSequence, xs: &MetaSequence) -> Vec<usize> {
    let y_keys = key_set(&y.elements);
    let asked: BTreeSet<ElementKey> = key_set(&x.elements).difference(&y_keys).cloned().collect();
    let mut picked = BTreeSet::new();
    for a in &asked {
        let exact: Vec<usize> = xs
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_pronoun() && &element_key(e) == a)
            .map(|(i, _)| i)
            .collect();
        if !exact.is_empty() {
            picked.extend(exact);
            continue;
        }
        let ElementKey::Unit { sr, .. } = a else { continue };
        picked.extend(xs.elements.iter().enumerate().filter_map(|(i, e)| {
            let u = e.ssu()?;
            (&u.sr == sr && !y_keys.contains(&ssu_key(u))).then_some(i)
        }));
    }
    picked.into_iter().collect()
}

/// Builds the interrogative sequence for `xs` from the pair (x, y) and the
/// common run `xs[z_start..z_start + z_len]`. Answer SSUs are left out.
pub fn synthesize_mi(
    x: &MetaSequence,
    y: &MetaSequence,
    xs: &MetaSequence,
    z_start: usize,
    z_len: usize,
) -> Result<MetaSequence, QapError> {
    let xs_keys = key_set(&xs.elements);
    let z_keys = key_set(&xs.elements[z_start..z_start + z_len]);
    let removed: BTreeSet<ElementKey> = key_set(&x.elements)
        .intersection(&key_set(&y.elements))
        .filter(|k| !xs_keys.contains(*k))
        .cloned()
        .collect();
    let answer: Vec<ElementKey> = answer_positions(x, y, xs)
        .into_iter()
        .map(|i| element_key(&xs.elements[i]))
        .collect();
    if answer.is_empty() {
        return Err(QapError::NoAnswer);
    }

    let mut out: Vec<MetaElement> = y
        .elements
        .iter()
        .filter(|e| e.is_pronoun() || !removed.contains(&element_key(e)))
        .cloned()
        .collect();
    if z_len < xs.len() {
        let after = &xs.elements[z_start + z_len..];
        let before = &xs.elements[..z_start];
        for e in after.iter().chain(before) {
            let k = element_key(e);
            let present = out.iter().any(|o| element_key(o) == k);
            if !present && !z_keys.contains(&k) {
                out.push(e.clone());
            }
        }
    }
    out.retain(|e| e.is_pronoun() || !answer.contains(&element_key(e)));

    if !out.iter().any(|e| e.ssu().is_some_and(Ssu::is_verb)) {
        return Err(QapError::NoVerb);
    }
    let ys = MetaSequence::new(out);

    // independent set-algebra check of the construction
    let y_keys = key_set(&y.elements);
    let mut expect: BTreeSet<ElementKey> = y_keys.difference(&removed).cloned().collect();
    expect.extend(xs_keys.difference(&z_keys).cloned());
    let expect: BTreeSet<ElementKey> = expect.into_iter().filter(|k| !answer.contains(k)).collect();
    if key_set(&ys.elements) != expect {
        return Err(QapError::SetIdentity);
    }
    Ok(ys)
}

/// Grammatical number of a subject, from its POS and text.
fn plural_subject(entry: &MapEntry) -> bool {
    match entry.ssu.pos.as_str() {
        "NNS" | "NNPS" => true,
        "PRP" => matches!(entry.text.to_lowercase().as_str(), "i" | "you" | "we" | "they"),
        _ => false,
    }
}

fn helping_verb(first_v_pos: &str, plural: bool) -> Option<&'static str> {
    match first_v_pos {
        "VBD" => Some("did"),
        "VBP" | "VBZ" if plural => Some("do"),
        "VBP" | "VBZ" => Some("does"),
        _ => None,
    }
}

/// Finds map text for the elements of `ys`, resolving a helping verb when
/// a V-SSU is later followed by a V/VB.
///
/// `skip` marks map entries that must not be used (answer SSUs).
pub fn resolve_helping_verbs(
    ys: &MetaSequence,
    map: &SsuTextMap,
    skip: &[usize],
) -> Result<Vec<String>, QapError> {
    let mut used: Vec<bool> = (0..map.entries.len()).map(|i| skip.contains(&i)).collect();

    let first_v = ys.elements.iter().position(|e| e.ssu().is_some_and(Ssu::is_verb));
    let base_v = first_v.and_then(|f| {
        ys.elements[f + 1..]
            .iter()
            .position(|e| e.ssu().is_some_and(|u| u.is_verb() && u.pos == "VB"))
            .map(|g| (f, f + 1 + g))
    });
    let helping = match base_v {
        Some((f, _)) => {
            let pos = ys.elements[f].ssu().map(|u| u.pos.clone()).unwrap_or_default();
            let subject = map
                .entries
                .iter()
                .take_while(|e| !e.ssu.is_verb())
                .filter(|e| e.ssu.arg_number().is_some())
                .last()
                .ok_or(QapError::NoSubject)?;
            helping_verb(&pos, plural_subject(subject))
        }
        None => None,
    };

    let mut out = Vec::with_capacity(ys.len());
    for (i, e) in ys.elements.iter().enumerate() {
        let u = match e {
            MetaElement::Pronoun(p) => {
                out.push(p.clone());
                continue;
            }
            MetaElement::Unit(u) => u,
        };
        if let (Some((f, g)), Some(h)) = (base_v, helping) {
            if i == f {
                out.push(h.to_string());
                continue;
            }
            if i == g {
                let verb = map
                    .entries
                    .iter()
                    .position(|m| m.ssu.is_verb() && m.ssu.pos != "VB")
                    .or_else(|| map.entries.iter().position(|m| m.ssu.is_verb()))
                    .ok_or_else(|| QapError::NoText(u.encode()))?;
                used[verb] = true;
                out.push(map.entries[verb].base_form.clone());
                continue;
            }
        }
        let slot = lookup(map, u, &used).ok_or_else(|| QapError::NoText(u.encode()))?;
        used[slot] = true;
        let entry = &map.entries[slot];
        out.push(if i == 0 { entry.text.clone() } else { entry.inner_text.clone() });
    }
    Ok(out)
}

/// Exact SSU, then an equivalent SSU, then the only unused entry with the
/// same SR tag.
fn lookup(map: &SsuTextMap, u: &Ssu, used: &[bool]) -> Option<usize> {
    let free = |i: &usize| !used[*i];
    let idx = 0..map.entries.len();
    idx.clone()
        .filter(free)
        .find(|&i| &map.entries[i].ssu == u)
        .or_else(|| idx.clone().filter(free).find(|&i| matcher::equivalent(&map.entries[i].ssu, u)))
        .or_else(|| {
            let same: Vec<usize> = idx.filter(free).filter(|&i| map.entries[i].ssu.sr == u.sr).collect();
            (same.len() == 1).then(|| same[0])
        })
}

/// Joins realized texts into a question sentence.
pub fn realize(parts: &[String]) -> String {
    let mut q = capitalize_first(parts.join(" ").trim());
    while q.ends_with(['.', ',', ';']) {
        q.pop();
    }
    q.push('?');
    q
}

/// Answer text and map entry positions.
pub fn extract_answer(
    x: &MetaSequence,
    y: &MetaSequence,
    xs: &MetaSequence,
    map: &SsuTextMap,
) -> Result<(String, Vec<usize>), QapError> {
    let positions = answer_positions(x, y, xs);
    if positions.is_empty() {
        return Err(QapError::NoAnswer);
    }
    let entries = map_positions(xs);
    let slots: Vec<usize> = positions.iter().filter_map(|&p| entries[p]).collect();
    let texts: Vec<&str> = slots.iter().map(|&s| map.entries[s].text.as_str()).collect();
    let mut answer = texts.join(" ");
    while answer.ends_with(['.', ',', ';']) {
        answer.pop();
    }
    Ok((answer, slots))
}

/// Map entry index for each element of a merged sequence.
fn map_positions(xs: &MetaSequence) -> Vec<Option<usize>> {
    let mut next = 0;
    xs.elements
        .iter()
        .map(|e| {
            e.ssu().map(|_| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// A clause the store could not handle well; a teacher may supply a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeachRequest {
    pub sentence_id: String,
    pub clause: String,
    pub xs: MetaSequence,
    pub best_md: Option<MetaSequence>,
    pub best_kind: Option<MatchKind>,
    /// Length of the longest common run with `best_md`.
    #[serde(default)]
    pub lcs_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub sentence_id: String,
    pub md: Option<MetaSequence>,
    pub mi_index: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    pub qaps: Vec<Qap>,
    pub teach_requests: Vec<TeachRequest>,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("the pattern store is empty")]
    EmptyStore,
}

/// Runs the full per-sentence pipeline against a store snapshot.
pub fn generate_qaps(
    s: &TaggedSentence,
    store: &MsdipStore,
    mode: MergeMode,
) -> Result<Generation, GenerateError> {
    if store.is_empty() {
        return Err(GenerateError::EmptyStore);
    }
    let mut gen = Generation::default();
    let reject = |gen: &mut Generation, md: Option<&MetaSequence>, mi: Option<usize>, reason: String| {
        gen.rejections.push(Rejection {
            sentence_id: s.id.clone(),
            md: md.cloned(),
            mi_index: mi,
            reason,
        })
    };
    let seg = segment(s);
    if seg.is_unsegmentable() {
        reject(&mut gen, None, None, "no clause with subject, verb and object".into());
    }
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for clause in &seg.clauses {
        let clause = strip_leading_conjunction(clause);
        let (xs, map) = match metaseq::build(&clause, mode) {
            Ok(v) => v,
            Err(e) => {
                reject(&mut gen, None, None, e.to_string());
                continue;
            }
        };
        if xs.len() < 3 {
            reject(&mut gen, None, None, format!("meta sequence {xs} is shorter than 3"));
            continue;
        }
        let matches = best_match(&xs, store.mds());
        let perfect = matches.iter().any(|m| m.kind == MatchKind::Perfect);
        if !perfect {
            let best = matches
                .iter()
                .find(|m| m.kind.is_successful())
                .or(matches.first());
            gen.teach_requests.push(TeachRequest {
                sentence_id: s.id.clone(),
                clause: clause.text(),
                xs: xs.clone(),
                best_md: best.map(|m| m.md.clone()),
                best_kind: best.map(|m| m.kind),
                lcs_len: best.map_or(0, |m| m.run.len),
            });
        }
        for m in matches.iter().filter(|m| m.kind.is_successful()) {
            let Some(pair) = store.get(&m.md) else { continue };
            for (mi_index, y) in pair.mis.iter().enumerate() {
                match qap_for(&clause, &xs, &map, &m.md, y, m.run.a_start, m.run.len) {
                    Ok((question, answer, tokens)) => {
                        if !seen.insert((question.clone(), answer.clone())) {
                            continue;
                        }
                        gen.qaps.push(Qap {
                            id: format!("{}-q{}", s.id, gen.qaps.len() + 1),
                            question,
                            answer,
                            source: s.id.clone(),
                            md: m.md.clone(),
                            mi_index,
                            match_kind: m.kind,
                            answer_tokens: tokens,
                        });
                    }
                    Err(e) => reject(&mut gen, Some(&m.md), Some(mi_index), e.to_string()),
                }
            }
        }
    }
    Ok(gen)
}

/// One teach request per usable clause, for a store that has nothing to
/// match against yet.
pub fn bootstrap_requests(s: &TaggedSentence, mode: MergeMode) -> Vec<TeachRequest> {
    segment(s)
        .clauses
        .iter()
        .map(strip_leading_conjunction)
        .filter_map(|clause| {
            let (xs, _) = metaseq::build(&clause, mode).ok()?;
            (xs.len() >= 3).then(|| TeachRequest {
                sentence_id: s.id.clone(),
                clause: clause.text(),
                xs,
                best_md: None,
                best_kind: None,
                lcs_len: 0,
            })
        })
        .collect()
}

fn qap_for(
    clause: &SimpleSentence,
    xs: &MetaSequence,
    map: &SsuTextMap,
    x: &MetaSequence,
    y: &MetaSequence,
    z_start: usize,
    z_len: usize,
) -> Result<(String, String, Vec<usize>), QapError> {
    let ys = synthesize_mi(x, y, xs, z_start, z_len)?;
    let (answer, slots) = extract_answer(x, y, xs, map)?;
    let parts = resolve_helping_verbs(&ys, map, &slots)?;
    let mut tokens: Vec<usize> = slots
        .iter()
        .flat_map(|&s| map.entries[s].tokens.iter().map(|&t| clause.origin[t]))
        .collect();
    tokens.sort_unstable();
    Ok((realize(&parts), answer, tokens))
}
