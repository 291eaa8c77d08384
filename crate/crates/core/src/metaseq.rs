//! Meta sequences: SSU formation from a clause, merging of same-role runs,
//! the `/`-separated symbol encoding, and the map from merged SSUs back to
//! source text.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::annotation::{is_noun_pos, is_verb_pos, is_wh_pos, Ssu};
use crate::preprocess::SimpleSentence;
use crate::text::{is_punct, is_punct_pos, lowercase_first};

/// Default bound on how often one SR tag may occur in a meta sequence.
pub const DEFAULT_R: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Upstream phrase segmentation is trusted; every same-role run merges.
    #[default]
    Ideal,
    /// No phrase segmentation: prepositions and adverbs next to the verb are
    /// kept apart so phrasal-verb particles stay addressable.
    PhrasalAware,
}

impl FromStr for MergeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(MergeMode::Ideal),
            "phrasal_aware" | "phrasal-aware" => Ok(MergeMode::PhrasalAware),
            other => Err(alloc::format!("unknown merge mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetaElement {
    Unit(Ssu),
    /// Interrogative pronoun, kept verbatim and untagged.
    Pronoun(String),
}

impl MetaElement {
    pub fn ssu(&self) -> Option<&Ssu> {
        match self {
            MetaElement::Unit(u) => Some(u),
            MetaElement::Pronoun(_) => None,
        }
    }

    pub fn is_pronoun(&self) -> bool {
        matches!(self, MetaElement::Pronoun(_))
    }
}

impl fmt::Display for MetaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaElement::Unit(u) => u.fmt(f),
            MetaElement::Pronoun(p) => f.write_str(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaSequence {
    pub elements: Vec<MetaElement>,
    pub r: usize,
}

impl MetaSequence {
    pub fn new(elements: Vec<MetaElement>) -> Self {
        MetaSequence {
            elements,
            r: DEFAULT_R,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn ssus(&self) -> impl Iterator<Item = &Ssu> {
        self.elements.iter().filter_map(MetaElement::ssu)
    }

    pub fn has_pronoun(&self) -> bool {
        self.elements.iter().any(MetaElement::is_pronoun)
    }

    /// Space-separated element encodings.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match e {
                MetaElement::Unit(u) => out.push_str(&u.encode()),
                MetaElement::Pronoun(p) => out.push_str(p),
            }
        }
        out
    }

    /// Inverse of [`encode`](Self::encode). Adjacent words without a `/`
    /// form one pronoun (`How many`).
    pub fn decode(s: &str) -> Result<MetaSequence, MetaSeqError> {
        let mut elements: Vec<MetaElement> = Vec::new();
        for word in s.split_whitespace() {
            if word.contains('/') {
                let u = Ssu::decode(word).ok_or_else(|| MetaSeqError::BadSymbol(word.to_string()))?;
                elements.push(MetaElement::Unit(u));
            } else if let Some(MetaElement::Pronoun(p)) = elements.last_mut() {
                p.push(' ');
                p.push_str(word);
            } else {
                elements.push(MetaElement::Pronoun(word.to_string()));
            }
        }
        Ok(MetaSequence::new(elements))
    }

    /// Occurrences per SR tag.
    pub fn sr_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for u in self.ssus() {
            *counts.entry(u.sr.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

impl fmt::Display for MetaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl Serialize for MetaSequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for MetaSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        MetaSequence::decode(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaSeqError {
    #[error("tokens {0:?} are not covered by any role")]
    Untagged(Vec<usize>),
    #[error("no units to merge")]
    Empty,
    #[error("SR tag {sr} occurs {count} times, above the bound {r}")]
    RoleBound { sr: String, count: usize, r: usize },
    #[error("bad meta-sequence symbol {0:?}")]
    BadSymbol(String),
}

/// One basic unit before merging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub element: MetaElement,
    /// Surface text as it appears in the sentence.
    pub text: String,
    /// The same text as it would read in the middle of a sentence.
    pub inner_text: String,
    /// Verb text with the first verb token replaced by its lemma.
    pub base_form: String,
    /// Clause token indices covered by the unit.
    pub tokens: Vec<usize>,
}

impl Unit {
    pub fn pos(&self) -> &str {
        self.element.ssu().map(|u| u.pos.as_str()).unwrap_or("")
    }

    pub fn sr(&self) -> Option<&str> {
        self.element.ssu().map(|u| u.sr.as_str())
    }
}

fn surface_forms(s: &SimpleSentence, idx: &[usize]) -> (String, String, String) {
    let words: Vec<&str> = idx.iter().map(|&i| s.tokens[i].text.as_str()).collect();
    let text = crate::text::detokenize(words.iter().copied());
    let first = &s.tokens[idx[0]];
    let keep_case = matches!(first.pos.as_str(), "NNP" | "NNPS")
        || first.text == "I"
        || first.text.chars().skip(1).any(char::is_uppercase);
    let inner = if keep_case { text.clone() } else { lowercase_first(&text) };
    let base = match idx.iter().position(|&i| is_verb_pos(&s.tokens[i].pos)) {
        Some(v) => {
            let mut parts: Vec<&str> = words.clone();
            parts[v] = s.tokens[idx[v]].lemma.as_str();
            crate::text::detokenize(parts.iter().copied())
        }
        None => inner.clone(),
    };
    (text, inner, base)
}

fn run_tags(s: &SimpleSentence, idx: &[usize]) -> (String, String) {
    let pos = idx
        .iter()
        .rev()
        .map(|&i| s.tokens[i].pos.as_str())
        .find(|p| is_noun_pos(p))
        .or_else(|| idx.last().map(|&i| s.tokens[i].pos.as_str()))
        .unwrap_or("")
        .to_string();
    let ne = idx
        .iter()
        .rev()
        .map(|&i| s.tokens[i].ne.as_str())
        .find(|n| !n.is_empty())
        .unwrap_or("")
        .to_string();
    (pos, ne)
}

/// One unit per token (or per upstream phrase in [`MergeMode::Ideal`]).
///
/// The SR tag comes from the clause frame (`V` for the predicate); a token
/// outside every argument inherits the clause's modifier role, and is
/// reported when there is none. Punctuation inside an argument sticks to the
/// preceding unit's text; other punctuation is dropped.
pub fn to_units(s: &SimpleSentence, mode: MergeMode) -> Result<Vec<Unit>, MetaSeqError> {
    let n = s.tokens.len();
    let clause_role = (s.clause_role != "MAIN").then_some(s.clause_role.as_str());
    let mut units: Vec<Unit> = Vec::new();
    let mut untagged = Vec::new();
    let mut i = 0;
    while i < n {
        let tok = &s.tokens[i];
        if is_punct_pos(&tok.pos) || is_punct(&tok.text) {
            let inside = s.frame.args.iter().any(|a| a.start < i && i + 1 < a.end);
            if let (true, Some(prev)) = (inside, units.last_mut()) {
                for t in [&mut prev.text, &mut prev.inner_text, &mut prev.base_form] {
                    t.push_str(&tok.text);
                }
                prev.tokens.push(i);
            }
            i += 1;
            continue;
        }

        let phrase = (mode == MergeMode::Ideal)
            .then(|| s.phrases.iter().find(|p| p.start == i && p.end > i + 1 && p.end <= n))
            .flatten();
        if let Some(p) = phrase {
            let idx: Vec<usize> = (p.start..p.end).collect();
            let ssu = if (p.start..p.end).contains(&s.frame.predicate) {
                Ssu::new("V", &s.tokens[s.frame.predicate].pos, "")
            } else {
                let role = s.frame.role_at(i).or(clause_role);
                let Some(role) = role else {
                    untagged.extend(idx.iter().copied());
                    i = p.end;
                    continue;
                };
                let (pos, ne) = run_tags(s, &idx);
                Ssu::new(role, &pos, &ne)
            };
            let (text, inner_text, base_form) = surface_forms(s, &idx);
            units.push(Unit {
                element: MetaElement::Unit(ssu),
                text,
                inner_text,
                base_form,
                tokens: idx,
            });
            i = p.end;
            continue;
        }

        if is_wh_pos(&tok.pos) {
            let mut idx = alloc::vec![i];
            let mut literal = crate::text::capitalize_first(&tok.text);
            if tok.text.eq_ignore_ascii_case("how") {
                if let Some(next) = s.tokens.get(i + 1) {
                    let lw = next.text.to_lowercase();
                    if lw == "many" || lw == "much" {
                        literal.push(' ');
                        literal.push_str(&lw);
                        idx.push(i + 1);
                    }
                }
            }
            let (text, inner_text, _) = surface_forms(s, &idx);
            i += idx.len();
            units.push(Unit {
                element: MetaElement::Pronoun(literal),
                base_form: inner_text.clone(),
                text,
                inner_text,
                tokens: idx,
            });
            continue;
        }

        match s.frame.role_at(i).or(clause_role) {
            Some(role) => {
                let (text, inner_text, base_form) = surface_forms(s, &[i]);
                units.push(Unit {
                    element: MetaElement::Unit(Ssu::new(role, &tok.pos, &tok.ne)),
                    text,
                    inner_text,
                    base_form,
                    tokens: alloc::vec![i],
                });
            }
            None => untagged.push(i),
        }
        i += 1;
    }
    if !untagged.is_empty() {
        return Err(MetaSeqError::Untagged(untagged));
    }
    Ok(units)
}

/// Text for one merged SSU.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEntry {
    pub ssu: Ssu,
    /// Occurrence ordinal among identical SSUs.
    pub ordinal: usize,
    pub text: String,
    pub inner_text: String,
    pub base_form: String,
    pub tokens: Vec<usize>,
}

/// Merged SSU -> source text, in sequence order. Pronoun elements have no
/// entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsuTextMap {
    pub entries: Vec<MapEntry>,
}

impl SsuTextMap {
    pub fn get(&self, ssu: &Ssu, ordinal: usize) -> Option<&MapEntry> {
        self.entries.iter().find(|e| &e.ssu == ssu && e.ordinal == ordinal)
    }

    /// Space-joined texts, which reproduces the clause text.
    pub fn joined(&self) -> String {
        let parts: Vec<&str> = self.entries.iter().map(|e| e.text.as_str()).collect();
        parts.join(" ")
    }
}

const PREP_OR_ADVERB: &[&str] = &["IN", "RB", "RBR", "RBS"];

fn is_prep_or_adverb(u: &Unit) -> bool {
    PREP_OR_ADVERB.contains(&u.pos())
}

fn next_to_verb(units: &[Unit], i: usize) -> bool {
    let is_v = |j: usize| units.get(j).and_then(Unit::sr) == Some("V");
    (i > 0 && is_v(i - 1)) || is_v(i + 1)
}

/// Merges runs of consecutive units that share an SR tag.
///
/// The merged POS is the rightmost noun POS in the run (rightmost POS when
/// the run has no noun); the NE is the rightmost non-empty NE. In
/// [`MergeMode::PhrasalAware`] a preposition/adverb unit adjacent to a
/// V-unit is kept apart from same-role neighbours that are not themselves
/// prepositions or adverbs.
pub fn merge(
    units: &[Unit],
    mode: MergeMode,
    r: usize,
) -> Result<(MetaSequence, SsuTextMap), MetaSeqError> {
    if units.is_empty() {
        return Err(MetaSeqError::Empty);
    }
    // a run of prepositions/adverbs touching a V-unit stays one particle group
    let mut protected: Vec<bool> = (0..units.len())
        .map(|i| mode == MergeMode::PhrasalAware && is_prep_or_adverb(&units[i]) && next_to_verb(units, i))
        .collect();
    for i in 1..units.len() {
        if protected[i - 1] && is_prep_or_adverb(&units[i]) {
            protected[i] = true;
        }
    }
    for i in (0..units.len().saturating_sub(1)).rev() {
        if protected[i + 1] && is_prep_or_adverb(&units[i]) {
            protected[i] = true;
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..units.len() {
        let joins = i > 0 && {
            let prev = &units[i - 1];
            let same_role = prev.sr().is_some() && prev.sr() == units[i].sr();
            let cut = (protected[i - 1] && !is_prep_or_adverb(&units[i]))
                || (protected[i] && !is_prep_or_adverb(prev));
            same_role && !cut
        };
        match (joins, groups.last_mut()) {
            (true, Some(g)) => g.push(i),
            _ => groups.push(alloc::vec![i]),
        }
    }

    let mut elements = Vec::with_capacity(groups.len());
    let mut map = SsuTextMap::default();
    let mut seen: BTreeMap<Ssu, usize> = BTreeMap::new();
    for g in groups {
        let first = &units[g[0]];
        let element = match &first.element {
            MetaElement::Pronoun(p) => MetaElement::Pronoun(p.clone()),
            MetaElement::Unit(u) => {
                let pos = g
                    .iter()
                    .rev()
                    .map(|&i| units[i].pos())
                    .find(|p| is_noun_pos(p))
                    .unwrap_or_else(|| units[*g.last().unwrap()].pos());
                let ne = g
                    .iter()
                    .rev()
                    .filter_map(|&i| units[i].element.ssu())
                    .map(|s| s.ne.as_str())
                    .find(|n| !n.is_empty())
                    .unwrap_or("");
                MetaElement::Unit(Ssu::new(&u.sr, pos, ne))
            }
        };
        if let MetaElement::Unit(u) = &element {
            let rest: Vec<&str> = g[1..].iter().map(|&i| units[i].text.as_str()).collect();
            let join = |head: &str| {
                let mut s = String::from(head);
                for r in &rest {
                    s.push(' ');
                    s.push_str(r);
                }
                s
            };
            let ordinal = seen.entry(u.clone()).or_insert(0);
            map.entries.push(MapEntry {
                ssu: u.clone(),
                ordinal: *ordinal,
                text: join(&first.text),
                inner_text: join(&first.inner_text),
                base_form: join(&first.base_form),
                tokens: g.iter().flat_map(|&i| units[i].tokens.iter().copied()).collect(),
            });
            *ordinal += 1;
        }
        elements.push(element);
    }

    let seq = MetaSequence { elements, r };
    if let Some((sr, count)) = seq.sr_counts().into_iter().find(|(_, c)| *c > r) {
        return Err(MetaSeqError::RoleBound {
            sr: sr.to_string(),
            count,
            r,
        });
    }
    Ok((seq, map))
}

/// Convenience: units then merge.
pub fn build(
    s: &SimpleSentence,
    mode: MergeMode,
) -> Result<(MetaSequence, SsuTextMap), MetaSeqError> {
    let units = to_units(s, mode)?;
    merge(&units, mode, DEFAULT_R)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{sentence_from_specs, Argument, PhraseSpan, SrlFrame};
    use alloc::vec;

    fn clause(specs: &[&str], frame: SrlFrame, phrases: Vec<PhraseSpan>) -> SimpleSentence {
        let mut s = sentence_from_specs("t", specs, vec![frame]);
        s.phrases = phrases;
        SimpleSentence::whole(&s).unwrap()
    }

    fn lincoln() -> SimpleSentence {
        clause(
            &[
                "Abraham||NNP|PER",
                "Lincoln||NNP|PER",
                "was|be|VBZ",
                "the||DT",
                "16th||JJ",
                "president||NN",
                "of||IN",
                "the||DT",
                "United||NNP|LOC",
                "States|state|NNP|LOC",
            ],
            SrlFrame {
                predicate: 2,
                args: vec![Argument::new("ARG1", 0, 2), Argument::new("ARG2", 3, 10)],
            },
            vec![],
        )
    }

    fn john() -> SimpleSentence {
        clause(
            &[
                "John||NNP|PER",
                "traveled|travel|VBD",
                "to||IN",
                "Boston||NNP|LOC",
                "last||JJ",
                "week||NN",
            ],
            SrlFrame {
                predicate: 1,
                args: vec![
                    Argument::new("ARG0", 0, 1),
                    Argument::new("ARG1", 2, 4),
                    Argument::new("ARGM-TMP", 4, 6),
                ],
            },
            vec![PhraseSpan { start: 1, end: 3 }],
        )
    }

    fn encoded_units(units: &[Unit]) -> Vec<String> {
        units
            .iter()
            .map(|u| alloc::format!("{} ({})", u.text, u.element))
            .collect()
    }

    #[test]
    fn lincoln_units_and_merge() {
        let units = to_units(&lincoln(), MergeMode::PhrasalAware).unwrap();
        assert_eq!(units.len(), 10);
        assert_eq!(encoded_units(&units)[9], "States (ARG2/NNP/LOC)");
        assert_eq!(encoded_units(&units)[2], "was (V/VBZ/)");
        let (seq, map) = merge(&units, MergeMode::Ideal, DEFAULT_R).unwrap();
        assert_eq!(seq.encode(), "ARG1/NNP/PER V/VBZ/ ARG2/NNP/LOC");
        assert_eq!(map.joined(), "Abraham Lincoln was the 16th president of the United States");
    }

    #[test]
    fn john_ideal_uses_phrase() {
        let units = to_units(&john(), MergeMode::Ideal).unwrap();
        assert_eq!(encoded_units(&units)[1], "traveled to (V/VBD/)");
        assert_eq!(units[1].base_form, "travel to");
        let (seq, map) = merge(&units, MergeMode::Ideal, DEFAULT_R).unwrap();
        assert_eq!(seq.encode(), "ARG0/NNP/PER V/VBD/ ARG1/NNP/LOC TMP/NN/");
        assert_eq!(map.entries[3].text, "last week");
    }

    #[test]
    fn john_phrasal_aware_keeps_particle() {
        let units = to_units(&john(), MergeMode::PhrasalAware).unwrap();
        let listing = encoded_units(&units);
        assert_eq!(listing[2], "to (ARG1/IN/)");
        assert_eq!(listing[4], "last (TMP/JJ/)");
        let (seq, map) = merge(&units, MergeMode::PhrasalAware, DEFAULT_R).unwrap();
        assert_eq!(seq.encode(), "ARG0/NNP/PER V/VBD/ ARG1/IN/ ARG1/NNP/LOC TMP/NN/");
        assert_eq!(map.get(&Ssu::new("ARG1", "IN", ""), 0).unwrap().text, "to");
        // same input merged ideally collapses the particle into ARG1
        let (ideal, _) = merge(&units, MergeMode::Ideal, DEFAULT_R).unwrap();
        assert_eq!(ideal.encode(), "ARG0/NNP/PER V/VBD/ ARG1/NNP/LOC TMP/NN/");
    }

    #[test]
    fn adverb_runs_next_to_verb_merge_together() {
        let c = clause(
            &["He||PRP", "ran|run|VBD", "away||RB", "off||IN", "quickly||RB", "home||NN"],
            SrlFrame {
                predicate: 1,
                args: vec![Argument::new("ARG0", 0, 1), Argument::new("ARGM-DIR", 2, 6)],
            },
            vec![],
        );
        let (seq, _) = build(&c, MergeMode::PhrasalAware).unwrap();
        assert_eq!(seq.encode(), "ARG0/PRP/ V/VBD/ DIR/RB/ DIR/NN/");
    }

    #[test]
    fn untagged_residue_reported() {
        let c = clause(
            &["Go||VB", "home||NN"],
            SrlFrame {
                predicate: 0,
                args: vec![],
            },
            vec![],
        );
        assert_eq!(to_units(&c, MergeMode::Ideal), Err(MetaSeqError::Untagged(vec![1])));
    }

    #[test]
    fn interrogative_pronouns_stay_literal() {
        let c = clause(
            &["How||WRB", "many||JJ", "books|book|NNS", "did|do|VBD", "Amanda||NNP|PER", "read||VB", "?||."],
            SrlFrame {
                predicate: 5,
                args: vec![
                    Argument::new("ARG1", 0, 3),
                    Argument::new("V", 3, 4),
                    Argument::new("ARG0", 4, 5),
                ],
            },
            vec![],
        );
        let (seq, map) = build(&c, MergeMode::Ideal).unwrap();
        assert_eq!(seq.encode(), "How many ARG1/NNS/ V/VBD/ ARG0/NNP/PER V/VB/");
        assert_eq!(MetaSequence::decode(&seq.encode()).unwrap(), seq);
        assert_eq!(map.entries.len(), 4);
    }

    #[test]
    fn role_bound_enforced() {
        let c = clause(
            &["a||NN", "b||IN", "c||NN", "d||IN", "e||NN"],
            SrlFrame {
                predicate: 4,
                args: vec![Argument::new("V", 0, 5)],
            },
            vec![],
        );
        let units = to_units(&c, MergeMode::Ideal).unwrap();
        let mut split = units.clone();
        for (k, u) in split.iter_mut().enumerate() {
            if let MetaElement::Unit(s) = &mut u.element {
                s.sr = if k % 2 == 0 { "ARG1".into() } else { "ARG2".into() };
            }
        }
        assert!(matches!(
            merge(&split, MergeMode::Ideal, 2),
            Err(MetaSeqError::RoleBound { ref sr, count: 3, r: 2 }) if sr == "ARG1"
        ));
        assert!(merge(&split, MergeMode::Ideal, 3).is_ok());
    }

    #[test]
    fn inner_text_lowercases_sentence_initial_words() {
        let c = clause(
            &["The||DT", "industry||NN", "is|be|VBZ", "in||IN", "trouble||NN"],
            SrlFrame {
                predicate: 2,
                args: vec![Argument::new("ARG1", 0, 2), Argument::new("ARG2", 3, 5)],
            },
            vec![],
        );
        let (_, map) = build(&c, MergeMode::Ideal).unwrap();
        assert_eq!(map.entries[0].text, "The industry");
        assert_eq!(map.entries[0].inner_text, "the industry");
        assert_eq!(map.entries[1].base_form, "be");
    }
}
