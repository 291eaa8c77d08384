//! Sentence preprocessing: contraction/slang normalization, clause
//! segmentation by predicate frame, leading-conjunction stripping and the
//! suitability screen applied before answer selection.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::{
    canonical_role, is_modifier_role, is_wh_pos, Argument, PhraseSpan, SrlFrame, TaggedSentence,
    Token,
};
use crate::text::{is_punct, is_punct_pos, is_stopword, match_case};

const SLANG: &[(&str, &str)] = &[
    ("gimme", "give me"),
    ("gonna", "going to"),
    ("gotta", "got to"),
    ("lemme", "let me"),
    ("wanna", "want to"),
    ("ya", "you"),
];

const ABBREVIATIONS: &[(&str, &str)] = &[
    ("a.k.a.", "also known as"),
    ("e.g.", "for example"),
    ("i.e.", "that is"),
];

const CLITICS: &[(&str, &str)] = &[("'m", "am"), ("'s", "is"), ("'re", "are"), ("'ve", "have")];

/// Expands the listed contractions and slang words; everything else is left
/// byte-for-byte unchanged.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                out.push_str(&normalize_chunk(&text[s..i]));
            }
            out.push(c);
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        out.push_str(&normalize_chunk(&text[s..]));
    }
    out
}

fn normalize_chunk(chunk: &str) -> String {
    let lead_len = chunk
        .char_indices()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, _)| i)
        .unwrap_or(chunk.len());
    let (lead, rest) = chunk.split_at(lead_len);
    let lower = rest.to_lowercase().replace('\u{2019}', "'");

    for (abbr, expansion) in ABBREVIATIONS {
        if let Some(tail) = lower.strip_prefix(abbr) {
            if tail.chars().all(|c| !c.is_alphanumeric()) {
                let mut s = String::from(lead);
                s.push_str(&match_case(rest, expansion));
                s.push_str(&rest[rest.len() - tail.len()..]);
                return s;
            }
        }
    }

    let core_len = rest
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric() || *c == '\'' || *c == '\u{2019}')
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    let (word, trail) = rest.split_at(core_len);
    let lw = word.to_lowercase().replace('\u{2019}', "'");

    let replaced = if let Some((_, exp)) = SLANG.iter().find(|(s, _)| *s == lw) {
        Some(match_case(word, exp))
    } else if let Some(stem) = lw.strip_suffix("n't") {
        let stem_orig = &word[..stem.len()];
        let base = match stem {
            "ca" => String::from("can"),
            "wo" => String::from("will"),
            "sha" => String::from("shall"),
            _ => String::from(stem),
        };
        let base = if stem.is_empty() { base } else { match_case(stem_orig, &base) };
        Some(if base.is_empty() {
            String::from("not")
        } else {
            base + " not"
        })
    } else {
        CLITICS.iter().find_map(|(clitic, exp)| {
            let stem = lw.strip_suffix(clitic)?;
            if stem.is_empty() {
                return None;
            }
            let mut s = String::from(&word[..stem.len()]);
            s.push(' ');
            s.push_str(exp);
            Some(s)
        })
    };
    match replaced {
        Some(r) => {
            let mut s = String::from(lead);
            s.push_str(&r);
            s.push_str(trail);
            s
        }
        None => String::from(chunk),
    }
}

/// A single-predicate clause cut out of a tagged sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleSentence {
    pub parent_id: String,
    /// `MAIN`, or the modifier role the clause carries in its parent frame.
    pub clause_role: String,
    pub tokens: Vec<Token>,
    pub frame: SrlFrame,
    pub dep_heads: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phrases: Vec<PhraseSpan>,
    /// Index of each token in the parent sentence.
    pub origin: Vec<usize>,
}

impl SimpleSentence {
    /// The whole sentence as one clause, using its main frame.
    pub fn whole(s: &TaggedSentence) -> Option<SimpleSentence> {
        let frame = s.main_frame()?.clone();
        Some(SimpleSentence {
            parent_id: s.id.clone(),
            clause_role: String::from("MAIN"),
            tokens: s.tokens.clone(),
            frame,
            dep_heads: s.dep_heads.clone(),
            phrases: s.phrases.clone(),
            origin: (0..s.tokens.len()).collect(),
        })
    }

    pub fn text(&self) -> String {
        crate::text::detokenize(self.tokens.iter().map(|t| t.text.as_str()))
    }

    /// Drops the given token positions, re-indexing spans and heads.
    pub fn without_tokens(&self, drop: &[usize]) -> SimpleSentence {
        let keep: Vec<usize> = (0..self.tokens.len()).filter(|i| !drop.contains(i)).collect();
        let remap = |i: usize| keep.iter().position(|&k| k == i);
        let shrink = |start: usize, end: usize| {
            let kept: Vec<usize> = (start..end).filter_map(remap).collect();
            kept.first().map(|&a| (a, kept[kept.len() - 1] + 1))
        };
        let args = self
            .frame
            .args
            .iter()
            .filter_map(|a| shrink(a.start, a.end).map(|(s, e)| Argument::new(&a.role, s, e)))
            .collect();
        let predicate = remap(self.frame.predicate).unwrap_or(0);
        let heads = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| remap(self.dep_heads[old]).unwrap_or(new))
            .collect();
        SimpleSentence {
            parent_id: self.parent_id.clone(),
            clause_role: self.clause_role.clone(),
            tokens: keep.iter().map(|&i| self.tokens[i].clone()).collect(),
            frame: SrlFrame { predicate, args },
            dep_heads: heads,
            phrases: self
                .phrases
                .iter()
                .filter_map(|p| shrink(p.start, p.end).map(|(start, end)| PhraseSpan { start, end }))
                .collect(),
            origin: keep.iter().map(|&i| self.origin[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    NoSubject,
    NoObject,
    PredicateOutOfBounds,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Segmentation {
    pub clauses: Vec<SimpleSentence>,
    /// Frames that yielded no clause, with the reason.
    pub dropped: Vec<(usize, DropReason)>,
}

impl Segmentation {
    pub fn is_unsegmentable(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// Cuts a sentence into one clause per predicate frame, keeping only clauses
/// with both a subject and an object argument. A frame nested inside another
/// frame's modifier argument inherits that modifier as its clause role.
pub fn segment(s: &TaggedSentence) -> Segmentation {
    let mut seg = Segmentation::default();
    let n = s.tokens.len();
    for (fi, frame) in s.frames.iter().enumerate() {
        if frame.predicate >= n {
            seg.dropped.push((fi, DropReason::PredicateOutOfBounds));
            continue;
        }
        if frame.subject().is_none() {
            seg.dropped.push((fi, DropReason::NoSubject));
            continue;
        }
        if frame.object().is_none() {
            seg.dropped.push((fi, DropReason::NoObject));
            continue;
        }
        let (lo, hi) = frame.extent();
        let hi = hi.min(n);
        let clause_role = enclosing_role(s, fi, lo, hi);
        let shift = |i: usize| i - lo;
        let args = frame
            .args
            .iter()
            .map(|a| Argument::new(&a.role, shift(a.start.max(lo)), shift(a.end.min(hi))))
            .collect();
        let dep_heads = (lo..hi)
            .map(|i| {
                let h = s.dep_heads.get(i).copied().unwrap_or(i);
                if (lo..hi).contains(&h) {
                    h - lo
                } else {
                    i - lo
                }
            })
            .collect();
        let phrases = s
            .phrases
            .iter()
            .filter(|p| p.start >= lo && p.end <= hi)
            .map(|p| PhraseSpan {
                start: p.start - lo,
                end: p.end - lo,
            })
            .collect();
        seg.clauses.push(SimpleSentence {
            parent_id: s.id.clone(),
            clause_role,
            tokens: s.tokens[lo..hi].to_vec(),
            frame: SrlFrame {
                predicate: frame.predicate - lo,
                args,
            },
            dep_heads,
            phrases,
            origin: (lo..hi).collect(),
        });
    }
    seg
}

fn enclosing_role(s: &TaggedSentence, own: usize, lo: usize, hi: usize) -> String {
    let mut best: Option<&Argument> = None;
    for (fi, f) in s.frames.iter().enumerate() {
        if fi == own {
            continue;
        }
        for a in &f.args {
            let covers = a.start <= lo && hi <= a.end && (a.end - a.start) > 0;
            let tighter = best.is_none_or(|b| a.end - a.start < b.end - b.start);
            if covers && tighter {
                best = Some(a);
            }
        }
    }
    match best.and_then(|a| canonical_role(&a.role)) {
        Some(r) if is_modifier_role(r) => r.to_string(),
        _ => String::from("MAIN"),
    }
}

/// Removes coordinating conjunctions (POS `CC`) that precede the subject.
pub fn strip_leading_conjunction(s: &SimpleSentence) -> SimpleSentence {
    let limit = s
        .frame
        .subject()
        .map(|a| a.start)
        .unwrap_or(s.frame.predicate);
    let drop: Vec<usize> = (0..limit.min(s.tokens.len()))
        .filter(|&i| s.tokens[i].pos == "CC")
        .collect();
    if drop.is_empty() {
        return s.clone();
    }
    s.without_tokens(&drop)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuitabilityRule {
    WhStart,
    VerbStart,
    QuestionMark,
    MissingRole,
    TooShort,
}

impl SuitabilityRule {
    pub fn id(self) -> &'static str {
        match self {
            SuitabilityRule::WhStart => "wh_start",
            SuitabilityRule::VerbStart => "verb_start",
            SuitabilityRule::QuestionMark => "question_mark",
            SuitabilityRule::MissingRole => "missing_role",
            SuitabilityRule::TooShort => "too_short",
        }
    }
}

impl fmt::Display for SuitabilityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuitabilityVerdict {
    pub suitable: bool,
    pub reasons: Vec<SuitabilityRule>,
}

impl SuitabilityVerdict {
    fn from_reasons(reasons: Vec<SuitabilityRule>) -> Self {
        SuitabilityVerdict {
            suitable: reasons.is_empty(),
            reasons,
        }
    }
}

const WH_WORDS: &[&str] = &["how", "what", "when", "where", "which", "who", "whom", "whose", "why"];

/// Screens out questions, imperatives, sentences without a
/// subject/verb/object frame, and sentences with fewer than four content words.
pub fn assess_suitability(s: &TaggedSentence) -> SuitabilityVerdict {
    let mut reasons = Vec::new();
    let words: Vec<&Token> = s
        .tokens
        .iter()
        .filter(|t| !is_punct_pos(&t.pos) && !is_punct(&t.text))
        .collect();
    if let Some(first) = words.first() {
        if is_wh_pos(&first.pos) || WH_WORDS.contains(&first.text.to_lowercase().as_str()) {
            reasons.push(SuitabilityRule::WhStart);
        } else if first.pos == "VB" {
            reasons.push(SuitabilityRule::VerbStart);
        }
    }
    if s.tokens.last().is_some_and(|t| t.text.ends_with('?')) {
        reasons.push(SuitabilityRule::QuestionMark);
    }
    let has_svo = s
        .frames
        .iter()
        .any(|f| f.predicate < s.tokens.len() && f.subject().is_some() && f.object().is_some());
    if !has_svo {
        reasons.push(SuitabilityRule::MissingRole);
    }
    if words.iter().filter(|t| !is_stopword(&t.text)).count() < 4 {
        reasons.push(SuitabilityRule::TooShort);
    }
    SuitabilityVerdict::from_reasons(reasons)
}
