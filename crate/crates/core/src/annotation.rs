//! Tagged-sentence data model.
//!
//! Sentences arrive pre-tagged by external tools: Penn Treebank POS tags,
//! PropBank semantic roles grouped into predicate frames, named-entity
//! classes, lemmas and a dependency tree. Nothing in this crate runs a tagger.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Penn Treebank POS tags, punctuation tags included.
pub const PENN_TAGS: &[&str] = &[
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP",
    "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB",
    "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", ".", ",", ":", "``", "''",
    "-LRB-", "-RRB-", "#", "$", "HYPH", "NFP", "ADD", "AFX", "XX",
];

/// PropBank role classes: numbered arguments, the predicate, and modifiers.
pub const MODIFIER_ROLES: &[&str] = &[
    "LOC", "EXT", "DIS", "ADV", "NEG", "MOD", "CAU", "TMP", "PRP", "MNR", "GOL", "DIR",
];

pub fn is_penn_tag(pos: &str) -> bool {
    PENN_TAGS.contains(&pos)
}

pub fn is_noun_pos(pos: &str) -> bool {
    matches!(pos, "NN" | "NNS" | "NNP" | "NNPS")
}

pub fn is_verb_pos(pos: &str) -> bool {
    matches!(pos, "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ")
}

pub fn is_wh_pos(pos: &str) -> bool {
    matches!(pos, "WDT" | "WP" | "WP$" | "WRB")
}

/// Maps a raw role label onto its PropBank class.
///
/// Accepts the bare form (`TMP`, `ARG1`) as well as `ARGM-TMP`, `AM-TMP`,
/// `A1`, and the continuation/reference prefixes `C-` and `R-`.
pub fn canonical_role(raw: &str) -> Option<&'static str> {
    let mut r = raw.trim();
    for prefix in ["C-", "R-"] {
        if let Some(rest) = r.strip_prefix(prefix) {
            r = rest;
        }
    }
    for prefix in ["ARGM-", "AM-"] {
        if let Some(rest) = r.strip_prefix(prefix) {
            r = rest;
        }
    }
    const ARGS: [&str; 6] = ["ARG0", "ARG1", "ARG2", "ARG3", "ARG4", "ARG5"];
    if r == "V" {
        return Some("V");
    }
    if let Some(n) = r.strip_prefix("ARG").or_else(|| r.strip_prefix('A')) {
        if let Ok(i) = n.parse::<usize>() {
            return ARGS.get(i).copied();
        }
    }
    MODIFIER_ROLES.iter().find(|m| **m == r).copied()
}

/// Index of a numbered argument role (`ARG2` -> 2).
pub fn arg_number(role: &str) -> Option<u8> {
    let n = role.strip_prefix("ARG")?;
    match n.parse::<u8>() {
        Ok(i) if i <= 5 => Some(i),
        _ => None,
    }
}

pub fn is_modifier_role(role: &str) -> bool {
    MODIFIER_ROLES.contains(&role)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub lemma: String,
    pub pos: String,
    #[serde(default)]
    pub ne: String,
}

impl Token {
    pub fn new(text: &str, lemma: &str, pos: &str, ne: &str) -> Self {
        Token {
            text: text.into(),
            lemma: lemma.into(),
            pos: pos.into(),
            ne: ne.into(),
        }
    }
}

/// A role-labelled token span; `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub role: String,
    pub start: usize,
    pub end: usize,
}

impl Argument {
    pub fn new(role: &str, start: usize, end: usize) -> Self {
        Argument {
            role: role.into(),
            start,
            end,
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn canonical(&self) -> Option<&'static str> {
        canonical_role(&self.role)
    }
}

/// One predicate and its labelled arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrlFrame {
    #[serde(rename = "v")]
    pub predicate: usize,
    pub args: Vec<Argument>,
}

impl SrlFrame {
    /// Role covering token `i`; the predicate token itself reads as `V`.
    pub fn role_at(&self, i: usize) -> Option<&'static str> {
        if let Some(a) = self.args.iter().find(|a| a.contains(i)) {
            return a.canonical();
        }
        (i == self.predicate).then_some("V")
    }

    /// Token range spanned by the predicate and all arguments.
    pub fn extent(&self) -> (usize, usize) {
        let mut lo = self.predicate;
        let mut hi = self.predicate + 1;
        for a in &self.args {
            lo = lo.min(a.start);
            hi = hi.max(a.end);
        }
        (lo, hi)
    }

    /// The subject argument: lowest-numbered `ARGn` span that ends before the
    /// predicate.
    pub fn subject(&self) -> Option<&Argument> {
        self.args
            .iter()
            .filter(|a| a.end <= self.predicate)
            .filter_map(|a| a.canonical().and_then(arg_number).map(|n| (n, a)))
            .min_by_key(|(n, a)| (*n, a.start))
            .map(|(_, a)| a)
    }

    /// First `ARGn` span that starts after the predicate.
    pub fn object(&self) -> Option<&Argument> {
        self.args
            .iter()
            .filter(|a| a.start > self.predicate)
            .filter(|a| a.canonical().and_then(arg_number).is_some())
            .min_by_key(|a| a.start)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub article: String,
    pub ordinal: u32,
}

/// An upstream phrase grouping (phrasal verb or phrasal noun); `end` is
/// exclusive. Present only when the tagger can segment phrases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub frames: Vec<SrlFrame>,
    /// Parent index per token; the root points to itself.
    pub dep_heads: Vec<usize>,
    #[serde(default)]
    pub constituency: Option<String>,
    #[serde(default)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phrases: Vec<PhraseSpan>,
}

impl TaggedSentence {
    pub fn text(&self) -> String {
        crate::text::detokenize(self.tokens.iter().map(|t| t.text.as_str()))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The frame whose predicate is the dependency root, else the frame with
    /// the widest extent.
    pub fn main_frame(&self) -> Option<&SrlFrame> {
        let root = self.dep_heads.iter().enumerate().find(|(i, h)| *i == **h).map(|(i, _)| i);
        if let Some(f) = self.frames.iter().find(|f| Some(f.predicate) == root) {
            return Some(f);
        }
        self.frames.iter().max_by_key(|f| {
            let (lo, hi) = f.extent();
            (hi - lo, usize::MAX - lo)
        })
    }

    /// Depth of every token in the dependency tree (root depth 0), or `None`
    /// if the heads do not form a tree.
    pub fn dep_depths(&self) -> Option<Vec<usize>> {
        dep_depths(&self.dep_heads)
    }
}

pub(crate) fn dep_depths(heads: &[usize]) -> Option<Vec<usize>> {
    let n = heads.len();
    let mut depth = vec![usize::MAX; n];
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = start;
        while depth[cur] == usize::MAX {
            if path.len() > n || heads[cur] >= n {
                return None;
            }
            path.push(cur);
            if heads[cur] == cur {
                depth[cur] = 0;
                path.pop();
                break;
            }
            cur = heads[cur];
        }
        let mut d = depth[cur];
        while let Some(p) = path.pop() {
            d += 1;
            depth[p] = d;
        }
    }
    Some(depth)
}

/// A semantic-syntactic unit: SR, POS and NE tags for one basic unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ssu {
    pub sr: String,
    pub pos: String,
    pub ne: String,
}

impl Ssu {
    pub fn new(sr: &str, pos: &str, ne: &str) -> Self {
        Ssu {
            sr: sr.into(),
            pos: pos.into(),
            ne: ne.into(),
        }
    }

    /// `sr/pos/ne`, empty tags left empty between the slashes.
    pub fn encode(&self) -> String {
        format!("{}/{}/{}", self.sr, self.pos, self.ne)
    }

    pub fn decode(s: &str) -> Option<Ssu> {
        let mut parts = s.split('/');
        let sr = parts.next()?;
        let pos = parts.next()?;
        let ne = parts.next()?;
        if parts.next().is_some() || sr.is_empty() {
            return None;
        }
        Some(Ssu::new(sr, pos, ne))
    }

    pub fn is_verb(&self) -> bool {
        self.sr == "V"
    }

    pub fn arg_number(&self) -> Option<u8> {
        arg_number(&self.sr)
    }
}

impl fmt::Display for Ssu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.sr, self.pos, self.ne)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoTokens,
    EmptyText { index: usize },
    EmptyLemma { index: usize },
    UnknownPos { index: usize, pos: String },
    HeadCount { tokens: usize, heads: usize },
    NotATree,
    PredicateOutOfBounds { frame: usize },
    SpanOutOfBounds { frame: usize, role: String },
    EmptySpan { frame: usize, role: String },
    OverlappingSpans { frame: usize },
    UnknownRole { frame: usize, role: String },
    PhraseOutOfBounds { start: usize, end: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTokens => f.write_str("sentence has no tokens"),
            Violation::EmptyText { index } => write!(f, "token {index} has empty text"),
            Violation::EmptyLemma { index } => write!(f, "token {index} has empty lemma"),
            Violation::UnknownPos { index, pos } => {
                write!(f, "token {index} has unknown POS tag {pos:?}")
            }
            Violation::HeadCount { tokens, heads } => {
                write!(f, "dep_heads has {heads} entries for {tokens} tokens")
            }
            Violation::NotATree => f.write_str("dependency graph is not a tree"),
            Violation::PredicateOutOfBounds { frame } => {
                write!(f, "frame {frame}: predicate out of bounds")
            }
            Violation::SpanOutOfBounds { frame, role } => {
                write!(f, "frame {frame}: {role} span out of bounds")
            }
            Violation::EmptySpan { frame, role } => write!(f, "frame {frame}: {role} span is empty"),
            Violation::OverlappingSpans { frame } => {
                write!(f, "frame {frame}: argument spans overlap")
            }
            Violation::UnknownRole { frame, role } => {
                write!(f, "frame {frame}: unknown role {role:?}")
            }
            Violation::PhraseOutOfBounds { start, end } => {
                write!(f, "phrase {start}..{end} out of bounds")
            }
        }
    }
}

/// Checks every invariant of a tagged sentence; an empty list means valid.
pub fn validate_sentence(s: &TaggedSentence) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.tokens.len();
    if n == 0 {
        out.push(Violation::NoTokens);
    }
    for (i, t) in s.tokens.iter().enumerate() {
        if t.text.is_empty() {
            out.push(Violation::EmptyText { index: i });
        }
        if t.lemma.is_empty() {
            out.push(Violation::EmptyLemma { index: i });
        }
        if !is_penn_tag(&t.pos) {
            out.push(Violation::UnknownPos {
                index: i,
                pos: t.pos.clone(),
            });
        }
    }
    if s.dep_heads.len() != n {
        out.push(Violation::HeadCount {
            tokens: n,
            heads: s.dep_heads.len(),
        });
    } else if n > 0 {
        let roots = s.dep_heads.iter().enumerate().filter(|(i, h)| *i == **h).count();
        if roots != 1 || dep_depths(&s.dep_heads).is_none() {
            out.push(Violation::NotATree);
        }
    }
    for (fi, f) in s.frames.iter().enumerate() {
        if f.predicate >= n {
            out.push(Violation::PredicateOutOfBounds { frame: fi });
        }
        let mut covered = BTreeSet::new();
        let mut overlap = false;
        for a in &f.args {
            if a.canonical().is_none() {
                out.push(Violation::UnknownRole {
                    frame: fi,
                    role: a.role.clone(),
                });
            }
            if a.end > n || a.start > a.end {
                out.push(Violation::SpanOutOfBounds {
                    frame: fi,
                    role: a.role.clone(),
                });
                continue;
            }
            if a.start == a.end {
                out.push(Violation::EmptySpan {
                    frame: fi,
                    role: a.role.clone(),
                });
            }
            for i in a.start..a.end {
                overlap |= !covered.insert(i);
            }
        }
        if overlap {
            out.push(Violation::OverlappingSpans { frame: fi });
        }
    }
    for p in &s.phrases {
        if p.start >= p.end || p.end > n {
            out.push(Violation::PhraseOutOfBounds {
                start: p.start,
                end: p.end,
            });
        }
    }
    out
}

/// Builds a sentence from compact `text/lemma/POS/NE` token specs; handy for
/// fixtures. Dependency heads default to a flat tree rooted at the first
/// frame's predicate (or token 0).
pub fn sentence_from_specs(id: &str, specs: &[&str], frames: Vec<SrlFrame>) -> TaggedSentence {
    let tokens: Vec<Token> = specs
        .iter()
        .map(|s| {
            let p: Vec<&str> = s.split('|').collect();
            let text = p[0];
            let lemma = p.get(1).copied().filter(|l| !l.is_empty()).unwrap_or(text);
            let pos = p.get(2).copied().unwrap_or("NN");
            let ne = p.get(3).copied().unwrap_or("");
            Token::new(text, &lemma.to_lowercase(), pos, ne)
        })
        .collect();
    let root = frames.first().map(|f| f.predicate).unwrap_or(0).min(tokens.len().saturating_sub(1));
    TaggedSentence {
        id: id.to_string(),
        dep_heads: vec![root; tokens.len()],
        tokens,
        frames,
        constituency: None,
        source: Source::default(),
        phrases: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lincoln() -> TaggedSentence {
        sentence_from_specs(
            "lincoln",
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
            vec![SrlFrame {
                predicate: 2,
                args: vec![Argument::new("ARG1", 0, 2), Argument::new("ARG2", 3, 10)],
            }],
        )
    }

    #[test]
    fn lincoln_sentence_is_valid() {
        let s = lincoln();
        assert_eq!(s.len(), 10);
        assert!(validate_sentence(&s).is_empty());
    }

    #[test]
    fn span_out_of_bounds() {
        let mut s = lincoln();
        s.frames[0].args[1].end = 11;
        let v = validate_sentence(&s);
        assert!(v.iter().any(|v| v.to_string().contains("span out of bounds")));
    }

    #[test]
    fn empty_tokens() {
        let mut s = lincoln();
        s.tokens.clear();
        s.dep_heads.clear();
        s.frames.clear();
        let v = validate_sentence(&s);
        assert_eq!(v, [Violation::NoTokens]);
        assert_eq!(v[0].to_string(), "sentence has no tokens");
    }

    #[test]
    fn two_cycle_is_not_a_tree() {
        let mut s = lincoln();
        s.dep_heads[0] = 1;
        s.dep_heads[1] = 0;
        let v = validate_sentence(&s);
        assert!(v.contains(&Violation::NotATree));
        assert_eq!(Violation::NotATree.to_string(), "dependency graph is not a tree");
    }

    #[test]
    fn role_closure() {
        assert_eq!(canonical_role("ARGM-TMP"), Some("TMP"));
        assert_eq!(canonical_role("AM-CAU"), Some("CAU"));
        assert_eq!(canonical_role("A0"), Some("ARG0"));
        assert_eq!(canonical_role("R-ARG1"), Some("ARG1"));
        assert_eq!(canonical_role("V"), Some("V"));
        assert_eq!(canonical_role("ARG7"), None);
        assert_eq!(canonical_role("FOO"), None);
    }

    #[test]
    fn ssu_encoding_rules() {
        assert_eq!(Ssu::new("ARG1", "NNP", "PER").encode(), "ARG1/NNP/PER");
        assert_eq!(Ssu::new("V", "VBZ", "").encode(), "V/VBZ/");
        assert_eq!(Ssu::new("ARG1", "", "").encode(), "ARG1//");
        assert_eq!(Ssu::decode("ARG1//LOC"), Some(Ssu::new("ARG1", "", "LOC")));
        assert_eq!(Ssu::decode("/NN/"), None);
        assert_eq!(Ssu::decode("ARG1/NN"), None);
    }

    #[test]
    fn depths_from_heads() {
        assert_eq!(dep_depths(&[1, 1, 1, 2]), Some(vec![1, 0, 1, 2]));
        assert_eq!(dep_depths(&[1, 0]), None);
    }
}
