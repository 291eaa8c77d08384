//! Answer-candidate selection (pre rules 1-6) and question filtering (post
//! rules 1-3). Every rule can be switched off, and each rejection names the
//! rule that made it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{canonical_role, is_noun_pos, TaggedSentence};
use crate::preprocess::assess_suitability;
use crate::resources::UnigramTable;
use crate::text::{contains_run, detokenize, is_punct, is_stopword, words};

/// Roles whose arguments may serve as answers.
pub const ANSWER_ROLES: &[&str] = &[
    "ARG0", "ARG1", "ARG2", "ARG3", "ARG4", "ARG5", "TMP", "LOC", "MNR", "CAU", "DIR",
];

/// POS tags pruned from candidate edges.
pub const EXCLUDED_POS: &[&str] = &[
    "RB", "RP", "CC", "DT", "IN", "MD", "PDT", "PRP", "WP", "WDT", "WRB",
];

/// Single words more frequent than this are too generic to be answers.
pub const FREQUENCY_THRESHOLD: f64 = 0.0015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "pre_1")]
    Pre1,
    #[serde(rename = "pre_2")]
    Pre2,
    #[serde(rename = "pre_3")]
    Pre3,
    #[serde(rename = "pre_4")]
    Pre4,
    #[serde(rename = "pre_5")]
    Pre5,
    #[serde(rename = "pre_6")]
    Pre6,
    #[serde(rename = "post_1")]
    Post1,
    #[serde(rename = "post_2")]
    Post2,
    #[serde(rename = "post_3")]
    Post3,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::Pre1,
        Rule::Pre2,
        Rule::Pre3,
        Rule::Pre4,
        Rule::Pre5,
        Rule::Pre6,
        Rule::Post1,
        Rule::Post2,
        Rule::Post3,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::Pre1 => "pre_1",
            Rule::Pre2 => "pre_2",
            Rule::Pre3 => "pre_3",
            Rule::Pre4 => "pre_4",
            Rule::Pre5 => "pre_5",
            Rule::Pre6 => "pre_6",
            Rule::Post1 => "post_1",
            Rule::Post2 => "post_2",
            Rule::Post3 => "post_3",
        }
    }

    pub fn from_id(id: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.id() == id)
    }
}

/// Which rules are active. All are on by default.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    #[serde(default)]
    pub disabled: BTreeSet<Rule>,
}

impl RuleSet {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn without(mut self, rule: Rule) -> Self {
        self.disabled.insert(rule);
        self
    }

    pub fn on(&self, rule: Rule) -> bool {
        !self.disabled.contains(&rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    NamedEntity,
    RoleTagged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerCandidate {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub kind: CandidateKind,
    pub role: String,
    /// Frame the role comes from.
    pub frame: usize,
    /// Mean dependency depth of the span's tokens (root 0).
    pub h_a: f64,
    /// Maximum dependency depth of the sentence.
    pub h_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejected {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub kept: Vec<AnswerCandidate>,
    pub rejected: Vec<Rejected>,
}

impl Selection {
    fn reject(&mut self, start: usize, end: usize, text: String, rule: Rule, detail: String) {
        self.rejected.push(Rejected {
            text,
            start,
            end,
            rule,
            detail,
        });
    }
}

fn span_text(s: &TaggedSentence, start: usize, end: usize) -> String {
    detokenize(s.tokens[start..end].iter().map(|t| t.text.as_str()))
}

fn is_nominal(pos: &str) -> bool {
    is_noun_pos(pos) || pos == "CD"
}

fn depth_stats(depths: &Option<Vec<usize>>, start: usize, end: usize) -> (f64, f64) {
    match depths {
        Some(d) if !d.is_empty() => {
            let sum: usize = d[start..end].iter().sum();
            let max = d.iter().copied().max().unwrap_or(0);
            (sum as f64 / (end - start) as f64, max as f64)
        }
        _ => (0.0, 0.0),
    }
}

/// Pre rules 1-4: suitability, role/NE selection, POS pruning and the
/// frequency cut-off.
pub fn select_answers(s: &TaggedSentence, freq: &UnigramTable, rules: &RuleSet) -> Selection {
    let mut sel = Selection::default();
    let n = s.tokens.len();
    if rules.on(Rule::Pre1) {
        let verdict = assess_suitability(s);
        if !verdict.suitable {
            let reasons: Vec<&str> = verdict.reasons.iter().map(|r| r.id()).collect();
            sel.reject(0, n, s.text(), Rule::Pre1, reasons.join(","));
            return sel;
        }
    }
    let depths = s.dep_depths();

    // role-tagged spans
    let mut raw: Vec<AnswerCandidate> = Vec::new();
    for (fi, f) in s.frames.iter().enumerate() {
        for a in &f.args {
            let (start, end) = (a.start.min(n), a.end.min(n));
            if start >= end {
                continue;
            }
            let role = canonical_role(&a.role).unwrap_or("");
            if role == "V" {
                continue;
            }
            if !ANSWER_ROLES.contains(&role) && rules.on(Rule::Pre2) {
                let detail = format!("role {} is not an answer role", a.role);
                sel.reject(start, end, span_text(s, start, end), Rule::Pre2, detail);
                continue;
            }
            if raw.iter().any(|c| c.start == start && c.end == end) {
                continue;
            }
            let (h_a, h_s) = depth_stats(&depths, start, end);
            raw.push(AnswerCandidate {
                start,
                end,
                text: span_text(s, start, end),
                kind: CandidateKind::RoleTagged,
                role: role.to_string(),
                frame: fi,
                h_a,
                h_s,
            });
        }
    }

    // named-entity runs
    let mut i = 0;
    while i < n {
        let ne = &s.tokens[i].ne;
        if ne.is_empty() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && &s.tokens[j].ne == ne {
            j += 1;
        }
        let cover = s.frames.iter().enumerate().find_map(|(fi, f)| {
            f.args
                .iter()
                .filter(|a| a.start <= i && j <= a.end)
                .filter_map(|a| canonical_role(&a.role))
                .find(|r| ANSWER_ROLES.contains(r))
                .map(|r| (fi, r))
        });
        match cover {
            None if rules.on(Rule::Pre2) => {
                sel.reject(i, j, span_text(s, i, j), Rule::Pre2, "named entity without a semantic role".into());
            }
            cover => {
                if !raw.iter().any(|c| c.start == i && c.end == j) {
                    let (fi, role) = cover.unwrap_or((0, ""));
                    let (h_a, h_s) = depth_stats(&depths, i, j);
                    raw.push(AnswerCandidate {
                        start: i,
                        end: j,
                        text: span_text(s, i, j),
                        kind: CandidateKind::NamedEntity,
                        role: role.to_string(),
                        frame: fi,
                        h_a,
                        h_s,
                    });
                }
            }
        }
        i = j;
    }
    raw.sort_by_key(|c| (c.start, c.end));

    for mut c in raw {
        if rules.on(Rule::Pre3) {
            let excluded = |k: usize| {
                let t = &s.tokens[k];
                EXCLUDED_POS.contains(&t.pos.as_str()) || is_punct(&t.text)
            };
            let (orig_start, orig_end, orig_text) = (c.start, c.end, c.text.clone());
            while c.start < c.end && excluded(c.start) {
                c.start += 1;
            }
            while c.end > c.start && excluded(c.end - 1) {
                c.end -= 1;
            }
            let has_noun = (c.start..c.end).any(|k| is_nominal(&s.tokens[k].pos));
            if c.start == c.end || !has_noun {
                let detail = if c.start == c.end { "nothing left after pruning" } else { "no noun" };
                sel.reject(orig_start, orig_end, orig_text, Rule::Pre3, detail.into());
                continue;
            }
            if (c.start, c.end) != (orig_start, orig_end) {
                if sel.kept.iter().any(|k| k.start == c.start && k.end == c.end) {
                    continue;
                }
                c.text = span_text(s, c.start, c.end);
                (c.h_a, c.h_s) = depth_stats(&depths, c.start, c.end);
            }
        }
        if rules.on(Rule::Pre4) && c.end - c.start == 1 {
            let p = freq.prob(&s.tokens[c.start].text);
            if p > FREQUENCY_THRESHOLD {
                let detail = format!("unigram probability {p} above {FREQUENCY_THRESHOLD}");
                sel.reject(c.start, c.end, c.text, Rule::Pre4, detail);
                continue;
            }
        }
        sel.kept.push(c);
    }
    sel
}

/// Head of a span: its first token whose head lies outside the span.
fn span_head(heads: &[usize], start: usize, end: usize) -> usize {
    (start..end)
        .find(|&k| {
            let h = heads.get(k).copied().unwrap_or(k);
            h == k || !(start..end).contains(&h)
        })
        .unwrap_or(start)
}

/// Pre rules 5 and 6: deep candidates of subordinate clauses, and nested
/// candidates.
pub fn filter_clause_and_nesting(s: &TaggedSentence, mut sel: Selection, rules: &RuleSet) -> Selection {
    if rules.on(Rule::Pre5) {
        let main = s.main_frame().map(|f| f.predicate);
        let (keep, deep): (Vec<_>, Vec<_>) = core::mem::take(&mut sel.kept).into_iter().partition(|c| {
            let subordinate = s.frames.get(c.frame).map(|f| Some(f.predicate) != main).unwrap_or(false);
            !(subordinate && c.h_a >= 2.0 / 3.0 * c.h_s)
        });
        sel.kept = keep;
        for c in deep {
            let detail = format!("h_a {:.3} >= 2/3 h_s {:.3} in a subordinate clause", c.h_a, c.h_s);
            sel.reject(c.start, c.end, c.text, Rule::Pre5, detail);
        }
    }
    if rules.on(Rule::Pre6) {
        loop {
            let mut loser = None;
            'outer: for (i, a) in sel.kept.iter().enumerate() {
                for (j, b) in sel.kept.iter().enumerate() {
                    let nested = i != j
                        && a.start <= b.start
                        && b.end <= a.end
                        && (a.end - a.start) > (b.end - b.start);
                    if nested {
                        let same_root = span_head(&s.dep_heads, a.start, a.end)
                            == span_head(&s.dep_heads, b.start, b.end);
                        loser = Some(if same_root { (i, "same root; longer removed") } else { (j, "different roots; shorter removed") });
                        break 'outer;
                    }
                }
            }
            let Some((k, why)) = loser else { break };
            let c = sel.kept.remove(k);
            sel.reject(c.start, c.end, c.text, Rule::Pre6, why.into());
        }
    }
    sel
}

/// All pre rules in order.
pub fn preprocess_answers(s: &TaggedSentence, freq: &UnigramTable, rules: &RuleSet) -> Selection {
    let sel = select_answers(s, freq, rules);
    filter_clause_and_nesting(s, sel, rules)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        }
        for c in &self.children {
            c.collect(out);
        }
    }

    /// Leaf positions under nodes labelled `label` (function tags such as
    /// `SBAR-ADV` count).
    fn leaves_under(&self, label: &str, next: &mut usize, inside: bool, out: &mut Vec<usize>) {
        let here = inside || self.label == label || self.label.starts_with(&format!("{label}-"));
        if self.is_leaf() {
            if inside {
                out.push(*next);
            }
            *next += 1;
        }
        for c in &self.children {
            c.leaves_under(label, next, here && !self.is_leaf(), out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unbalanced brackets at byte {0}")]
    Unbalanced(usize),
    #[error("empty tree")]
    Empty,
}

/// Parses a Penn-style bracketed tree such as `(S (NP (DT The) (NN cat)))`.
pub fn parse_tree(src: &str) -> Result<Tree, TreeError> {
    let mut stack: Vec<Tree> = Vec::new();
    let mut done: Option<Tree> = None;
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                i += 1;
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b'(' | b')') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                stack.push(Tree {
                    label: src[start..i].to_string(),
                    children: Vec::new(),
                });
            }
            b')' => {
                let node = stack.pop().ok_or(TreeError::Unbalanced(i))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None if done.is_none() => done = Some(node),
                    None => return Err(TreeError::Unbalanced(i)),
                }
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b'(' | b')') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                let parent = stack.last_mut().ok_or(TreeError::Unbalanced(start))?;
                parent.children.push(Tree {
                    label: src[start..i].to_string(),
                    children: Vec::new(),
                });
            }
        }
    }
    if !stack.is_empty() {
        return Err(TreeError::Unbalanced(src.len()));
    }
    let mut t = done.ok_or(TreeError::Empty)?;
    // an unlabelled wrapper `( (S ...) )`
    while t.label.is_empty() && t.children.len() == 1 {
        t = t.children.remove(0);
    }
    Ok(t)
}

/// Text of leaves `start..end` with every SBAR subtree removed and dangling
/// punctuation trimmed.
pub fn main_body_span(tree: &Tree, start: usize, end: usize) -> String {
    let leaves = tree.leaves();
    let mut sbar = Vec::new();
    tree.leaves_under("SBAR", &mut 0, false, &mut sbar);
    let mut kept: Vec<&str> = (start..end.min(leaves.len()))
        .filter(|k| !sbar.contains(k))
        .map(|k| leaves[k])
        .collect();
    while kept.first().is_some_and(|w| is_punct(w)) {
        kept.remove(0);
    }
    while kept.last().is_some_and(|w| is_punct(w)) {
        kept.pop();
    }
    detokenize(kept)
}

/// Main body of an answer string inside a bracketed sentence tree. `None`
/// when there is no tree or the answer is not a run of its leaves; callers
/// then keep the answer unchanged.
pub fn main_body(answer: &str, constituency: Option<&str>) -> Option<String> {
    let tree = parse_tree(constituency?).ok()?;
    let leaves: Vec<String> = tree.leaves().iter().map(|l| l.to_lowercase()).collect();
    let target: Vec<String> = tokens_of(answer);
    if target.is_empty() {
        return None;
    }
    let start = leaves.windows(target.len()).position(|w| w == target.as_slice())?;
    Some(main_body_span(&tree, start, start + target.len()))
}

/// Lower-cased tokens with punctuation split off, for matching against tree
/// leaves.
fn tokens_of(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut cur = String::new();
        for c in chunk.chars() {
            if c.is_alphanumeric() || c == '\'' || c == '-' {
                cur.extend(c.to_lowercase());
            } else {
                if !cur.is_empty() {
                    out.push(core::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSentence {
    pub text: String,
    pub suitable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub keep: bool,
    pub rule: Option<Rule>,
    pub detail: String,
}

impl FilterVerdict {
    fn keep() -> Self {
        FilterVerdict {
            keep: true,
            rule: None,
            detail: String::new(),
        }
    }

    fn drop(rule: Rule, detail: String) -> Self {
        FilterVerdict {
            keep: false,
            rule: Some(rule),
            detail,
        }
    }
}

/// Index of the context sentences sharing the most words with question and
/// answer together (all of them on a tie).
pub fn attribute(question: &str, answer: &str, context: &[ContextSentence]) -> Vec<usize> {
    let qa: BTreeSet<String> = words(question).into_iter().chain(words(answer)).collect();
    let overlaps: Vec<usize> = context
        .iter()
        .map(|c| words(&c.text).into_iter().collect::<BTreeSet<_>>().intersection(&qa).count())
        .collect();
    let best = overlaps.iter().copied().max().unwrap_or(0);
    (0..context.len()).filter(|&i| overlaps[i] == best).collect()
}

/// Post rules 1-3. `answer_body` is the answer's main body (the answer
/// itself when no tree is available).
pub fn filter_question(
    question: &str,
    answer_body: &str,
    context: &[ContextSentence],
    rules: &RuleSet,
) -> FilterVerdict {
    let q_words = words(question);
    if rules.on(Rule::Post1) {
        let body = words(answer_body);
        if body.is_empty() {
            return FilterVerdict::drop(Rule::Post1, "answer has no main body".into());
        }
        if contains_run(&q_words, &body) {
            return FilterVerdict::drop(Rule::Post1, format!("question contains {answer_body:?}"));
        }
    }
    if rules.on(Rule::Post2) {
        let content = q_words.iter().filter(|w| !is_stopword(w)).count();
        if content <= 1 {
            return FilterVerdict::drop(Rule::Post2, format!("{content} content word(s)"));
        }
    }
    if rules.on(Rule::Post3) && !context.is_empty() {
        let tied = attribute(question, answer_body, context);
        if tied.iter().all(|&i| !context[i].suitable) {
            return FilterVerdict::drop(Rule::Post3, format!("attributed to unsuitable sentence {tied:?}"));
        }
    }
    FilterVerdict::keep()
}
