//! Distractor generation: target classification, the three generator
//! families, candidate filtering and ranking, and MCQ assembly.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{is_noun_pos, TaggedSentence};
use crate::resources::{EmbeddingTable, EntityKb, LexicalGraph, ResourceError, DEFAULT_INTERVAL};
use crate::text::{detokenize, is_punct, is_stopword, match_case, words};

/// Lowest `lo` the type-3 interval may be relaxed to.
pub const INTERVAL_FLOOR: f64 = 0.4;
pub const INTERVAL_STEP: f64 = 0.05;

const WEEKDAYS: [&str; 7] = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];
const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october",
    "november", "december",
];
const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];
const ORDINAL_WORDS: [&str; 13] = [
    "zeroth", "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth",
];
const INDEFINITE: &[&str] = &[
    "anybody", "anyone", "anything", "everybody", "everyone", "everything", "nobody", "nothing", "somebody",
    "someone", "something", "thing", "things",
];

/// Replacement preference, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetType {
    Type1Temporal,
    Type1Numeric,
    Type2Person,
    Type2Location,
    Type2Org,
    Type3Noun,
    Type3Adjective,
    Type3Verb,
    Type3Adverb,
}

impl TargetType {
    pub fn is_type1(self) -> bool {
        matches!(self, TargetType::Type1Temporal | TargetType::Type1Numeric)
    }

    pub fn is_type2(self) -> bool {
        matches!(self, TargetType::Type2Person | TargetType::Type2Location | TargetType::Type2Org)
    }

    fn ne_tag(self) -> Option<&'static str> {
        match self {
            TargetType::Type2Person => Some("PER"),
            TargetType::Type2Location => Some("LOC"),
            TargetType::Type2Org => Some("ORG"),
            _ => None,
        }
    }

    /// Lexical-graph POS letter for type-3 targets.
    fn graph_pos(self) -> Option<&'static str> {
        match self {
            TargetType::Type3Noun => Some("n"),
            TargetType::Type3Adjective => Some("a"),
            TargetType::Type3Verb => Some("v"),
            TargetType::Type3Adverb => Some("r"),
            _ => None,
        }
    }
}

/// Where a token sits in its clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleClass {
    Subject,
    Object,
    Predicate,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerToken {
    pub text: String,
    pub pos: String,
    #[serde(default)]
    pub ne: String,
    pub role: RoleClass,
}

impl AnswerToken {
    pub fn new(text: &str, pos: &str, ne: &str, role: RoleClass) -> Self {
        AnswerToken {
            text: text.into(),
            pos: pos.into(),
            ne: ne.into(),
            role,
        }
    }
}

/// Answer tokens with their clause roles. The clause is the frame whose
/// predicate lies inside the answer, else the main frame.
pub fn answer_tokens(s: &TaggedSentence, idx: &[usize]) -> Vec<AnswerToken> {
    let frame = s
        .frames
        .iter()
        .find(|f| idx.contains(&f.predicate))
        .or_else(|| s.main_frame());
    idx.iter()
        .filter(|&&i| i < s.tokens.len())
        .map(|&i| {
            let t = &s.tokens[i];
            let role = match frame {
                Some(f) if f.predicate == i => RoleClass::Predicate,
                Some(f) if f.subject().is_some_and(|a| a.contains(i)) => RoleClass::Subject,
                Some(f)
                    if f.args.iter().any(|a| {
                        a.contains(i) && crate::annotation::arg_number(crate::annotation::canonical_role(&a.role).unwrap_or("")).is_some()
                    }) =>
                {
                    RoleClass::Object
                }
                _ => RoleClass::Other,
            };
            AnswerToken::new(&t.text, &t.pos, &t.ne, role)
        })
        .collect()
}

fn normalize_ne(ne: &str) -> Option<&'static str> {
    match ne {
        "PER" | "PERSON" => Some("PER"),
        "LOC" | "GPE" | "LOCATION" => Some("LOC"),
        "ORG" | "ORGANIZATION" => Some("ORG"),
        _ => None,
    }
}

/// A parsed type-1 value.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Weekday(i64),
    Month(i64),
    /// Minutes after midnight.
    Clock(i64),
    Number {
        value: i64,
        prefix: String,
        suffix: String,
        digits: usize,
        word: bool,
        ordinal: bool,
    },
}

fn ordinal_suffix(n: i64) -> &'static str {
    match (n % 100, n % 10) {
        (11..=13, _) => "th",
        (_, 1) => "st",
        (_, 2) => "nd",
        (_, 3) => "rd",
        _ => "th",
    }
}

fn parse_value(text: &str) -> Option<Value> {
    let lower = text.to_lowercase();
    if let Some(i) = WEEKDAYS.iter().position(|d| *d == lower) {
        return Some(Value::Weekday(i as i64 + 1));
    }
    if let Some(i) = MONTHS.iter().position(|m| *m == lower) {
        return Some(Value::Month(i as i64 + 1));
    }
    if let Some((h, m)) = lower.split_once(':') {
        if let (Ok(h), Ok(m)) = (h.parse::<i64>(), m.parse::<i64>()) {
            if (0..24).contains(&h) && (0..60).contains(&m) && text.len() <= 5 {
                return Some(Value::Clock(h * 60 + m));
            }
        }
    }
    let number = |value: i64, word: bool, ordinal: bool| Value::Number {
        value,
        prefix: String::new(),
        suffix: String::new(),
        digits: 0,
        word,
        ordinal,
    };
    if let Some(i) = NUMBER_WORDS.iter().position(|w| *w == lower) {
        return Some(number(i as i64, true, false));
    }
    if let Some(i) = ORDINAL_WORDS.iter().position(|w| *w == lower) {
        return Some(number(i as i64, true, true));
    }
    let start = text.find(|c: char| c.is_ascii_digit())?;
    let rest = &text[start..];
    let end = rest.find(|c: char| !(c.is_ascii_digit() || c == ',')).unwrap_or(rest.len());
    let digits: String = rest[..end].chars().filter(char::is_ascii_digit).collect();
    let value = digits.parse::<i64>().ok()?;
    let suffix = &rest[end..];
    let ordinal = matches!(suffix.to_lowercase().as_str(), "st" | "nd" | "rd" | "th");
    Some(Value::Number {
        value,
        prefix: text[..start].to_string(),
        suffix: if ordinal { String::new() } else { suffix.to_string() },
        digits: digits.len(),
        word: false,
        ordinal,
    })
}

fn render(v: &Value, model: &str) -> String {
    let out = match v {
        Value::Weekday(d) => String::from(WEEKDAYS[(*d - 1) as usize]),
        Value::Month(m) => String::from(MONTHS[(*m - 1) as usize]),
        Value::Clock(t) => format!("{}:{:02}", t / 60, t % 60),
        Value::Number {
            value,
            prefix,
            suffix,
            word,
            ordinal,
            ..
        } => {
            let n = *value;
            if *word && *ordinal && (n as usize) < ORDINAL_WORDS.len() {
                String::from(ORDINAL_WORDS[n as usize])
            } else if *word && !*ordinal && (n as usize) < NUMBER_WORDS.len() {
                String::from(NUMBER_WORDS[n as usize])
            } else if *ordinal {
                format!("{prefix}{n}{}", ordinal_suffix(n))
            } else {
                format!("{prefix}{n}{suffix}")
            }
        }
    };
    match v {
        Value::Number { word: false, .. } | Value::Clock(_) => out,
        _ => match_case(model, &out),
    }
}

/// Type-1 perturbation algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Type1Algorithm {
    /// Plus or minus one or two units.
    Step,
    /// Uniform within min(10, 50% of the value) units.
    Window,
    /// Any value of the same kind (same digit count for plain numbers).
    Unrestricted,
}

impl Type1Algorithm {
    pub const ALL: [Type1Algorithm; 3] = [Type1Algorithm::Step, Type1Algorithm::Window, Type1Algorithm::Unrestricted];
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistractorError {
    #[error("cannot read {0:?} as a number, date or time")]
    Unparseable(String),
    #[error("no replacement candidates for {0:?}")]
    NoCandidates(String),
    #[error("{0:?} is in neither the embeddings nor the lexical graph")]
    UnknownTarget(String),
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("answer is empty")]
    EmptyAnswer,
}

fn wrap(v: i64, period: i64) -> i64 {
    (v - 1).rem_euclid(period) + 1
}

fn shift(v: &Value, delta: i64) -> Value {
    match v {
        Value::Weekday(d) => Value::Weekday(wrap(d + delta, 7)),
        Value::Month(m) => Value::Month(wrap(m + delta, 12)),
        Value::Clock(t) => Value::Clock((t + delta).rem_euclid(24 * 60)),
        Value::Number { value, .. } => {
            let mut out = v.clone();
            if let Value::Number { value: ref mut x, .. } = out {
                // stay non-negative by flipping the direction
                *x = if value + delta < 0 { value - delta } else { value + delta };
            }
            out
        }
    }
}

fn magnitude(v: &Value) -> i64 {
    match v {
        Value::Weekday(d) | Value::Month(d) => *d,
        Value::Clock(t) => *t,
        Value::Number { value, .. } => *value,
    }
}

/// Perturbs a type-1 value with the given (or a random) algorithm. The
/// result always differs from the input.
pub fn perturb_type1<R: Rng>(
    text: &str,
    algorithm: Option<Type1Algorithm>,
    rng: &mut R,
) -> Result<String, DistractorError> {
    let v = parse_value(text).ok_or_else(|| DistractorError::Unparseable(text.to_string()))?;
    let algorithm = algorithm.unwrap_or_else(|| *Type1Algorithm::ALL.choose(rng).unwrap());
    for _ in 0..64 {
        let next = match algorithm {
            Type1Algorithm::Step => shift(&v, *[-2i64, -1, 1, 2].choose(rng).unwrap()),
            Type1Algorithm::Window => {
                let w = (magnitude(&v).abs() / 2).clamp(1, 10);
                let mut d = rng.gen_range(-w..w);
                if d >= 0 {
                    d += 1;
                }
                shift(&v, d)
            }
            Type1Algorithm::Unrestricted => match &v {
                Value::Weekday(_) => Value::Weekday(rng.gen_range(1..=7)),
                Value::Month(_) => Value::Month(rng.gen_range(1..=12)),
                Value::Clock(_) => Value::Clock(rng.gen_range(0..24 * 60)),
                Value::Number { digits, word, value, .. } => {
                    let (lo, hi) = if *word {
                        (0, if *value <= 12 { 12 } else { 20 })
                    } else {
                        let d = (*digits).clamp(1, 18) as u32;
                        (if d == 1 { 0 } else { 10i64.pow(d - 1) }, 10i64.pow(d) - 1)
                    };
                    let mut out = v.clone();
                    if let Value::Number { value: ref mut x, .. } = out {
                        *x = rng.gen_range(lo..=hi);
                    }
                    out
                }
            },
        };
        let rendered = render(&next, text);
        if next != v && !rendered.eq_ignore_ascii_case(text) {
            return Ok(rendered);
        }
    }
    Err(DistractorError::NoCandidates(text.to_string()))
}

/// Type of a single answer token, or `None` for function words.
pub fn classify_token(t: &AnswerToken) -> Option<TargetType> {
    let lower = t.text.to_lowercase();
    if WEEKDAYS.contains(&lower.as_str()) || (MONTHS.contains(&lower.as_str()) && t.pos == "NNP") {
        return Some(TargetType::Type1Temporal);
    }
    if matches!(parse_value(&t.text), Some(Value::Clock(_))) {
        return Some(TargetType::Type1Temporal);
    }
    let numeric_text = t.text.chars().any(|c| c.is_ascii_digit()) && parse_value(&t.text).is_some();
    if (t.pos == "CD" || numeric_text || ORDINAL_WORDS[1..].contains(&lower.as_str())) && parse_value(&t.text).is_some() {
        return Some(TargetType::Type1Numeric);
    }
    match normalize_ne(&t.ne) {
        Some("PER") => return Some(TargetType::Type2Person),
        Some("LOC") => return Some(TargetType::Type2Location),
        Some("ORG") => return Some(TargetType::Type2Org),
        _ => {}
    }
    if is_stopword(&lower) || INDEFINITE.contains(&lower.as_str()) || is_punct(&t.text) {
        return None;
    }
    let p = t.pos.as_str();
    if is_noun_pos(p) {
        Some(TargetType::Type3Noun)
    } else if p.starts_with("JJ") {
        Some(TargetType::Type3Adjective)
    } else if p.starts_with("VB") {
        Some(TargetType::Type3Verb)
    } else if p.starts_with("RB") {
        Some(TargetType::Type3Adverb)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    /// Token range inside the answer.
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub ttype: TargetType,
    pub role: RoleClass,
}

/// Targets in replacement preference: type, then role, then rightmost
/// first. Named-entity runs form one target.
pub fn find_targets(answer: &[AnswerToken]) -> Vec<Target> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < answer.len() {
        let Some(ttype) = classify_token(&answer[i]) else {
            i += 1;
            continue;
        };
        let mut j = i + 1;
        if ttype.is_type2() {
            while j < answer.len() && answer[j].ne == answer[i].ne {
                j += 1;
            }
        }
        out.push(Target {
            start: i,
            end: j,
            text: detokenize(answer[i..j].iter().map(|t| t.text.as_str())),
            ttype,
            role: answer[i].role,
        });
        i = j;
    }
    out.sort_by(|a, b| {
        a.ttype
            .cmp(&b.ttype)
            .then(a.role.cmp(&b.role))
            .then(b.start.cmp(&a.start))
    });
    out
}

/// Entity replacements for a type-2 target: article entities with the same
/// tag, then members of the target's KB buckets, then any KB member with
/// the tag. Each group is shuffled.
pub fn swap_type2<R: Rng>(
    target: &Target,
    article_entities: &[(String, String)],
    kb: &EntityKb,
    rng: &mut R,
) -> Result<Vec<String>, DistractorError> {
    let tag = target.ttype.ne_tag().unwrap_or("");
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(target.text.to_lowercase());
    let mut out = Vec::new();
    let mut take = |group: Vec<String>, out: &mut Vec<String>, rng: &mut R| {
        let mut group: Vec<String> = group.into_iter().filter(|g| seen.insert(g.to_lowercase())).collect();
        group.shuffle(rng);
        out.extend(group);
    };
    let article: Vec<String> = article_entities
        .iter()
        .filter(|(_, t)| normalize_ne(t) == Some(tag))
        .map(|(e, _)| e.clone())
        .collect();
    take(article, &mut out, rng);
    take(kb.peers(&target.text).into_iter().map(String::from).collect(), &mut out, rng);
    take(kb.same_tag(tag, &target.text).into_iter().map(String::from).collect(), &mut out, rng);
    if out.is_empty() {
        return Err(DistractorError::NoCandidates(target.text.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub word: String,
    pub antonym: bool,
}

/// Embedding neighbours of the target in the interval plus its hypernyms.
pub fn candidates_type3(
    target: &str,
    ttype: TargetType,
    emb: &EmbeddingTable,
    lex: &LexicalGraph,
    interval: (f64, f64),
) -> Result<Vec<Candidate>, DistractorError> {
    let in_emb = emb.contains(target);
    if !in_emb && !lex.contains(target) {
        return Err(DistractorError::UnknownTarget(target.to_string()));
    }
    let mut words: Vec<String> = Vec::new();
    if in_emb {
        words.extend(emb.neighbors(target, interval.0, interval.1)?.into_iter().map(|(w, _)| w));
    }
    for h in lex.hypernyms(target, ttype.graph_pos()) {
        if !words.contains(&h) {
            words.push(h);
        }
    }
    Ok(words
        .into_iter()
        .map(|w| Candidate {
            antonym: lex.are_antonyms(&w, target),
            word: w,
        })
        .collect())
}

/// Levenshtein distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterReason {
    ContainsTarget,
    Misspelling,
}

/// Drops candidates that contain the target as a word run, and
/// near-duplicates (shared prefix of 3+ characters and edit distance
/// below 3).
pub fn filter_candidates(cands: Vec<Candidate>, target: &str) -> (Vec<Candidate>, Vec<(Candidate, FilterReason)>) {
    let t_words = words(target);
    let t = target.to_lowercase();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for c in cands {
        let w = c.word.to_lowercase();
        if crate::text::contains_run(&words(&w), &t_words) {
            removed.push((c, FilterReason::ContainsTarget));
        } else if common_prefix(&w, &t) >= 3 && levenshtein(&w, &t) < 3 {
            removed.push((c, FilterReason::Misspelling));
        } else {
            kept.push(c);
        }
    }
    (kept, removed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistractorScore {
    pub e: usize,
    pub s_v: f64,
    pub s_n: f64,
    pub s_d: f64,
    pub r_prime: f64,
    pub r: f64,
}

pub fn edit_score(e: usize) -> f64 {
    1.0 - 1.0 / (1.0 + libm::exp(e as f64))
}

/// R' from its parts, clamped into [0, 1].
pub fn combined_score(s_v: f64, s_n: f64, s_d: f64, antonym: bool) -> f64 {
    let r = if antonym {
        (2.0 * s_v + s_n + s_d) / 4.0
    } else {
        (s_v + s_n + s_d) / 3.0
    };
    r.clamp(0.0, 1.0)
}

/// -R' ln R', with value 0 at R' = 0.
pub fn entropy_score(r_prime: f64) -> f64 {
    if r_prime <= 0.0 {
        0.0
    } else {
        -r_prime * libm::log(r_prime)
    }
}

pub fn score(
    candidate: &str,
    target: &str,
    emb: &EmbeddingTable,
    lex: &LexicalGraph,
    antonym: bool,
) -> Result<DistractorScore, DistractorError> {
    let s_v = emb.similarity(candidate, target)?;
    let s_n = lex.wup(candidate, target);
    let e = levenshtein(&candidate.to_lowercase(), &target.to_lowercase());
    let s_d = edit_score(e);
    let r_prime = combined_score(s_v, s_n, s_d, antonym);
    Ok(DistractorScore {
        e,
        s_v,
        s_n,
        s_d,
        r_prime,
        r: entropy_score(r_prime),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Type1(Type1Algorithm),
    Type2,
    Type3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distractor {
    pub text: String,
    pub target: String,
    pub replacement: String,
    pub generator: Generator,
    pub score: Option<DistractorScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorSet {
    pub distractors: Vec<Distractor>,
    /// Fewer than requested even after relaxing the interval.
    pub partial: bool,
}

/// Everything the generator reads.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub embeddings: &'a EmbeddingTable,
    pub lexicon: &'a LexicalGraph,
    pub kb: &'a EntityKb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorConfig {
    pub interval: (f64, f64),
    pub seed: u64,
    pub n: usize,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        DistractorConfig {
            interval: DEFAULT_INTERVAL,
            seed: 0,
            n: 3,
        }
    }
}

fn starts_with_vowel_sound(word: &str) -> bool {
    let w = word.to_lowercase();
    if ["hour", "honest", "honor", "heir"].iter().any(|p| w.starts_with(p)) {
        return true;
    }
    if ["uni", "use", "one", "eu"].iter().any(|p| w.starts_with(p)) {
        return false;
    }
    w.starts_with(['a', 'e', 'i', 'o', 'u'])
}

/// Answer text with `target` replaced, fixing a preceding a/an.
pub fn replace_target(answer: &[AnswerToken], target: &Target, replacement: &str) -> String {
    let mut parts: Vec<String> = answer.iter().map(|t| t.text.clone()).collect();
    let replacement = match_case(&target.text, replacement);
    if target.start > 0 {
        let article = parts[target.start - 1].to_lowercase();
        if article == "a" || article == "an" {
            let fixed = if starts_with_vowel_sound(&replacement) { "an" } else { "a" };
            parts[target.start - 1] = match_case(&parts[target.start - 1], fixed);
        }
    }
    parts.splice(target.start..target.end, [replacement]);
    detokenize(parts.iter().map(String::as_str))
}

/// Replacement words for one target, best first.
fn replacements_for(
    target: &Target,
    res: &Resources<'_>,
    article_entities: &[(String, String)],
    interval: (f64, f64),
    want: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(String, Generator, Option<DistractorScore>)> {
    if target.ttype.is_type1() {
        let mut out: Vec<(String, Generator, Option<DistractorScore>)> = Vec::new();
        for _ in 0..want * 16 {
            if out.len() >= want {
                break;
            }
            let alg = *Type1Algorithm::ALL.choose(rng).unwrap();
            if let Ok(v) = perturb_type1(&target.text, Some(alg), rng) {
                if !out.iter().any(|(w, _, _)| *w == v) {
                    out.push((v, Generator::Type1(alg), None));
                }
            }
        }
        return out;
    }
    if target.ttype.is_type2() {
        return swap_type2(target, article_entities, res.kb, rng)
            .map(|v| v.into_iter().map(|w| (w, Generator::Type2, None)).collect())
            .unwrap_or_default();
    }
    let Ok(cands) = candidates_type3(&target.text, target.ttype, res.embeddings, res.lexicon, interval) else {
        return Vec::new();
    };
    let (kept, _) = filter_candidates(cands, &target.text);
    let mut scored: Vec<(String, Generator, Option<DistractorScore>)> = kept
        .into_iter()
        .filter_map(|c| {
            let s = score(&c.word, &target.text, res.embeddings, res.lexicon, c.antonym).ok()?;
            Some((c.word, Generator::Type3, Some(s)))
        })
        .collect();
    scored.sort_by(|a, b| {
        let (ra, rb) = (a.2.map_or(0.0, |s| s.r), b.2.map_or(0.0, |s| s.r));
        rb.total_cmp(&ra).then_with(|| a.0.cmp(&b.0))
    });
    scored
}

/// Generates up to `cfg.n` distractors for an answer.
pub fn generate_distractors(
    answer: &[AnswerToken],
    article_entities: &[(String, String)],
    res: &Resources<'_>,
    cfg: &DistractorConfig,
) -> Result<DistractorSet, DistractorError> {
    if answer.is_empty() {
        return Err(DistractorError::EmptyAnswer);
    }
    let original = detokenize(answer.iter().map(|t| t.text.as_str()));
    let targets = find_targets(answer);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out: Vec<Distractor> = Vec::new();
    let (mut lo, hi) = cfg.interval;
    loop {
        for t in &targets {
            if out.len() >= cfg.n {
                break;
            }
            let want = cfg.n - out.len();
            for (word, generator, score) in replacements_for(t, res, article_entities, (lo, hi), want, &mut rng) {
                if out.len() >= cfg.n {
                    break;
                }
                let text = replace_target(answer, t, &word);
                if text.eq_ignore_ascii_case(&original) || out.iter().any(|d| d.text == text) {
                    continue;
                }
                out.push(Distractor {
                    text,
                    target: t.text.clone(),
                    replacement: word,
                    generator,
                    score,
                });
            }
        }
        let has_type3 = targets.iter().any(|t| t.ttype.graph_pos().is_some());
        if out.len() >= cfg.n || !has_type3 || lo - INTERVAL_STEP < INTERVAL_FLOOR - 1e-9 {
            break;
        }
        lo -= INTERVAL_STEP;
    }
    Ok(DistractorSet {
        partial: out.len() < cfg.n,
        distractors: out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionProvenance {
    /// `answer`, or the generator of the distractor.
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replacement: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<DistractorScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mcq {
    pub id: String,
    pub question: String,
    pub options: Vec<String>,
    pub answer_index: usize,
    pub provenance: Vec<OptionProvenance>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100000001b3))
}

/// Per-item seed, independent of the order items are processed in.
pub fn item_seed(seed: u64, id: &str) -> u64 {
    seed ^ fnv1a(id)
}

fn generator_name(g: Generator) -> String {
    match g {
        Generator::Type1(a) => format!(
            "type1_{}",
            match a {
                Type1Algorithm::Step => "step",
                Type1Algorithm::Window => "window",
                Type1Algorithm::Unrestricted => "unrestricted",
            }
        ),
        Generator::Type2 => "type2".into(),
        Generator::Type3 => "type3".into(),
    }
}

/// Shuffles answer and distractors with a permutation derived from `seed`
/// and the item id.
pub fn assemble_mcq(id: &str, question: &str, answer: &str, distractors: &[Distractor], seed: u64) -> Mcq {
    let mut items: Vec<(String, OptionProvenance)> = vec![(
        answer.to_string(),
        OptionProvenance {
            source: "answer".into(),
            target: None,
            replacement: None,
            score: None,
        },
    )];
    items.extend(distractors.iter().map(|d| {
        (
            d.text.clone(),
            OptionProvenance {
                source: generator_name(d.generator),
                target: Some(d.target.clone()),
                replacement: Some(d.replacement.clone()),
                score: d.score,
            },
        )
    }));
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(item_seed(seed, id)));
    let answer_index = order.iter().position(|&i| i == 0).unwrap_or(0);
    let (options, provenance) = order.into_iter().map(|i| items[i].clone()).unzip();
    Mcq {
        id: id.to_string(),
        question: question.to_string(),
        options,
        answer_index,
        provenance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources::{LexicalGraphData, Sense};

    fn tok(text: &str, pos: &str) -> AnswerToken {
        AnswerToken::new(text, pos, "", RoleClass::Object)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_token(&tok("2020", "CD")), Some(TargetType::Type1Numeric));
        assert_eq!(classify_token(&tok("Friday", "NNP")), Some(TargetType::Type1Temporal));
        assert_eq!(classify_token(&tok("21st", "JJ")), Some(TargetType::Type1Numeric));
        assert_eq!(classify_token(&tok("profession", "NN")), Some(TargetType::Type3Noun));
        assert_eq!(classify_token(&tok("someone", "NN")), None);
        assert_eq!(classify_token(&tok("the", "DT")), None);
        let ny = [
            AnswerToken::new("New", "NNP", "LOC", RoleClass::Object),
            AnswerToken::new("York", "NNP", "LOC", RoleClass::Object),
        ];
        let t = find_targets(&ny);
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].text.as_str(), t[0].ttype), ("New York", TargetType::Type2Location));
    }

    #[test]
    fn type1_forms_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for alg in Type1Algorithm::ALL {
            for _ in 0..50 {
                let y: i64 = perturb_type1("2020", Some(alg), &mut rng).unwrap().parse().unwrap();
                assert_ne!(y, 2020);
                match alg {
                    Type1Algorithm::Step => assert!((2018..=2022).contains(&y)),
                    Type1Algorithm::Window => assert!((2010..=2030).contains(&y)),
                    Type1Algorithm::Unrestricted => assert!((1000..=9999).contains(&y)),
                }
            }
        }
        let d = perturb_type1("Friday", Some(Type1Algorithm::Step), &mut rng).unwrap();
        assert!(["Wednesday", "Thursday", "Saturday", "Sunday"].contains(&d.as_str()), "{d}");
        let o = perturb_type1("21st", Some(Type1Algorithm::Step), &mut rng).unwrap();
        assert!(["19th", "20th", "22nd", "23rd"].contains(&o.as_str()), "{o}");
        assert!(matches!(
            perturb_type1("soon", None, &mut rng),
            Err(DistractorError::Unparseable(_))
        ));
    }

    #[test]
    fn weekday_wraps() {
        assert_eq!(shift(&Value::Weekday(7), 1), Value::Weekday(1));
        assert_eq!(shift(&Value::Month(1), -2), Value::Month(11));
        assert_eq!(render(&Value::Weekday(4), "Friday"), "Thursday");
    }

    #[test]
    fn levenshtein_small_cases() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("knowladge", "knowledge"), 1);
    }

    #[test]
    fn filters() {
        let c = |w: &str| Candidate { word: w.into(), antonym: false };
        let (kept, removed) = filter_candidates(vec![c("breaking news"), c("report")], "news");
        assert_eq!(kept, [c("report")]);
        assert_eq!(removed[0].1, FilterReason::ContainsTarget);
        let (kept, removed) = filter_candidates(vec![c("knowladge"), c("wisdom")], "knowledge");
        assert_eq!(kept, [c("wisdom")]);
        assert_eq!(removed[0].1, FilterReason::Misspelling);
        let (kept, _) = filter_candidates(vec![c("perspectives")], "insights");
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn formula_endpoints() {
        assert_eq!(edit_score(0), 0.5);
        assert_eq!(entropy_score(1.0), 0.0);
        assert_eq!(entropy_score(0.0), 0.0);
        assert_eq!(combined_score(-1.0, 0.1, 0.5, false), 0.0);
    }

    #[test]
    fn article_agreement() {
        let answer = [tok("an", "DT"), tok("economic", "JJ"), tok("decision", "NN")];
        let t = Target {
            start: 1,
            end: 2,
            text: "economic".into(),
            ttype: TargetType::Type3Adjective,
            role: RoleClass::Object,
        };
        assert_eq!(replace_target(&answer, &t, "political"), "a political decision");
    }

    #[test]
    fn kb_swap_prefers_article() {
        let kb = EntityKb {
            buckets: vec![crate::resources::Bucket {
                name: "cities".into(),
                tag: "LOC".into(),
                members: vec!["New York".into(), "Boston".into(), "Chicago".into()],
            }],
        };
        let t = Target {
            start: 0,
            end: 1,
            text: "Chie".into(),
            ttype: TargetType::Type2Person,
            role: RoleClass::Subject,
        };
        let art = [("Chie".to_string(), "PER".to_string()), ("Akira".to_string(), "PERSON".to_string())];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(swap_type2(&t, &art, &kb, &mut rng).unwrap(), ["Akira"]);
        let ny = Target { text: "New York".into(), ttype: TargetType::Type2Location, ..t.clone() };
        let got = swap_type2(&ny, &[], &kb, &mut rng).unwrap();
        assert_eq!(got.len(), 2);
        assert!(!got.contains(&"New York".to_string()));
        assert!(swap_type2(&t, &[], &kb, &mut rng).is_err());
    }

    #[test]
    fn mcq_is_seeded() {
        let d = Distractor {
            text: "by 2021".into(),
            target: "2020".into(),
            replacement: "2021".into(),
            generator: Generator::Type1(Type1Algorithm::Step),
            score: None,
        };
        let ds = [d.clone(), Distractor { text: "by 2019".into(), ..d.clone() }, Distractor { text: "by 2030".into(), ..d }];
        let a = assemble_mcq("q1", "When?", "by 2020", &ds, 7);
        let b = assemble_mcq("q1", "When?", "by 2020", &ds, 7);
        assert_eq!(a, b);
        assert_eq!(a.options[a.answer_index], "by 2020");
        assert_eq!(a.provenance[a.answer_index].source, "answer");
    }

    #[test]
    fn type3_end_to_end() {
        let mut emb = EmbeddingTable::new(2);
        emb.insert("door", vec![1.0, 0.0]).unwrap();
        emb.insert("driveway", vec![0.8, 0.6]).unwrap();
        emb.insert("doors", vec![0.99, 0.1]).unwrap();
        emb.insert("sky", vec![0.0, 1.0]).unwrap();
        let lex = LexicalGraph::new(LexicalGraphData {
            senses: vec![Sense { id: "e".into(), pos: "n".into(), lemmas: vec!["entity".into()] }],
            ..Default::default()
        })
        .unwrap();
        let kb = EntityKb::default();
        let res = Resources { embeddings: &emb, lexicon: &lex, kb: &kb };
        let answer = [tok("the", "DT"), tok("door", "NN")];
        let set = generate_distractors(&answer, &[], &res, &DistractorConfig::default()).unwrap();
        assert!(set.partial);
        let texts: Vec<&str> = set.distractors.iter().map(|d| d.text.as_str()).collect();
        assert_eq!(texts, ["the driveway"]);
    }
}
