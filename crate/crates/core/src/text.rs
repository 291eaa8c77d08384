//! Small text helpers shared by the pipeline stages.

use alloc::string::String;
use alloc::vec::Vec;

/// English function words. WH words are deliberately absent: a question such
/// as "Where is Boston?" keeps two content words ("where", "boston").
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren't", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "don't", "down", "during", "each",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "i", "if", "in", "into", "is", "isn't", "it", "it's",
    "its", "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "s", "same", "she", "should", "so", "some", "such", "t", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "very", "was", "we", "were", "will", "with", "would",
    "you", "your", "yours", "yourself", "yourselves",
];

pub fn is_stopword(word: &str) -> bool {
    let lower = word.to_lowercase();
    STOPWORDS.binary_search(&lower.as_str()).is_ok()
}

/// Tokens made only of punctuation characters.
pub fn is_punct(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| !c.is_alphanumeric())
}

/// Penn Treebank punctuation tags.
pub fn is_punct_pos(pos: &str) -> bool {
    matches!(
        pos,
        "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "HYPH" | "NFP" | "(" | ")" | "\""
    )
}

fn attaches_left(word: &str) -> bool {
    matches!(
        word,
        "," | "." | ";" | ":" | "?" | "!" | "%" | ")" | "]" | "}" | "'s" | "'" | "n't" | "'re"
            | "'m" | "'ve" | "'ll" | "'d" | "''"
    )
}

fn attaches_right(word: &str) -> bool {
    matches!(word, "(" | "[" | "{" | "$" | "``")
}

/// Joins tokens with single spaces, gluing punctuation to its neighbour.
pub fn detokenize<'a, I>(words: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    let mut glue_next = false;
    for w in words {
        if w.is_empty() {
            continue;
        }
        if !out.is_empty() && !glue_next && !attaches_left(w) {
            out.push(' ');
        }
        out.push_str(w);
        glue_next = attaches_right(w);
    }
    out
}

/// Lowercased alphanumeric words of a free-text string.
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' || c == '-' {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.into_iter()
        .map(|w| String::from(w.trim_matches(|c| c == '\'' || c == '-')))
        .filter(|w| !w.is_empty())
        .collect()
}

/// Upper-cases the first character.
pub fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Lower-cases the first character.
pub fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Copies the capitalization pattern of `model` onto `word`
/// (all-caps, title case, or lower case).
pub fn match_case(model: &str, word: &str) -> String {
    let letters: Vec<char> = model.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    match letters.first() {
        Some(c) if c.is_uppercase() => capitalize_first(word),
        _ => String::from(word),
    }
}

/// True when `needle` occurs as a contiguous run inside `hay`.
pub fn contains_run<T: PartialEq>(hay: &[T], needle: &[T]) -> bool {
    if needle.is_empty() {
        return true;
    }
    hay.windows(needle.len()).any(|w| w == needle)
}
