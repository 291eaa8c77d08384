//! SSU equivalence and longest-common-substring matching over meta
//! sequences, backed by a generalized suffix tree (Ukkonen).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::annotation::Ssu;
use crate::metaseq::{MetaElement, MetaSequence};

/// Collapses POS tags that count as the same for matching: any noun tag,
/// and the two present-tense verb tags.
pub fn canonical_pos(pos: &str) -> &str {
    match pos {
        "NN" | "NNS" | "NNP" | "NNPS" => "NN*",
        "VBP" | "VBZ" => "VBP|VBZ",
        other => other,
    }
}

pub fn equivalent(a: &Ssu, b: &Ssu) -> bool {
    a.sr == b.sr && a.ne == b.ne && canonical_pos(&a.pos) == canonical_pos(&b.pos)
}

pub fn elements_equivalent(a: &MetaElement, b: &MetaElement) -> bool {
    match (a, b) {
        (MetaElement::Unit(x), MetaElement::Unit(y)) => equivalent(x, y),
        (MetaElement::Pronoun(x), MetaElement::Pronoun(y)) => x.eq_ignore_ascii_case(y),
        _ => false,
    }
}

/// Canonical key: equal keys iff the elements are equivalent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ElementKey {
    Unit { sr: String, pos: String, ne: String },
    Pronoun(String),
}

pub fn element_key(e: &MetaElement) -> ElementKey {
    match e {
        MetaElement::Unit(u) => ssu_key(u),
        MetaElement::Pronoun(p) => ElementKey::Pronoun(p.to_lowercase()),
    }
}

pub fn ssu_key(u: &Ssu) -> ElementKey {
    ElementKey::Unit {
        sr: u.sr.clone(),
        pos: String::from(canonical_pos(&u.pos)),
        ne: u.ne.clone(),
    }
}

/// Set of canonical SSU keys of a sequence (pronouns excluded).
pub fn key_set(elements: &[MetaElement]) -> BTreeSet<ElementKey> {
    elements
        .iter()
        .filter(|e| !e.is_pronoun())
        .map(element_key)
        .collect()
}

const ROOT: usize = 0;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    /// Exclusive; `None` on leaves, which grow with the text.
    end: Option<usize>,
    link: usize,
    children: BTreeMap<u32, usize>,
}

/// Suffix tree over a `u32` alphabet. The text must end with a symbol that
/// occurs nowhere else so every suffix ends at a leaf.
#[derive(Debug, Clone)]
pub struct SuffixTree {
    text: Vec<u32>,
    nodes: Vec<Node>,
}

impl SuffixTree {
    pub fn new(text: Vec<u32>) -> Self {
        let mut t = SuffixTree {
            text,
            nodes: vec![Node {
                start: 0,
                end: Some(0),
                link: ROOT,
                children: BTreeMap::new(),
            }],
        };
        t.build();
        t
    }

    fn add_node(&mut self, start: usize, end: Option<usize>) -> usize {
        self.nodes.push(Node {
            start,
            end,
            link: ROOT,
            children: BTreeMap::new(),
        });
        self.nodes.len() - 1
    }

    fn edge_len(&self, node: usize, pos: usize) -> usize {
        let n = &self.nodes[node];
        n.end.unwrap_or(pos + 1) - n.start
    }

    fn build(&mut self) {
        let (mut active_node, mut active_edge, mut active_len) = (ROOT, 0usize, 0usize);
        let mut remainder = 0usize;
        for i in 0..self.text.len() {
            remainder += 1;
            let mut last_new: Option<usize> = None;
            while remainder > 0 {
                if active_len == 0 {
                    active_edge = i;
                }
                let c = self.text[active_edge];
                match self.nodes[active_node].children.get(&c).copied() {
                    None => {
                        let leaf = self.add_node(i, None);
                        self.nodes[active_node].children.insert(c, leaf);
                        if let Some(l) = last_new.take() {
                            self.nodes[l].link = active_node;
                        }
                    }
                    Some(next) => {
                        let el = self.edge_len(next, i);
                        if active_len >= el {
                            active_edge += el;
                            active_len -= el;
                            active_node = next;
                            continue;
                        }
                        if self.text[self.nodes[next].start + active_len] == self.text[i] {
                            if let Some(l) = last_new.take() {
                                if active_node != ROOT {
                                    self.nodes[l].link = active_node;
                                }
                            }
                            active_len += 1;
                            break;
                        }
                        let split_start = self.nodes[next].start;
                        let split = self.add_node(split_start, Some(split_start + active_len));
                        self.nodes[active_node].children.insert(c, split);
                        let leaf = self.add_node(i, None);
                        self.nodes[split].children.insert(self.text[i], leaf);
                        self.nodes[next].start += active_len;
                        let key = self.text[self.nodes[next].start];
                        self.nodes[split].children.insert(key, next);
                        if let Some(l) = last_new.replace(split) {
                            self.nodes[l].link = split;
                        }
                    }
                }
                remainder -= 1;
                if active_node == ROOT && active_len > 0 {
                    active_len -= 1;
                    active_edge = i + 1 - remainder;
                } else if active_node != ROOT {
                    active_node = self.nodes[active_node].link;
                }
            }
        }
    }

    /// For every node: (string depth, start positions of suffixes below it).
    /// Visits children in symbol order; returned in pre-order.
    fn annotate(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let n = self.text.len();
        let mut depth = vec![0usize; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![ROOT];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in self.nodes[v].children.values().rev() {
                depth[c] = depth[v] + self.nodes[c].end.unwrap_or(n) - self.nodes[c].start;
                stack.push(c);
            }
        }
        let mut starts: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for &v in order.iter().rev() {
            if self.nodes[v].children.is_empty() {
                starts[v].push(n - depth[v]);
            } else {
                let mut acc = Vec::new();
                for &c in self.nodes[v].children.values() {
                    acc.extend_from_slice(&starts[c]);
                }
                starts[v] = acc;
            }
        }
        order
            .into_iter()
            .map(|v| (v, depth[v], core::mem::take(&mut starts[v])))
            .collect()
    }

    /// Number of leaves, which equals the number of suffixes.
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }
}

/// A longest common contiguous run: `len` elements starting at `a_start` in
/// `a` and `b_start` in `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommonRun {
    pub a_start: usize,
    pub b_start: usize,
    pub len: usize,
}

/// Longest common substring of `a` and `b` under element equivalence. Ties
/// go to the earliest start in `a`, then in `b`. `None` when nothing is
/// shared.
pub fn longest_common_run(a: &[MetaElement], b: &[MetaElement]) -> Option<CommonRun> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut intern: BTreeMap<ElementKey, u32> = BTreeMap::new();
    let mut sym = |e: &MetaElement| {
        let next = intern.len() as u32;
        *intern.entry(element_key(e)).or_insert(next)
    };
    let mut text: Vec<u32> = a.iter().map(&mut sym).collect();
    text.push(u32::MAX - 1);
    text.extend(b.iter().map(&mut sym));
    text.push(u32::MAX);
    let la = a.len();
    let lb_end = la + 1 + b.len();
    let tree = SuffixTree::new(text);

    let mut best: Option<CommonRun> = None;
    for (v, depth, starts) in tree.annotate() {
        if v == ROOT || tree.nodes[v].children.is_empty() || depth == 0 {
            continue;
        }
        let a_start = starts.iter().copied().filter(|&s| s < la).min();
        let b_start = starts.iter().copied().filter(|&s| s > la && s < lb_end).min();
        if let (Some(sa), Some(sb)) = (a_start, b_start) {
            let cand = CommonRun {
                a_start: sa,
                b_start: sb - la - 1,
                len: depth,
            };
            let better = match best {
                None => true,
                Some(b) => (cand.len, core::cmp::Reverse((cand.a_start, cand.b_start)))
                    > (b.len, core::cmp::Reverse((b.a_start, b.b_start))),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

/// The longest common run as `a`'s elements (empty when nothing is shared).
pub fn lcs(a: &[MetaElement], b: &[MetaElement]) -> Vec<MetaElement> {
    match longest_common_run(a, b) {
        Some(r) => a[r.a_start..r.a_start + r.len].to_vec(),
        None => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Perfect,
    Successful,
    Unsuccessful,
}

impl MatchKind {
    pub fn is_successful(self) -> bool {
        self != MatchKind::Unsuccessful
    }
}

/// True when `z` has a V-unit preceded by a numbered argument (subject) and
/// followed by one (object).
pub fn has_subject_verb_object(z: &[MetaElement]) -> bool {
    let Some(v) = z.iter().position(|e| e.ssu().is_some_and(Ssu::is_verb)) else {
        return false;
    };
    let numbered = |e: &MetaElement| e.ssu().and_then(Ssu::arg_number).is_some();
    z[..v].iter().any(numbered) && z[v + 1..].iter().any(numbered)
}

pub fn classify(z: &[MetaElement], xs: &MetaSequence, md: &MetaSequence) -> MatchKind {
    if !has_subject_verb_object(z) {
        return MatchKind::Unsuccessful;
    }
    if z.len() == xs.len() && z.len() == md.len() {
        MatchKind::Perfect
    } else {
        MatchKind::Successful
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub md: MetaSequence,
    /// The common run, taken from the target sequence.
    pub z: Vec<MetaElement>,
    pub run: CommonRun,
    pub kind: MatchKind,
}

/// Matches a target sequence against every stored MD and keeps all MDs that
/// reach the maximum LCS length, in the order given.
pub fn best_match<'a, I>(xs: &MetaSequence, mds: I) -> Vec<Match>
where
    I: IntoIterator<Item = &'a MetaSequence>,
{
    let mut best_len = 0;
    let mut out: Vec<Match> = Vec::new();
    for md in mds {
        let Some(run) = longest_common_run(&xs.elements, &md.elements) else {
            continue;
        };
        if run.len < best_len {
            continue;
        }
        if run.len > best_len {
            best_len = run.len;
            out.clear();
        }
        let z = xs.elements[run.a_start..run.a_start + run.len].to_vec();
        let kind = classify(&z, xs, md);
        out.push(Match {
            md: md.clone(),
            z,
            run,
            kind,
        });
    }
    out
}

/// No two adjacent SSUs share an SR tag.
pub fn no_adjacent_same_role(seq: &MetaSequence) -> bool {
    seq.elements.windows(2).all(|w| match (w[0].ssu(), w[1].ssu()) {
        (Some(a), Some(b)) => a.sr != b.sr,
        _ => true,
    })
}

/// Compares X_s' - Z' with X_s' - X' (canonical key sets). Returns the two
/// differences when they disagree.
pub fn residual_sets_agree(
    xs: &MetaSequence,
    md: &MetaSequence,
    z: &[MetaElement],
) -> Result<(), (BTreeSet<ElementKey>, BTreeSet<ElementKey>)> {
    let xs_keys = key_set(&xs.elements);
    let via_z: BTreeSet<ElementKey> = xs_keys.difference(&key_set(z)).cloned().collect();
    let via_md: BTreeSet<ElementKey> = xs_keys.difference(&key_set(&md.elements)).cloned().collect();
    if via_z == via_md {
        Ok(())
    } else {
        Err((via_z, via_md))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> MetaSequence {
        MetaSequence::decode(s).unwrap()
    }

    fn naive(a: &[u32], b: &[u32]) -> usize {
        let mut best = 0;
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut k = 0;
                while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                    k += 1;
                }
                best = best.max(k);
            }
        }
        best
    }

    #[test]
    fn suffix_tree_has_one_leaf_per_suffix() {
        let text = vec![1, 2, 1, 2, 1, 3, 1, 2, 9];
        let t = SuffixTree::new(text.clone());
        assert_eq!(t.leaf_count(), text.len());
        let mut starts: Vec<usize> = t
            .annotate()
            .into_iter()
            .find(|(v, _, _)| *v == ROOT)
            .unwrap()
            .2;
        starts.sort_unstable();
        assert_eq!(starts, (0..text.len()).collect::<Vec<_>>());
    }

    #[test]
    fn equivalence_classes() {
        assert!(equivalent(&Ssu::new("ARG1", "NNS", ""), &Ssu::new("ARG1", "NNP", "")));
        assert!(equivalent(&Ssu::new("V", "VBZ", ""), &Ssu::new("V", "VBP", "")));
        assert!(!equivalent(&Ssu::new("V", "VBZ", ""), &Ssu::new("V", "VBD", "")));
        assert!(!equivalent(&Ssu::new("ARG0", "NNP", "PER"), &Ssu::new("ARG0", "NNP", "")));
    }

    #[test]
    fn lcs_prefers_earliest_in_first_sequence() {
        let a = seq("ARG0/NN/ V/VBD/ ARG1/NN/ TMP/NN/ ARG0/NN/ V/VBD/");
        let b = seq("ARG0/NNS/ V/VBD/ LOC/NN/");
        let r = longest_common_run(&a.elements, &b.elements).unwrap();
        assert_eq!(r, CommonRun { a_start: 0, b_start: 0, len: 2 });
        // Z comes from `a`
        assert_eq!(lcs(&a.elements, &b.elements)[0], a.elements[0]);
    }

    #[test]
    fn lcs_empty_when_disjoint() {
        assert!(lcs(&seq("TMP/NN/").elements, &seq("LOC/NN/").elements).is_empty());
        assert!(lcs(&[], &seq("LOC/NN/").elements).is_empty());
    }

    #[test]
    fn lcs_matches_naive_on_small_alphabet() {
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as u32 % 3
        };
        let tags = ["ARG0/NN/", "V/VBD/", "ARG1/NN/"];
        for _ in 0..300 {
            let la = 1 + next() as usize * 3 + next() as usize;
            let lb = 1 + next() as usize * 3 + next() as usize;
            let a: Vec<u32> = (0..la).map(|_| next()).collect();
            let b: Vec<u32> = (0..lb).map(|_| next()).collect();
            let to_seq = |v: &[u32]| {
                let parts: Vec<&str> = v.iter().map(|&i| tags[i as usize]).collect();
                seq(&parts.join(" "))
            };
            let got = longest_common_run(&to_seq(&a).elements, &to_seq(&b).elements).map_or(0, |r| r.len);
            assert_eq!(got, naive(&a, &b), "{a:?} {b:?}");
        }
    }

    #[test]
    fn best_match_keeps_ties_and_classifies() {
        let xs = seq("ARG0/NNP/PER V/VBZ/ ARG1/NN/");
        let mds = [
            seq("ARG0/NNP/PER V/VBZ/ ARG1/NN/"),
            seq("ARG1/NN/ V/VBZ/ ARG2/NN/"),
            seq("ARG0/NNP/PER V/VBZ/ ARG1/NNS/"),
        ];
        let found = best_match(&xs, mds.iter());
        assert_eq!(found.len(), 2);
        assert!(found.iter().all(|m| m.kind == MatchKind::Perfect));

        let xs = seq("ARG1/NNP/ V/VBZ/ ARG2/NN/ CAU/VBN/");
        let found = best_match(&xs, [seq("ARG1/NNP/ V/VBZ/ ARG2/NN/ CAU/NN/")].iter());
        assert_eq!(found[0].kind, MatchKind::Successful);
        assert_eq!(found[0].z.len(), 3);

        let xs = seq("ARG0/NNP/PER V/VBZ/ ARG1/IN/ ARG1/NN/");
        let found = best_match(&xs, [seq("ARG0/NNP/PER V/VBZ/ ARG1/NN/")].iter());
        assert_eq!(found[0].kind, MatchKind::Unsuccessful);
    }

    #[test]
    fn residual_sets_can_disagree() {
        let xs = seq("ARG0/NN/ V/VBD/ ARG1/NN/ TMP/NN/");
        let md = seq("ARG0/NN/ V/VBD/ ARG1/NN/ LOC/NN/ TMP/NN/");
        let z = lcs(&xs.elements, &md.elements);
        assert_eq!(z.len(), 3);
        assert!(residual_sets_agree(&xs, &md, &z).is_err());
    }
}
