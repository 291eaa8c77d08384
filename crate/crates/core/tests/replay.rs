use metaqa_core::annotation::{sentence_from_specs, Argument, PhraseSpan, SrlFrame};
use metaqa_core::msdip::{learn, MsdipStore, Origin};
use metaqa_core::qapgen::generate_qaps;
use metaqa_core::{MergeMode, TaggedSentence};

fn frame(v: usize, args: &[(&str, usize, usize)]) -> SrlFrame {
    SrlFrame {
        predicate: v,
        args: args.iter().map(|(r, s, e)| Argument::new(r, *s, *e)).collect(),
    }
}

fn sent(id: &str, specs: &[&str], frames: Vec<SrlFrame>, phrases: &[(usize, usize)]) -> TaggedSentence {
    let mut s = sentence_from_specs(id, specs, frames);
    s.phrases = phrases.iter().map(|&(start, end)| PhraseSpan { start, end }).collect();
    s
}

const HISTORY: [&str; 7] = ["a||DT", "story||NN", "book||NN", "on||IN", "the||DT", "American||JJ", "history||NN"];

fn with_history(head: &[&'static str], tail: &'static str) -> Vec<&'static str> {
    let mut v = head.to_vec();
    v.extend(HISTORY);
    v.push(tail);
    v
}

fn store(mode: MergeMode) -> MsdipStore {
    let mut store = MsdipStore::new();
    let amanda = sent(
        "amanda",
        &with_history(&["Amanda||NNP|PER", "has|have|VBZ"], ".||."),
        vec![frame(1, &[("ARG0", 0, 1), ("ARG1", 2, 9)])],
        &[],
    );
    let who = sent(
        "amanda-q1",
        &with_history(&["Who||WP", "has|have|VBZ"], "?||."),
        vec![frame(1, &[("ARG0", 0, 1), ("ARG1", 2, 9)])],
        &[],
    );
    let what = sent(
        "amanda-q2",
        &["What||WP", "does|do|VBZ", "Amanda||NNP|PER", "have||VB", "?||."],
        vec![frame(3, &[("ARG1", 0, 1), ("V", 1, 2), ("ARG0", 2, 3)])],
        &[],
    );
    learn(&amanda, &who, mode, &mut store, Origin::Seed, 0).unwrap();
    learn(&amanda, &what, mode, &mut store, Origin::Seed, 0).unwrap();
    let doughnut = sent(
        "doughnut",
        &["A||DT", "doughnut||NN", "is|be|VBZ", "a||DT", "fried|fry|JJ", "dough||NN", "confection||NN", ".||."],
        vec![frame(2, &[("ARG1", 0, 2), ("ARG2", 3, 7)])],
        &[],
    );
    let what_is = sent(
        "doughnut-q1",
        &["What||WP", "is|be|VBZ", "a||DT", "doughnut||NN", "?||."],
        vec![frame(1, &[("ARG1", 0, 1), ("ARG2", 2, 4)])],
        &[],
    );
    learn(&doughnut, &what_is, mode, &mut store, Origin::Seed, 0).unwrap();
    let uranus = sent(
        "uranus",
        &["Uranus||NNP", "is|be|VBZ", "an||DT", "unusual||JJ", "planet||NN", "because||IN", "it||PRP", "is|be|VBZ", "tilted|tilt|VBN", ".||."],
        vec![frame(1, &[("ARG1", 0, 1), ("ARG2", 2, 5), ("ARGM-CAU", 5, 9)]), frame(8, &[("ARG1", 6, 7)])],
        &[],
    );
    let why = sent(
        "uranus-q1",
        &["Why||WRB", "is|be|VBZ", "Uranus||NNP", "an||DT", "unusual||JJ", "planet||NN", "?||."],
        vec![frame(1, &[("ARGM-CAU", 0, 1), ("ARG1", 2, 3), ("ARG2", 3, 6)])],
        &[],
    );
    learn(&uranus, &why, mode, &mut store, Origin::Seed, 0).unwrap();
    let john = sent(
        "john",
        &["John||NNP|PER", "traveled|travel|VBD", "to||IN", "Boston||NNP|LOC", "last||JJ", "week||NN", ".||."],
        vec![frame(1, &[("ARG0", 0, 1), ("ARG1", 2, 4), ("ARGM-TMP", 4, 6)])],
        &[(1, 3)],
    );
    let where_ = sent(
        "john-q1",
        &["Where||WRB", "did|do|VBD", "John||NNP|PER", "travel||VB", "to||IN", "last||JJ", "week||NN", "?||."],
        vec![frame(3, &[("ARGM-LOC", 0, 1), ("V", 1, 2), ("ARG0", 2, 3), ("ARG1", 4, 5), ("ARGM-TMP", 5, 7)])],
        &[(3, 5)],
    );
    learn(&john, &where_, mode, &mut store, Origin::Seed, 0).unwrap();
    store
}

fn qaps(s: &TaggedSentence, mode: MergeMode) -> Vec<(String, String)> {
    let g = generate_qaps(s, &store(mode), mode).unwrap();
    g.qaps.into_iter().map(|q| (q.question, q.answer)).collect()
}

fn has(got: &[(String, String)], q: &str, a: &str) -> bool {
    got.iter().any(|(gq, ga)| gq == q && ga == a)
}

#[test]
fn tom_and_duncan() {
    let tom = sent(
        "tom",
        &with_history(&["Tom||NNP|PER", "has|have|VBZ"], ".||."),
        vec![frame(1, &[("ARG0", 0, 1), ("ARG1", 2, 9)])],
        &[],
    );
    let got = qaps(&tom, MergeMode::Ideal);
    assert!(has(&got, "Who has a story book on the American history?", "Tom"), "{got:?}");
    assert!(has(&got, "What does Tom have?", "a story book on the American history"), "{got:?}");
    let duncan = sent(
        "duncan",
        &["Duncan||NNP|PER", "Watts||NNP|PER", "agrees|agree|VBZ", "with||IN", "the||DT", "conclusion||NN", ".||."],
        vec![frame(2, &[("ARG0", 0, 2), ("ARG1", 3, 6)])],
        &[(0, 2), (2, 4)],
    );
    let got = qaps(&duncan, MergeMode::Ideal);
    assert!(has(&got, "Who agrees with the conclusion?", "Duncan Watts"), "{got:?}");
    assert!(has(&got, "What does Duncan Watts agree with?", "the conclusion"), "{got:?}");
    let g = generate_qaps(&duncan, &store(MergeMode::PhrasalAware), MergeMode::PhrasalAware).unwrap();
    assert_eq!(g.teach_requests.len(), 1);
    assert_eq!(g.teach_requests[0].xs.encode(), "ARG0/NNP/PER V/VBZ/ ARG1/IN/ ARG1/NN/");
}

#[test]
fn solar_panels() {
    let s = sent(
        "solar",
        &[
            "The||DT", "solar||JJ", "panel||NN", "manufacturing||NN", "industry||NN", "is|be|VBZ", "in||IN", "the||DT",
            "doldrums||NNS", "because||IN", "supply||NN", "far||RB", "exceeds|exceed|VBZ", "demand||NN",
        ],
        vec![
            frame(5, &[("ARG1", 0, 5), ("ARG2", 6, 9), ("ARGM-CAU", 9, 14)]),
            frame(12, &[("ARG0", 10, 11), ("ARGM-EXT", 11, 12), ("ARG1", 13, 14)]),
        ],
        &[],
    );
    let got = qaps(&s, MergeMode::Ideal);
    assert!(
        has(&got, "What is in the doldrums because supply far exceeds demand?", "The solar panel manufacturing industry"),
        "{got:?}"
    );
    assert!(
        has(&got, "Why is the solar panel manufacturing industry in the doldrums?", "because supply far exceeds demand"),
        "{got:?}"
    );
}

#[test]
fn mary_in_both_modes() {
    let mary = sent(
        "mary",
        &["Mary||NNP|PER", "flew|fly|VBD", "to||IN", "London||NNP|LOC", "last||JJ", "month||NN", ".||."],
        vec![frame(1, &[("ARG0", 0, 1), ("ARG1", 2, 4), ("ARGM-TMP", 4, 6)])],
        &[(1, 3)],
    );
    for mode in [MergeMode::Ideal, MergeMode::PhrasalAware] {
        let got = qaps(&mary, mode);
        assert!(has(&got, "Where did Mary fly to last month?", "London"), "{mode:?} {got:?}");
    }
}
