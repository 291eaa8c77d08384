#![allow(dead_code)]

use std::path::PathBuf;

use metaqa::io::{read_corpus, read_pairs};
use metaqa::pipeline::learn_records;
use metaqa_core::annotation::{sentence_from_specs, Argument, SrlFrame};
use metaqa_core::{MergeMode, MsdipStore, Origin, TaggedSentence};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn frame(v: usize, args: &[(&str, usize, usize)]) -> SrlFrame {
    SrlFrame {
        predicate: v,
        args: args.iter().map(|(r, s, e)| Argument::new(r, *s, *e)).collect(),
    }
}

pub fn example_corpus() -> Vec<TaggedSentence> {
    read_corpus(&data("examples/corpus.jsonl")).unwrap()
}

pub fn store_from(rel: &str, mode: MergeMode) -> MsdipStore {
    let mut store = MsdipStore::new();
    learn_records(&read_pairs(&data(rel)).unwrap(), &mut store, mode, Origin::Seed, 0).unwrap();
    store
}

pub fn example_store(mode: MergeMode) -> MsdipStore {
    store_from("examples/train_pairs.jsonl", mode)
}

pub fn lincoln() -> TaggedSentence {
    sentence_from_specs(
        "lincoln",
        &[
            "Abraham||NNP|PER",
            "Lincoln||NNP|PER",
            "was|be|VBD",
            "the||DT",
            "16th||JJ",
            "president||NN",
            "of||IN",
            "the||DT",
            "States||NNPS|LOC",
            ".||.",
        ],
        vec![frame(2, &[("ARG1", 0, 2), ("ARG2", 3, 9)])],
    )
}

const NAMES: &[&str] = &["Alice", "Bob", "Carol", "Dave", "Erin", "Frank", "Grace", "Heidi"];
const VERBS: &[(&str, &str)] = &[
    ("wrote", "write"),
    ("read", "read"),
    ("bought", "buy"),
    ("painted", "paint"),
    ("found", "find"),
];
const NOUNS: &[&str] = &["letter", "report", "poem", "map", "book", "fence", "song"];
const CITIES: &[&str] = &["Boston", "Paris", "London", "Madrid"];

/// Tagged sentences of the shapes "NAME VERB the NOUN ." and
/// "NAME VERB the NOUN in CITY .", drawn from a seeded generator.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<TaggedSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let name = NAMES.choose(&mut rng).unwrap();
            let (verb, lemma) = VERBS.choose(&mut rng).unwrap();
            let noun = NOUNS.choose(&mut rng).unwrap();
            let name_spec = format!("{name}||NNP|PER");
            let verb_spec = format!("{verb}|{lemma}|VBD");
            let noun_spec = format!("{noun}||NN");
            let mut specs: Vec<String> = vec![name_spec, verb_spec, "the||DT".into(), noun_spec];
            let mut args = vec![("ARG0", 0, 1), ("ARG1", 2, 4)];
            if i % 2 == 1 {
                let city = CITIES.choose(&mut rng).unwrap();
                specs.push("in||IN".into());
                specs.push(format!("{city}||NNP|LOC"));
                args.push(("ARGM-LOC", 4, 6));
            }
            specs.push(".||.".into());
            let refs: Vec<&str> = specs.iter().map(String::as_str).collect();
            let mut s = sentence_from_specs(&format!("syn{i}"), &refs, vec![frame(1, &args)]);
            s.source.article = format!("syn-art{}", i / 5);
            s.source.ordinal = (i % 5) as u32;
            s
        })
        .collect()
}
