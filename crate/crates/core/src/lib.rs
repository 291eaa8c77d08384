//! Meta-sequence question generation.
//!
//! This crate holds the algorithmic core: the tagged-sentence model, clause
//! segmentation, meta-sequence construction and matching, question/answer
//! synthesis, the answer/question filter rules, lexical similarity, and
//! distractor ranking. It is `no_std` and only needs `alloc`; reading files,
//! clocks, and the command-line front end live in the `metaqa` crate.
#![no_std]
#![deny(rust_2018_idioms, nonstandard_style)]

extern crate alloc;

pub mod annotation;
pub mod distractor;
pub mod matcher;
pub mod metaseq;
pub mod msdip;
pub mod preprocess;
pub mod qapgen;
pub mod resources;
pub mod text;
pub mod tp3;

pub use annotation::{Ssu, TaggedSentence, Token};
pub use metaseq::{MergeMode, MetaElement, MetaSequence, SsuTextMap};
pub use msdip::{MsdipPair, MsdipStore, Origin};
pub use qapgen::Qap;
