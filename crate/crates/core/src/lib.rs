//! Vocabulary-artifact analysis for natural-language-inference corpora.
//!
//! The crate covers five stages: loading corpora ([`corpus`]), extracting the
//! main subject and verb of each hypothesis ([`tagging`]), testing whether
//! those words are associated with labels ([`stats`]), rewriting hypotheses to
//! dilute such associations ([`augment`]), and measuring the effect with
//! bag-of-words classifiers ([`baseline`]). [`synth`] generates corpora with
//! planted artifacts for checking the pipeline end to end.

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod error;
pub mod stats;
pub mod synth;
pub mod tagging;

pub use error::{Error, Result};
