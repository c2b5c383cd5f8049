//! Sparse bag-of-words softmax classifiers for the hypothesis-only and
//! premise+hypothesis settings.

mod model;
mod train;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, NliExample};
use crate::error::{Error, Result};
use crate::tagging::tokenize;

pub use model::{loss_and_gradient, softmax, Gradient, LinearModel};
pub use train::{
    evaluate, train, Classifier, EvalReport, LogEntry, TrainConfig, TrainOutcome,
    MODEL_FORMAT_VERSION,
};

/// Tokens seen fewer times than this in training get no feature.
pub const MIN_FEATURE_FREQ: u64 = 2;

pub const OVERLAP_FEATURE: &str = "overlap";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HypothesisOnly,
    Pair,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::HypothesisOnly => "hypothesis_only",
            Mode::Pair => "pair",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "hypothesis_only" | "hypothesis-only" => Ok(Mode::HypothesisOnly),
            "pair" => Ok(Mode::Pair),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

/// Feature name → dense index. Names are `h:<token>`, `p:<token>` and
/// `overlap`; indices follow the sorted order of names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    mode: Mode,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    /// `(index, count)` with strictly increasing indices and positive counts.
    pub entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn lowered_tokens(text: &str) -> impl Iterator<Item = String> {
    tokenize(text).into_iter().map(|t| t.lower)
}

/// Word types (letters or digits present) shared by premise and hypothesis.
pub fn overlap_count(premise: &str, hypothesis: &str) -> usize {
    let types = |text: &str| -> BTreeSet<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| t.is_wordlike())
            .map(|t| t.lower)
            .collect()
    };
    types(premise).intersection(&types(hypothesis)).count()
}

impl Vocabulary {
    pub fn build(train: &Corpus, mode: Mode) -> Result<Vocabulary> {
        if train.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut freq: BTreeMap<String, u64> = BTreeMap::new();
        for ex in train {
            for tok in lowered_tokens(&ex.hypothesis) {
                *freq.entry(format!("h:{tok}")).or_insert(0) += 1;
            }
            if mode == Mode::Pair {
                for tok in lowered_tokens(&ex.premise) {
                    *freq.entry(format!("p:{tok}")).or_insert(0) += 1;
                }
            }
        }
        let mut names: Vec<String> = freq
            .into_iter()
            .filter(|(_, n)| *n >= MIN_FEATURE_FREQ)
            .map(|(name, _)| name)
            .collect();
        if mode == Mode::Pair {
            names.push(OVERLAP_FEATURE.to_string());
            names.sort();
        }
        Ok(Vocabulary::from_names(mode, names))
    }

    /// Rebuilds a vocabulary from names listed in index order.
    pub fn from_names(mode: Mode, names: Vec<String>) -> Vocabulary {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Vocabulary { mode, names, index }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Featurizes in this vocabulary's mode. Hypothesis-only vocabularies never
    /// look at the premise.
    pub fn featurize(&self, example: &NliExample) -> FeatureVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        let mut add = |prefix: &str, text: &str| {
            for tok in lowered_tokens(text) {
                if let Some(i) = self.get(&format!("{prefix}{tok}")) {
                    *counts.entry(i).or_insert(0.0) += 1.0;
                }
            }
        };
        add("h:", &example.hypothesis);
        if self.mode == Mode::Pair {
            add("p:", &example.premise);
            let overlap = overlap_count(&example.premise, &example.hypothesis);
            if let (Some(i), true) = (self.get(OVERLAP_FEATURE), overlap > 0) {
                counts.insert(i, overlap as f64);
            }
        }
        FeatureVector {
            entries: counts.into_iter().collect(),
        }
    }
}

pub fn featurize(example: &NliExample, vocab: &Vocabulary, mode: Mode) -> Result<FeatureVector> {
    if vocab.mode() != mode {
        return Err(Error::InvalidArgument(format!(
            "vocabulary built for {} cannot featurize in {} mode",
            vocab.mode(),
            mode
        )));
    }
    Ok(vocab.featurize(example))
}
