//! Hypothesis augmentation: character substitution, embedding-neighbour
//! replacement, synonym replacement from two lexicons, and tf-idf driven
//! replacement.
//!
//! Every strategy rewrites the hypothesis in place, one token for one token,
//! so the token count never changes. Randomness comes from a ChaCha stream
//! seeded per (run seed, example index, copy index), which makes corpus
//! augmentation independent of thread scheduling.

mod chars;
mod embedding;
mod stopwords;
mod synonym;
mod tfidf;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, NliExample, Origin, Split};
use crate::error::{Error, Result};
use crate::tagging::{tokenize, Token};

pub use chars::char_substitute;
pub use embedding::{embed_substitute, load_embeddings, nearest_neighbors, EmbeddingTable};
pub use stopwords::is_stopword;
pub use synonym::{synonym_substitute, SynonymLexicon, SynonymSource};
pub use tfidf::{fit_tfidf, tfidf_substitute, TfIdfModel};

/// Number of embedding neighbours a replacement is drawn from.
pub const EMBEDDING_NEIGHBORS: usize = 10;

/// Fraction of a selected word's characters that character substitution rewrites.
pub const CHAR_RATE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    CharSubstitute,
    WordEmbedding,
    SynonymWordnet,
    SynonymPpdb,
    Tfidf,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::CharSubstitute,
        Strategy::WordEmbedding,
        Strategy::SynonymPpdb,
        Strategy::SynonymWordnet,
        Strategy::Tfidf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::CharSubstitute => "char_substitute",
            Strategy::WordEmbedding => "word_embedding",
            Strategy::SynonymWordnet => "synonym_wordnet",
            Strategy::SynonymPpdb => "synonym_ppdb",
            Strategy::Tfidf => "tfidf",
        }
    }

    /// Row title used in comparison tables.
    pub fn title(self) -> &'static str {
        match self {
            Strategy::CharSubstitute => "Character",
            Strategy::WordEmbedding => "Word embedding (word2vec)",
            Strategy::SynonymWordnet => "Word synonym (wordnet)",
            Strategy::SynonymPpdb => "Word synonym (PPDB)",
            Strategy::Tfidf => "Word distribution (tf-idf)",
        }
    }

    pub fn is_word_level(self) -> bool {
        self != Strategy::CharSubstitute
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub strategy: Strategy,
    /// Fraction of eligible words altered per sentence.
    pub word_rate: f64,
    pub copies_per_example: usize,
    pub seed: u64,
    pub min_word_length: usize,
    pub preserve_stopwords: bool,
}

impl AugmentConfig {
    pub fn new(strategy: Strategy) -> AugmentConfig {
        AugmentConfig {
            strategy,
            word_rate: 0.3,
            copies_per_example: 1,
            seed: 0,
            min_word_length: 3,
            preserve_stopwords: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.word_rate) {
            return Err(Error::InvalidArgument(format!(
                "word_rate {} outside [0, 1]",
                self.word_rate
            )));
        }
        if self.copies_per_example == 0 {
            return Err(Error::InvalidArgument(
                "copies_per_example must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn is_eligible(&self, token: &Token) -> bool {
        token.is_wordlike()
            && token.surface.chars().count() >= self.min_word_length
            && !(self.preserve_stopwords && is_stopword(&token.lower))
    }

    /// How many of `candidates` words to alter: ⌈word_rate × candidates⌉.
    fn quota(&self, candidates: usize) -> usize {
        let raw = self.word_rate * candidates as f64;
        // absorb representation error such as 0.3 * 10 = 3.0000000000000004
        let n = (raw - 1e-9).ceil().max(0.0) as usize;
        n.min(candidates)
    }
}

/// A rewritten hypothesis. `replaced == 0` flags an identity rewrite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub text: String,
    pub replaced: usize,
}

impl Rewrite {
    fn identity(text: &str) -> Rewrite {
        Rewrite {
            text: text.to_string(),
            replaced: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.replaced == 0
    }
}

/// Replaces token spans; `edits` must be sorted by token position.
fn splice(text: &str, tokens: &[Token], edits: &[(usize, String)]) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut cursor = 0;
    for (pos, replacement) in edits {
        let t = &tokens[*pos];
        out.push_str(&text[cursor..t.start]);
        out.push_str(replacement);
        cursor = t.end;
    }
    out.push_str(&text[cursor..]);
    out
}

/// Gives `replacement` an uppercase first letter when `original` has one.
fn match_case(original: &str, replacement: &str) -> String {
    let upper = original.chars().next().is_some_and(char::is_uppercase);
    if !upper {
        return replacement.to_string();
    }
    let mut chars = replacement.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// True when `word` survives tokenization as one word-like token, so
/// substituting it cannot change the token count.
fn is_single_token(word: &str) -> bool {
    let toks = tokenize(word);
    toks.len() == 1 && toks[0].is_wordlike() && toks[0].surface == word
}

/// `k` distinct positions out of `n`, uniformly, in ascending order.
fn choose_positions<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut picked = rand::seq::index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked
}

fn weighted_pick<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return i;
        }
        target -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Stream seed for one (example, copy) pair (SplitMix64 finalizer over the inputs).
pub fn derive_seed(seed: u64, example: u64, copy: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ example) ^ copy.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn example_rng(seed: u64, example: usize, copy: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, example as u64, copy as u64))
}

/// Read-only resources the word-level strategies draw on.
#[derive(Debug, Default, Clone)]
pub struct Resources {
    pub embeddings: Option<EmbeddingTable>,
    pub wordnet: Option<SynonymLexicon>,
    pub ppdb: Option<SynonymLexicon>,
    pub tfidf: Option<TfIdfModel>,
}

#[derive(Debug, Clone)]
pub struct AugmentRun {
    pub corpus: Corpus,
    /// Outputs for which no word could be altered.
    pub identities: usize,
}

/// Produces `copies_per_example` rewritten copies of every training example.
/// Premises and labels are copied verbatim; ids become `<id>#aug<copy>`.
pub fn augment_corpus(
    corpus: &Corpus,
    cfg: &AugmentConfig,
    resources: &Resources,
) -> Result<AugmentRun> {
    cfg.validate()?;
    if corpus.split() != Split::Train {
        return Err(Error::InvalidArgument(format!(
            "augmentation applies to the train split, got {}",
            corpus.split()
        )));
    }
    let missing = |resource| Error::MissingResource {
        strategy: cfg.strategy.name(),
        resource,
    };

    type Rewriter<'a> = Box<dyn Fn(&str, &mut ChaCha8Rng) -> Result<Rewrite> + Send + Sync + 'a>;
    let rewrite: Rewriter = match cfg.strategy {
        Strategy::CharSubstitute => Box::new(|h, rng| Ok(char_substitute(h, cfg, rng))),
        Strategy::WordEmbedding => {
            let table = resources
                .embeddings
                .as_ref()
                .ok_or_else(|| missing("embeddings"))?;
            let cache = embedding::NeighborCache::build(table, corpus, cfg);
            Box::new(move |h, rng| Ok(cache.substitute(h, cfg, rng)))
        }
        Strategy::SynonymWordnet => {
            let lex = resources
                .wordnet
                .as_ref()
                .ok_or_else(|| missing("wordnet lexicon"))?;
            Box::new(move |h, rng| synonym_substitute(h, lex, cfg, rng))
        }
        Strategy::SynonymPpdb => {
            let lex = resources
                .ppdb
                .as_ref()
                .ok_or_else(|| missing("ppdb lexicon"))?;
            Box::new(move |h, rng| synonym_substitute(h, lex, cfg, rng))
        }
        Strategy::Tfidf => {
            let model = resources
                .tfidf
                .as_ref()
                .ok_or_else(|| missing("tf-idf model"))?;
            Box::new(move |h, rng| Ok(tfidf_substitute(h, model, cfg, rng)))
        }
    };

    let copies = cfg.copies_per_example;
    let outputs: Vec<(NliExample, bool)> = (0..corpus.len() * copies)
        .into_par_iter()
        .map(|slot| {
            let (idx, copy) = (slot / copies, slot % copies);
            let source = &corpus.examples()[idx];
            let mut rng = example_rng(cfg.seed, idx, copy);
            let rewritten = rewrite(&source.hypothesis, &mut rng)?;
            let identity = rewritten.is_identity();
            Ok((
                NliExample {
                    id: format!("{}#aug{}", source.id, copy + 1),
                    premise: source.premise.clone(),
                    hypothesis: rewritten.text,
                    label: source.label,
                    origin: Origin::Augmented(cfg.strategy.name().to_string()),
                },
                identity,
            ))
        })
        .collect::<Result<_>>()?;

    let identities = outputs.iter().filter(|(_, id)| *id).count();
    let examples = outputs.into_iter().map(|(ex, _)| ex).collect();
    Ok(AugmentRun {
        corpus: Corpus::new(Split::Train, examples)?,
        identities,
    })
}

/// Distinct lowercased tokens of a corpus's hypotheses, in sorted order.
fn hypothesis_vocabulary(corpus: &Corpus) -> BTreeSet<String> {
    corpus
        .iter()
        .flat_map(|ex| tokenize(&ex.hypothesis))
        .map(|t| t.surface)
        .collect()
}
