use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::{match_case, splice, weighted_pick, AugmentConfig, Rewrite};
use crate::error::{Error, Result};
use crate::tagging::tokenize;

/// Document frequencies over a set of hypotheses, with smoothed idf
/// `ln((1 + N) / (1 + df)) + 1` and a replacement distribution proportional
/// to idf.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    n_docs: u64,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    idf: Vec<f64>,
    /// Replacement probabilities, `idf(w) / Σ idf`.
    weights: Vec<f64>,
    /// Running sums of `weights`.
    cumulative: Vec<f64>,
}

fn smoothed_idf(n_docs: u64, doc_freq: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

/// Fits document frequencies over lowercased word tokens.
pub fn fit_tfidf<'a, I>(hypotheses: I) -> Result<TfIdfModel>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut n_docs = 0u64;
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for text in hypotheses {
        n_docs += 1;
        let mut words: Vec<String> = tokenize(text)
            .into_iter()
            .filter(|t| t.is_wordlike())
            .map(|t| t.lower)
            .collect();
        words.sort_unstable();
        words.dedup();
        for w in words {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    if n_docs == 0 {
        return Err(Error::EmptyCorpus);
    }

    let vocab: Vec<String> = df.keys().cloned().collect();
    let doc_freq: Vec<u64> = df.values().copied().collect();
    let idf: Vec<f64> = doc_freq.iter().map(|&d| smoothed_idf(n_docs, d)).collect();
    let total: f64 = idf.iter().sum();
    let weights: Vec<f64> = idf.iter().map(|x| x / total).collect();
    let cumulative = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let index = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    Ok(TfIdfModel {
        n_docs,
        vocab,
        index,
        doc_freq,
        idf,
        weights,
        cumulative,
    })
}

impl TfIdfModel {
    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn doc_freq(&self, word: &str) -> u64 {
        self.index.get(word).map_or(0, |&i| self.doc_freq[i])
    }

    /// Smoothed idf; unseen words get the value for a document frequency of 0.
    pub fn idf(&self, word: &str) -> f64 {
        self.index
            .get(word)
            .map_or_else(|| smoothed_idf(self.n_docs, 0), |&i| self.idf[i])
    }

    /// Probability of drawing `word` as a replacement (before excluding the original).
    pub fn replacement_weight(&self, word: &str) -> f64 {
        self.index.get(word).map_or(0.0, |&i| self.weights[i])
    }

    /// Draws a vocabulary word in proportion to its weight, never `exclude`.
    fn sample_replacement<R: Rng>(&self, exclude: &str, rng: &mut R) -> Option<&str> {
        let total = *self.cumulative.last()?;
        let excluded = self.index.get(exclude).copied();
        let (mass, skip_from, skip_width) = match excluded {
            Some(o) => (
                total - self.weights[o],
                self.cumulative[o] - self.weights[o],
                self.weights[o],
            ),
            None => (total, f64::INFINITY, 0.0),
        };
        if mass <= 0.0 || (excluded.is_some() && self.vocab.len() < 2) {
            return None;
        }
        let mut target = rng.gen::<f64>() * mass;
        if target >= skip_from {
            target += skip_width;
        }
        let mut i = self.cumulative.partition_point(|&c| c <= target);
        if i >= self.vocab.len() {
            i = self.vocab.len() - 1;
        }
        if Some(i) == excluded {
            // only reachable through rounding at a boundary
            i = if i + 1 < self.vocab.len() {
                i + 1
            } else {
                i - 1
            };
        }
        Some(&self.vocab[i])
    }
}

/// Picks ⌈word_rate × eligible⌉ words without replacement, each draw
/// proportional to 1/idf, and replaces each with a word sampled from the
/// model's replacement distribution (excluding the original).
pub fn tfidf_substitute<R: Rng>(
    hypothesis: &str,
    model: &TfIdfModel,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Rewrite {
    let tokens = tokenize(hypothesis);
    let mut eligible: Vec<(usize, f64)> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| cfg.is_eligible(t))
        .map(|(i, t)| (i, 1.0 / model.idf(&t.lower)))
        .collect();
    let quota = cfg.quota(eligible.len());
    if quota == 0 {
        return Rewrite::identity(hypothesis);
    }

    let mut selected = Vec::with_capacity(quota);
    for _ in 0..quota {
        let weights: Vec<f64> = eligible.iter().map(|(_, w)| *w).collect();
        let k = weighted_pick(&weights, rng);
        selected.push(eligible.swap_remove(k).0);
    }
    selected.sort_unstable();

    let edits: Vec<(usize, String)> = selected
        .into_iter()
        .filter_map(|pos| {
            let token = &tokens[pos];
            model
                .sample_replacement(&token.lower, rng)
                .map(|w| (pos, match_case(&token.surface, w)))
        })
        .collect();
    if edits.is_empty() {
        return Rewrite::identity(hypothesis);
    }
    Rewrite {
        text: splice(hypothesis, &tokens, &edits),
        replaced: edits.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::Strategy;
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn docs() -> TfIdfModel {
        fit_tfidf(["a man runs", "a woman runs", "a man sits"]).unwrap()
    }

    #[test]
    fn idf_hand_values() {
        let m = docs();
        assert!((m.idf("a") - 1.0).abs() < 1e-15);
        assert!((m.idf("man") - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((m.idf("man") - 1.28768).abs() < 1e-5);
        assert!((m.idf("woman") - 1.69315).abs() < 1e-5);
        assert_eq!(m.doc_freq("runs"), 2);
        for w in m.vocab() {
            assert!(m.doc_freq(w) <= m.n_docs());
            assert!(m.idf(w) >= 1.0);
        }
        let total: f64 = m.vocab().iter().map(|w| m.replacement_weight(w)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            fit_tfidf(Vec::<&str>::new()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn single_word_vocabulary_cannot_replace() {
        let m = fit_tfidf(["dogs", "dogs dogs"]).unwrap();
        let cfg = AugmentConfig {
            word_rate: 1.0,
            ..AugmentConfig::new(Strategy::Tfidf)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = tfidf_substitute("dogs", &m, &cfg, &mut rng);
        assert!(out.is_identity());
        assert_eq!(out.text, "dogs");
    }

    #[test]
    fn replacement_never_returns_the_original() {
        let m = docs();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            for w in ["man", "woman", "a", "runs", "sits", "unseen"] {
                let r = m.sample_replacement(w, &mut rng).unwrap();
                assert_ne!(r, w);
            }
        }
    }
}
