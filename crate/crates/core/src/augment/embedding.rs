//! word2vec text-format tables and cosine nearest neighbours.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;

use rand::Rng;
use rayon::prelude::*;

use super::{
    choose_positions, hypothesis_vocabulary, is_single_token, match_case, splice, AugmentConfig,
    Rewrite, EMBEDDING_NEIGHBORS,
};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::tagging::tokenize;

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    /// Squared Euclidean norms.
    norms: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<EmbeddingTable>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut table = EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
        };
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            table.push(word, vector, i + 1)?;
        }
        Ok(table)
    }

    fn push(&mut self, word: String, vector: Vec<f32>, line: usize) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Malformed {
                line,
                message: format!("expected {} components, found {}", self.dim, vector.len()),
            });
        }
        if self.index.contains_key(&word) {
            return Err(Error::Malformed {
                line,
                message: format!("duplicate word {word:?}"),
            });
        }
        let norm = vector
            .iter()
            .map(|&x| f64::from(x) * f64::from(x))
            .sum::<f64>();
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend(vector);
        self.norms.push(norm);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Table key for a token: the surface form if present, else its lowercase.
    fn key_for<'a>(&self, surface: &'a str, lower: &'a str) -> Option<&'a str> {
        if self.contains(surface) {
            Some(surface)
        } else if self.contains(lower) {
            Some(lower)
        } else {
            None
        }
    }
}

/// Reads the word2vec text format: a `<vocab_size> <dim>` header, then one
/// `word v1 … vdim` line per entry.
pub fn load_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Malformed {
        line: 1,
        message: "missing header".into(),
    })??;
    let mut fields = header.split_whitespace();
    let parse_header = |f: Option<&str>| -> Result<usize> {
        f.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Malformed {
                line: 1,
                message: "header must be `<vocab_size> <dim>`".into(),
            })
    };
    let vocab_size = parse_header(fields.next())?;
    let dim = parse_header(fields.next())?;
    if dim == 0 {
        return Err(Error::Malformed {
            line: 1,
            message: "dimension must be positive".into(),
        });
    }

    let mut table = EmbeddingTable::from_entries(dim, std::iter::empty())?;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default().to_string();
        let vector = parts
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        table.push(word, vector, line_no)?;
    }
    if table.len() != vocab_size {
        return Err(Error::Malformed {
            line: 1,
            message: format!("header declares {vocab_size} words, found {}", table.len()),
        });
    }
    Ok(table)
}

/// Cosine from squared norms; `sqrt(|u|²·|u|²)` is exact, so identical vectors score 1.0.
fn cosine(a: &[f32], b: &[f32], na2: f64, nb2: f64) -> f64 {
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum();
    dot / (na2 * nb2).sqrt()
}

fn by_similarity(a: &(f64, usize), b: &(f64, usize), words: &[String]) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| words[a.1].cmp(&words[b.1]))
}

/// Top-`k` words by cosine similarity to `word`, excluding `word` itself.
/// Ties are broken lexicographically; zero-norm candidates are skipped.
pub fn nearest_neighbors(
    table: &EmbeddingTable,
    word: &str,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    let &qi = table
        .index
        .get(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let qn = table.norms[qi];
    if qn == 0.0 {
        return Ok(Vec::new());
    }
    let query = table.row(qi);
    let mut scored: Vec<(f64, usize)> = (0..table.len())
        .filter(|&i| i != qi && table.norms[i] > 0.0)
        .map(|i| (cosine(query, table.row(i), qn, table.norms[i]), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| by_similarity(a, b, &table.words);
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    Ok(scored
        .into_iter()
        .map(|(sim, i)| (table.words[i].clone(), sim))
        .collect())
}

/// Usable replacements for a table key: its top-10 neighbours that are single
/// tokens and differ from the key ignoring case.
fn replacement_candidates(table: &EmbeddingTable, key: &str) -> Vec<String> {
    let lower = key.to_lowercase();
    nearest_neighbors(table, key, EMBEDDING_NEIGHBORS)
        .map(|ns| {
            ns.into_iter()
                .map(|(w, _)| w)
                .filter(|w| is_single_token(w) && w.to_lowercase() != lower)
                .collect()
        })
        .unwrap_or_default()
}

fn substitute_with<'a, R, F>(
    hypothesis: &str,
    cfg: &AugmentConfig,
    rng: &mut R,
    lookup: F,
) -> Rewrite
where
    R: Rng,
    F: Fn(&str, &str) -> Option<&'a [String]>,
{
    let tokens = tokenize(hypothesis);
    let candidates: Vec<(usize, &[String])> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| cfg.is_eligible(t))
        .filter_map(|(i, t)| lookup(&t.surface, &t.lower).map(|c| (i, c)))
        .filter(|(_, c)| !c.is_empty())
        .collect();
    let quota = cfg.quota(candidates.len());
    if quota == 0 {
        return Rewrite::identity(hypothesis);
    }
    let edits: Vec<(usize, String)> = choose_positions(candidates.len(), quota, rng)
        .into_iter()
        .map(|pick| {
            let (pos, options) = candidates[pick];
            let choice = &options[rng.gen_range(0..options.len())];
            (pos, match_case(&tokens[pos].surface, choice))
        })
        .collect();
    Rewrite {
        text: splice(hypothesis, &tokens, &edits),
        replaced: edits.len(),
    }
}

/// Replaces selected in-vocabulary words with one of their ten nearest
/// neighbours, chosen uniformly. Out-of-vocabulary words are never selected.
pub fn embed_substitute<R: Rng>(
    hypothesis: &str,
    table: &EmbeddingTable,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Rewrite {
    let tokens = tokenize(hypothesis);
    let cache: HashMap<String, Vec<String>> = tokens
        .iter()
        .filter_map(|t| table.key_for(&t.surface, &t.lower))
        .map(|key| (key.to_string(), replacement_candidates(table, key)))
        .collect();
    substitute_with(hypothesis, cfg, rng, |surface, lower| {
        table
            .key_for(surface, lower)
            .and_then(|k| cache.get(k))
            .map(Vec::as_slice)
    })
}

/// Neighbour lists precomputed for every eligible word of a corpus.
pub(super) struct NeighborCache<'t> {
    table: &'t EmbeddingTable,
    neighbors: HashMap<String, Vec<String>>,
}

impl<'t> NeighborCache<'t> {
    pub(super) fn build(table: &'t EmbeddingTable, corpus: &Corpus, cfg: &AugmentConfig) -> Self {
        let keys: Vec<String> = hypothesis_vocabulary(corpus)
            .into_iter()
            .filter_map(|surface| {
                let token = tokenize(&surface).into_iter().next()?;
                if !cfg.is_eligible(&token) {
                    return None;
                }
                table
                    .key_for(&token.surface, &token.lower)
                    .map(str::to_string)
            })
            .collect();
        let neighbors = keys
            .par_iter()
            .map(|k| (k.clone(), replacement_candidates(table, k)))
            .collect();
        NeighborCache { table, neighbors }
    }

    pub(super) fn substitute<R: Rng>(
        &self,
        hypothesis: &str,
        cfg: &AugmentConfig,
        rng: &mut R,
    ) -> Rewrite {
        substitute_with(hypothesis, cfg, rng, |surface, lower| {
            self.table
                .key_for(surface, lower)
                .and_then(|k| self.neighbors.get(k))
                .map(Vec::as_slice)
        })
    }
}
