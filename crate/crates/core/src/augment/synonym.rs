use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    choose_positions, is_single_token, match_case, splice, AugmentConfig, Rewrite, Strategy,
};
use crate::error::{Error, Result};
use crate::tagging::tokenize;

const BUNDLED_WORDNET: &str = include_str!("../../data/synonyms_wordnet.tsv");
const BUNDLED_PPDB: &str = include_str!("../../data/synonyms_ppdb.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynonymSource {
    Wordnet,
    Ppdb,
}

impl SynonymSource {
    pub fn strategy(self) -> Strategy {
        match self {
            SynonymSource::Wordnet => Strategy::SynonymWordnet,
            SynonymSource::Ppdb => Strategy::SynonymPpdb,
        }
    }
}

impl fmt::Display for SynonymSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynonymSource::Wordnet => "wordnet",
            SynonymSource::Ppdb => "ppdb",
        })
    }
}

impl FromStr for SynonymSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<SynonymSource> {
        match s {
            "wordnet" => Ok(SynonymSource::Wordnet),
            "ppdb" => Ok(SynonymSource::Ppdb),
            _ => Err(Error::InvalidArgument(format!(
                "unknown synonym source {s:?}"
            ))),
        }
    }
}

/// Headword → synonyms. A headword never appears in its own list, and every
/// list is non-empty.
#[derive(Debug, Clone)]
pub struct SynonymLexicon {
    source: SynonymSource,
    entries: HashMap<String, Vec<String>>,
}

impl SynonymLexicon {
    /// Reads `word<TAB>syn1,syn2,…` lines. Headwords are lowercased; a headword
    /// listed as its own synonym is dropped from the list.
    pub fn parse<R: BufRead>(reader: R, source: SynonymSource) -> Result<SynonymLexicon> {
        let mut entries: HashMap<String, Vec<String>> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, syns) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: idx + 1,
                message: "expected word<TAB>syn1,syn2,...".into(),
            })?;
            let head = head.trim().to_lowercase();
            let list = entries.entry(head.clone()).or_default();
            for syn in syns.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if syn.to_lowercase() != head && !list.iter().any(|s| s == syn) {
                    list.push(syn.to_string());
                }
            }
        }
        entries.retain(|_, list| !list.is_empty());
        Ok(SynonymLexicon { source, entries })
    }

    /// The small lexicon compiled into the crate for `source`.
    pub fn bundled(source: SynonymSource) -> SynonymLexicon {
        let text = match source {
            SynonymSource::Wordnet => BUNDLED_WORDNET,
            SynonymSource::Ppdb => BUNDLED_PPDB,
        };
        SynonymLexicon::parse(text.as_bytes(), source).expect("bundled lexicon is well-formed")
    }

    pub fn source(&self) -> SynonymSource {
        self.source
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Replaces ⌈word_rate × candidates⌉ eligible words that have lexicon entries
/// with a uniformly chosen synonym, keeping an initial capital.
pub fn synonym_substitute<R: Rng>(
    hypothesis: &str,
    lexicon: &SynonymLexicon,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<Rewrite> {
    if cfg.strategy != lexicon.source().strategy() {
        return Err(Error::InvalidArgument(format!(
            "strategy {} cannot use a {} lexicon",
            cfg.strategy,
            lexicon.source()
        )));
    }
    let tokens = tokenize(hypothesis);
    let candidates: Vec<(usize, Vec<&String>)> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| cfg.is_eligible(t))
        .filter_map(|(i, t)| {
            let options: Vec<&String> = lexicon
                .get(&t.lower)?
                .iter()
                .filter(|s| is_single_token(s))
                .collect();
            (!options.is_empty()).then_some((i, options))
        })
        .collect();
    let quota = cfg.quota(candidates.len());
    if quota == 0 {
        return Ok(Rewrite::identity(hypothesis));
    }
    let edits: Vec<(usize, String)> = choose_positions(candidates.len(), quota, rng)
        .into_iter()
        .map(|pick| {
            let (pos, options) = &candidates[pick];
            let choice = options[rng.gen_range(0..options.len())];
            (*pos, match_case(&tokens[*pos].surface, choice))
        })
        .collect();
    Ok(Rewrite {
        text: splice(hypothesis, &tokens, &edits),
        replaced: edits.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> AugmentConfig {
        AugmentConfig {
            word_rate: 1.0,
            ..AugmentConfig::new(Strategy::SynonymWordnet)
        }
    }

    #[test]
    fn single_choice_replacement() {
        let lex =
            SynonymLexicon::parse("happy\tglad\n".as_bytes(), SynonymSource::Wordnet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = synonym_substitute("A happy dog.", &lex, &cfg(), &mut rng).unwrap();
        assert_eq!(out.text, "A glad dog.");
        let out = synonym_substitute("Happy dog.", &lex, &cfg(), &mut rng).unwrap();
        assert_eq!(out.text, "Glad dog.");
    }

    #[test]
    fn words_without_entries_never_change() {
        let lex =
            SynonymLexicon::parse("happy\tglad\n".as_bytes(), SynonymSource::Wordnet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = synonym_substitute("A sad dog.", &lex, &cfg(), &mut rng).unwrap();
        assert!(out.is_identity());
    }

    #[test]
    fn headword_removed_from_own_list() {
        let lex = SynonymLexicon::parse(
            "big\tbig,large\nsame\tsame\n".as_bytes(),
            SynonymSource::Ppdb,
        )
        .unwrap();
        assert_eq!(lex.get("big").unwrap(), ["large"]);
        assert!(lex.get("same").is_none());
    }

    #[test]
    fn source_mismatch_rejected() {
        let lex = SynonymLexicon::bundled(SynonymSource::Ppdb);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(synonym_substitute("A man", &lex, &cfg(), &mut rng).is_err());
    }

    #[test]
    fn bundled_lexicons_respect_invariant() {
        for source in [SynonymSource::Wordnet, SynonymSource::Ppdb] {
            let lex = SynonymLexicon::bundled(source);
            assert!(lex.len() > 400);
            for (head, list) in &lex.entries {
                assert!(!list.is_empty());
                assert!(!list.contains(head));
            }
        }
    }
}
