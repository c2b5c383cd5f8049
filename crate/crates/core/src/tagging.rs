//! Tokenization, lexicon-driven part-of-speech tagging, and main subject /
//! main verb extraction for hypothesis sentences.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};

const EMBEDDED_LEXICON: &str = include_str!("../data/lexicon.tsv");

/// Forms of be/have/do and the modals. Always tagged AUX, whatever the lexicon says.
const AUXILIARIES: &[&str] = &[
    "be",
    "am",
    "is",
    "are",
    "was",
    "were",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "can",
    "could",
    "will",
    "would",
    "shall",
    "should",
    "may",
    "might",
    "must",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "hasn't",
    "haven't",
    "hadn't",
    "doesn't",
    "don't",
    "didn't",
    "can't",
    "couldn't",
    "won't",
    "wouldn't",
    "shouldn't",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub index: usize,
    /// Byte offsets of the token in the source text.
    pub start: usize,
    pub end: usize,
}

impl Token {
    /// True when the token contains at least one letter or digit.
    pub fn is_wordlike(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }
}

fn push_token(tokens: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    let surface = &text[start..end];
    tokens.push(Token {
        surface: surface.to_string(),
        lower: surface.to_lowercase(),
        index: tokens.len(),
        start,
        end,
    });
}

/// Splits on whitespace and detaches leading and trailing punctuation runs as
/// separate tokens. Internal hyphens and apostrophes stay inside the word.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk_start = None;
    let bytes_end = text.len();
    let mut spans = Vec::new();
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), chunk_start) {
            (true, Some(s)) => {
                spans.push((s, i));
                chunk_start = None;
            }
            (false, None) => chunk_start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = chunk_start {
        spans.push((s, bytes_end));
    }

    for (s, e) in spans {
        let chunk = &text[s..e];
        let core_start = chunk
            .char_indices()
            .find(|(_, c)| c.is_alphanumeric())
            .map(|(i, _)| s + i);
        let Some(core_start) = core_start else {
            push_token(&mut tokens, text, s, e);
            continue;
        };
        let core_end = chunk
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .map(|(i, c)| s + i + c.len_utf8())
            .unwrap_or(e);
        if core_start > s {
            push_token(&mut tokens, text, s, core_start);
        }
        push_token(&mut tokens, text, core_start, core_end);
        if core_end < e {
            push_token(&mut tokens, text, core_end, e);
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosTag {
    #[serde(rename = "NOUN")]
    Noun,
    #[serde(rename = "NOUN_PLURAL")]
    NounPlural,
    #[serde(rename = "PRONOUN")]
    Pronoun,
    #[serde(rename = "VERB_BASE")]
    VerbBase,
    #[serde(rename = "VERB_3SG")]
    Verb3sg,
    #[serde(rename = "VERB_GERUND")]
    VerbGerund,
    #[serde(rename = "VERB_PAST")]
    VerbPast,
    #[serde(rename = "AUX")]
    Aux,
    #[serde(rename = "DET")]
    Det,
    #[serde(rename = "ADJ")]
    Adj,
    #[serde(rename = "ADP")]
    Adp,
    #[serde(rename = "NUM")]
    Num,
    #[serde(rename = "OTHER")]
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 13] = [
        PosTag::Noun,
        PosTag::NounPlural,
        PosTag::Pronoun,
        PosTag::VerbBase,
        PosTag::Verb3sg,
        PosTag::VerbGerund,
        PosTag::VerbPast,
        PosTag::Aux,
        PosTag::Det,
        PosTag::Adj,
        PosTag::Adp,
        PosTag::Num,
        PosTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::NounPlural => "NOUN_PLURAL",
            PosTag::Pronoun => "PRONOUN",
            PosTag::VerbBase => "VERB_BASE",
            PosTag::Verb3sg => "VERB_3SG",
            PosTag::VerbGerund => "VERB_GERUND",
            PosTag::VerbPast => "VERB_PAST",
            PosTag::Aux => "AUX",
            PosTag::Det => "DET",
            PosTag::Adj => "ADJ",
            PosTag::Adp => "ADP",
            PosTag::Num => "NUM",
            PosTag::Other => "OTHER",
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::NounPlural | PosTag::Pronoun)
    }

    pub fn is_verbal(self) -> bool {
        matches!(
            self,
            PosTag::VerbBase
                | PosTag::Verb3sg
                | PosTag::VerbGerund
                | PosTag::VerbPast
                | PosTag::Aux
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<PosTag> {
        PosTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown tag {s:?}")))
    }
}

/// Lowercased word to its most frequent tag.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, PosTag>,
}

impl Lexicon {
    /// The compiled-in default lexicon.
    pub fn embedded() -> Lexicon {
        Lexicon::parse(EMBEDDED_LEXICON.as_bytes()).expect("embedded lexicon is well-formed")
    }

    /// Reads `word<TAB>TAG` lines. Blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Lexicon> {
        let mut entries = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| Error::Malformed {
                line: idx + 1,
                message,
            };
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected word<TAB>TAG".into()))?;
            let tag = tag
                .trim()
                .parse::<PosTag>()
                .map_err(|e| malformed(e.to_string()))?;
            entries.insert(word.trim().to_lowercase(), tag);
        }
        Ok(Lexicon { entries })
    }

    pub fn get(&self, lower: &str) -> Option<PosTag> {
        self.entries.get(lower).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<(Token, PosTag)>,
}

fn is_numeric(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_digit())
        && word
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | ':' | '/'))
}

/// Tags one lowercased word.
pub fn tag_word(lower: &str, lexicon: &Lexicon) -> PosTag {
    if AUXILIARIES.contains(&lower) {
        return PosTag::Aux;
    }
    if let Some(tag) = lexicon.get(lower) {
        return tag;
    }
    if !lower.chars().any(char::is_alphanumeric) {
        return PosTag::Other;
    }
    if is_numeric(lower) {
        return PosTag::Num;
    }
    if lower.ends_with("ing") {
        PosTag::VerbGerund
    } else if lower.ends_with("ed") {
        PosTag::VerbPast
    } else if lower.ends_with('s') && !lower.ends_with("ss") {
        PosTag::NounPlural
    } else {
        PosTag::Noun
    }
}

pub fn pos_tag(tokens: Vec<Token>, lexicon: &Lexicon) -> TaggedSentence {
    TaggedSentence {
        tokens: tokens
            .into_iter()
            .map(|t| {
                let tag = tag_word(&t.lower, lexicon);
                (t, tag)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Extraction {
    pub main_subject: Option<String>,
    pub main_verb: Option<String>,
}

impl Extraction {
    pub fn is_empty(&self) -> bool {
        self.main_subject.is_none() && self.main_verb.is_none()
    }
}

/// Main subject: first nominal before the first verb-family token (first
/// nominal overall when there is no verb). Main verb: the first verb-family
/// token, promoted to the next gerund when that token is an auxiliary.
pub fn extract(tagged: &TaggedSentence) -> Extraction {
    let tokens = &tagged.tokens;
    let first_verb = tokens.iter().position(|(_, tag)| tag.is_verbal());
    let subject_scope = &tokens[..first_verb.unwrap_or(tokens.len())];
    let main_subject = subject_scope
        .iter()
        .find(|(_, tag)| tag.is_nominal())
        .map(|(t, _)| t.lower.clone());

    let main_verb = first_verb.map(|i| {
        let (token, tag) = &tokens[i];
        if *tag == PosTag::Aux {
            if let Some((gerund, _)) = tokens[i + 1..]
                .iter()
                .find(|(_, tag)| *tag == PosTag::VerbGerund)
            {
                return gerund.lower.clone();
            }
        }
        token.lower.clone()
    });

    Extraction {
        main_subject,
        main_verb,
    }
}

/// Tokenize, tag and extract in one step.
pub fn extract_text(text: &str, lexicon: &Lexicon) -> Extraction {
    extract(&pos_tag(tokenize(text), lexicon))
}

#[derive(Debug, Clone)]
pub struct CorpusExtraction {
    /// One entry per example with at least one extracted field, in corpus order.
    pub entries: Vec<(Extraction, Label)>,
    pub excluded: usize,
}

pub fn extract_corpus(corpus: &Corpus, lexicon: &Lexicon) -> CorpusExtraction {
    let all: Vec<(Extraction, Label)> = corpus
        .examples()
        .par_iter()
        .map(|ex| (extract_text(&ex.hypothesis, lexicon), ex.label))
        .collect();
    let total = all.len();
    let entries: Vec<_> = all.into_iter().filter(|(e, _)| !e.is_empty()).collect();
    CorpusExtraction {
        excluded: total - entries.len(),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    fn tags(text: &str, lex: &Lexicon) -> Vec<PosTag> {
        pos_tag(tokenize(text), lex)
            .tokens
            .into_iter()
            .map(|(_, t)| t)
            .collect()
    }

    fn fixture_lexicon() -> Lexicon {
        Lexicon::parse("a\tDET\nman\tNOUN\non\tADP\nbench\tNOUN\n".as_bytes()).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            surfaces("The people are women."),
            ["The", "people", "are", "women", "."]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(surfaces("X-ray machine,"), ["X-ray", "machine", ","]);
        assert_eq!(
            surfaces("\"Hi,\" she said!!!"),
            ["\"", "Hi", ",\"", "she", "said", "!!!"]
        );
        assert_eq!(surfaces("!!!"), ["!!!"]);
        assert_eq!(surfaces("man's   hat"), ["man's", "hat"]);
    }

    #[test]
    fn token_offsets_index_the_source() {
        let text = "  A dog, running.";
        for (i, t) in tokenize(text).iter().enumerate() {
            assert_eq!(&text[t.start..t.end], t.surface);
            assert_eq!(t.index, i);
        }
    }

    #[test]
    fn closed_list_and_suffix_rules() {
        let lex = Lexicon::default();
        assert_eq!(tag_word("are", &lex), PosTag::Aux);
        assert_eq!(tag_word("waiting", &lex), PosTag::VerbGerund);
        assert_eq!(tag_word("jumped", &lex), PosTag::VerbPast);
        assert_eq!(tag_word("cats", &lex), PosTag::NounPlural);
        assert_eq!(tag_word("glass", &lex), PosTag::Noun);
        assert_eq!(tag_word("42", &lex), PosTag::Num);
        assert_eq!(tag_word("!!!", &lex), PosTag::Other);
        // the closed list wins over the lexicon
        let odd = Lexicon::parse("is\tNOUN\n".as_bytes()).unwrap();
        assert_eq!(tag_word("is", &odd), PosTag::Aux);
    }

    #[test]
    fn fixture_sentence_tags() {
        assert_eq!(
            tags("A man is sitting", &fixture_lexicon()),
            [PosTag::Det, PosTag::Noun, PosTag::Aux, PosTag::VerbGerund]
        );
    }

    #[test]
    fn extraction_rules() {
        let lex = Lexicon::embedded();
        let e = extract_text("The people are women.", &lex);
        assert_eq!(e.main_subject.as_deref(), Some("people"));
        assert_eq!(e.main_verb.as_deref(), Some("are"));

        let e = extract_text("A man is sitting on a bench.", &lex);
        assert_eq!(e.main_subject.as_deref(), Some("man"));
        assert_eq!(e.main_verb.as_deref(), Some("sitting"));

        let e = extract_text("On the beach.", &lex);
        assert_eq!(e.main_subject.as_deref(), Some("beach"));
        assert_eq!(e.main_verb, None);

        assert!(extract_text("!!!", &lex).is_empty());
    }

    #[test]
    fn verb_without_preceding_noun_has_no_subject() {
        let e = extract_text("Sitting on a bench.", &Lexicon::embedded());
        assert_eq!(e.main_subject, None);
        assert_eq!(e.main_verb.as_deref(), Some("sitting"));
    }

    #[test]
    fn lexicon_parse_errors_name_the_line() {
        let err = Lexicon::parse("man\tNOUN\nbroken line\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        let err = Lexicon::parse("man\tNOUNISH\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
    }

    #[test]
    fn embedded_lexicon_loads() {
        let lex = Lexicon::embedded();
        assert!(lex.len() > 1500);
        assert_eq!(lex.get("men"), Some(PosTag::NounPlural));
    }
}
