//! NLI corpora: parsing, persistence and the views used by the experiments.
//!
//! The on-disk format is JSON Lines with the SNLI field names (`premise`,
//! `hypothesis`, `label`). The original SNLI distribution names
//! (`sentence1`, `sentence2`, `gold_label`, `pairID`) are accepted as well so
//! the raw release files load unmodified.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];
    pub const COUNT: usize = 3;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Label> {
        Label::ALL.get(code).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entailment" | "0" => Ok(Label::Entailment),
            "neutral" | "1" => Ok(Label::Neutral),
            "contradiction" | "2" => Ok(Label::Contradiction),
            other => Err(Error::UnknownLabel {
                line: 0,
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Split> {
        match s {
            "train" => Ok(Split::Train),
            "dev" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// Where an example came from. Augmented examples carry the strategy name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Origin {
    Original,
    Augmented(String),
}

impl Origin {
    fn parse(s: &str) -> Option<Origin> {
        if s == "original" {
            Some(Origin::Original)
        } else {
            s.strip_prefix("augmented:")
                .filter(|name| !name.is_empty())
                .map(|name| Origin::Augmented(name.to_string()))
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Original => f.write_str("original"),
            Origin::Augmented(name) => write!(f, "augmented:{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NliExample {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    split: Split,
    examples: Vec<NliExample>,
}

/// Result of parsing a corpus file, with tallies of records that were dropped.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub corpus: Corpus,
    /// Records carrying the SNLI "no gold label" marker (`-1` or `"-"`).
    pub skipped_unlabeled: usize,
    /// Records whose hypothesis is empty after trimming.
    pub skipped_blank: usize,
}

impl Corpus {
    /// Builds a corpus, checking that ids are unique and hypotheses non-empty.
    pub fn new(split: Split, examples: Vec<NliExample>) -> Result<Corpus> {
        let mut seen = HashSet::with_capacity(examples.len());
        for ex in &examples {
            if ex.hypothesis.trim().is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "example {:?} has an empty hypothesis",
                    ex.id
                )));
            }
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
        }
        Ok(Corpus { split, examples })
    }

    pub fn empty(split: Split) -> Corpus {
        Corpus {
            split,
            examples: Vec::new(),
        }
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn examples(&self) -> &[NliExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, NliExample> {
        self.examples.iter()
    }

    pub fn into_examples(self) -> Vec<NliExample> {
        self.examples
    }

    /// Per-label example counts in label-code order.
    pub fn label_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for ex in &self.examples {
            counts[ex.label.code()] += 1;
        }
        counts
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a NliExample;
    type IntoIter = std::slice::Iter<'a, NliExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| obj.get(*n))
}

enum RawLabel {
    Gold(Label),
    Unlabeled,
}

fn parse_label(value: &Value, line: usize) -> Result<RawLabel> {
    let unknown = || Error::UnknownLabel {
        line,
        value: value.to_string(),
    };
    match value {
        Value::Number(n) => match n.as_i64() {
            Some(-1) => Ok(RawLabel::Unlabeled),
            Some(code @ 0..=2) => Ok(RawLabel::Gold(Label::ALL[code as usize])),
            _ => Err(unknown()),
        },
        Value::String(s) => match s.as_str() {
            "-" | "-1" | "" => Ok(RawLabel::Unlabeled),
            "entailment" => Ok(RawLabel::Gold(Label::Entailment)),
            "neutral" => Ok(RawLabel::Gold(Label::Neutral)),
            "contradiction" => Ok(RawLabel::Gold(Label::Contradiction)),
            _ => Err(unknown()),
        },
        _ => Err(unknown()),
    }
}

fn text_field(obj: &serde_json::Map<String, Value>, names: &[&str], line: usize) -> Result<String> {
    match field(obj, names) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Null) | None if names[0] == "premise" => Ok(String::new()),
        Some(other) => Err(Error::Malformed {
            line,
            message: format!("field {:?} is not a string: {other}", names[0]),
        }),
        None => Err(Error::Malformed {
            line,
            message: format!("missing field {:?}", names[0]),
        }),
    }
}

/// Parses a JSON Lines corpus. Line numbers in errors and generated ids are 1-based.
pub fn parse_jsonl<R: BufRead>(reader: R, split: Split) -> Result<Parsed> {
    let mut examples = Vec::new();
    let mut skipped_unlabeled = 0;
    let mut skipped_blank = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(Error::Malformed {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };

        let label_value = field(&obj, &["label", "gold_label"]).ok_or(Error::Malformed {
            line: line_no,
            message: "missing field \"label\"".into(),
        })?;
        let label = match parse_label(label_value, line_no)? {
            RawLabel::Gold(label) => label,
            RawLabel::Unlabeled => {
                skipped_unlabeled += 1;
                continue;
            }
        };

        let premise = text_field(&obj, &["premise", "sentence1"], line_no)?;
        let hypothesis = text_field(&obj, &["hypothesis", "sentence2"], line_no)?;
        if hypothesis.trim().is_empty() {
            skipped_blank += 1;
            continue;
        }

        let id = match field(&obj, &["id", "pairID"]) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => format!("{split}:{line_no}"),
        };
        let origin = match obj.get("origin") {
            None | Some(Value::Null) => Origin::Original,
            Some(Value::String(s)) => Origin::parse(s).ok_or_else(|| Error::Malformed {
                line: line_no,
                message: format!("bad origin {s:?}"),
            })?,
            Some(other) => {
                return Err(Error::Malformed {
                    line: line_no,
                    message: format!("bad origin {other}"),
                })
            }
        };

        examples.push(NliExample {
            id,
            premise,
            hypothesis,
            label,
            origin,
        });
    }

    Ok(Parsed {
        corpus: Corpus::new(split, examples)?,
        skipped_unlabeled,
        skipped_blank,
    })
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    premise: &'a str,
    hypothesis: &'a str,
    label: usize,
    origin: String,
}

/// Writes a corpus as JSON Lines; labels are written as integer codes.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for ex in corpus {
        let record = Record {
            id: &ex.id,
            premise: &ex.premise,
            hypothesis: &ex.hypothesis,
            label: ex.label.code(),
            origin: ex.origin.to_string(),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses the tab-separated fixture format with header `premise\thypothesis\tlabel`.
pub fn parse_tsv<R: std::io::Read>(reader: R, split: Split) -> Result<Parsed> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .quoting(false)
        .flexible(false)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let expected = ["premise", "hypothesis", "label"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Malformed {
            line: 1,
            message: "expected header premise\\thypothesis\\tlabel".into(),
        });
    }

    let mut examples = Vec::new();
    let mut skipped_unlabeled = 0;
    let mut skipped_blank = 0;
    for record in rdr.records() {
        let record = record?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let raw = record[2].trim();
        let label = match raw {
            "-1" | "-" => {
                skipped_unlabeled += 1;
                continue;
            }
            _ => raw.parse::<Label>().map_err(|_| Error::UnknownLabel {
                line: line_no,
                value: raw.to_string(),
            })?,
        };
        if record[1].trim().is_empty() {
            skipped_blank += 1;
            continue;
        }
        examples.push(NliExample {
            id: format!("{split}:{line_no}"),
            premise: record[0].to_string(),
            hypothesis: record[1].to_string(),
            label,
            origin: Origin::Original,
        });
    }

    Ok(Parsed {
        corpus: Corpus::new(split, examples)?,
        skipped_unlabeled,
        skipped_blank,
    })
}

/// The hypothesis-only view: every premise replaced by the empty string.
pub fn strip_premises(corpus: &Corpus) -> Corpus {
    Corpus {
        split: corpus.split,
        examples: corpus
            .iter()
            .map(|ex| NliExample {
                premise: String::new(),
                ..ex.clone()
            })
            .collect(),
    }
}

/// Label proportions as percentages, in label-code order.
pub fn label_distribution(corpus: &Corpus) -> Result<[f64; 3]> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len() as f64;
    Ok(corpus.label_counts().map(|c| 100.0 * c as f64 / n))
}

/// Concatenates `augmented` after `original`. Augmented ids that collide with an
/// existing id get a `#augN` suffix with the smallest free N.
pub fn merge(original: &Corpus, augmented: &Corpus) -> Result<Corpus> {
    if original.split != augmented.split {
        return Err(Error::SplitMismatch {
            left: original.split.to_string(),
            right: augmented.split.to_string(),
        });
    }
    let mut taken: HashSet<String> = original.iter().map(|ex| ex.id.clone()).collect();
    let mut examples = original.examples.clone();
    examples.reserve(augmented.len());
    for ex in augmented {
        let mut ex = ex.clone();
        if taken.contains(&ex.id) {
            let base = ex.id.clone();
            let mut n = 1;
            while taken.contains(&format!("{base}#aug{n}")) {
                n += 1;
            }
            ex.id = format!("{base}#aug{n}");
        }
        taken.insert(ex.id.clone());
        examples.push(ex);
    }
    Ok(Corpus {
        split: original.split,
        examples,
    })
}
