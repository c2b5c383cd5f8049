//! Word × label contingency counts and the chi-square goodness-of-fit test
//! against expected label proportions.

mod chart;
pub mod gamma;
mod report;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::tagging::Extraction;

pub use chart::render_proportion_chart;
pub use report::{top_k_report, write_contingency_csv, ExpectedRow, StatsReport};

/// Degrees of freedom for a test over the three labels.
pub const LABEL_DF: usize = Label::COUNT - 1;

/// Rows with fewer observations than this are not tested by default
/// (keeps every expected cell count at or above 5).
pub const DEFAULT_MIN_TOTAL: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordType {
    SubjectNoun,
    MainVerb,
}

impl WordType {
    pub fn as_str(self) -> &'static str {
        match self {
            WordType::SubjectNoun => "subject_noun",
            WordType::MainVerb => "main_verb",
        }
    }

    /// Human-readable name used in tables and charts.
    pub fn title(self) -> &'static str {
        match self {
            WordType::SubjectNoun => "Main subject (noun)",
            WordType::MainVerb => "Main verb",
        }
    }
}

impl fmt::Display for WordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyRow {
    pub word: String,
    pub word_type: WordType,
    /// Observed count per label, in label-code order.
    pub counts: [u64; 3],
    pub total: u64,
}

impl ContingencyRow {
    pub fn proportions(&self) -> [f64; 3] {
        percentages(self.counts)
    }
}

fn percentages(counts: [u64; 3]) -> [f64; 3] {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return [0.0; 3];
    }
    counts.map(|c| 100.0 * c as f64 / total as f64)
}

type CountTable = HashMap<(String, WordType), [u64; 3]>;

fn tally(mut table: CountTable, (extraction, label): &(Extraction, Label)) -> CountTable {
    let fields = [
        (&extraction.main_subject, WordType::SubjectNoun),
        (&extraction.main_verb, WordType::MainVerb),
    ];
    for (word, word_type) in fields {
        if let Some(word) = word {
            table.entry((word.clone(), word_type)).or_insert([0; 3])[label.code()] += 1;
        }
    }
    table
}

fn merge_tables(mut a: CountTable, b: CountTable) -> CountTable {
    for (key, counts) in b {
        let slot = a.entry(key).or_insert([0; 3]);
        for (s, c) in slot.iter_mut().zip(counts) {
            *s += c;
        }
    }
    a
}

/// Tallies labels per extracted word. Rows are sorted by descending total,
/// then word, then word type.
pub fn count_word_labels(extractions: &[(Extraction, Label)]) -> Vec<ContingencyRow> {
    let table = extractions
        .par_iter()
        .fold(CountTable::new, tally)
        .reduce(CountTable::new, merge_tables);

    let mut rows: Vec<ContingencyRow> = table
        .into_iter()
        .map(|((word, word_type), counts)| ContingencyRow {
            word,
            word_type,
            counts,
            total: counts.iter().sum(),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.total
            .cmp(&a.total)
            .then_with(|| a.word.cmp(&b.word))
            .then_with(|| a.word_type.cmp(&b.word_type))
    });
    rows
}

/// Null-hypothesis label proportions. Each component lies in (0, 1) and they sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedProportions([f64; 3]);

impl ExpectedProportions {
    pub fn new(p: [f64; 3]) -> Result<ExpectedProportions> {
        if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "expected proportions must lie in (0, 1): {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "expected proportions sum to {sum}, not 1"
            )));
        }
        Ok(ExpectedProportions(p))
    }

    pub fn uniform() -> ExpectedProportions {
        ExpectedProportions([1.0 / 3.0; 3])
    }

    /// Proportions observed in a set of label counts.
    pub fn from_counts(counts: [u64; 3]) -> Result<ExpectedProportions> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        ExpectedProportions::new(counts.map(|c| c as f64 / total as f64))
    }

    /// Label proportions over the extraction subset itself.
    pub fn from_extractions(extractions: &[(Extraction, Label)]) -> Result<ExpectedProportions> {
        let mut counts = [0u64; 3];
        for (_, label) in extractions {
            counts[label.code()] += 1;
        }
        ExpectedProportions::from_counts(counts)
    }

    pub fn get(&self) -> [f64; 3] {
        self.0
    }

    pub fn percentages(&self) -> [f64; 3] {
        self.0.map(|p| 100.0 * p)
    }
}

/// Pearson statistic `Σ (O_i − N p_i)² / (N p_i)` for any number of cells.
///
/// A cell whose deviation is within rounding of its expected count contributes
/// zero, so counts that equal `N p_i` give a statistic of exactly 0.
pub fn gof_statistic(observed: &[u64], probabilities: &[f64]) -> Result<f64> {
    if observed.len() != probabilities.len() || observed.is_empty() {
        return Err(Error::InvalidArgument(
            "observed and expected must have the same non-zero length".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    if let Some(p) = probabilities.iter().find(|&&p| p.is_nan() || p <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "expected proportion {p} is not positive"
        )));
    }
    let n = n as f64;
    let mut statistic = 0.0;
    for (&o, &p) in observed.iter().zip(probabilities) {
        let expected = n * p;
        let o = o as f64;
        let diff = o - expected;
        if diff.abs() <= 4.0 * f64::EPSILON * o.max(expected) {
            continue;
        }
        statistic += diff * diff / expected;
    }
    Ok(statistic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub log_p: f64,
}

/// Chi-square goodness-of-fit of per-label counts against `expected`.
pub fn chi_square_gof(observed: [u64; 3], expected: &ExpectedProportions) -> Result<GofTest> {
    let statistic = gof_statistic(&observed, &expected.get())?;
    let (p_value, log_p) = gamma::chi_square_sf(statistic, LABEL_DF);
    Ok(GofTest {
        statistic,
        df: LABEL_DF,
        p_value,
        log_p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub word: String,
    pub word_type: WordType,
    /// Label percentages for this word, in label-code order.
    pub proportions: [f64; 3],
    pub total: u64,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub log_p: f64,
}

impl ChiSquareResult {
    pub fn for_row(
        row: &ContingencyRow,
        expected: &ExpectedProportions,
    ) -> Result<ChiSquareResult> {
        let test = chi_square_gof(row.counts, expected)?;
        Ok(ChiSquareResult {
            word: row.word.clone(),
            word_type: row.word_type,
            proportions: row.proportions(),
            total: row.total,
            statistic: test.statistic,
            df: test.df,
            p_value: test.p_value,
            log_p: test.log_p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subj(w: &str) -> Extraction {
        Extraction {
            main_subject: Some(w.into()),
            main_verb: None,
        }
    }

    #[test]
    fn counts_one_row_per_word_and_type() {
        let rows = count_word_labels(&[
            (subj("men"), Label::Contradiction),
            (subj("men"), Label::Neutral),
        ]);
        assert_eq!(
            rows,
            vec![ContingencyRow {
                word: "men".into(),
                word_type: WordType::SubjectNoun,
                counts: [0, 1, 1],
                total: 2,
            }]
        );
        assert!(count_word_labels(&[]).is_empty());
    }

    #[test]
    fn same_word_as_subject_and_verb_gives_two_rows() {
        let e = Extraction {
            main_subject: Some("walk".into()),
            main_verb: Some("walk".into()),
        };
        let rows = count_word_labels(&[(e, Label::Entailment)]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].word_type, WordType::SubjectNoun);
        assert_eq!(rows[1].word_type, WordType::MainVerb);
    }

    #[test]
    fn hand_arithmetic_case() {
        let t = chi_square_gof([50, 25, 25], &ExpectedProportions::uniform()).unwrap();
        assert!((t.statistic - 12.5).abs() < 1e-12);
        assert!((t.p_value - (-6.25f64).exp()).abs() < 1e-15);
        assert!((t.p_value - 1.9305e-3).abs() < 1e-7);
        assert_eq!(t.df, 2);
    }

    #[test]
    fn near_uniform_counts() {
        let t = chi_square_gof([33, 33, 34], &ExpectedProportions::uniform()).unwrap();
        assert!((t.statistic - 0.02).abs() < 1e-12);
        assert!(t.p_value > 0.99 && t.p_value < 1.0);
    }

    #[test]
    fn exact_fit_is_zero_and_one() {
        let counts = [3339, 3327, 3335];
        let expected = ExpectedProportions::from_counts(counts).unwrap();
        let t = chi_square_gof(counts, &expected).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert_eq!(t.log_p, 0.0);
    }

    #[test]
    fn extreme_skew_underflows_with_finite_log() {
        let t =
            chi_square_gof([419_300, 289_600, 291_100], &ExpectedProportions::uniform()).unwrap();
        assert!(t.p_value < 1e-300);
        assert!(t.log_p.is_finite() && t.log_p < -1000.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(chi_square_gof([0, 0, 0], &ExpectedProportions::uniform()).is_err());
        assert!(ExpectedProportions::new([0.5, 0.5, 0.0]).is_err());
        assert!(ExpectedProportions::new([0.5, 0.4, 0.2]).is_err());
        assert!(gof_statistic(&[1, 2], &[0.5, -0.5]).is_err());
    }
}
