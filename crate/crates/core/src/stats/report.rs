use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ChiSquareResult, ContingencyRow, ExpectedProportions, WordType};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRow {
    pub proportions: [f64; 3],
    pub p_value: f64,
}

/// Top-k test results per word type, preceded by the expected-proportion row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub k: usize,
    pub min_total: u64,
    pub expected: ExpectedRow,
    pub subject_nouns: Vec<ChiSquareResult>,
    pub main_verbs: Vec<ChiSquareResult>,
    /// Set when fewer than `k` testable subject rows exist.
    pub subject_truncated: bool,
    /// Set when fewer than `k` testable verb rows exist.
    pub verb_truncated: bool,
    pub warnings: Vec<String>,
}

impl StatsReport {
    pub fn rows(&self, word_type: WordType) -> &[ChiSquareResult] {
        match word_type {
            WordType::SubjectNoun => &self.subject_nouns,
            WordType::MainVerb => &self.main_verbs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.subject_nouns.is_empty() && self.main_verbs.is_empty()
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let header = [
            "Type",
            "Word",
            "Entailment",
            "Neutral",
            "Contradiction",
            "P-value",
            "log p",
            "N",
        ];
        let mut lines: Vec<[String; 8]> = Vec::new();
        let e = &self.expected.proportions;
        lines.push([
            "Expected proportion".into(),
            String::new(),
            format!("{:.2}", e[0]),
            format!("{:.2}", e[1]),
            format!("{:.2}", e[2]),
            format_p_value(self.expected.p_value),
            "0.00".into(),
            String::new(),
        ]);
        for r in self.subject_nouns.iter().chain(&self.main_verbs) {
            lines.push([
                r.word_type.title().into(),
                r.word.clone(),
                format!("{:.2}", r.proportions[0]),
                format!("{:.2}", r.proportions[1]),
                format!("{:.2}", r.proportions[2]),
                format_p_value(r.p_value),
                format!("{:.2}", r.log_p),
                r.total.to_string(),
            ]);
        }

        let mut widths = header.map(str::len);
        for line in &lines {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let render = |out: &mut String, cells: &[&str]| {
            let mut line = String::new();
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                // text columns left-aligned, numbers right-aligned
                if i < 2 {
                    let _ = write!(line, "{cell:<w$}");
                } else {
                    let _ = write!(line, "{cell:>w$}");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        };
        render(&mut out, &header);
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
        out.push_str(&rule);
        out.push('\n');
        for (i, line) in lines.iter().enumerate() {
            let cells: Vec<&str> = line.iter().map(String::as_str).collect();
            render(&mut out, &cells);
            if i == 0 || i == self.subject_nouns.len() {
                out.push_str(&rule);
                out.push('\n');
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Formats a p-value with two significant digits; underflowed values print as `1.0e-inf`.
pub fn format_p_value(p: f64) -> String {
    if p == 1.0 {
        "1.0".into()
    } else if p == 0.0 {
        "1.0e-inf".into()
    } else {
        format!("{p:.1e}")
    }
}

/// Selects the `k` most frequent rows of each word type (among rows with at
/// least `min_total` observations) and tests each against `expected`.
pub fn top_k_report(
    rows: &[ContingencyRow],
    expected: &ExpectedProportions,
    k: usize,
    min_total: u64,
) -> Result<StatsReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut warnings = Vec::new();
    let mut select = |word_type: WordType| -> Result<(Vec<ChiSquareResult>, bool)> {
        let mut eligible: Vec<&ContingencyRow> = rows
            .iter()
            .filter(|r| r.word_type == word_type && r.total >= min_total)
            .collect();
        eligible.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.word.cmp(&b.word)));
        let truncated = eligible.len() < k;
        if truncated {
            warnings.push(format!(
                "only {} {} rows with at least {} observations (k = {})",
                eligible.len(),
                word_type,
                min_total,
                k
            ));
        }
        let results = eligible
            .into_iter()
            .take(k)
            .map(|r| ChiSquareResult::for_row(r, expected))
            .collect::<Result<Vec<_>>>()?;
        Ok((results, truncated))
    };
    let (subject_nouns, subject_truncated) = select(WordType::SubjectNoun)?;
    let (main_verbs, verb_truncated) = select(WordType::MainVerb)?;

    Ok(StatsReport {
        k,
        min_total,
        expected: ExpectedRow {
            proportions: expected.percentages(),
            p_value: 1.0,
        },
        subject_nouns,
        main_verbs,
        subject_truncated,
        verb_truncated,
        warnings,
    })
}

/// Writes every contingency row as CSV with one count column per label.
pub fn write_contingency_csv<W: Write>(rows: &[ContingencyRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["word", "word_type"];
    header.extend(Label::ALL.iter().map(|l| l.as_str()));
    header.push("total");
    w.write_record(&header)?;
    for r in rows {
        w.write_record([
            r.word.clone(),
            r.word_type.to_string(),
            r.counts[0].to_string(),
            r.counts[1].to_string(),
            r.counts[2].to_string(),
            r.total.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
