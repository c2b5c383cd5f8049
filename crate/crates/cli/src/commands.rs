use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use nliprobe_core::augment::{
    augment_corpus, fit_tfidf, load_embeddings, AugmentConfig, Resources, Strategy, SynonymLexicon,
    SynonymSource,
};
use nliprobe_core::baseline::{train, Classifier, EvalReport, Mode, TrainConfig, TrainOutcome};
use nliprobe_core::corpus::{self, merge, strip_premises, Corpus, Split};
use nliprobe_core::stats::{
    count_word_labels, render_proportion_chart, top_k_report, write_contingency_csv,
    ExpectedProportions, StatsReport,
};
use nliprobe_core::synth::{self, SynthConfig};
use nliprobe_core::tagging::{extract_corpus, Lexicon};

use crate::config::{Arm, ExperimentSpec};

pub const REPORTS_DIR: &str = "reports";
pub const AUGMENTED_DIR: &str = "augmented";
pub const MODELS_DIR: &str = "models";
pub const TABLES_DIR: &str = "tables";

/// Reads JSON Lines, or TSV when the file name ends in `.tsv`.
pub fn read_corpus(path: &Path, split: Split) -> Result<Corpus> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "tsv") {
        corpus::parse_tsv(file, split)
    } else {
        corpus::parse_jsonl(BufReader::new(file), split)
    }
    .with_context(|| format!("reading {}", path.display()))?;
    Ok(parsed.corpus)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    body(&mut w)?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_with(path, |w| Ok(w.write_all(text.as_bytes())?))
}

fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    write_with(path, |w| Ok(corpus::write_jsonl(corpus, w)?))
}

fn load_lexicon(spec: &ExperimentSpec) -> Result<Lexicon> {
    match &spec.resources.lexicon {
        Some(path) => {
            let file =
                File::open(path).with_context(|| format!("opening lexicon {}", path.display()))?;
            Lexicon::parse(BufReader::new(file))
                .with_context(|| format!("reading lexicon {}", path.display()))
        }
        None => Ok(Lexicon::embedded()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsOutput {
    pub examples: usize,
    /// Examples with neither a subject nor a verb extracted.
    pub excluded: usize,
    pub report: StatsReport,
}

/// Extraction, counting and χ² tests over one corpus. Writes
/// `reports/stats.{json,txt,svg}` and `reports/counts.csv`.
pub fn cmd_stats(spec: &ExperimentSpec, corpus_path: &Path, split: Split) -> Result<StatsOutput> {
    let corpus = read_corpus(corpus_path, split)?;
    let lexicon = load_lexicon(spec)?;
    let extraction = extract_corpus(&corpus, &lexicon);
    if extraction.entries.is_empty() {
        bail!(
            "no subject or verb could be extracted from {}",
            corpus_path.display()
        );
    }
    let rows = count_word_labels(&extraction.entries);
    let expected = ExpectedProportions::from_extractions(&extraction.entries)
        .context("expected proportions need every label among the extracted examples")?;
    let report = top_k_report(&rows, &expected, spec.stats.k, spec.stats.min_total)?;

    let dir = spec.out_dir.join(REPORTS_DIR);
    write_text(&dir.join("stats.txt"), &report.to_text())?;
    write_text(&dir.join("stats.svg"), &render_proportion_chart(&report))?;
    write_with(&dir.join("counts.csv"), |w| {
        Ok(write_contingency_csv(&rows, w)?)
    })?;
    let output = StatsOutput {
        examples: corpus.len(),
        excluded: extraction.excluded,
        report,
    };
    write_json(&dir.join("stats.json"), &output)?;
    Ok(output)
}

/// Loads the one resource `strategy` needs. The tf-idf model is fitted on
/// `train`'s hypotheses.
pub fn load_resources(
    spec: &ExperimentSpec,
    strategy: Strategy,
    train: &Corpus,
) -> Result<Resources> {
    let mut res = Resources::default();
    let synonyms = |path: &Option<PathBuf>, source: SynonymSource| -> Result<SynonymLexicon> {
        match path {
            Some(p) => {
                let file = File::open(p)
                    .with_context(|| format!("opening {source} lexicon {}", p.display()))?;
                Ok(SynonymLexicon::parse(BufReader::new(file), source)
                    .with_context(|| format!("reading {}", p.display()))?)
            }
            None => Ok(SynonymLexicon::bundled(source)),
        }
    };
    match strategy {
        Strategy::CharSubstitute => {}
        Strategy::WordEmbedding => {
            let Some(path) = &spec.resources.embeddings else {
                bail!("word_embedding needs an embeddings file (--embeddings or resources.embeddings)");
            };
            let file = File::open(path)
                .with_context(|| format!("opening embeddings {}", path.display()))?;
            res.embeddings = Some(
                load_embeddings(BufReader::new(file))
                    .with_context(|| format!("reading {}", path.display()))?,
            );
        }
        Strategy::SynonymWordnet => {
            res.wordnet = Some(synonyms(&spec.resources.wordnet, SynonymSource::Wordnet)?)
        }
        Strategy::SynonymPpdb => {
            res.ppdb = Some(synonyms(&spec.resources.ppdb, SynonymSource::Ppdb)?)
        }
        Strategy::Tfidf => {
            res.tfidf = Some(fit_tfidf(train.iter().map(|ex| ex.hypothesis.as_str()))?)
        }
    }
    Ok(res)
}

pub fn augment_config(spec: &ExperimentSpec, strategy: Strategy) -> AugmentConfig {
    AugmentConfig {
        strategy,
        word_rate: spec.augment.word_rate,
        copies_per_example: spec.augment.copies_per_example,
        seed: spec.seed,
        min_word_length: spec.augment.min_word_length,
        preserve_stopwords: spec.augment.preserve_stopwords,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AugmentSummary {
    pub strategy: Strategy,
    pub examples_in: usize,
    pub examples_out: usize,
    /// Outputs identical to their source hypothesis.
    pub identities: usize,
    pub path: PathBuf,
}

fn augment_to_file(
    spec: &ExperimentSpec,
    train: &Corpus,
    strategy: Strategy,
) -> Result<(Corpus, AugmentSummary)> {
    let resources = load_resources(spec, strategy, train)?;
    let run = augment_corpus(train, &augment_config(spec, strategy), &resources)?;
    let path = spec
        .out_dir
        .join(AUGMENTED_DIR)
        .join(format!("{}.jsonl", strategy.name()));
    write_corpus(&path, &run.corpus)?;
    let summary = AugmentSummary {
        strategy,
        examples_in: train.len(),
        examples_out: run.corpus.len(),
        identities: run.identities,
        path,
    };
    Ok((run.corpus, summary))
}

/// Rewrites the hypotheses of a training corpus into `augmented/<strategy>.jsonl`.
pub fn cmd_augment(
    spec: &ExperimentSpec,
    corpus_path: &Path,
    strategy: Strategy,
) -> Result<AugmentSummary> {
    let train = read_corpus(corpus_path, Split::Train)?;
    augment_to_file(spec, &train, strategy).map(|(_, summary)| summary)
}

fn prepare(corpus: &Corpus, mode: Mode) -> Corpus {
    match mode {
        Mode::HypothesisOnly => strip_premises(corpus),
        Mode::Pair => corpus.clone(),
    }
}

fn save_model(dir: &Path, stem: &str, outcome: &TrainOutcome) -> Result<PathBuf> {
    let model_path = dir.join(format!("{stem}.json"));
    write_with(&model_path, |w| {
        Ok(outcome.classifier.save_json(&mut *w)?)
    })?;
    write_with(&dir.join(format!("{stem}_log.jsonl")), |w| {
        Ok(outcome.write_log(&mut *w)?)
    })?;
    Ok(model_path)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub mode: Mode,
    pub best_step: usize,
    pub best_dev_accuracy: f64,
    pub steps: usize,
    pub features: usize,
    pub model_path: PathBuf,
}

/// Trains one classifier on the configured train split with dev-set checkpoint
/// selection; writes `models/<mode>.json` and its log.
pub fn cmd_train(spec: &ExperimentSpec, mode: Mode) -> Result<TrainSummary> {
    let train_set = read_corpus(spec.require(&spec.train, "train")?, Split::Train)?;
    let dev = read_corpus(spec.require(&spec.dev, "dev")?, Split::Dev)?;
    let outcome = train(
        &prepare(&train_set, mode),
        &prepare(&dev, mode),
        mode,
        &spec.train_config(),
    )?;
    let model_path = save_model(&spec.out_dir.join(MODELS_DIR), mode.as_str(), &outcome)?;
    Ok(TrainSummary {
        mode,
        best_step: outcome.best_step,
        best_dev_accuracy: outcome.best_dev_accuracy,
        steps: outcome.log.len(),
        features: outcome.classifier.vocab.len(),
        model_path,
    })
}

/// Scores a saved model; writes `reports/evaluation_<mode>.json`.
pub fn cmd_evaluate(
    spec: &ExperimentSpec,
    model_path: &Path,
    corpus_path: &Path,
    split: Split,
) -> Result<EvalReport> {
    let file = File::open(model_path)
        .with_context(|| format!("opening model {}", model_path.display()))?;
    let classifier = Classifier::load_json(BufReader::new(file))
        .with_context(|| format!("reading model {}", model_path.display()))?;
    let corpus = read_corpus(corpus_path, split)?;
    let mode = classifier.mode();
    let report = classifier.evaluate(&prepare(&corpus, mode))?;
    write_json(
        &spec
            .out_dir
            .join(REPORTS_DIR)
            .join(format!("evaluation_{}.json", mode.as_str())),
        &report,
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub strategy: Arm,
    pub title: String,
    pub train_examples: usize,
    pub identities: usize,
    pub pair_accuracy: f64,
    pub hypothesis_only_accuracy: f64,
    /// Accuracy change against the `none` row, in percentage points.
    pub pair_delta: f64,
    pub hypothesis_only_delta: f64,
    pub pair_best_step: usize,
    pub hypothesis_only_best_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub seed: u64,
    pub training: TrainConfig,
    pub rows: Vec<ExperimentRow>,
}

pub const TABLE_HEADERS: [&str; 5] = [
    "Augmentation approaches",
    "Premise and hypothesis",
    "Hypothesis-only",
    "Delta (pair)",
    "Delta (hypothesis-only)",
];

impl ExperimentTable {
    pub fn row(&self, arm: Arm) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.strategy == arm)
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.title.clone(),
                    format!("{:.2}", r.pair_accuracy),
                    format!("{:.2}", r.hypothesis_only_accuracy),
                    format!("{:+.2}", r.pair_delta),
                    format!("{:+.2}", r.hypothesis_only_delta),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..5)
            .map(|i| {
                cells
                    .iter()
                    .map(|c| c[i].len())
                    .chain([TABLE_HEADERS[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |fields: &[&str]| -> String {
            let mut s = format!("{:<w$}", fields[0], w = widths[0]);
            for i in 1..5 {
                s.push_str(&format!("  {:>w$}", fields[i], w = widths[i]));
            }
            s.trim_end().to_string() + "\n"
        };
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let mut out = line(&TABLE_HEADERS);
        out.push_str(&line(&as_strs(&rule)));
        for c in &cells {
            out.push_str(&line(&as_strs(c)));
        }
        out
    }
}

fn as_strs(row: &[String]) -> Vec<&str> {
    row.iter().map(String::as_str).collect()
}

struct ArmResult {
    arm: Arm,
    train_examples: usize,
    identities: usize,
    pair: (f64, usize),
    hypothesis_only: (f64, usize),
}

fn run_arm(
    spec: &ExperimentSpec,
    arm: Arm,
    train_set: &Corpus,
    dev: &Corpus,
    test: &Corpus,
) -> Result<ArmResult> {
    let stage = |s: &str| format!("strategy {arm}: {s} stage");
    let (merged, identities) = match arm {
        Arm::None => (train_set.clone(), 0),
        Arm::Augment(strategy) => {
            let (augmented, summary) =
                augment_to_file(spec, train_set, strategy).with_context(|| stage("augment"))?;
            let merged = merge(train_set, &augmented).with_context(|| stage("merge"))?;
            (merged, summary.identities)
        }
    };
    let cfg = spec.train_config();
    let models = spec.out_dir.join(MODELS_DIR);
    let fit = |mode: Mode| -> Result<(f64, usize)> {
        let outcome = train(&prepare(&merged, mode), &prepare(dev, mode), mode, &cfg)
            .with_context(|| stage(&format!("train ({mode})")))?;
        save_model(
            &models,
            &format!("{}_{}", arm.name(), mode.as_str()),
            &outcome,
        )
        .with_context(|| stage("save"))?;
        let report = outcome
            .classifier
            .evaluate(&prepare(test, mode))
            .with_context(|| stage(&format!("evaluate ({mode})")))?;
        Ok((report.accuracy, outcome.best_step))
    };
    let pair = fit(Mode::Pair)?;
    let hypothesis_only = fit(Mode::HypothesisOnly)?;
    Ok(ArmResult {
        arm,
        train_examples: merged.len(),
        identities,
        pair,
        hypothesis_only,
    })
}

/// For `none` and each strategy: augment the train split, merge, train pair
/// and hypothesis-only models and score both on test. Writes
/// `tables/experiment.{json,txt}` plus the augmented files and models.
pub fn cmd_experiment(spec: &ExperimentSpec) -> Result<ExperimentTable> {
    let train_set = read_corpus(spec.require(&spec.train, "train")?, Split::Train)?;
    let dev = read_corpus(spec.require(&spec.dev, "dev")?, Split::Dev)?;
    let test = read_corpus(spec.require(&spec.test, "test")?, Split::Test)?;

    let results: Vec<ArmResult> = spec
        .arms()
        .into_par_iter()
        .map(|arm| run_arm(spec, arm, &train_set, &dev, &test))
        .collect::<Result<_>>()?;

    let base = &results[0];
    let rows = results
        .iter()
        .map(|r| ExperimentRow {
            strategy: r.arm,
            title: r.arm.title().to_string(),
            train_examples: r.train_examples,
            identities: r.identities,
            pair_accuracy: r.pair.0,
            hypothesis_only_accuracy: r.hypothesis_only.0,
            pair_delta: r.pair.0 - base.pair.0,
            hypothesis_only_delta: r.hypothesis_only.0 - base.hypothesis_only.0,
            pair_best_step: r.pair.1,
            hypothesis_only_best_step: r.hypothesis_only.1,
        })
        .collect();
    let table = ExperimentTable {
        seed: spec.seed,
        training: spec.train_config(),
        rows,
    };
    let dir = spec.out_dir.join(TABLES_DIR);
    write_json(&dir.join("experiment.json"), &table)?;
    write_text(&dir.join("experiment.txt"), &table.to_text())?;
    Ok(table)
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthPaths {
    pub train: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
    pub embeddings: PathBuf,
}

/// Writes the synthetic marker corpus and its toy embedding table under `dir`.
pub fn cmd_synth(dir: &Path, cfg: &SynthConfig) -> Result<SynthPaths> {
    let data = synth::generate(cfg)?;
    let paths = SynthPaths {
        train: dir.join("synth_train.jsonl"),
        dev: dir.join("synth_dev.jsonl"),
        test: dir.join("synth_test.jsonl"),
        embeddings: dir.join("synth_embeddings.txt"),
    };
    write_corpus(&paths.train, &data.train)?;
    write_corpus(&paths.dev, &data.dev)?;
    write_corpus(&paths.test, &data.test)?;
    write_text(&paths.embeddings, &synth::toy_embeddings_text())?;
    Ok(paths)
}
