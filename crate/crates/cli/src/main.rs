use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nliprobe::config::{resolve, Arm, ExperimentSpec};
use nliprobe::{cmd_augment, cmd_evaluate, cmd_experiment, cmd_stats, cmd_synth, cmd_train};
use nliprobe_core::augment::Strategy;
use nliprobe_core::baseline::Mode;
use nliprobe_core::corpus::Split;
use nliprobe_core::synth::SynthConfig;

#[derive(Parser)]
#[command(
    name = "nliprobe",
    version,
    about = "Vocabulary artifacts in NLI corpora: statistics, augmentation, baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON settings file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Root for reports/, augmented/, models/ and tables/.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Relative input paths are looked up here.
    #[arg(long, global = true, env = "NLIPROBE_DATA_DIR")]
    data_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Subject/verb label statistics with χ² goodness-of-fit tests.
    Stats {
        /// Corpus to analyse (defaults to the configured train file).
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "train")]
        split: Split,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        min_total: Option<u64>,
        /// POS lexicon replacing the bundled one.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Writes rewritten copies of a training corpus.
    Augment {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        strategy: Strategy,
        #[command(flatten)]
        augment: AugmentFlags,
        #[command(flatten)]
        resources: ResourceFlags,
    },
    /// Trains one classifier with dev-set checkpoint selection.
    Train {
        #[arg(long)]
        mode: Mode,
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        training: TrainFlags,
    },
    /// Scores a saved model on a corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Baseline plus augmentation strategies, pair and hypothesis-only models.
    Experiment {
        #[command(flatten)]
        data: DataFlags,
        /// Comma-separated strategies; "none" is always included.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Arm>>,
        #[command(flatten)]
        augment: AugmentFlags,
        #[command(flatten)]
        resources: ResourceFlags,
        #[command(flatten)]
        training: TrainFlags,
    },
    /// Writes the synthetic marker corpus and its toy embedding table.
    Synth {
        /// Target directory (defaults to <out-dir>/data).
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 30_000)]
        examples: usize,
    },
}

#[derive(Args)]
struct DataFlags {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentFlags {
    /// Fraction of eligible words to alter.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    copies: Option<usize>,
}

#[derive(Args)]
struct ResourceFlags {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    wordnet: Option<PathBuf>,
    #[arg(long)]
    ppdb: Option<PathBuf>,
}

#[derive(Args)]
struct TrainFlags {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    checkpoint_interval: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, value: Option<PathBuf>) {
    if value.is_some() {
        *slot = value;
    }
}

impl DataFlags {
    fn apply(self, spec: &mut ExperimentSpec) {
        set_path(&mut spec.train, self.train);
        set_path(&mut spec.dev, self.dev);
        set_path(&mut spec.test, self.test);
    }
}

impl AugmentFlags {
    fn apply(self, spec: &mut ExperimentSpec) {
        set(&mut spec.augment.word_rate, self.rate);
        set(&mut spec.augment.copies_per_example, self.copies);
    }
}

impl ResourceFlags {
    fn apply(self, spec: &mut ExperimentSpec) {
        set_path(&mut spec.resources.embeddings, self.embeddings);
        set_path(&mut spec.resources.wordnet, self.wordnet);
        set_path(&mut spec.resources.ppdb, self.ppdb);
    }
}

impl TrainFlags {
    fn apply(self, spec: &mut ExperimentSpec) {
        let t = &mut spec.training;
        set(&mut t.learning_rate, self.learning_rate);
        set(&mut t.epochs, self.epochs);
        set(&mut t.batch_size, self.batch_size);
        set(&mut t.l2, self.l2);
        set(&mut t.checkpoint_interval, self.checkpoint_interval);
    }
}

/// Resolves every configured input path against the data directory.
fn resolve_inputs(spec: &mut ExperimentSpec, data_dir: Option<&Path>) {
    let fix = |p: &mut Option<PathBuf>| {
        if let Some(path) = p {
            *path = resolve(data_dir, path);
        }
    };
    fix(&mut spec.train);
    fix(&mut spec.dev);
    fix(&mut spec.test);
    fix(&mut spec.resources.embeddings);
    fix(&mut spec.resources.wordnet);
    fix(&mut spec.resources.ppdb);
    fix(&mut spec.resources.lexicon);
}

/// Writes to stdout, surfacing a closed pipe as an error instead of a panic.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> Result<()> {
    let mut spec = match &cli.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    set(&mut spec.seed, cli.seed);
    set(&mut spec.out_dir, cli.out_dir);
    let data_dir = cli.data_dir.as_deref();
    let input = |p: Option<PathBuf>| p.map(|p| resolve(data_dir, &p));

    match cli.command {
        Command::Stats {
            corpus,
            split,
            k,
            min_total,
            lexicon,
        } => {
            set(&mut spec.stats.k, k);
            set(&mut spec.stats.min_total, min_total);
            set_path(&mut spec.resources.lexicon, lexicon);
            resolve_inputs(&mut spec, data_dir);
            let corpus = input(corpus)
                .or_else(|| spec.train.clone())
                .context("no corpus given (--corpus)")?;
            let out = cmd_stats(&spec, &corpus, split)?;
            emit(&out.report.to_text())?;
            for w in &out.report.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Augment {
            corpus,
            strategy,
            augment,
            resources,
        } => {
            augment.apply(&mut spec);
            resources.apply(&mut spec);
            resolve_inputs(&mut spec, data_dir);
            let corpus = input(corpus)
                .or_else(|| spec.train.clone())
                .context("no corpus given (--corpus)")?;
            print_json(&cmd_augment(&spec, &corpus, strategy)?)?;
        }
        Command::Train {
            mode,
            data,
            training,
        } => {
            data.apply(&mut spec);
            training.apply(&mut spec);
            resolve_inputs(&mut spec, data_dir);
            print_json(&cmd_train(&spec, mode)?)?;
        }
        Command::Evaluate {
            model,
            corpus,
            split,
        } => {
            resolve_inputs(&mut spec, data_dir);
            let corpus = input(corpus)
                .or_else(|| spec.test.clone())
                .context("no corpus given (--corpus)")?;
            print_json(&cmd_evaluate(&spec, &model, &corpus, split)?)?;
        }
        Command::Experiment {
            data,
            strategies,
            augment,
            resources,
            training,
        } => {
            data.apply(&mut spec);
            set(&mut spec.strategies, strategies);
            augment.apply(&mut spec);
            resources.apply(&mut spec);
            training.apply(&mut spec);
            resolve_inputs(&mut spec, data_dir);
            emit(&cmd_experiment(&spec)?.to_text())?;
        }
        Command::Synth { dir, examples } => {
            let dir = dir.unwrap_or_else(|| spec.out_dir.join("data"));
            let cfg = SynthConfig {
                n_examples: examples,
                seed: spec.seed,
                ..SynthConfig::default()
            };
            print_json(&cmd_synth(&dir, &cfg)?)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        if is_broken_pipe(&e) {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
