use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureVector, LinearModel, Mode, Vocabulary};
use crate::augment::derive_seed;
use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Keeps shuffle streams apart from augmentation streams under the same seed.
const SHUFFLE_STREAM: u64 = 0x5348_5546_464c_4521;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub checkpoint_interval: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 5,
            batch_size: 256,
            l2: 1e-6,
            checkpoint_interval: 500,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if self.checkpoint_interval == 0 {
            return bad("checkpoint_interval");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidArgument("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

/// One line of the training log. `dev_accuracy` is set at checkpoints only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub epoch: usize,
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dev_accuracy: Option<f64>,
}

/// A trained model with the vocabulary it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub vocab: Vocabulary,
    pub model: LinearModel,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub classifier: Classifier,
    pub log: Vec<LogEntry>,
    pub best_step: usize,
    pub best_dev_accuracy: f64,
}

impl TrainOutcome {
    pub fn write_log<W: Write>(&self, mut writer: W) -> Result<()> {
        for entry in &self.log {
            serde_json::to_writer(&mut writer, entry)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    /// Percent correct.
    pub accuracy: f64,
    /// Percent correct among examples of each gold class; `None` when the class is absent.
    pub per_class_accuracy: [Option<f64>; Label::COUNT],
    /// `confusion[gold][predicted]`.
    pub confusion: [[u64; Label::COUNT]; Label::COUNT],
}

/// Mini-batch gradient descent with a seeded shuffle per epoch. Dev accuracy
/// is measured every `checkpoint_interval` steps and after the last step; the
/// best checkpoint is returned, the earliest winning ties.
pub fn train(train: &Corpus, dev: &Corpus, mode: Mode, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dev.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocabulary::build(train, mode)?;
    let data: Vec<(FeatureVector, Label)> = train
        .examples()
        .par_iter()
        .map(|ex| (vocab.featurize(ex), ex.label))
        .collect();
    let dev_data: Vec<(FeatureVector, Label)> = dev
        .examples()
        .par_iter()
        .map(|ex| (vocab.featurize(ex), ex.label))
        .collect();

    let steps_per_epoch = data.len().div_ceil(cfg.batch_size);
    let total_steps = steps_per_epoch * cfg.epochs;
    let mut model = LinearModel::zeros(vocab.len());
    let mut best: Option<(LinearModel, usize, f64)> = None;
    let mut log = Vec::with_capacity(total_steps);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0;

    for epoch in 0..cfg.epochs {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ SHUFFLE_STREAM, epoch as u64, 0));
        order.sort_unstable();
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            step += 1;
            let batch: Vec<(&FeatureVector, Label)> =
                chunk.iter().map(|&i| (&data[i].0, data[i].1)).collect();
            let loss = model
                .sgd_step(&batch, cfg.l2, cfg.learning_rate)
                .map_err(|e| match e {
                    Error::Diverged { loss, .. } => Error::Diverged { step, loss },
                    other => other,
                })?;
            if model
                .weights()
                .iter()
                .chain(model.bias())
                .any(|w| !w.is_finite())
            {
                return Err(Error::Diverged {
                    step,
                    loss: f64::NAN,
                });
            }
            let mut entry = LogEntry {
                step,
                epoch: epoch + 1,
                loss,
                dev_accuracy: None,
            };
            if step % cfg.checkpoint_interval == 0 || step == total_steps {
                let acc = accuracy_of(&model, &dev_data);
                entry.dev_accuracy = Some(acc);
                if best.as_ref().is_none_or(|(_, _, b)| acc > *b) {
                    best = Some((model.clone(), step, acc));
                }
            }
            log.push(entry);
        }
    }

    let (model, best_step, best_dev_accuracy) = best.expect("at least one checkpoint");
    Ok(TrainOutcome {
        classifier: Classifier { vocab, model },
        log,
        best_step,
        best_dev_accuracy,
    })
}

fn accuracy_of(model: &LinearModel, data: &[(FeatureVector, Label)]) -> f64 {
    let correct = data
        .par_iter()
        .filter(|(x, y)| model.predict(x) == *y)
        .count();
    100.0 * correct as f64 / data.len() as f64
}

pub fn evaluate(
    model: &LinearModel,
    corpus: &Corpus,
    vocab: &Vocabulary,
    mode: Mode,
) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if vocab.mode() != mode {
        return Err(Error::InvalidArgument(format!(
            "vocabulary built for {} cannot evaluate in {} mode",
            vocab.mode(),
            mode
        )));
    }
    if model.dim() != vocab.len() {
        return Err(Error::InvalidArgument(format!(
            "model dimension {} does not match vocabulary size {}",
            model.dim(),
            vocab.len()
        )));
    }
    let predictions: Vec<(Label, Label)> = corpus
        .examples()
        .par_iter()
        .map(|ex| (ex.label, model.predict(&vocab.featurize(ex))))
        .collect();

    let mut confusion = [[0u64; Label::COUNT]; Label::COUNT];
    for (gold, pred) in predictions {
        confusion[gold.code()][pred.code()] += 1;
    }
    let total = corpus.len();
    let trace: u64 = (0..Label::COUNT).map(|c| confusion[c][c]).sum();
    let per_class_accuracy = std::array::from_fn(|c| {
        let row: u64 = confusion[c].iter().sum();
        (row > 0).then(|| 100.0 * confusion[c][c] as f64 / row as f64)
    });
    Ok(EvalReport {
        total,
        accuracy: 100.0 * trace as f64 / total as f64,
        per_class_accuracy,
        confusion,
    })
}

#[derive(Serialize, Deserialize)]
struct SavedClassifier {
    format_version: u32,
    mode: Mode,
    features: Vec<String>,
    weights: Vec<Vec<f64>>,
    bias: [f64; Label::COUNT],
}

impl Classifier {
    pub fn mode(&self) -> Mode {
        self.vocab.mode()
    }

    pub fn predict(&self, example: &crate::corpus::NliExample) -> Label {
        self.model.predict(&self.vocab.featurize(example))
    }

    pub fn evaluate(&self, corpus: &Corpus) -> Result<EvalReport> {
        evaluate(&self.model, corpus, &self.vocab, self.mode())
    }

    /// Versioned JSON with the feature names in index order and one weight row per class.
    pub fn save_json<W: Write>(&self, writer: W) -> Result<()> {
        let dim = self.model.dim();
        let saved = SavedClassifier {
            format_version: MODEL_FORMAT_VERSION,
            mode: self.mode(),
            features: self.vocab.names().to_vec(),
            weights: self
                .model
                .weights()
                .chunks(dim.max(1))
                .map(<[f64]>::to_vec)
                .collect(),
            bias: *self.model.bias(),
        };
        serde_json::to_writer(writer, &saved)?;
        Ok(())
    }

    pub fn load_json<R: BufRead>(reader: R) -> Result<Classifier> {
        let saved: SavedClassifier = serde_json::from_reader(reader)?;
        if saved.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format version {}",
                saved.format_version
            )));
        }
        let dim = saved.features.len();
        if saved.weights.len() != Label::COUNT || saved.weights.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(
                "weight rows do not match the feature list".into(),
            ));
        }
        let model = LinearModel::from_parts(dim, saved.weights.concat(), saved.bias)?;
        Ok(Classifier {
            vocab: Vocabulary::from_names(saved.mode, saved.features),
            model,
        })
    }
}
