use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use nliprobe_core::augment::Strategy;
use nliprobe_core::baseline::TrainConfig;
use nliprobe_core::stats::DEFAULT_MIN_TOTAL;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One row of the experiment matrix: the unaugmented baseline or a strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    None,
    Augment(Strategy),
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::None => "none",
            Arm::Augment(s) => s.name(),
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Arm::None => "No - baseline",
            Arm::Augment(s) => s.title(),
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arm {
    type Err = nliprobe_core::Error;

    fn from_str(s: &str) -> nliprobe_core::Result<Arm> {
        if s == "none" {
            Ok(Arm::None)
        } else {
            s.parse().map(Arm::Augment)
        }
    }
}

impl Serialize for Arm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Arm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Arm, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Augmentation settings shared by every strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSettings {
    pub word_rate: f64,
    pub copies_per_example: usize,
    pub min_word_length: usize,
    pub preserve_stopwords: bool,
}

impl Default for AugmentSettings {
    fn default() -> AugmentSettings {
        let d = nliprobe_core::augment::AugmentConfig::new(Strategy::CharSubstitute);
        AugmentSettings {
            word_rate: d.word_rate,
            copies_per_example: d.copies_per_example,
            min_word_length: d.min_word_length,
            preserve_stopwords: d.preserve_stopwords,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcePaths {
    /// word2vec text file; required by word_embedding.
    pub embeddings: Option<PathBuf>,
    /// `word<TAB>syn,...` files; the bundled lexicons are used when absent.
    pub wordnet: Option<PathBuf>,
    pub ppdb: Option<PathBuf>,
    /// POS lexicon replacing the bundled one.
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSettings {
    pub k: usize,
    pub min_total: u64,
}

impl Default for StatsSettings {
    fn default() -> StatsSettings {
        StatsSettings {
            k: 10,
            min_total: DEFAULT_MIN_TOTAL,
        }
    }
}

/// Everything a run needs. Loaded from the `--config` JSON file; command-line
/// flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// `"none"` is added in front when missing.
    pub strategies: Vec<Arm>,
    pub augment: AugmentSettings,
    pub training: TrainConfig,
    pub stats: StatsSettings,
    pub resources: ResourcePaths,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> ExperimentSpec {
        ExperimentSpec {
            train: None,
            dev: None,
            test: None,
            strategies: std::iter::once(Arm::None)
                .chain(Strategy::ALL.map(Arm::Augment))
                .collect(),
            augment: AugmentSettings::default(),
            training: TrainConfig::default(),
            stats: StatsSettings::default(),
            resources: ResourcePaths::default(),
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<ExperimentSpec> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Strategy rows in configured order with `none` first and duplicates dropped.
    pub fn arms(&self) -> Vec<Arm> {
        let mut arms = vec![Arm::None];
        for &a in &self.strategies {
            if !arms.contains(&a) {
                arms.push(a);
            }
        }
        arms
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.training
        }
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        match path {
            Some(p) => Ok(p),
            None => bail!("no {what} file given (flag or config)"),
        }
    }
}

/// Joins relative input paths onto the data directory when one is set.
pub fn resolve(data_dir: Option<&Path>, path: &Path) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_always_first() {
        let spec = ExperimentSpec {
            strategies: vec![
                Arm::Augment(Strategy::Tfidf),
                Arm::None,
                Arm::Augment(Strategy::Tfidf),
            ],
            ..ExperimentSpec::default()
        };
        assert_eq!(spec.arms(), [Arm::None, Arm::Augment(Strategy::Tfidf)]);
        let empty = ExperimentSpec {
            strategies: vec![],
            ..ExperimentSpec::default()
        };
        assert_eq!(empty.arms(), [Arm::None]);
        assert_eq!(ExperimentSpec::default().arms().len(), 6);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"strategies": ["word_embedding"], "training": {"epochs": 2}}"#,
        )
        .unwrap();
        assert_eq!(spec.training.epochs, 2);
        assert_eq!(spec.training.batch_size, 256);
        assert_eq!(
            spec.arms(),
            [Arm::None, Arm::Augment(Strategy::WordEmbedding)]
        );
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"strategy": []}"#).is_err());
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"strategies": ["bogus"]}"#).is_err());
    }
}
