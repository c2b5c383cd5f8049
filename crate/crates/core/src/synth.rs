//! Synthetic corpus with planted subject-word artifacts.
//!
//! Each marker subject co-occurs with its own label with probability
//! `marker_strength`; every other token is drawn independently of the label.
//! The premise shares 3, 1 or 0 content words with the hypothesis for
//! entailment, neutral and contradiction, so only the pair carries the rest of
//! the signal.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, NliExample, Origin, Split};
use crate::error::{Error, Result};

/// Marker subject for each label, in label order.
pub const MARKERS: [&str; 3] = ["clown", "pirate", "wizard"];

pub const NEUTRAL_SUBJECTS: [&str; 10] = [
    "man", "woman", "boy", "girl", "child", "worker", "tourist", "teenager", "student", "dancer",
];

const PREMISE_SUBJECTS: [&str; 5] = ["person", "individual", "figure", "visitor", "local"];

const VERBS: [&str; 20] = [
    "running", "sitting", "standing", "walking", "reading", "eating", "waiting", "talking",
    "singing", "painting", "cooking", "smiling", "resting", "playing", "dancing", "jumping",
    "laughing", "writing", "sleeping", "drinking",
];

const PLACES: [&str; 20] = [
    "park", "beach", "river", "station", "market", "library", "fountain", "bridge", "garden",
    "church", "school", "stadium", "harbor", "museum", "forest", "lake", "cafe", "street",
    "square", "mountain",
];

const OBJECTS: [&str; 20] = [
    "ball", "bag", "umbrella", "camera", "guitar", "book", "bottle", "hat", "kite", "map", "phone",
    "ticket", "basket", "blanket", "bicycle", "lamp", "flag", "drum", "box", "scarf",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_examples: usize,
    /// P(label | marker).
    pub marker_strength: f64,
    /// Fraction of hypotheses whose subject is a marker.
    pub marker_coverage: f64,
    /// Probability that the premise overlap follows a random label instead of the gold one.
    pub pair_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            n_examples: 30_000,
            marker_strength: 0.8,
            marker_coverage: 0.9,
            pair_noise: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub train: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
}

fn other<'a, R: Rng>(pool: &[&'a str], not: &str, rng: &mut R) -> &'a str {
    loop {
        let w = pool[rng.gen_range(0..pool.len())];
        if w != not {
            return w;
        }
    }
}

fn example<R: Rng>(cfg: &SynthConfig, rng: &mut R) -> (String, String, Label) {
    let label = Label::ALL[rng.gen_range(0..3)];
    let subject = if rng.gen_bool(cfg.marker_coverage) {
        let m = if rng.gen_bool(cfg.marker_strength) {
            label.code()
        } else {
            (label.code() + rng.gen_range(1..3)) % 3
        };
        MARKERS[m]
    } else {
        NEUTRAL_SUBJECTS[rng.gen_range(0..NEUTRAL_SUBJECTS.len())]
    };
    let verb = *VERBS.choose(rng).expect("non-empty");
    let place = *PLACES.choose(rng).expect("non-empty");
    let object = *OBJECTS.choose(rng).expect("non-empty");
    let hypothesis = format!("The {subject} is {verb} near the {place} with the {object}.");

    let pattern = if rng.gen_bool(cfg.pair_noise) {
        Label::ALL[rng.gen_range(0..3)]
    } else {
        label
    };
    let mut shared = [false; 3];
    match pattern {
        Label::Entailment => shared = [true; 3],
        Label::Neutral => shared[rng.gen_range(0..3)] = true,
        Label::Contradiction => {}
    }
    let pick = |keep: bool, pool: &[&'static str], word: &'static str, rng: &mut R| {
        if keep {
            word
        } else {
            other(pool, word, rng)
        }
    };
    let p_verb = pick(shared[0], &VERBS, verb, rng);
    let p_place = pick(shared[1], &PLACES, place, rng);
    let p_object = pick(shared[2], &OBJECTS, object, rng);
    let p_subject = *PREMISE_SUBJECTS.choose(rng).expect("non-empty");
    let premise = format!("A {p_subject} was {p_verb} beside a {p_place} holding a {p_object}.");
    (premise, hypothesis, label)
}

/// Generates `n_examples` pairs and splits them 80/10/10 into train/dev/test.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if cfg.n_examples < 10
        || !unit(cfg.marker_strength)
        || !unit(cfg.marker_coverage)
        || !unit(cfg.pair_noise)
    {
        return Err(Error::InvalidArgument(
            "synthetic corpus needs at least 10 examples and probabilities in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_train = cfg.n_examples * 8 / 10;
    let n_dev = cfg.n_examples / 10;
    let mut splits = [Vec::new(), Vec::new(), Vec::new()];
    for i in 0..cfg.n_examples {
        let (premise, hypothesis, label) = example(cfg, &mut rng);
        let (slot, split) = if i < n_train {
            (0, Split::Train)
        } else if i < n_train + n_dev {
            (1, Split::Dev)
        } else {
            (2, Split::Test)
        };
        splits[slot].push(NliExample {
            id: format!("synth-{}-{:06}", split.as_str(), splits[slot].len() + 1),
            premise,
            hypothesis,
            label,
            origin: Origin::Original,
        });
    }
    let [train, dev, test] = splits;
    Ok(SynthCorpus {
        train: Corpus::new(Split::Train, train)?,
        dev: Corpus::new(Split::Dev, dev)?,
        test: Corpus::new(Split::Test, test)?,
    })
}

/// Word2vec text table in which each marker's ten nearest neighbours are the
/// neutral subjects, ahead of the other markers.
pub fn toy_embeddings_text() -> String {
    let dim = 1 + NEUTRAL_SUBJECTS.len() + MARKERS.len();
    let mut out = format!("{} {dim}\n", NEUTRAL_SUBJECTS.len() + MARKERS.len());
    let mut row = |word: &str, extra: usize, value: f64| {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v[extra] = value;
        let comps: Vec<String> = v.iter().map(|x| format!("{x:.1}")).collect();
        out.push_str(&format!("{word} {}\n", comps.join(" ")));
    };
    for (i, w) in NEUTRAL_SUBJECTS.iter().enumerate() {
        row(w, 1 + i, 0.1);
    }
    for (i, w) in MARKERS.iter().enumerate() {
        row(w, 1 + NEUTRAL_SUBJECTS.len() + i, 0.5);
    }
    out
}
