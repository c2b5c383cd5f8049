use rand::Rng;

use super::{choose_positions, splice, AugmentConfig, Rewrite, CHAR_RATE};
use crate::tagging::tokenize;

/// Rewrites ⌈word_rate × eligible⌉ words, replacing ⌈0.3 × length⌉ of each
/// word's non-initial letters with random lowercase letters.
pub fn char_substitute<R: Rng>(hypothesis: &str, cfg: &AugmentConfig, rng: &mut R) -> Rewrite {
    let tokens = tokenize(hypothesis);
    let eligible: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| cfg.is_eligible(t) && t.surface.chars().skip(1).any(char::is_alphabetic))
        .map(|(i, _)| i)
        .collect();
    let quota = cfg.quota(eligible.len());
    if quota == 0 {
        return Rewrite::identity(hypothesis);
    }

    let mut edits = Vec::with_capacity(quota);
    for pick in choose_positions(eligible.len(), quota, rng) {
        let pos = eligible[pick];
        let mut chars: Vec<char> = tokens[pos].surface.chars().collect();
        let letters: Vec<usize> = (1..chars.len())
            .filter(|&i| chars[i].is_alphabetic())
            .collect();
        let n = ((CHAR_RATE * chars.len() as f64 - 1e-9).ceil() as usize).clamp(1, letters.len());
        for k in choose_positions(letters.len(), n, rng) {
            chars[letters[k]] = rng.gen_range(b'a'..=b'z') as char;
        }
        edits.push((pos, chars.into_iter().collect::<String>()));
    }
    Rewrite {
        text: splice(hypothesis, &tokens, &edits),
        replaced: edits.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::Strategy;
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_is_identity() {
        let cfg = AugmentConfig {
            word_rate: 0.0,
            ..AugmentConfig::new(Strategy::CharSubstitute)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = char_substitute("Men are waiting for their luggage.", &cfg, &mut rng);
        assert_eq!(out.text, "Men are waiting for their luggage.");
        assert!(out.is_identity());
    }

    #[test]
    fn first_letters_and_punctuation_survive() {
        let cfg = AugmentConfig {
            word_rate: 1.0,
            ..AugmentConfig::new(Strategy::CharSubstitute)
        };
        let src = "People wait for their luggage at an airport.";
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = char_substitute(src, &cfg, &mut rng);
            let a = tokenize(src);
            let b = tokenize(&out.text);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.surface.chars().next(), y.surface.chars().next());
                assert_eq!(x.surface.chars().count(), y.surface.chars().count());
                if !x.is_wordlike() {
                    assert_eq!(x.surface, y.surface);
                }
            }
        }
    }

    #[test]
    fn stopwords_and_short_words_untouched() {
        let cfg = AugmentConfig {
            word_rate: 1.0,
            ..AugmentConfig::new(Strategy::CharSubstitute)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = char_substitute("A man is on the bench", &cfg, &mut rng);
        let toks = tokenize(&out.text);
        for (i, expected) in [(0, "A"), (2, "is"), (3, "on"), (4, "the")] {
            assert_eq!(toks[i].surface, expected);
        }
        assert_ne!(toks[5].surface, "bench");
        assert_eq!(out.replaced, 2);
    }
}
