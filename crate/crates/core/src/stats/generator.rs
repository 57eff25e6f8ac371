//! Seeded synthetic corpora standing in for analytic and agglutinative
//! languages.
//!
//! Both kinds share one recipe: a word is either a standalone function
//! word (probability `function_word_rate`) or a stem followed by a number
//! of affixes drawn uniformly from `affixes_per_word`. Stems and function
//! words follow a Zipf(1) rank distribution; affixes are uniform over the
//! closed affix set. The presets differ only in parameters:
//!
//! | preset          | stems | affixes | affixes/word | function words | rate |
//! |-----------------|-------|---------|--------------|----------------|------|
//! | `analytic`      | 600   | 4       | 0..=0        | 12             | 0.5  |
//! | `agglutinative` | 600   | 16      | 1..=3        | 12             | 0.05 |

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::corpus::WordStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypologyKind {
    Analytic,
    Agglutinative,
}

impl TypologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TypologyKind::Analytic => "analytic",
            TypologyKind::Agglutinative => "agglutinative",
        }
    }
}

impl std::str::FromStr for TypologyKind {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(TypologyKind::Analytic),
            "agglutinative" => Ok(TypologyKind::Agglutinative),
            other => Err(StatsError::InvalidGenerator(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypologyGenConfig {
    pub kind: TypologyKind,
    pub stem_count: usize,
    pub affix_count: usize,
    /// Inclusive range of affixes attached to each non-function word.
    pub affixes_per_word: (usize, usize),
    pub function_word_count: usize,
    pub function_word_rate: f64,
    pub seed: u64,
    pub word_count: usize,
}

impl TypologyGenConfig {
    pub fn analytic(seed: u64, word_count: usize) -> Self {
        Self {
            kind: TypologyKind::Analytic,
            stem_count: 600,
            affix_count: 4,
            affixes_per_word: (0, 0),
            function_word_count: 12,
            function_word_rate: 0.5,
            seed,
            word_count,
        }
    }

    pub fn agglutinative(seed: u64, word_count: usize) -> Self {
        Self {
            kind: TypologyKind::Agglutinative,
            stem_count: 600,
            affix_count: 16,
            affixes_per_word: (1, 3),
            function_word_count: 12,
            function_word_rate: 0.05,
            seed,
            word_count,
        }
    }

    pub fn preset(kind: TypologyKind, seed: u64, word_count: usize) -> Self {
        match kind {
            TypologyKind::Analytic => Self::analytic(seed, word_count),
            TypologyKind::Agglutinative => Self::agglutinative(seed, word_count),
        }
    }

    /// Language code used for generated streams, e.g. `agglutinative-7`.
    pub fn lang(&self) -> String {
        format!("{}-{}", self.kind.as_str(), self.seed)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |m: &str| Err(StatsError::InvalidGenerator(m.to_owned()));
        if self.stem_count == 0 || self.affix_count == 0 || self.word_count == 0 {
            return bad("stem_count, affix_count and word_count must be > 0");
        }
        if self.function_word_count == 0 && self.function_word_rate > 0.0 {
            return bad("function_word_rate > 0 needs function_word_count > 0");
        }
        if !(0.0..=1.0).contains(&self.function_word_rate) {
            return bad("function_word_rate must lie in [0, 1]");
        }
        if self.affixes_per_word.0 > self.affixes_per_word.1 {
            return bad("affixes_per_word range is empty");
        }
        Ok(())
    }
}

const ONSETS: &[&str] = &["p", "t", "k", "b", "d", "g", "m", "n", "l", "r", "s", "z", "h", "j", "v", "f"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "k", "l", "t"];

fn syllable(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{}{}{}",
        ONSETS.choose(rng).unwrap(),
        VOWELS.choose(rng).unwrap(),
        CODAS.choose(rng).unwrap()
    )
}

/// `count` distinct forms built from `syllables` random syllables each.
fn lexicon(
    rng: &mut ChaCha8Rng,
    count: usize,
    syllables: std::ops::RangeInclusive<usize>,
    taken: &mut BTreeSet<String>,
) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(syllables.clone());
        let form: String = (0..n).map(|_| syllable(rng)).collect();
        if taken.insert(form.clone()) {
            out.push(form);
        }
    }
    out
}

/// Affixes: a vowel-initial or consonant-initial single syllable.
fn affixes(rng: &mut ChaCha8Rng, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        let form = if rng.gen_bool(0.5) {
            format!("{}{}", VOWELS.choose(rng).unwrap(), ONSETS.choose(rng).unwrap())
        } else {
            syllable(rng)
        };
        // Tiny inventories are allowed to run out of fresh forms.
        if taken.insert(form.clone()) || attempts > 10_000 {
            out.push(form);
        }
    }
    out
}

pub fn generate_typology_corpus(cfg: &TypologyGenConfig) -> Result<WordStream, StatsError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut taken = BTreeSet::new();
    let stems = lexicon(&mut rng, cfg.stem_count, 2..=3, &mut taken);
    let affix_set = affixes(&mut rng, cfg.affix_count, &mut taken);
    let function_words = lexicon(&mut rng, cfg.function_word_count, 1..=1, &mut taken);

    let stem_dist = Zipf::new(stems.len() as u64, 1.0).expect("stem_count > 0");
    let fw_dist = (!function_words.is_empty())
        .then(|| Zipf::new(function_words.len() as u64, 1.0).expect("non-empty"));

    let (lo, hi) = cfg.affixes_per_word;
    let mut words = Vec::with_capacity(cfg.word_count);
    for _ in 0..cfg.word_count {
        let function = fw_dist.is_some() && rng.gen_bool(cfg.function_word_rate);
        let word = if function {
            let rank = fw_dist.unwrap().sample(&mut rng) as usize;
            function_words[rank - 1].clone()
        } else {
            let rank = stem_dist.sample(&mut rng) as usize;
            let mut w = stems[rank - 1].clone();
            for _ in 0..rng.gen_range(lo..=hi) {
                w.push_str(affix_set.choose(&mut rng).unwrap());
            }
            w
        };
        words.push(word);
    }
    Ok(WordStream::new(cfg.lang(), words).expect("generated words are non-empty"))
}
