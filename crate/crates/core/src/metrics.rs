//! Subword productivity, frequency curves, and repetition trends.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpe::{self, BpeError, Encoding, MergeTable, TrainerConfig};
use crate::corpus::{self, CorpusError, SampleSchedule, WordStream};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("subword index is empty")]
    EmptyIndex,
    #[error("need at least {needed} subwords, index has {available}")]
    IndexTooSmall { needed: usize, available: usize },
    #[error("top_n must be at least 2, got {0}")]
    TopNTooSmall(usize),
    #[error("no merge counts given")]
    NoMergeCounts,
    #[error("curve has {available} points, decay comparison over k_max={k_max} needs {needed}")]
    CurveTooShort {
        k_max: usize,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Bpe(#[from] BpeError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubwordEntry {
    /// Distinct surface words containing the subword.
    pub words: BTreeSet<String>,
    /// Token occurrences across the corpus.
    pub occurrences: u64,
}

/// Subword → (distinct words containing it, occurrence count).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubwordIndex {
    entries: BTreeMap<String, SubwordEntry>,
    total_tokens: u64,
}

impl SubwordIndex {
    pub fn entries(&self) -> &BTreeMap<String, SubwordEntry> {
        &self.entries
    }

    pub fn get(&self, subword: &str) -> Option<&SubwordEntry> {
        self.entries.get(subword)
    }

    /// Number of subword types, `N`.
    pub fn subword_count(&self) -> usize {
        self.entries.len()
    }

    /// Occurrences summed over the indexed subwords.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }
}

/// Indexes every token of every `(word, tokens)` pair. Tokens shorter than
/// `min_subword_len` characters are left out.
pub fn build_index<'a, I, T>(segmented: I, min_subword_len: usize) -> SubwordIndex
where
    I: IntoIterator<Item = (&'a str, T)>,
    T: IntoIterator<Item = &'a str>,
{
    let mut index = SubwordIndex::default();
    for (word, tokens) in segmented {
        for token in tokens {
            if token.chars().count() < min_subword_len {
                continue;
            }
            let entry = index.entries.entry(token.to_owned()).or_default();
            if !entry.words.contains(word) {
                entry.words.insert(word.to_owned());
            }
            entry.occurrences += 1;
            index.total_tokens += 1;
        }
    }
    index
}

/// Index of an encoded stream; `encoding` must come from `stream`.
pub fn index_encoding(stream: &WordStream, encoding: &Encoding, min_subword_len: usize) -> SubwordIndex {
    debug_assert_eq!(stream.total_words(), encoding.word_count());
    build_index(
        stream
            .words()
            .iter()
            .zip(encoding.words())
            .map(|(w, toks)| (w.as_str(), toks.iter().map(String::as_str))),
        min_subword_len,
    )
}

/// Encodes `stream` with `table` and indexes the result.
pub fn index_stream(
    stream: &WordStream,
    table: &MergeTable,
    min_subword_len: usize,
) -> Result<SubwordIndex, MetricsError> {
    let enc = bpe::encode(stream, table)?;
    Ok(index_encoding(stream, &enc, min_subword_len))
}

/// Mean number of distinct words per subword: `(1/N) Σ |W_s|`.
pub fn productivity(index: &SubwordIndex) -> Result<f64, MetricsError> {
    if index.entries.is_empty() {
        return Err(MetricsError::EmptyIndex);
    }
    let total: usize = index.entries.values().map(|e| e.words.len()).sum();
    Ok(total as f64 / index.entries.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityResult {
    pub lang: String,
    /// Merge count → productivity after that many merges.
    pub per_round: BTreeMap<usize, f64>,
    pub mean_rho: f64,
    /// Sample standard deviation across rounds (0 for a single round).
    pub std_rho: f64,
}

pub const DEFAULT_MERGE_ROUNDS: [usize; 3] = [300, 400, 500];

/// Productivity after each merge count in `merge_counts`.
///
/// One table is trained with the largest count; greedy training is
/// prefix-stable, so smaller counts are read off as prefixes of it.
pub fn productivity_rounds(
    stream: &WordStream,
    merge_counts: &[usize],
    base: &TrainerConfig,
    min_subword_len: usize,
) -> Result<ProductivityResult, MetricsError> {
    let max = *merge_counts.iter().max().ok_or(MetricsError::NoMergeCounts)?;
    let cfg = TrainerConfig {
        merge_limit: Some(max),
        ..base.clone()
    };
    let full = bpe::train(stream, &cfg)?;
    let per_round = merge_counts
        .iter()
        .map(|&k| {
            let table = full.truncated(k.min(full.len()))?;
            let rho = productivity(&index_stream(stream, &table, min_subword_len)?)?;
            Ok((k, rho))
        })
        .collect::<Result<BTreeMap<_, _>, MetricsError>>()?;
    let values: Vec<f64> = merge_counts.iter().map(|k| per_round[k]).collect();
    Ok(ProductivityResult {
        lang: stream.lang().to_owned(),
        per_round,
        mean_rho: crate::stats::mean(&values),
        std_rho: crate::stats::sample_std(&values),
    })
}

/// Rank-sorted relative subword frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCurve {
    pub lang: String,
    /// `freqs[i]` is the relative frequency of the `(i+1)`-th most common subword.
    pub freqs: Vec<f64>,
    pub total_tokens: u64,
}

pub const DEFAULT_TOP_N: usize = 100;

/// The `top_n` largest relative frequencies of `index`, descending.
pub fn frequency_curve(
    index: &SubwordIndex,
    lang: &str,
    top_n: usize,
) -> Result<FrequencyCurve, MetricsError> {
    if top_n < 2 {
        return Err(MetricsError::TopNTooSmall(top_n));
    }
    if index.entries.len() < 2 {
        return Err(MetricsError::IndexTooSmall {
            needed: 2,
            available: index.entries.len(),
        });
    }
    let mut counts: Vec<u64> = index.entries.values().map(|e| e.occurrences).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.truncate(top_n);
    let total = index.total_tokens as f64;
    Ok(FrequencyCurve {
        lang: lang.to_owned(),
        freqs: counts.iter().map(|&c| c as f64 / total).collect(),
        total_tokens: index.total_tokens,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayDominance {
    pub fraction_holding: f64,
    /// Entry `k - 1` compares the drop from rank `k` to rank `k + 1`.
    pub per_k: Vec<bool>,
}

/// For ranks `k = 1..=k_max`, whether `a` drops strictly faster than `b`
/// between rank `k` and rank `k + 1`.
pub fn decay_dominance(
    a: &FrequencyCurve,
    b: &FrequencyCurve,
    k_max: usize,
) -> Result<DecayDominance, MetricsError> {
    let needed = k_max + 1;
    let available = a.freqs.len().min(b.freqs.len());
    if k_max == 0 || available < needed {
        return Err(MetricsError::CurveTooShort {
            k_max,
            needed,
            available,
        });
    }
    let per_k: Vec<bool> = (0..k_max)
        .map(|i| a.freqs[i] - a.freqs[i + 1] > b.freqs[i] - b.freqs[i + 1])
        .collect();
    let holding = per_k.iter().filter(|&&h| h).count();
    Ok(DecayDominance {
        fraction_holding: holding as f64 / k_max as f64,
        per_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCurve {
    pub lang: String,
    pub sample_sizes: Vec<usize>,
    pub values: Vec<f64>,
}

/// Mean relative frequency of the `top_k` most frequent subwords. This is
/// the repetition statistic tracked across growing samples.
pub fn repetition_statistic(index: &SubwordIndex, top_k: usize) -> Result<f64, MetricsError> {
    if index.entries.is_empty() {
        return Err(MetricsError::EmptyIndex);
    }
    let mut counts: Vec<u64> = index.entries.values().map(|e| e.occurrences).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.truncate(top_k.max(1));
    let total = index.total_tokens as f64;
    Ok(counts.iter().map(|&c| c as f64 / total).sum::<f64>() / counts.len() as f64)
}

/// The repetition statistic on each cumulative sample of `stream`, with a
/// fresh table trained per sample.
pub fn repetition_trend(
    stream: &WordStream,
    schedule: &SampleSchedule,
    table_cfg: &TrainerConfig,
    top_k: usize,
    min_subword_len: usize,
) -> Result<TrendCurve, MetricsError> {
    let samples = corpus::cumulative_samples(stream, schedule)?;
    let values = samples
        .par_iter()
        .map(|sample| {
            let table = bpe::train(sample, table_cfg)?;
            repetition_statistic(&index_stream(sample, &table, min_subword_len)?, top_k)
        })
        .collect::<Result<Vec<f64>, MetricsError>>()?;
    Ok(TrendCurve {
        lang: stream.lang().to_owned(),
        sample_sizes: schedule.sizes.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx(pairs: &[(&'static str, &[&'static str])]) -> SubwordIndex {
        build_index(pairs.iter().map(|(w, t)| (*w, t.iter().copied())), 1)
    }

    fn curve(freqs: &[f64]) -> FrequencyCurve {
        FrequencyCurve {
            lang: "xx".into(),
            freqs: freqs.to_vec(),
            total_tokens: 100,
        }
    }

    #[test]
    fn index_hand_enumeration() {
        let i = idx(&[("abc", &["ab", "c"]), ("abd", &["ab", "d"])]);
        assert_eq!(i.subword_count(), 3);
        assert_eq!(i.get("ab").unwrap().words.len(), 2);
        assert_eq!(i.get("c").unwrap().words.iter().collect::<Vec<_>>(), ["abc"]);
        assert_eq!(i.get("d").unwrap().words.iter().collect::<Vec<_>>(), ["abd"]);
        assert_eq!(productivity(&i).unwrap(), 4.0 / 3.0);
    }

    #[test]
    fn singleton_index() {
        let i = idx(&[("a", &["a"])]);
        assert_eq!(i.subword_count(), 1);
        assert_eq!(productivity(&i).unwrap(), 1.0);
    }

    #[test]
    fn repeated_word_counts_once_in_word_set() {
        let pairs: Vec<(&str, Vec<&str>)> = (0..5).map(|_| ("abc", vec!["ab", "c"])).collect();
        let i = build_index(pairs.iter().map(|(w, t)| (*w, t.iter().copied())), 1);
        for e in i.entries().values() {
            assert_eq!(e.words.len(), 1);
            assert_eq!(e.occurrences, 5);
        }
    }

    #[test]
    fn min_subword_len_drops_single_chars() {
        let i = build_index([("abc", ["ab", "c"]), ("abd", ["ab", "d"])], 2);
        assert_eq!(i.subword_count(), 1);
        assert_eq!(productivity(&i).unwrap(), 2.0);
    }

    #[test]
    fn productivity_of_empty_index_fails() {
        assert!(matches!(productivity(&SubwordIndex::default()), Err(MetricsError::EmptyIndex)));
    }

    #[test]
    fn rounds_report_each_count() {
        let s = WordStream::from_whitespace("eu", &"etxean etxera kalean kalera mendian ".repeat(20));
        let r = productivity_rounds(&s, &[3, 4, 5], &TrainerConfig::default(), 1).unwrap();
        assert_eq!(r.per_round.len(), 3);
        assert!(r.std_rho >= 0.0);
    }

    #[test]
    fn identical_rounds_have_zero_std() {
        // Only one merge is possible, so every round sees the same table.
        let s = WordStream::from_whitespace("xx", "ab ab");
        let r = productivity_rounds(&s, &[300, 400, 500], &TrainerConfig::default(), 1).unwrap();
        assert_eq!(r.std_rho, 0.0);
        assert_eq!(r.mean_rho, 1.0);
    }

    #[test]
    fn curve_normalization() {
        let pairs: Vec<(&str, Vec<&str>)> = vec![("x", vec!["x"]), ("x", vec!["x"]), ("x", vec!["x"]), ("y", vec!["y"])];
        let i = build_index(pairs.iter().map(|(w, t)| (*w, t.iter().copied())), 1);
        let c = frequency_curve(&i, "xx", 2).unwrap();
        assert_eq!(c.freqs, vec![0.75, 0.25]);
    }

    #[test]
    fn uniform_counts_flat_curve() {
        let i = idx(&[("a", &["a"]), ("b", &["b"]), ("c", &["c"]), ("d", &["d"])]);
        let c = frequency_curve(&i, "xx", 10).unwrap();
        assert!(c.freqs.iter().all(|&f| f == 0.25));
    }

    #[test]
    fn curve_errors() {
        let one = idx(&[("a", &["a"])]);
        assert!(matches!(frequency_curve(&one, "xx", 5), Err(MetricsError::IndexTooSmall { .. })));
        let two = idx(&[("a", &["a"]), ("b", &["b"])]);
        assert!(matches!(frequency_curve(&two, "xx", 1), Err(MetricsError::TopNTooSmall(1))));
    }

    #[test]
    fn decay_direct_arithmetic() {
        let d = decay_dominance(&curve(&[0.5, 0.3, 0.2]), &curve(&[0.4, 0.35, 0.25]), 2).unwrap();
        assert_eq!(d.per_k, vec![true, false]);
        assert_eq!(d.fraction_holding, 0.5);
    }

    #[test]
    fn decay_identical_curves() {
        let c = curve(&[0.5, 0.3, 0.2]);
        assert_eq!(decay_dominance(&c, &c, 2).unwrap().fraction_holding, 0.0);
    }

    #[test]
    fn decay_too_short() {
        let c = curve(&[0.5, 0.3, 0.2]);
        assert!(matches!(decay_dominance(&c, &c, 3), Err(MetricsError::CurveTooShort { .. })));
    }

    #[test]
    fn constant_corpus_constant_trend() {
        let s = WordStream::from_whitespace("xx", &"kalean ".repeat(40));
        let sched = SampleSchedule::prefix(vec![10, 20, 40]).unwrap();
        let t = repetition_trend(&s, &sched, &TrainerConfig::default(), 100, 1).unwrap();
        assert!(t.values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn single_point_trend() {
        let s = WordStream::from_whitespace("xx", "etxean etxera kalean kalera");
        let sched = SampleSchedule::prefix(vec![4]).unwrap();
        let t = repetition_trend(&s, &sched, &TrainerConfig::default(), 100, 1).unwrap();
        assert_eq!(t.values.len(), 1);
        assert_eq!(t.sample_sizes, vec![4]);
    }

    mod seeded {
        use super::*;
        use crate::stats::{generate_typology_corpus, ols, TypologyGenConfig, TypologyKind};

        fn gen(kind: TypologyKind, words: usize) -> WordStream {
            generate_typology_corpus(&TypologyGenConfig::preset(kind, 7, words)).unwrap()
        }

        #[test]
        fn toy_corpora_rho_ordering() {
            let rho = |kind| {
                productivity_rounds(&gen(kind, 200), &DEFAULT_MERGE_ROUNDS, &TrainerConfig::default(), 1)
                    .unwrap()
                    .mean_rho
            };
            let agg = rho(TypologyKind::Agglutinative);
            let ana = rho(TypologyKind::Analytic);
            assert!((agg - 3.6023391812865495).abs() < 1e-12, "{agg}");
            assert!((ana - 2.628205128205128).abs() < 1e-12, "{ana}");
            assert!(agg > ana);
        }

        #[test]
        fn analytic_decays_faster() {
            let curve = |kind| {
                let s = gen(kind, 20_000);
                let t = bpe::train(&s, &TrainerConfig::with_merges(500)).unwrap();
                frequency_curve(&index_stream(&s, &t, 1).unwrap(), s.lang(), DEFAULT_TOP_N).unwrap()
            };
            let d = decay_dominance(&curve(TypologyKind::Analytic), &curve(TypologyKind::Agglutinative), 50)
                .unwrap();
            assert!((d.fraction_holding - 0.54).abs() < 1e-12, "{}", d.fraction_holding);
            assert!(d.fraction_holding > 0.5);
        }

        #[test]
        fn agglutinative_trend_stabilizes() {
            let s = gen(TypologyKind::Agglutinative, 18_000);
            let sizes: Vec<usize> = (1..=9).map(|i| i * 2000).collect();
            let sched = SampleSchedule::prefix(sizes.clone()).unwrap();
            let t = repetition_trend(&s, &sched, &TrainerConfig::with_merges(300), 100, 1).unwrap();
            let xs: Vec<f64> = sizes.iter().map(|&x| x as f64).collect();
            let first = ols(&xs[..3], &t.values[..3]).unwrap().slope.abs();
            let last = ols(&xs[6..], &t.values[6..]).unwrap().slope.abs();
            assert!(last < first, "first {first} last {last}");
            assert!((last / first - 0.03361950730731551).abs() < 1e-9, "{}", last / first);
        }
    }

    fn words_strategy() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec("[abc]{1,5}", 1..30)
    }

    proptest! {
        #[test]
        fn rho_at_least_one_and_duplication_invariant(words in words_strategy()) {
            let s = WordStream::new("xx", words.clone()).unwrap();
            let t = bpe::train(&s, &TrainerConfig::with_merges(5)).unwrap();
            let rho = productivity(&index_stream(&s, &t, 1).unwrap()).unwrap();
            prop_assert!(rho >= 1.0);

            let doubled = WordStream::new("xx", words.iter().chain(words.iter()).cloned().collect()).unwrap();
            let rho2 = productivity(&index_stream(&doubled, &t, 1).unwrap()).unwrap();
            prop_assert_eq!(rho, rho2);

            let mut reversed = words.clone();
            reversed.reverse();
            let rev = WordStream::new("xx", reversed).unwrap();
            let rho3 = productivity(&index_stream(&rev, &t, 1).unwrap()).unwrap();
            prop_assert_eq!(rho, rho3);
        }

        #[test]
        fn index_totals_match_token_count(words in words_strategy()) {
            let s = WordStream::new("xx", words).unwrap();
            let t = bpe::train(&s, &TrainerConfig::with_merges(4)).unwrap();
            let enc = bpe::encode(&s, &t).unwrap();
            let i = index_encoding(&s, &enc, 1);
            let sum: u64 = i.entries().values().map(|e| e.occurrences).sum();
            prop_assert_eq!(sum, enc.token_count() as u64);
            prop_assert!(i.entries().values().all(|e| !e.words.is_empty() && e.occurrences >= e.words.len() as u64));
        }

        #[test]
        fn curve_sorted_and_normalized(words in words_strategy(), top in 2usize..10) {
            let s = WordStream::new("xx", words).unwrap();
            let t = bpe::train(&s, &TrainerConfig::with_merges(3)).unwrap();
            let i = index_stream(&s, &t, 1).unwrap();
            prop_assume!(i.subword_count() >= 2);
            let c = frequency_curve(&i, "xx", top).unwrap();
            prop_assert!(c.freqs.windows(2).all(|w| w[0] >= w[1]));
            let sum: f64 = c.freqs.iter().sum();
            prop_assert!(sum <= 1.0 + 1e-12);
            let full = frequency_curve(&i, "xx", usize::MAX).unwrap();
            prop_assert!((full.freqs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn decay_swap_complements(a in proptest::collection::vec(0.0f64..1.0, 4..12), b in proptest::collection::vec(0.0f64..1.0, 4..12)) {
            let k = a.len().min(b.len()) - 1;
            let ca = curve(&a);
            let cb = curve(&b);
            let ab = decay_dominance(&ca, &cb, k).unwrap();
            let ba = decay_dominance(&cb, &ca, k).unwrap();
            for i in 0..k {
                let tie = a[i] - a[i + 1] == b[i] - b[i + 1];
                if !tie {
                    prop_assert_ne!(ab.per_k[i], ba.per_k[i]);
                } else {
                    prop_assert!(!ab.per_k[i] && !ba.per_k[i]);
                }
            }
        }
    }
}
