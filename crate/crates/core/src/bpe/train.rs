use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::{BpeError, MergeRule, MergeTable, TrainerConfig};
use crate::corpus::WordStream;

type Pair = (u32, u32);

/// Counts pair occurrences the way a left-to-right merge consumes them: an
/// occurrence overlapping the previous counted occurrence of the same pair
/// (only possible for `(x, x)` runs) is not counted.
pub(super) fn word_pair_counts(symbols: &[u32]) -> HashMap<Pair, u64> {
    let mut counts: HashMap<Pair, u64> = HashMap::new();
    let mut last_start: HashMap<Pair, usize> = HashMap::new();
    for (i, w) in symbols.windows(2).enumerate() {
        let pair = (w[0], w[1]);
        if let Some(&prev) = last_start.get(&pair) {
            if prev + 1 == i {
                continue;
            }
        }
        last_start.insert(pair, i);
        *counts.entry(pair).or_default() += 1;
    }
    counts
}

/// Replaces every non-overlapping occurrence of `pair`, scanning left to right.
pub(super) fn merge_pair(symbols: &[u32], pair: Pair, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == pair.0 && symbols[i + 1] == pair.1 {
            out.push(merged);
            i += 2;
        } else {
            out.push(symbols[i]);
            i += 1;
        }
    }
    out
}

struct Interner {
    strings: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }
}

/// Greedy BPE training.
///
/// Each step merges the adjacent pair with the highest frequency-weighted
/// count, breaking ties by the smallest `(left, right)`. Training stops at
/// the merge limit, at the vocabulary limit, or when no pair occurs at
/// least twice.
pub fn train(stream: &WordStream, cfg: &TrainerConfig) -> Result<MergeTable, BpeError> {
    cfg.validate()?;
    if stream.is_empty() {
        return Err(BpeError::EmptyStream);
    }

    let mut word_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for w in stream.words() {
        *word_counts.entry(w.as_str()).or_default() += 1;
    }

    let alphabet: BTreeSet<String> = word_counts
        .keys()
        .flat_map(|w| w.chars())
        .map(String::from)
        .collect();
    let mut interner = Interner {
        strings: Vec::new(),
        ids: HashMap::new(),
    };
    for a in &alphabet {
        interner.intern(a);
    }

    let mut words: Vec<(Vec<u32>, u64)> = word_counts
        .iter()
        .map(|(w, &c)| {
            let syms = w
                .chars()
                .map(|ch| interner.ids[ch.encode_utf8(&mut [0; 4]) as &str])
                .collect();
            (syms, c)
        })
        .collect();

    // Initial counts in parallel; the reduction is a sum, so shard layout
    // cannot change the result.
    let mut pair_counts: HashMap<Pair, u64> = words
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Pair, u64>, (syms, freq)| {
            for (p, c) in word_pair_counts(syms) {
                *acc.entry(p).or_default() += c * freq;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (p, c) in b {
                *a.entry(p).or_default() += c;
            }
            a
        });
    let mut where_: HashMap<Pair, HashSet<usize>> = HashMap::new();
    for (idx, (syms, _)) in words.iter().enumerate() {
        for w in syms.windows(2) {
            where_.entry((w[0], w[1])).or_default().insert(idx);
        }
    }

    let mut vocab: HashSet<String> = alphabet.iter().cloned().collect();
    let mut rules: Vec<MergeRule> = Vec::new();
    let mut ledger: Vec<u64> = Vec::new();
    let mut cumulative = 0u64;

    loop {
        if cfg.merge_limit.is_some_and(|m| rules.len() >= m) {
            break;
        }
        if cfg.vocab_limit.is_some_and(|v| vocab.len() >= v) {
            break;
        }
        let best = pair_counts
            .iter()
            .filter(|(_, &c)| c >= 2)
            .max_by(|(pa, ca), (pb, cb)| {
                ca.cmp(cb).then_with(|| {
                    let ka = (&interner.strings[pa.0 as usize], &interner.strings[pa.1 as usize]);
                    let kb = (&interner.strings[pb.0 as usize], &interner.strings[pb.1 as usize]);
                    kb.cmp(&ka)
                })
            })
            .map(|(&p, &c)| (p, c));
        let Some((pair, count)) = best else {
            break;
        };

        let left = interner.strings[pair.0 as usize].clone();
        let right = interner.strings[pair.1 as usize].clone();
        let merged_str = format!("{left}{right}");
        let merged = interner.intern(&merged_str);

        let mut affected: Vec<usize> = where_.remove(&pair).unwrap_or_default().into_iter().collect();
        affected.sort_unstable();
        let mut gain = 0u64;
        for idx in affected {
            let (syms, freq) = &words[idx];
            let freq = *freq;
            let before = word_pair_counts(syms);
            let new_syms = merge_pair(syms, pair, merged);
            if new_syms.len() == syms.len() {
                continue;
            }
            gain += (syms.len() - new_syms.len()) as u64 * freq;
            let after = word_pair_counts(&new_syms);
            for (p, c) in before {
                if let Some(total) = pair_counts.get_mut(&p) {
                    *total -= c * freq;
                    if *total == 0 {
                        pair_counts.remove(&p);
                    }
                }
            }
            for (p, c) in after {
                *pair_counts.entry(p).or_default() += c * freq;
                if p != pair {
                    where_.entry(p).or_default().insert(idx);
                }
            }
            words[idx].0 = new_syms;
        }
        debug_assert_eq!(gain, count, "pair count must equal realised compression");
        pair_counts.remove(&pair);

        cumulative += gain;
        ledger.push(cumulative);
        vocab.insert(merged_str);
        rules.push(MergeRule {
            left,
            right,
            rank: rules.len(),
            pair_count: count,
        });
    }

    Ok(MergeTable {
        rules,
        alphabet,
        gain_ledger: ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(words: &[(&str, usize)]) -> WordStream {
        let mut v = Vec::new();
        for (w, n) in words {
            for _ in 0..*n {
                v.push(w.to_string());
            }
        }
        WordStream::new("xx", v).unwrap()
    }

    #[test]
    fn first_merge_is_most_frequent_pair() {
        let t = train(&stream(&[("ab", 2), ("ac", 1)]), &TrainerConfig::with_merges(10)).unwrap();
        assert_eq!((t.rules()[0].left.as_str(), t.rules()[0].right.as_str()), ("a", "b"));
        assert_eq!(t.rules()[0].pair_count, 2);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn single_symbol_word_has_no_merges() {
        let t = train(&stream(&[("a", 1)]), &TrainerConfig::with_merges(10)).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.vocab(), ["a"]);
    }

    #[test]
    fn count_one_pairs_are_not_merged() {
        let t = train(&stream(&[("abab", 1)]), &TrainerConfig::with_merges(10)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.rules()[0].merged(), "ab");
        assert_eq!(t.rules()[0].pair_count, 2);
    }

    #[test]
    fn ties_break_lexicographically() {
        // (b,a) and (a,b) both occur twice; (a,b) < (b,a).
        let t = train(&stream(&[("ba", 2), ("ab", 2)]), &TrainerConfig::with_merges(1)).unwrap();
        assert_eq!(t.rules()[0].merged(), "ab");
    }

    #[test]
    fn overlapping_runs_count_once_per_merge() {
        // "aaa" contains (a,a) twice but a left-to-right merge consumes one.
        let t = train(&stream(&[("aaa", 1)]), &TrainerConfig::with_merges(5)).unwrap();
        assert!(t.is_empty());
        let t = train(&stream(&[("aaaa", 1)]), &TrainerConfig::with_merges(5)).unwrap();
        assert_eq!(t.rules()[0].pair_count, 2);
    }

    #[test]
    fn vocab_limit_halts() {
        let s = stream(&[("abcd", 3), ("abce", 2)]);
        let cfg = TrainerConfig {
            merge_limit: None,
            vocab_limit: Some(7),
            ..TrainerConfig::default()
        };
        let t = train(&s, &cfg).unwrap();
        assert_eq!(t.vocab_size(), 7);
    }

    #[test]
    fn merge_limit_halts() {
        let s = stream(&[("abcdefgh", 3)]);
        let t = train(&s, &TrainerConfig::with_merges(3)).unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_stream_rejected() {
        let err = train(&WordStream::default(), &TrainerConfig::default()).unwrap_err();
        assert!(matches!(err, BpeError::EmptyStream));
    }

    #[test]
    fn config_validation() {
        let none = TrainerConfig {
            merge_limit: None,
            vocab_limit: None,
            ..TrainerConfig::default()
        };
        assert!(none.validate().is_err());
        assert!(TrainerConfig::with_merges(0).validate().is_err());
        let cross = TrainerConfig {
            intra_word_only: false,
            ..TrainerConfig::default()
        };
        assert!(cross.validate().is_err());
    }

    #[test]
    fn ledger_accumulates_pair_counts() {
        let s = WordStream::from_whitespace("xx", "lower lowest newer newest wider widest low low");
        let t = train(&s, &TrainerConfig::with_merges(20)).unwrap();
        let mut acc = 0;
        for (rule, &g) in t.rules().iter().zip(t.gain_ledger()) {
            acc += rule.pair_count;
            assert_eq!(acc, g);
        }
    }

    #[test]
    fn result_independent_of_thread_count() {
        let text = "kalean etxean mendian kaleko etxeko mendiko kaletik etxetik mendira etxera";
        let s = WordStream::from_whitespace("eu", &text.repeat(7).replace("ra", "ra "));
        let cfg = TrainerConfig::with_merges(40);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| train(&s, &cfg).unwrap());
        let b = multi.install(|| train(&s, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn word_pair_counts_skip_overlaps() {
        let c = word_pair_counts(&[1, 1, 1, 1, 1]);
        assert_eq!(c[&(1, 1)], 2);
        let c = word_pair_counts(&[1, 2, 1, 2]);
        assert_eq!(c[&(1, 2)], 2);
        assert_eq!(c[&(2, 1)], 1);
    }
}
