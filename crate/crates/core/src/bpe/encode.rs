use std::collections::{BTreeMap, HashMap};

use super::train::merge_pair;
use super::{BpeError, MergeTable};
use crate::corpus::WordStream;

/// What to do with characters outside the tokenizer alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    #[default]
    Error,
    /// Emit the character as a singleton token.
    PassThrough,
}

/// Tokens of a stream, with word boundaries retained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Encoding {
    tokens: Vec<String>,
    word_ends: Vec<usize>,
}

impl Encoding {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn word_count(&self) -> usize {
        self.word_ends.len()
    }

    /// Token slices, one per input word.
    pub fn words(&self) -> impl Iterator<Item = &[String]> + '_ {
        let starts = std::iter::once(0).chain(self.word_ends.iter().copied());
        starts
            .zip(self.word_ends.iter().copied())
            .map(move |(s, e)| &self.tokens[s..e])
    }
}

/// A merge table lowered to integer ids for fast application.
struct Compiled {
    ids: HashMap<String, u32>,
    strings: Vec<String>,
    rules: Vec<((u32, u32), u32)>,
}

impl Compiled {
    fn new(table: &MergeTable, prefix: usize) -> Self {
        let mut c = Compiled {
            ids: HashMap::new(),
            strings: Vec::new(),
            rules: Vec::with_capacity(prefix),
        };
        for a in table.alphabet() {
            c.intern(a);
        }
        for rule in &table.rules()[..prefix] {
            let l = c.intern(&rule.left);
            let r = c.intern(&rule.right);
            let m = c.intern(&rule.merged());
            c.rules.push(((l, r), m));
        }
        c
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    fn symbols(&mut self, word: &str, policy: UnknownPolicy) -> Result<Vec<u32>, BpeError> {
        let mut buf = [0u8; 4];
        word.chars()
            .map(|ch| {
                let s: &str = ch.encode_utf8(&mut buf);
                match self.ids.get(s) {
                    Some(&id) => Ok(id),
                    None if policy == UnknownPolicy::PassThrough => Ok(self.intern(s)),
                    None => Err(BpeError::UnknownSymbol(ch)),
                }
            })
            .collect()
    }

    /// Applies every rule in rank order, invoking `on_step(rank, reduction)`
    /// after each rule that shortens the word.
    fn apply(&self, mut syms: Vec<u32>, mut on_step: impl FnMut(usize, usize)) -> Vec<u32> {
        for (rank, &(pair, merged)) in self.rules.iter().enumerate() {
            if syms.len() < 2 {
                break;
            }
            if !syms.windows(2).any(|w| w[0] == pair.0 && w[1] == pair.1) {
                continue;
            }
            let next = merge_pair(&syms, pair, merged);
            on_step(rank, syms.len() - next.len());
            syms = next;
        }
        syms
    }
}

/// Encodes with [`UnknownPolicy::Error`].
pub fn encode(stream: &WordStream, table: &MergeTable) -> Result<Encoding, BpeError> {
    encode_with(stream, table, UnknownPolicy::Error)
}

/// Segments every word by applying the table's merges in rank order.
pub fn encode_with(
    stream: &WordStream,
    table: &MergeTable,
    policy: UnknownPolicy,
) -> Result<Encoding, BpeError> {
    let mut compiled = Compiled::new(table, table.len());
    let mut cache: HashMap<&str, Vec<u32>> = HashMap::new();
    let mut out = Encoding::default();
    for word in stream.words() {
        if !cache.contains_key(word.as_str()) {
            let syms = compiled.symbols(word, policy)?;
            let merged = compiled.apply(syms, |_, _| {});
            cache.insert(word.as_str(), merged);
        }
        out.tokens
            .extend(cache[word.as_str()].iter().map(|&id| compiled.strings[id as usize].clone()));
        out.word_ends.push(out.tokens.len());
    }
    Ok(out)
}

/// Per-rank gains of the table on `stream`: entry `k` is the symbol-count
/// reduction contributed by merge `k` when merges are applied in order.
pub fn compression_profile(stream: &WordStream, table: &MergeTable) -> Result<Vec<u64>, BpeError> {
    let mut compiled = Compiled::new(table, table.len());
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for w in stream.words() {
        *counts.entry(w.as_str()).or_default() += 1;
    }
    let mut gains = vec![0u64; table.len()];
    for (word, freq) in counts {
        let syms = compiled.symbols(word, UnknownPolicy::PassThrough)?;
        compiled.apply(syms, |rank, reduction| gains[rank] += reduction as u64 * freq);
    }
    Ok(gains)
}

/// Compression power of the first `prefix_len` merges: corpus symbol count
/// with no merges minus the token count after applying them. Zero for the
/// empty prefix.
pub fn compression_power(
    stream: &WordStream,
    table: &MergeTable,
    prefix_len: usize,
) -> Result<u64, BpeError> {
    let prefix = table.truncated(prefix_len)?;
    Ok(compression_profile(stream, &prefix)?.iter().sum())
}

/// For each consecutive rank pair `(k, k + 1)`, whether the gain of merge
/// `k` is at most the gain of merge `k + 1`. A diagnostic; greedy tables
/// usually violate it.
pub fn check_increment_relation(
    stream: &WordStream,
    table: &MergeTable,
) -> Result<Vec<(usize, bool)>, BpeError> {
    if table.len() < 2 {
        return Err(BpeError::TooFewMerges(table.len()));
    }
    let gains = compression_profile(stream, table)?;
    increment_relation_from_gains(&gains)
}

pub fn increment_relation_from_gains(gains: &[u64]) -> Result<Vec<(usize, bool)>, BpeError> {
    if gains.len() < 2 {
        return Err(BpeError::TooFewMerges(gains.len()));
    }
    Ok(gains
        .windows(2)
        .enumerate()
        .map(|(rank, w)| (rank, w[0] <= w[1]))
        .collect())
}
