//! Byte-pair encoding over word streams.
//!
//! Symbols are Unicode scalar values. Training is greedy over word-frequency
//! pairs and never merges across word boundaries. A [`MergeTable`] keeps the
//! ordered rules together with the cumulative compression gain after each
//! merge, so the compression power of every merge prefix is available
//! without re-encoding the corpus.

mod encode;
mod io;
mod train;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

pub use encode::{
    check_increment_relation, compression_power, compression_profile, encode, encode_with,
    increment_relation_from_gains, Encoding, UnknownPolicy,
};
pub use io::{export_tokenizer, import_tokenizer, write_id_corpus, MERGES_HEADER};
pub use train::train;

#[derive(Debug, thiserror::Error)]
pub enum BpeError {
    #[error("cannot train on an empty word stream")]
    EmptyStream,
    #[error("invalid trainer config: {0}")]
    InvalidConfig(String),
    #[error("symbol {0:?} is not in the tokenizer alphabet")]
    UnknownSymbol(char),
    #[error("merge prefix {requested} out of range (table has {available} merges)")]
    PrefixOutOfRange { requested: usize, available: usize },
    #[error("increment relation needs at least 2 merges, table has {0}")]
    TooFewMerges(usize),
    #[error("token {0:?} has no id in the vocabulary")]
    UnknownToken(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
}

/// One merge: `left ⊕ right`, applied at position `rank` in the table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub rank: usize,
    /// Corpus-weighted, non-overlapping occurrence count of the pair when it
    /// was selected. This equals the symbol-count reduction of the merge.
    pub pair_count: u64,
}

impl MergeRule {
    pub fn merged(&self) -> String {
        let mut s = String::with_capacity(self.left.len() + self.right.len());
        s.push_str(&self.left);
        s.push_str(&self.right);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Equal counts are resolved by the smallest `(left, right)` string pair.
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub merge_limit: Option<usize>,
    /// Halt once the vocabulary (alphabet plus merged tokens) reaches this size.
    pub vocab_limit: Option<usize>,
    pub tie_break: TieBreak,
    pub intra_word_only: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            merge_limit: Some(500),
            vocab_limit: None,
            tie_break: TieBreak::Lexicographic,
            intra_word_only: true,
        }
    }
}

impl TrainerConfig {
    pub fn with_merges(merge_limit: usize) -> Self {
        Self {
            merge_limit: Some(merge_limit),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BpeError> {
        match (self.merge_limit, self.vocab_limit) {
            (None, None) => {
                return Err(BpeError::InvalidConfig(
                    "one of merge_limit or vocab_limit must be set".into(),
                ))
            }
            (Some(0), _) => return Err(BpeError::InvalidConfig("merge_limit must be > 0".into())),
            _ => {}
        }
        if !self.intra_word_only {
            return Err(BpeError::InvalidConfig(
                "merging across word boundaries is not supported".into(),
            ));
        }
        Ok(())
    }
}

/// A trained tokenizer: ordered merge rules, base alphabet, and gain ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    rules: Vec<MergeRule>,
    alphabet: BTreeSet<String>,
    gain_ledger: Vec<u64>,
}

impl MergeTable {
    /// Assembles a table from parts. `gain_ledger` is either empty (unknown)
    /// or has one non-decreasing entry per rule.
    pub fn from_parts(
        alphabet: BTreeSet<String>,
        rules: Vec<MergeRule>,
        gain_ledger: Vec<u64>,
    ) -> Result<Self, BpeError> {
        if alphabet.iter().any(|s| s.chars().count() != 1) {
            return Err(BpeError::InvalidConfig(
                "alphabet entries must be single characters".into(),
            ));
        }
        let mut known: HashSet<String> = alphabet.iter().cloned().collect();
        for (i, rule) in rules.iter().enumerate() {
            if rule.rank != i {
                return Err(BpeError::InvalidConfig(format!(
                    "rule {i} carries rank {}",
                    rule.rank
                )));
            }
            if !known.contains(&rule.left) || !known.contains(&rule.right) {
                return Err(BpeError::InvalidConfig(format!(
                    "rule {i} ({} {}) uses a token not yet in the vocabulary",
                    rule.left, rule.right
                )));
            }
            known.insert(rule.merged());
        }
        if !gain_ledger.is_empty()
            && (gain_ledger.len() != rules.len() || gain_ledger.windows(2).any(|w| w[0] > w[1]))
        {
            return Err(BpeError::InvalidConfig(
                "gain ledger must have one non-decreasing entry per rule".into(),
            ));
        }
        Ok(Self {
            rules,
            alphabet,
            gain_ledger,
        })
    }

    pub fn rules(&self) -> &[MergeRule] {
        &self.rules
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    /// Cumulative compression gain after each merge; entry `k` is the gain
    /// of the first `k + 1` merges on the training stream.
    pub fn gain_ledger(&self) -> &[u64] {
        &self.gain_ledger
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Tokens in id order: the sorted alphabet, then each newly created
    /// merged token in rank order.
    pub fn vocab(&self) -> Vec<String> {
        let mut seen: HashSet<String> = self.alphabet.iter().cloned().collect();
        let mut out: Vec<String> = self.alphabet.iter().cloned().collect();
        for rule in &self.rules {
            let merged = rule.merged();
            if seen.insert(merged.clone()) {
                out.push(merged);
            }
        }
        out
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab().len()
    }

    /// The table restricted to its first `k` merges.
    pub fn truncated(&self, k: usize) -> Result<MergeTable, BpeError> {
        if k > self.rules.len() {
            return Err(BpeError::PrefixOutOfRange {
                requested: k,
                available: self.rules.len(),
            });
        }
        Ok(MergeTable {
            rules: self.rules[..k].to_vec(),
            alphabet: self.alphabet.clone(),
            gain_ledger: self.gain_ledger.iter().take(k).copied().collect(),
        })
    }
}
