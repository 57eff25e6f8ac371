//! Corpus ingestion: plain-text and verse-aligned parallel loaders, word
//! segmentation, and cumulative sampling.
//!
//! Two on-disk layouts are understood:
//!
//! * plain text, one sentence per line (monolingual collections);
//! * `verse_id<TAB>text`, one verse per line (parallel collections).
//!
//! Every loader produces [`Document`]s; [`normalize_and_split`] turns a
//! document into a [`WordStream`], the unit every downstream module consumes.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid UTF-8")]
    InvalidEncoding { path: PathBuf, line: usize },
    #[error("{path}:{line}: malformed parallel record (expected `verse_id<TAB>text`)")]
    MalformedLine { path: PathBuf, line: usize },
    #[error("language code must not be empty")]
    EmptyLanguage,
    #[error("invalid word {word:?}: words must be non-empty and contain no whitespace")]
    InvalidWord { word: String },
    #[error("invalid sample schedule: {0}")]
    InvalidSchedule(String),
    #[error("sample size {requested} exceeds stream length {available}")]
    ScheduleExceedsStream { requested: usize, available: usize },
}

/// One line of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub lang: String,
    pub text: String,
    /// Verse id for parallel corpora, 1-based line number for plain text.
    pub source_id: String,
}

/// An ordered sequence of words for one language.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordStream {
    lang: String,
    words: Vec<String>,
}

impl WordStream {
    /// Builds a stream, rejecting empty words and words containing whitespace.
    pub fn new(lang: impl Into<String>, words: Vec<String>) -> Result<Self, CorpusError> {
        if let Some(bad) = words.iter().find(|w| !is_valid_word(w)) {
            return Err(CorpusError::InvalidWord { word: bad.clone() });
        }
        Ok(Self {
            lang: lang.into(),
            words,
        })
    }

    /// Splits `text` on whitespace without any normalization.
    pub fn from_whitespace(lang: impl Into<String>, text: &str) -> Self {
        Self {
            lang: lang.into(),
            words: text.split_whitespace().map(str::to_owned).collect(),
        }
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn total_words(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Appends the words of `other`; the language of `self` is kept.
    pub fn extend(&mut self, other: WordStream) {
        self.words.extend(other.words);
    }

    /// Concatenates streams in order under a single language code.
    pub fn concat(lang: impl Into<String>, parts: impl IntoIterator<Item = WordStream>) -> Self {
        let mut out = WordStream {
            lang: lang.into(),
            words: Vec::new(),
        };
        for part in parts {
            out.extend(part);
        }
        out
    }

    fn prefix(&self, len: usize) -> WordStream {
        WordStream {
            lang: self.lang.clone(),
            words: self.words[..len].to_vec(),
        }
    }
}

fn is_valid_word(w: &str) -> bool {
    !w.is_empty() && !w.chars().any(char::is_whitespace)
}

/// Which characters count as punctuation when stripping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PunctuationClasses {
    /// Keep every character.
    None,
    /// ASCII punctuation only.
    Ascii,
    /// Every Unicode `P*` general category.
    #[default]
    Unicode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    pub strip_punctuation: PunctuationClasses,
    pub lowercase: bool,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            strip_punctuation: PunctuationClasses::Unicode,
            lowercase: false,
        }
    }
}

fn is_punctuation(c: char, classes: PunctuationClasses) -> bool {
    match classes {
        PunctuationClasses::None => false,
        PunctuationClasses::Ascii => c.is_ascii_punctuation(),
        PunctuationClasses::Unicode => matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        ),
    }
}

/// NFC-normalizes a line, removes punctuation characters (re-composing
/// marks left adjacent to a new base) and splits the result into maximal
/// non-whitespace runs.
pub fn normalize_and_split(doc: &Document, cfg: &NormalizeConfig) -> WordStream {
    let mut cleaned: String = doc
        .text
        .nfc()
        .filter(|&c| !is_punctuation(c, cfg.strip_punctuation))
        .nfc()
        .collect();
    if cfg.lowercase {
        cleaned = cleaned.to_lowercase().nfc().collect();
    }
    WordStream {
        lang: doc.lang.clone(),
        words: cleaned.split_whitespace().map(str::to_owned).collect(),
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            String::from_utf8(raw.to_vec())
                .map(|s| (i + 1, s))
                .map_err(|_| CorpusError::InvalidEncoding {
                    path: path.to_owned(),
                    line: i + 1,
                })
        })
        .collect()
}

fn check_lang(lang: &str) -> Result<(), CorpusError> {
    if lang.is_empty() {
        Err(CorpusError::EmptyLanguage)
    } else {
        Ok(())
    }
}

/// Loads a one-sentence-per-line corpus; blank lines are skipped.
pub fn load_plaintext(path: impl AsRef<Path>, lang: &str) -> Result<Vec<Document>, CorpusError> {
    check_lang(lang)?;
    let docs = read_lines(path.as_ref())?
        .into_iter()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, text)| Document {
            lang: lang.to_owned(),
            text,
            source_id: n.to_string(),
        })
        .collect();
    Ok(docs)
}

/// Loads a `verse_id<TAB>text` corpus. Blank lines are skipped; any other
/// line without a TAB is an error.
pub fn load_parallel(path: impl AsRef<Path>, lang: &str) -> Result<Vec<Document>, CorpusError> {
    check_lang(lang)?;
    let path = path.as_ref();
    let mut docs = Vec::new();
    for (n, line) in read_lines(path)? {
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| CorpusError::MalformedLine {
            path: path.to_owned(),
            line: n,
        })?;
        if id.trim().is_empty() {
            return Err(CorpusError::MalformedLine {
                path: path.to_owned(),
                line: n,
            });
        }
        docs.push(Document {
            lang: lang.to_owned(),
            text: text.to_owned(),
            source_id: id.to_owned(),
        });
    }
    Ok(docs)
}

/// Restricts every corpus to the verse ids present in all of them.
///
/// Output order follows each input's own order. Dropped verses are logged.
pub fn align_verses(corpora: &[Vec<Document>]) -> Vec<Vec<Document>> {
    let Some((first, rest)) = corpora.split_first() else {
        return Vec::new();
    };
    let mut shared: HashSet<&str> = first.iter().map(|d| d.source_id.as_str()).collect();
    for corpus in rest {
        let ids: HashSet<&str> = corpus.iter().map(|d| d.source_id.as_str()).collect();
        shared.retain(|id| ids.contains(id));
    }
    corpora
        .iter()
        .map(|corpus| {
            let kept: Vec<Document> = corpus
                .iter()
                .filter(|d| shared.contains(d.source_id.as_str()))
                .cloned()
                .collect();
            let dropped = corpus.len() - kept.len();
            if dropped > 0 {
                let lang = corpus.first().map(|d| d.lang.as_str()).unwrap_or("?");
                log::warn!("{lang}: dropped {dropped} verses without a counterpart in every corpus");
            }
            kept
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// Samples are prefixes of the stream in its original order.
    #[default]
    Prefix,
    /// Samples are prefixes of a seeded shuffle of the stream.
    Shuffle,
}

/// Increasing sample sizes for cumulative sampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSchedule {
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SampleMode,
}

impl SampleSchedule {
    pub fn new(sizes: Vec<usize>, seed: u64, mode: SampleMode) -> Result<Self, CorpusError> {
        let s = Self { sizes, seed, mode };
        s.validate()?;
        Ok(s)
    }

    pub fn prefix(sizes: Vec<usize>) -> Result<Self, CorpusError> {
        Self::new(sizes, 0, SampleMode::Prefix)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.sizes.is_empty() {
            return Err(CorpusError::InvalidSchedule("no sample sizes".into()));
        }
        if self.sizes[0] == 0 {
            return Err(CorpusError::InvalidSchedule("sample sizes must be > 0".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CorpusError::InvalidSchedule(
                "sample sizes must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Nested samples of `stream`, one per schedule size.
pub fn cumulative_samples(
    stream: &WordStream,
    schedule: &SampleSchedule,
) -> Result<Vec<WordStream>, CorpusError> {
    schedule.validate()?;
    let largest = *schedule.sizes.last().expect("validated non-empty");
    if largest > stream.total_words() {
        return Err(CorpusError::ScheduleExceedsStream {
            requested: largest,
            available: stream.total_words(),
        });
    }
    let base = match schedule.mode {
        SampleMode::Prefix => stream.clone(),
        SampleMode::Shuffle => {
            let mut words = stream.words.clone();
            words.shuffle(&mut ChaCha8Rng::seed_from_u64(schedule.seed));
            WordStream {
                lang: stream.lang.clone(),
                words,
            }
        }
    };
    Ok(schedule.sizes.iter().map(|&n| base.prefix(n)).collect())
}

/// Distinct characters of a stream, sorted.
pub fn alphabet_of(stream: &WordStream) -> BTreeSet<char> {
    stream.words.iter().flat_map(|w| w.chars()).collect()
}
