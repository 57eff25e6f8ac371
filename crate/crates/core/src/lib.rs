//! Subword tokenization and morphological-typology measurements.
//!
//! The crate trains greedy BPE tokenizers over per-language word streams and
//! measures how the resulting subword systems behave:
//!
//! * [`corpus`]: plain-text and verse-aligned loaders, word splitting, sampling
//! * [`bpe`]: training, encoding, compression-power ledger, tokenizer files
//! * [`metrics`]: productivity, rank-frequency curves, decay dominance, trends
//! * [`stats`]: log-log OLS, Welch t, one-way ANOVA, synthetic typology corpora
//! * [`report`]: group comparisons and JSON/CSV report emission
//! * [`pipeline`]: config-driven orchestration of all of the above
//!
//! Runnable walkthroughs live in the crate's `examples/` directory:
//!
//! ```text
//! examples/
//! ├── train_tokenizer.rs    train, save, reload, write an id corpus
//! ├── compression_power.rs  per-merge gains and G for every prefix
//! ├── productivity.rs       ρ on a hand example and on generated languages
//! ├── frequency_decay.rs    rank-frequency curves and log-log slopes
//! ├── group_statistics.rs   sampled Welch tests, Δ/σ, ANOVA
//! └── full_pipeline.rs      TOML config in, report directory out
//! ```
//!
//! ```no_run
//! use morphotok::bpe::{self, TrainerConfig};
//! use morphotok::corpus::WordStream;
//!
//! let s = WordStream::from_whitespace("xx", "lower lowest newer newest");
//! let table = bpe::train(&s, &TrainerConfig::with_merges(10)).unwrap();
//! println!("{}", bpe::compression_power(&s, &table, table.len()).unwrap());
//! ```

pub mod bpe;
pub mod corpus;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod stats;
