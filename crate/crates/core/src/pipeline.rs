//! Config-driven orchestration: ingest corpora, train tokenizers, measure,
//! compare groups, and write tokenizers, id corpora and reports.
//!
//! A config is a TOML file:
//!
//! ```toml
//! seed = 0
//! output_dir = "out"
//! merge_counts = [300, 400, 500]
//! top_n = 100
//!
//! [schedule]
//! sizes = [2000, 4000, 8000]
//!
//! [trainer]
//! merge_limit = 500
//!
//! [[languages]]
//! lang = "en"
//! group = "analytic"
//! corpus_path = "corpora/en.txt"
//! corpus_format = "plaintext"
//! lm_curves = ["runs/lm_curves_en_0.csv"]
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::bpe::{self, MergeTable, TrainerConfig};
use crate::corpus::{self, NormalizeConfig, SampleMode, SampleSchedule, WordStream};
use crate::metrics::{self, FrequencyCurve};
use crate::report::{self, compare_groups, compare_values, GroupComparison, LMRunSummary, LanguageRecord, Metric, Report};
use crate::stats::{self, Group, RegressionFit, TestResult};

pub const THREADS_ENV: &str = "MORPHOTOK_THREADS";

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// One document per non-blank line.
    #[default]
    Plaintext,
    /// `verse_id<TAB>text` lines, aligned across all parallel languages.
    Parallel,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plaintext" => Ok(CorpusFormat::Plaintext),
            "parallel" => Ok(CorpusFormat::Parallel),
            other => Err(format!("unknown corpus format {other:?} (expected plaintext or parallel)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageSpec {
    pub lang: String,
    pub group: Group,
    pub corpus_path: PathBuf,
    pub corpus_format: CorpusFormat,
    /// LM training curves, one per run; the run id is the list position.
    pub lm_curves: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub languages: Vec<LanguageSpec>,
    pub merge_counts: Vec<usize>,
    pub top_n: usize,
    pub min_subword_len: usize,
    pub schedule: SampleSchedule,
    pub normalize: NormalizeConfig,
    pub trainer: TrainerConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Run group comparisons; needs at least one language per group.
    pub compare: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLanguage {
    lang: Option<String>,
    group: Option<String>,
    corpus_path: Option<PathBuf>,
    corpus_format: Option<String>,
    lm_curves: Option<Vec<PathBuf>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    sizes: Option<Vec<usize>>,
    seed: Option<u64>,
    mode: Option<SampleMode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    languages: Option<Vec<RawLanguage>>,
    merge_counts: Option<Vec<usize>>,
    top_n: Option<usize>,
    min_subword_len: Option<usize>,
    schedule: Option<RawSchedule>,
    normalize: Option<NormalizeConfig>,
    trainer: Option<TrainerConfig>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    compare: Option<bool>,
}

fn valid_lang(lang: &str) -> bool {
    !lang.is_empty() && lang.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base)
    }

    /// Parses and validates a config, reporting every problem at once.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut problems = Vec::new();
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let seed = raw.seed.unwrap_or(0);

        let mut languages = Vec::new();
        let mut groups_seen = Vec::new();
        match raw.languages {
            None => problems.push("languages: missing (at least one [[languages]] entry is required)".into()),
            Some(ref l) if l.is_empty() => problems.push("languages: at least one language is required".into()),
            Some(_) => {}
        }
        for (i, l) in raw.languages.into_iter().flatten().enumerate() {
            let at = |field: &str| format!("languages[{i}].{field}");
            let lang = match l.lang {
                None => {
                    problems.push(format!("{}: missing", at("lang")));
                    None
                }
                Some(lang) if !valid_lang(&lang) => {
                    problems.push(format!("{}: {lang:?} must be non-empty letters, digits, '-' or '_'", at("lang")));
                    None
                }
                Some(lang) if languages.iter().any(|s: &LanguageSpec| s.lang == lang) => {
                    problems.push(format!("{}: duplicate language {lang:?}", at("lang")));
                    None
                }
                Some(lang) => Some(lang),
            };
            let group = match l.group.as_deref() {
                None => {
                    problems.push(format!("{}: missing", at("group")));
                    None
                }
                Some("analytic") => Some(Group::Analytic),
                Some("synthetic") => Some(Group::Synthetic),
                Some(other) => {
                    problems.push(format!("{}: {other:?} is not analytic or synthetic", at("group")));
                    None
                }
            };
            groups_seen.extend(group);
            if l.corpus_path.is_none() {
                problems.push(format!("{}: missing", at("corpus_path")));
            }
            let format = match l.corpus_format.as_deref().map(str::parse::<CorpusFormat>) {
                None => Some(CorpusFormat::default()),
                Some(Ok(f)) => Some(f),
                Some(Err(e)) => {
                    problems.push(format!("{}: {e}", at("corpus_format")));
                    None
                }
            };
            if let (Some(lang), Some(group), Some(path), Some(corpus_format)) = (lang, group, l.corpus_path, format) {
                languages.push(LanguageSpec {
                    lang,
                    group,
                    corpus_path: resolve(path),
                    corpus_format,
                    lm_curves: l.lm_curves.unwrap_or_default().into_iter().map(resolve).collect(),
                });
            }
        }

        let merge_counts = raw.merge_counts.unwrap_or(metrics::DEFAULT_MERGE_ROUNDS.to_vec());
        if merge_counts.is_empty() || merge_counts.contains(&0) {
            problems.push("merge_counts: must be a non-empty list of positive counts".into());
        }
        let top_n = raw.top_n.unwrap_or(metrics::DEFAULT_TOP_N);
        if top_n < 2 {
            problems.push(format!("top_n: must be at least 2, got {top_n}"));
        }
        let min_subword_len = raw.min_subword_len.unwrap_or(1);
        if min_subword_len == 0 {
            problems.push("min_subword_len: must be at least 1".into());
        }

        let schedule = match raw.schedule {
            None => {
                problems.push("schedule: missing".into());
                None
            }
            Some(RawSchedule { sizes: None, .. }) => {
                problems.push("schedule.sizes: missing".into());
                None
            }
            Some(RawSchedule {
                sizes: Some(sizes),
                seed: s,
                mode,
            }) => match SampleSchedule::new(sizes, s.unwrap_or(seed), mode.unwrap_or_default()) {
                Ok(s) => Some(s),
                Err(e) => {
                    problems.push(format!("schedule: {e}"));
                    None
                }
            },
        };

        let trainer = raw.trainer.unwrap_or_default();
        if let Err(e) = trainer.validate() {
            problems.push(format!("trainer: {e}"));
        }
        if raw.output_dir.is_none() {
            problems.push("output_dir: missing".into());
        }
        let compare = raw.compare.unwrap_or(true);
        if compare {
            for g in [Group::Analytic, Group::Synthetic] {
                if !groups_seen.is_empty() && !groups_seen.contains(&g) {
                    problems.push(format!(
                        "languages: no {} language; add one or set compare = false",
                        g.as_str()
                    ));
                }
            }
        }

        if !problems.is_empty() {
            return Err(ConfigError::Invalid(problems));
        }
        Ok(Self {
            languages,
            merge_counts,
            top_n,
            min_subword_len,
            schedule: schedule.expect("checked"),
            normalize: raw.normalize.unwrap_or_default(),
            trainer,
            seed,
            output_dir: resolve(raw.output_dir.expect("checked")),
            compare,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Train,
    Measure,
    Statistics,
    Export,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Train => "train",
            Stage::Measure => "measure",
            Stage::Statistics => "statistics",
            Stage::Export => "export",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{stage} stage failed{}: {source}", .lang.as_deref().map(|l| format!(" for {l}")).unwrap_or_default())]
    Stage {
        stage: Stage,
        lang: Option<String>,
        #[source]
        source: BoxError,
    },
    #[error("{THREADS_ENV}: {0}")]
    Threads(String),
}

fn tag<E: Into<BoxError>>(stage: Stage, lang: Option<&str>) -> impl FnOnce(E) -> PipelineError + '_ {
    move |e| PipelineError::Stage {
        stage,
        lang: lang.map(str::to_owned),
        source: e.into(),
    }
}

/// Worker cap from `MORPHOTOK_THREADS`; 0 (or unset) means one per core.
pub fn thread_count() -> Result<usize, PipelineError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| PipelineError::Threads(format!("{v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

pub fn thread_pool() -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| PipelineError::Threads(e.to_string()))
}

/// A normalized corpus: one word stream per non-empty document.
#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub lang: String,
    pub documents: Vec<WordStream>,
}

impl LoadedCorpus {
    fn from_documents(lang: &str, docs: &[corpus::Document], cfg: &NormalizeConfig) -> Self {
        Self {
            lang: lang.to_owned(),
            documents: docs
                .iter()
                .map(|d| corpus::normalize_and_split(d, cfg))
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn stream(&self) -> WordStream {
        WordStream::concat(self.lang.clone(), self.documents.iter().cloned())
    }
}

/// Loads and normalizes one corpus file on its own (no verse alignment).
pub fn load_corpus(
    path: &Path,
    lang: &str,
    format: CorpusFormat,
    normalize: &NormalizeConfig,
) -> Result<LoadedCorpus, corpus::CorpusError> {
    let docs = match format {
        CorpusFormat::Plaintext => corpus::load_plaintext(path, lang)?,
        CorpusFormat::Parallel => corpus::load_parallel(path, lang)?,
    };
    Ok(LoadedCorpus::from_documents(lang, &docs, normalize))
}

/// Loads every configured corpus; parallel-format corpora are restricted
/// to the verse ids they all share.
pub fn ingest(cfg: &ExperimentConfig) -> Result<Vec<LoadedCorpus>, PipelineError> {
    let raw: Vec<Vec<corpus::Document>> = cfg
        .languages
        .par_iter()
        .map(|l| {
            match l.corpus_format {
                CorpusFormat::Plaintext => corpus::load_plaintext(&l.corpus_path, &l.lang),
                CorpusFormat::Parallel => corpus::load_parallel(&l.corpus_path, &l.lang),
            }
            .map_err(tag(Stage::Ingest, Some(&l.lang)))
        })
        .collect::<Result<_, _>>()?;
    let parallel: Vec<usize> = (0..raw.len())
        .filter(|&i| cfg.languages[i].corpus_format == CorpusFormat::Parallel)
        .collect();
    let mut aligned = corpus::align_verses(&parallel.iter().map(|&i| raw[i].clone()).collect::<Vec<_>>()).into_iter();
    let mut out = Vec::with_capacity(raw.len());
    for (i, (spec, docs)) in cfg.languages.iter().zip(&raw).enumerate() {
        let docs = if parallel.contains(&i) {
            aligned.next().expect("one aligned corpus per parallel language")
        } else {
            docs.clone()
        };
        let loaded = LoadedCorpus::from_documents(&spec.lang, &docs, &cfg.normalize);
        if loaded.documents.is_empty() {
            return Err(tag(Stage::Ingest, Some(&spec.lang))("corpus has no words after normalization"));
        }
        out.push(loaded);
    }
    Ok(out)
}

/// Rank-frequency fit over the top `top_n` subwords, or all of them when
/// fewer exist.
pub fn decay_fit(curve: &FrequencyCurve, top_n: usize) -> Result<RegressionFit, stats::StatsError> {
    let n = top_n.min(curve.freqs.len());
    if n < top_n {
        log::warn!("{}: only {n} subword types, fitting those instead of {top_n}", curve.lang);
    }
    stats::ols_loglog(curve, n)
}

/// Everything computed for one language.
#[derive(Debug, Clone)]
pub struct LanguageResult {
    pub record: LanguageRecord,
    pub table: MergeTable,
    pub corpus: LoadedCorpus,
}

fn measure_language(
    cfg: &ExperimentConfig,
    spec: &LanguageSpec,
    corpus: LoadedCorpus,
) -> Result<LanguageResult, PipelineError> {
    let lang = Some(spec.lang.as_str());
    let stream = corpus.stream();
    let table = bpe::train(&stream, &cfg.trainer).map_err(tag(Stage::Train, lang))?;
    let measure = tag(Stage::Measure, lang);
    let result = (|| -> Result<LanguageRecord, BoxError> {
        let rho = metrics::productivity_rounds(&stream, &cfg.merge_counts, &cfg.trainer, cfg.min_subword_len)?;
        let index = metrics::index_stream(&stream, &table, cfg.min_subword_len)?;
        let curve = metrics::frequency_curve(&index, &spec.lang, cfg.top_n)?;
        let fit = decay_fit(&curve, cfg.top_n)?;
        let trend = metrics::repetition_trend(&stream, &cfg.schedule, &cfg.trainer, cfg.top_n, cfg.min_subword_len)?;
        let lm_runs = if spec.lm_curves.is_empty() {
            None
        } else {
            let runs = spec
                .lm_curves
                .iter()
                .enumerate()
                .map(|(i, p)| LMRunSummary::from_curve(&spec.lang, i as u32, p))
                .collect::<Result<Vec<_>, _>>()?;
            Some(runs)
        };
        Ok(LanguageRecord {
            lang: spec.lang.clone(),
            group: spec.group,
            rho,
            fit,
            trend,
            curve,
            lm_runs,
        })
    })();
    Ok(LanguageResult {
        record: result.map_err(measure)?,
        table,
        corpus,
    })
}

/// Group comparisons for every metric the records carry.
///
/// The repetition statistic is compared at every schedule point with a
/// Bonferroni family of the point count; `repetition` alone is the largest
/// sample. Other metrics are single tests.
pub fn group_comparisons(records: &[LanguageRecord], schedule: &SampleSchedule) -> Result<Vec<GroupComparison>, report::ReportError> {
    let points = schedule.sizes.len();
    let mut out = Vec::new();
    for metric in Metric::ALL {
        if records.iter().any(|r| metric.value(r).is_none()) {
            continue;
        }
        let family = if metric == Metric::Repetition { points } else { 1 };
        out.push(compare_groups(records, metric, family)?);
    }
    for (j, size) in schedule.sizes.iter().enumerate() {
        let values = |g: Group| -> Vec<f64> {
            records.iter().filter(|r| r.group == g).map(|r| r.trend.values[j]).collect()
        };
        out.push(compare_values(
            &format!("repetition@{size}"),
            &values(Group::Synthetic),
            &values(Group::Analytic),
            points,
        )?);
    }
    Ok(out)
}

/// One-way ANOVA treating each language's trend values as a group; `None`
/// when there are fewer than two languages or two schedule points.
pub fn language_anova(records: &[LanguageRecord]) -> Result<Option<TestResult>, stats::StatsError> {
    if records.len() < 2 || records.iter().any(|r| r.trend.values.len() < 2) {
        return Ok(None);
    }
    let groups: Vec<Vec<f64>> = records.iter().map(|r| r.trend.values.clone()).collect();
    stats::one_way_anova(&groups).map(Some)
}

/// Measured languages plus group statistics, before anything is written.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub languages: Vec<LanguageResult>,
    pub comparisons: Vec<GroupComparison>,
    pub anova: Option<TestResult>,
}

impl Analysis {
    pub fn records(&self) -> Vec<LanguageRecord> {
        self.languages.iter().map(|l| l.record.clone()).collect()
    }

    pub fn report(&self) -> Report {
        Report::new(&self.records(), &self.comparisons).with_anova(self.anova)
    }
}

/// Ingests, trains, measures and compares; writes nothing.
pub fn analyze(cfg: &ExperimentConfig) -> Result<Analysis, PipelineError> {
    let corpora = ingest(cfg)?;
    let languages = cfg
        .languages
        .par_iter()
        .zip(corpora)
        .map(|(spec, corpus)| measure_language(cfg, spec, corpus))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<LanguageRecord> = languages.iter().map(|l| l.record.clone()).collect();
    let (comparisons, anova) = if cfg.compare {
        (
            group_comparisons(&records, &cfg.schedule).map_err(tag(Stage::Statistics, None))?,
            language_anova(&records).map_err(tag(Stage::Statistics, None))?,
        )
    } else {
        (Vec::new(), None)
    };
    Ok(Analysis {
        languages,
        comparisons,
        anova,
    })
}

/// Writes `tokenizers/<lang>/`, `ids/<lang>.txt` and the report files.
pub fn write_outputs(analysis: &Analysis, output_dir: &Path) -> Result<(), PipelineError> {
    let ids_dir = output_dir.join("ids");
    fs::create_dir_all(&ids_dir).map_err(tag(Stage::Export, None))?;
    analysis.languages.par_iter().try_for_each(|l| {
        let lang = Some(l.record.lang.as_str());
        bpe::export_tokenizer(&l.table, output_dir.join("tokenizers").join(&l.record.lang))
            .map_err(tag(Stage::Export, lang))?;
        let file = fs::File::create(ids_dir.join(format!("{}.txt", l.record.lang))).map_err(tag(Stage::Export, lang))?;
        bpe::write_id_corpus(BufWriter::new(file), &l.corpus.documents, &l.table).map_err(tag(Stage::Export, lang))
    })?;
    analysis.report().emit(output_dir).map_err(tag(Stage::Report, None))
}

/// Runs the whole pipeline inside a `MORPHOTOK_THREADS`-capped pool.
pub fn run(cfg: &ExperimentConfig) -> Result<Analysis, PipelineError> {
    thread_pool()?.install(|| {
        let analysis = analyze(cfg)?;
        write_outputs(&analysis, &cfg.output_dir)?;
        Ok(analysis)
    })
}

pub fn run_config_file(path: &Path) -> Result<Analysis, PipelineError> {
    run(&ExperimentConfig::load(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{generate_typology_corpus, sampled_group_test, TypologyGenConfig, TypologyKind};

    const MINIMAL: &str = r#"
output_dir = "out"
[schedule]
sizes = [10, 20]
[[languages]]
lang = "en"
group = "analytic"
corpus_path = "en.txt"
[[languages]]
lang = "fi"
group = "synthetic"
corpus_path = "/data/fi.tsv"
corpus_format = "parallel"
"#;

    fn problems(text: &str) -> Vec<String> {
        match ExperimentConfig::from_toml_str(text, Path::new("/cfg")) {
            Err(ConfigError::Invalid(p)) => p,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn defaults_and_path_resolution() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.merge_counts, vec![300, 400, 500]);
        assert_eq!(cfg.top_n, 100);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.trainer, TrainerConfig::default());
        assert_eq!(cfg.languages[0].corpus_path, Path::new("/cfg/en.txt"));
        assert_eq!(cfg.languages[0].corpus_format, CorpusFormat::Plaintext);
        assert_eq!(cfg.languages[1].corpus_path, Path::new("/data/fi.tsv"));
        assert_eq!(cfg.output_dir, Path::new("/cfg/out"));
        assert!(cfg.compare);
    }

    #[test]
    fn schedule_seed_falls_back_to_global() {
        let text = MINIMAL.replace("output_dir", "seed = 9\noutput_dir");
        let cfg = ExperimentConfig::from_toml_str(&text, Path::new("")).unwrap();
        assert_eq!(cfg.schedule.seed, 9);
    }

    #[test]
    fn missing_corpus_path_is_named() {
        let p = problems(&MINIMAL.replace("corpus_path = \"en.txt\"", ""));
        assert_eq!(p, vec!["languages[0].corpus_path: missing".to_owned()]);
    }

    #[test]
    fn all_problems_reported_together() {
        let text = r#"
top_n = 1
merge_counts = []
[trainer]
merge_limit = 0
[[languages]]
group = "fusional"
corpus_format = "xml"
"#;
        let p = problems(text);
        for needle in [
            "languages[0].lang: missing",
            "languages[0].group:",
            "languages[0].corpus_path: missing",
            "languages[0].corpus_format:",
            "merge_counts:",
            "top_n:",
            "schedule: missing",
            "trainer:",
            "output_dir: missing",
        ] {
            assert!(p.iter().any(|m| m.starts_with(needle)), "{needle} not in {p:#?}");
        }
    }

    #[test]
    fn duplicate_and_bad_languages() {
        let text = MINIMAL.replace("lang = \"fi\"", "lang = \"en\"");
        assert!(problems(&text)[0].contains("duplicate"));
        let text = MINIMAL.replace("lang = \"fi\"", "lang = \"../fi\"");
        assert!(problems(&text)[0].starts_with("languages[1].lang"));
    }

    #[test]
    fn comparison_needs_both_groups() {
        let text = MINIMAL.replace("\"synthetic\"", "\"analytic\"");
        assert!(problems(&text)[0].contains("no synthetic language"));
        let text = text.replace("output_dir", "compare = false\noutput_dir");
        assert!(ExperimentConfig::from_toml_str(&text, Path::new("")).is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("output_dir", "outptu = 1\noutput_dir");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&text, Path::new("")),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn missing_corpus_fails_in_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, dir.path()).unwrap();
        let err = analyze(&cfg).unwrap_err();
        assert!(matches!(err, PipelineError::Stage { stage: Stage::Ingest, .. }), "{err}");
        assert!(err.to_string().starts_with("ingest stage failed for en"), "{err}");
    }

    #[test]
    fn parallel_corpora_are_aligned() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.tsv"), "1\tuno dos\n2\ttres\n3\tcuatro\n").unwrap();
        fs::write(dir.path().join("b.tsv"), "3\tdrei\n1\teins zwei\n4\tvier\n").unwrap();
        let text = r#"
output_dir = "out"
compare = false
[schedule]
sizes = [1]
[[languages]]
lang = "es"
group = "synthetic"
corpus_path = "a.tsv"
corpus_format = "parallel"
[[languages]]
lang = "de"
group = "synthetic"
corpus_path = "b.tsv"
corpus_format = "parallel"
"#;
        let cfg = ExperimentConfig::from_toml_str(text, dir.path()).unwrap();
        let loaded = ingest(&cfg).unwrap();
        assert_eq!(loaded[0].documents.len(), 2);
        assert_eq!(loaded[1].documents.len(), 2);
        assert_eq!(loaded[1].documents[0].words(), ["drei"]);
    }

    #[test]
    fn repetition_comparison_matches_sampled_group_test() {
        let sched = SampleSchedule::prefix(vec![400, 800, 1200]).unwrap();
        let trainer = TrainerConfig::with_merges(60);
        let mut streams = Vec::new();
        for (seed, kind) in [
            (1, TypologyKind::Agglutinative),
            (2, TypologyKind::Agglutinative),
            (3, TypologyKind::Analytic),
            (4, TypologyKind::Analytic),
        ] {
            let s = generate_typology_corpus(&TypologyGenConfig::preset(kind, seed, 1200)).unwrap();
            streams.push((s, Group::from(kind)));
        }
        let sampled = sampled_group_test(&streams, &sched, &trainer, 100, 1).unwrap();
        let records: Vec<LanguageRecord> = streams
            .iter()
            .zip(&sampled.trends)
            .map(|((s, g), (_, trend))| {
                let table = bpe::train(s, &trainer).unwrap();
                let index = metrics::index_stream(s, &table, 1).unwrap();
                let curve = metrics::frequency_curve(&index, s.lang(), 100).unwrap();
                LanguageRecord {
                    lang: s.lang().to_owned(),
                    group: *g,
                    rho: metrics::productivity_rounds(s, &[60], &trainer, 1).unwrap(),
                    fit: decay_fit(&curve, 100).unwrap(),
                    trend: trend.clone(),
                    curve,
                    lm_runs: None,
                }
            })
            .collect();
        let comps = group_comparisons(&records, &sched).unwrap();
        let rep = comps.iter().find(|c| c.metric_name == "repetition").unwrap();
        assert_eq!(rep.test.unwrap(), sampled.headline);
        for (j, size) in sched.sizes.iter().enumerate() {
            let c = comps.iter().find(|c| c.metric_name == format!("repetition@{size}")).unwrap();
            assert_eq!(c.test.unwrap(), sampled.per_point[j]);
        }
        assert!(!comps.iter().any(|c| c.metric_name == "final_loss"));
        let anova = language_anova(&records).unwrap().unwrap();
        assert_eq!(anova.df, 3.0);
    }
}
