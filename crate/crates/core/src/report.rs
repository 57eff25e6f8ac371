//! Group comparisons and JSON/CSV report emission.
//!
//! Every float written by this module is rounded to 6 significant digits.
//! `report.json` is pretty-printed with sorted keys, so parsing it and
//! emitting it again reproduces the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::metrics::{FrequencyCurve, ProductivityResult, TrendCurve};
use crate::stats::{self, welch_t_test, Group, RegressionFit, StatsError, TestResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const LM_CURVE_HEADER: [&str; 5] = ["step", "train_loss", "train_ppl", "val_loss", "val_ppl"];
/// Relative tolerance for `ppl == exp(loss)` on parsed curves; wide enough
/// for values that went through 6-significant-digit text.
pub const PPL_REL_TOLERANCE: f64 = 1e-5;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("report.json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("group {} has no languages", .0.as_str())]
    EmptyGroup(Group),
    #[error("language {lang} has no value for metric {metric}")]
    MissingMetric { lang: String, metric: &'static str },
    #[error("{path}: header must be {expected}")]
    BadHeader { path: PathBuf, expected: String },
    #[error("{path}: step {step}: perplexity does not match exp(loss)")]
    PerplexityMismatch { path: PathBuf, step: u64 },
    #[error("{path}: step {step} does not increase")]
    StepOrder { path: PathBuf, step: u64 },
    #[error("{0}: no rows")]
    EmptyCurve(PathBuf),
    #[error("language code {0:?} is not usable in a file name")]
    BadLang(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_owned(),
        source,
    }
}

/// `x` rounded to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Decimal text of `x` at 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    format!("{}", round_sig6(x))
}

/// One row of an LM training curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmCurveRow {
    pub step: u64,
    pub train_loss: f64,
    pub train_ppl: f64,
    pub val_loss: Option<f64>,
    pub val_ppl: Option<f64>,
}

fn ppl_matches(loss: f64, ppl: f64) -> bool {
    let want = loss.exp();
    (ppl - want).abs() <= PPL_REL_TOLERANCE * want.max(1.0)
}

/// Parses an `lm_curves` CSV, checking the header, strictly increasing
/// steps and `ppl == exp(loss)` on every row.
pub fn read_lm_curve(path: &Path) -> Result<Vec<LmCurveRow>, ReportError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(LM_CURVE_HEADER.iter().copied()) {
        return Err(ReportError::BadHeader {
            path: path.to_owned(),
            expected: LM_CURVE_HEADER.join(","),
        });
    }
    let mut rows: Vec<LmCurveRow> = Vec::new();
    for row in reader.deserialize() {
        let row: LmCurveRow = row.map_err(csv_err(path))?;
        if rows.last().is_some_and(|prev| prev.step >= row.step) {
            return Err(ReportError::StepOrder {
                path: path.to_owned(),
                step: row.step,
            });
        }
        let val_ok = match (row.val_loss, row.val_ppl) {
            (Some(l), Some(p)) => ppl_matches(l, p),
            (None, None) => true,
            _ => false,
        };
        if !ppl_matches(row.train_loss, row.train_ppl) || !val_ok {
            return Err(ReportError::PerplexityMismatch {
                path: path.to_owned(),
                step: row.step,
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ReportError::EmptyCurve(path.to_owned()));
    }
    Ok(rows)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err(path))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), ReportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_lm_curve(path: &Path, rows: &[LmCurveRow]) -> Result<(), ReportError> {
    let opt = |x: Option<f64>| x.map(format_sig6).unwrap_or_default();
    write_rows(
        path,
        &LM_CURVE_HEADER,
        rows.iter().map(|r| {
            [
                r.step.to_string(),
                format_sig6(r.train_loss),
                format_sig6(r.train_ppl),
                opt(r.val_loss),
                opt(r.val_ppl),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LMRunSummary {
    pub lang: String,
    pub run_id: u32,
    /// Last validation loss if the curve has one, else the last training loss.
    pub final_loss: f64,
    /// `exp(final_loss)`.
    pub final_perplexity: f64,
    pub curve_path: PathBuf,
}

impl LMRunSummary {
    pub fn from_curve(lang: &str, run_id: u32, path: &Path) -> Result<Self, ReportError> {
        let rows = read_lm_curve(path)?;
        let final_loss = rows
            .iter()
            .rev()
            .find_map(|r| r.val_loss)
            .unwrap_or(rows.last().expect("non-empty").train_loss);
        Ok(Self {
            lang: lang.to_owned(),
            run_id,
            final_loss,
            final_perplexity: final_loss.exp(),
            curve_path: path.to_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRecord {
    pub lang: String,
    pub group: Group,
    pub rho: ProductivityResult,
    pub fit: RegressionFit,
    pub trend: TrendCurve,
    pub curve: FrequencyCurve,
    pub lm_runs: Option<Vec<LMRunSummary>>,
}

/// Per-language quantity compared between groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Productivity,
    Slope,
    AbsSlope,
    RSquared,
    /// Repetition statistic at the largest sample.
    Repetition,
    /// Mean over runs of the final LM loss.
    FinalLoss,
    FinalPerplexity,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Productivity,
        Metric::Slope,
        Metric::AbsSlope,
        Metric::RSquared,
        Metric::Repetition,
        Metric::FinalLoss,
        Metric::FinalPerplexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Productivity => "productivity",
            Metric::Slope => "slope",
            Metric::AbsSlope => "abs_slope",
            Metric::RSquared => "r_squared",
            Metric::Repetition => "repetition",
            Metric::FinalLoss => "final_loss",
            Metric::FinalPerplexity => "final_perplexity",
        }
    }

    pub fn value(self, record: &LanguageRecord) -> Option<f64> {
        let lm = |f: fn(&LMRunSummary) -> f64| {
            record
                .lm_runs
                .as_ref()
                .filter(|runs| !runs.is_empty())
                .map(|runs| stats::mean(&runs.iter().map(f).collect::<Vec<_>>()))
        };
        match self {
            Metric::Productivity => Some(record.rho.mean_rho),
            Metric::Slope => Some(record.fit.slope),
            Metric::AbsSlope => Some(record.fit.slope.abs()),
            Metric::RSquared => Some(record.fit.r_squared),
            Metric::Repetition => record.trend.values.last().copied(),
            Metric::FinalLoss => lm(|r| r.final_loss),
            Metric::FinalPerplexity => lm(|r| r.final_perplexity),
        }
    }
}

/// Synthetic (`a`) against analytic (`b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub metric_name: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_a - mean_b`.
    pub delta: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// Welch test; absent when either group has fewer than two values.
    pub test: Option<TestResult>,
}

pub fn compare_values(
    metric_name: &str,
    a: &[f64],
    b: &[f64],
    family_size: usize,
) -> Result<GroupComparison, ReportError> {
    if a.is_empty() {
        return Err(ReportError::EmptyGroup(Group::Synthetic));
    }
    if b.is_empty() {
        return Err(ReportError::EmptyGroup(Group::Analytic));
    }
    let (mean_a, mean_b) = (stats::mean(a), stats::mean(b));
    let test = if a.len() >= 2 && b.len() >= 2 {
        Some(welch_t_test(a, b, family_size)?)
    } else {
        None
    };
    Ok(GroupComparison {
        metric_name: metric_name.to_owned(),
        mean_a,
        mean_b,
        delta: mean_a - mean_b,
        sigma_a: stats::sample_std(a),
        sigma_b: stats::sample_std(b),
        n_a: a.len(),
        n_b: b.len(),
        test,
    })
}

/// Compares `metric` between the synthetic and analytic records.
pub fn compare_groups(
    records: &[LanguageRecord],
    metric: Metric,
    family_size: usize,
) -> Result<GroupComparison, ReportError> {
    let values = |g: Group| -> Result<Vec<f64>, ReportError> {
        records
            .iter()
            .filter(|r| r.group == g)
            .map(|r| {
                metric.value(r).ok_or_else(|| ReportError::MissingMetric {
                    lang: r.lang.clone(),
                    metric: metric.name(),
                })
            })
            .collect()
    };
    compare_values(metric.name(), &values(Group::Synthetic)?, &values(Group::Analytic)?, family_size)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Sorted by language code.
    pub languages: Vec<LanguageRecord>,
    pub comparisons: Vec<GroupComparison>,
    /// One-way ANOVA with each language's trend values as a group.
    pub language_anova: Option<TestResult>,
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig6(n.as_f64().expect("f64 number"));
            *n = serde_json::Number::from_f64(x).expect("finite");
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

impl Report {
    pub fn new(records: &[LanguageRecord], comparisons: &[GroupComparison]) -> Self {
        let mut languages = records.to_vec();
        languages.sort_by(|a, b| a.lang.cmp(&b.lang));
        Self {
            schema_version: SCHEMA_VERSION,
            languages,
            comparisons: comparisons.to_vec(),
            language_anova: None,
        }
    }

    pub fn with_anova(mut self, anova: Option<TestResult>) -> Self {
        self.language_anova = anova;
        self
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut v = serde_json::to_value(self)?;
        round_value(&mut v);
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `report.json` and the CSV files into `dir`, creating it.
    pub fn emit(&self, dir: &Path) -> Result<(), ReportError> {
        for rec in &self.languages {
            if rec.lang.is_empty() || !rec.lang.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_') {
                return Err(ReportError::BadLang(rec.lang.clone()));
            }
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let json_path = dir.join("report.json");
        fs::write(&json_path, self.to_json()?).map_err(io_err(&json_path))?;

        write_rows(
            &dir.join("table1.csv"),
            &["lang", "type", "slope", "r", "r2"],
            self.languages.iter().map(|r| {
                [
                    r.lang.clone(),
                    r.group.as_str().to_owned(),
                    format_sig6(r.fit.slope),
                    format_sig6(r.fit.r),
                    format_sig6(r.fit.r_squared),
                ]
            }),
        )?;
        write_rows(
            &dir.join("productivity.csv"),
            &["lang", "type", "merges", "rho"],
            self.languages.iter().flat_map(|r| {
                r.rho.per_round.iter().map(move |(k, rho)| {
                    [r.lang.clone(), r.group.as_str().to_owned(), k.to_string(), format_sig6(*rho)]
                })
            }),
        )?;
        for r in &self.languages {
            write_rows(
                &dir.join(format!("trend_{}.csv", r.lang)),
                &["sample_size", "value"],
                r.trend
                    .sample_sizes
                    .iter()
                    .zip(&r.trend.values)
                    .map(|(n, v)| [n.to_string(), format_sig6(*v)]),
            )?;
            write_rows(
                &dir.join(format!("freq_{}.csv", r.lang)),
                &["rank", "frequency"],
                r.curve
                    .freqs
                    .iter()
                    .enumerate()
                    .map(|(i, f)| [(i + 1).to_string(), format_sig6(*f)]),
            )?;
            for run in r.lm_runs.iter().flatten() {
                let rows = read_lm_curve(&run.curve_path)?;
                write_lm_curve(&dir.join(format!("lm_curves_{}_{}.csv", r.lang, run.run_id)), &rows)?;
            }
        }
        Ok(())
    }
}

pub fn emit_report(
    records: &[LanguageRecord],
    comparisons: &[GroupComparison],
    dir: &Path,
) -> Result<(), ReportError> {
    Report::new(records, comparisons).emit(dir)
}
