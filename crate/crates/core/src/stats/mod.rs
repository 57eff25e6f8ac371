//! Regression, hypothesis tests, and synthetic typology corpora.

pub mod distributions;
mod generator;
mod hypothesis;
mod regression;

use serde::{Deserialize, Serialize};

pub use generator::{generate_typology_corpus, TypologyGenConfig, TypologyKind};
pub use hypothesis::{bonferroni, one_way_anova, pooled_t_test, welch_t_test, TestMethod, TestResult};
pub use regression::{ols, ols_loglog, RegressionFit};

use crate::bpe::TrainerConfig;
use crate::corpus::{SampleSchedule, WordStream};
use crate::metrics::{self, MetricsError, TrendCurve};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("x and y differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("frequency at rank {rank} is not positive; log is undefined")]
    NonPositiveFrequency { rank: usize },
    #[error("invalid generator config: {0}")]
    InvalidGenerator(String),
    #[error("group {0:?} has no languages")]
    EmptyGroup(Group),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Morphological grouping of a language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Analytic,
    Synthetic,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Analytic => "analytic",
            Group::Synthetic => "synthetic",
        }
    }
}

impl From<TypologyKind> for Group {
    fn from(kind: TypologyKind) -> Self {
        match kind {
            TypologyKind::Analytic => Group::Analytic,
            TypologyKind::Agglutinative => Group::Synthetic,
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased (n − 1) variance; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Group test over cumulative samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledGroupTest {
    /// One Welch test per schedule point, synthetic vs analytic, each
    /// Bonferroni-adjusted by the number of points.
    pub per_point: Vec<TestResult>,
    /// The test at the largest sample size.
    pub headline: TestResult,
    pub trends: Vec<(Group, TrendCurve)>,
}

/// Computes each language's repetition trend over `schedule`, then at every
/// schedule point runs a Welch test between the synthetic and analytic
/// languages' values.
pub fn sampled_group_test(
    streams: &[(WordStream, Group)],
    schedule: &SampleSchedule,
    trainer: &TrainerConfig,
    top_k: usize,
    min_subword_len: usize,
) -> Result<SampledGroupTest, StatsError> {
    for g in [Group::Synthetic, Group::Analytic] {
        if !streams.iter().any(|(_, sg)| *sg == g) {
            return Err(StatsError::EmptyGroup(g));
        }
    }
    let trends = streams
        .iter()
        .map(|(s, g)| {
            metrics::repetition_trend(s, schedule, trainer, top_k, min_subword_len).map(|t| (*g, t))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let family = schedule.sizes.len();
    let per_point = (0..family)
        .map(|j| {
            let values = |g: Group| -> Vec<f64> {
                trends
                    .iter()
                    .filter(|(tg, _)| *tg == g)
                    .map(|(_, t)| t.values[j])
                    .collect()
            };
            welch_t_test(&values(Group::Synthetic), &values(Group::Analytic), family)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampledGroupTest {
        headline: *per_point.last().expect("schedule is non-empty"),
        per_point,
        trends,
    })
}
