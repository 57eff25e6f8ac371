use serde::{Deserialize, Serialize};

use super::distributions::{f_survival, student_t_two_sided};
use super::{mean, sample_variance, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    WelchT,
    PooledT,
    AnovaF,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Serialized as `"inf"` / `"-inf"` when the samples separate perfectly.
    #[serde(with = "extended_float")]
    pub statistic: f64,
    pub p_value: f64,
    /// Bonferroni-adjusted p-value.
    pub p_adjusted: f64,
    /// Degrees of freedom; the numerator degrees for an F test.
    pub df: f64,
    /// Denominator degrees of freedom for an F test.
    pub df_denominator: Option<f64>,
    pub family_size: usize,
    pub method: TestMethod,
}

mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            x if x.is_finite() => Repr::Number(x),
            x if x.is_nan() => Repr::Text("nan".into()),
            x if x > 0.0 => Repr::Text("inf".into()),
            _ => Repr::Text("-inf".into()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

/// `min(1, m · p)`.
pub fn bonferroni(p: f64, family_size: usize) -> f64 {
    (p * family_size.max(1) as f64).min(1.0)
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::TooFewPoints {
                needed: 2,
                got: s.len(),
            });
        }
    }
    Ok(())
}

/// Welch's unequal-variance two-sample t test, two-sided.
///
/// When both samples have zero variance the statistic is 0 with p = 1 for
/// equal means, and infinite with p = 0 otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64], family_size: usize) -> Result<TestResult, StatsError> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    let (statistic, df, p) = if se2 == 0.0 {
        let df = na + nb - 2.0;
        if ma == mb {
            (0.0, df, 1.0)
        } else {
            (f64::INFINITY.copysign(ma - mb), df, 0.0)
        }
    } else {
        let t = (ma - mb) / se2.sqrt();
        let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        (t, df, student_t_two_sided(t, df))
    };
    Ok(TestResult {
        statistic,
        p_value: p,
        p_adjusted: bonferroni(p, family_size),
        df,
        df_denominator: None,
        family_size: family_size.max(1),
        method: TestMethod::WelchT,
    })
}

/// Student's equal-variance two-sample t test, two-sided.
pub fn pooled_t_test(a: &[f64], b: &[f64], family_size: usize) -> Result<TestResult, StatsError> {
    check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / df;
    let diff = mean(a) - mean(b);
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let (statistic, p) = if se == 0.0 {
        if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(diff), 0.0)
        }
    } else {
        let t = diff / se;
        (t, student_t_two_sided(t, df))
    };
    Ok(TestResult {
        statistic,
        p_value: p,
        p_adjusted: bonferroni(p, family_size),
        df,
        df_denominator: None,
        family_size: family_size.max(1),
        method: TestMethod::PooledT,
    })
}

/// One-way ANOVA across `groups`.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: g.len(),
        });
    }
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let (d1, d2) = (k - 1.0, n - k);
    let (statistic, p) = if ss_within == 0.0 {
        if ss_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ss_between / d1) / (ss_within / d2);
        (f, f_survival(f, d1, d2))
    };
    Ok(TestResult {
        statistic,
        p_value: p,
        p_adjusted: p,
        df: d1,
        df_denominator: Some(d2),
        family_size: 1,
        method: TestMethod::AnovaF,
    })
}
