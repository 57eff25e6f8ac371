use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::metrics::FrequencyCurve;

/// Simple least-squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation; 0 when either variable has zero variance.
    pub r: f64,
    /// Coefficient of determination; 0 when `y` has zero variance.
    pub r_squared: f64,
    pub n: usize,
    /// Set when `y` has zero variance and `r`/`R²` are conventional zeros.
    pub degenerate: bool,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance("x"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // Residual variance below rounding noise counts as a flat line.
    let degenerate = syy <= f64::EPSILON * my * my * nf;
    let (r, r_squared) = if degenerate {
        (0.0, 0.0)
    } else {
        let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
        (r, r * r)
    };
    Ok(RegressionFit {
        slope: if degenerate { 0.0 } else { slope },
        intercept: if degenerate { my } else { intercept },
        r,
        r_squared,
        n,
        degenerate,
    })
}

/// Regresses `log10 f(i)` on `log10 i` over ranks `1..=top_n`.
pub fn ols_loglog(curve: &FrequencyCurve, top_n: usize) -> Result<RegressionFit, StatsError> {
    if top_n < 2 {
        return Err(StatsError::TooFewPoints { needed: 2, got: top_n });
    }
    if curve.freqs.len() < top_n {
        return Err(StatsError::TooFewPoints {
            needed: top_n,
            got: curve.freqs.len(),
        });
    }
    let freqs = &curve.freqs[..top_n];
    if let Some(rank) = freqs.iter().position(|&f| f <= 0.0) {
        return Err(StatsError::NonPositiveFrequency { rank: rank + 1 });
    }
    let x: Vec<f64> = (1..=top_n).map(|i| (i as f64).log10()).collect();
    let y: Vec<f64> = freqs.iter().map(|f| f.log10()).collect();
    ols(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(freqs: Vec<f64>) -> FrequencyCurve {
        FrequencyCurve {
            lang: "xx".into(),
            freqs,
            total_tokens: 0,
        }
    }

    fn power_law(c: f64, s: f64, n: usize) -> FrequencyCurve {
        curve((1..=n).map(|i| c * (i as f64).powf(-s)).collect())
    }

    #[test]
    fn exact_zipf() {
        let fit = ols_loglog(&power_law(0.2, 1.0, 100), 100).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!((fit.r + 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_curve_is_degenerate() {
        let fit = ols_loglog(&curve(vec![0.01; 50]), 50).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn zero_frequency_rejected() {
        let err = ols_loglog(&curve(vec![0.5, 0.3, 0.0]), 3).unwrap_err();
        assert!(matches!(err, StatsError::NonPositiveFrequency { rank: 3 }));
    }

    #[test]
    fn too_few_points() {
        assert!(ols_loglog(&curve(vec![0.5]), 1).is_err());
        assert!(ols_loglog(&curve(vec![0.5, 0.2]), 3).is_err());
    }

    #[test]
    fn hand_computed_line() {
        // y = 1 + 2x through (0,1), (1,3), (2,5) plus noise-free.
        let fit = ols(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15);
        assert!((fit.intercept - 1.0).abs() < 1e-15);
        // Known correlation for (1,2,3) vs (2,1,3): 0.5.
        let fit = ols(&[1.0, 2.0, 3.0], &[2.0, 1.0, 3.0]).unwrap();
        assert!((fit.r - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn power_law_exponent_recovered(c in 0.001f64..1.0, s in 0.1f64..2.5, n in 2usize..200) {
            let fit = ols_loglog(&power_law(c, s, n), n).unwrap();
            prop_assert!((fit.slope + s).abs() < 1e-9);
        }

        #[test]
        fn r_squared_is_r_squared(points in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..40)) {
            let (x, y): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
            if let Ok(fit) = ols(&x, &y) {
                prop_assert!((fit.r_squared - fit.r * fit.r).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&fit.r));
            }
        }
    }
}
