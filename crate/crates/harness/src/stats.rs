//! Summary statistics, QQ tables and the Kolmogorov-Smirnov test.

use lscov::bandselect::{normal_cdf, normal_quantile};
use lscov_sim::InnovationLaw;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// Sample mean and its standard error `sd / sqrt(len)`.
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Quantile function of a standardized innovation law.
pub fn law_quantile(law: InnovationLaw, p: f64) -> f64 {
    match law {
        InnovationLaw::StdNormal => normal_quantile(p).unwrap_or(f64::NAN),
        InnovationLaw::StdT6 => StudentsT::new(0.0, 1.0, 6.0).expect("valid").inverse_cdf(p) / 1.5f64.sqrt(),
        InnovationLaw::StdChiSq5 => (ChiSquared::new(5.0).expect("valid").inverse_cdf(p) - 5.0) / 10f64.sqrt(),
        InnovationLaw::StdChiSq6 => (ChiSquared::new(6.0).expect("valid").inverse_cdf(p) - 6.0) / 12f64.sqrt(),
    }
}

/// Sorted sample paired with law quantiles at `(i - 0.5) / N`.
pub fn qq_pairs(sample: &[f64], law: InnovationLaw) -> Vec<(f64, f64)> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.into_iter()
        .enumerate()
        .map(|(i, v)| (law_quantile(law, (i as f64 + 0.5) / n), v))
        .collect()
}

/// Squared Pearson correlation of the pairs.
pub fn squared_correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy * sxy / (sxx * syy)
}

/// Result of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    // the series converges slowly near 0, where the survival is 1 anyway
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Tests the sample against the continuous cdf `cdf`, with the small-sample
/// correction `(sqrt(N) + 0.12 + 0.11 / sqrt(N)) D`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in s.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let root = n.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_survival((root + 0.12 + 0.11 / root) * d) }
}

pub fn ks_normal(sample: &[f64]) -> KsResult {
    ks_test(sample, normal_cdf)
}
