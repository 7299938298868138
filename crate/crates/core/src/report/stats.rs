use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction cut from each tail for the trimmed mean.
pub const TRIM_FRACTION: f64 = 0.05;

/// Descriptive statistics of a sample.
///
/// `std` is the sample standard deviation (n − 1 denominator). Skewness and
/// excess kurtosis are the bias-adjusted sample estimators (G1, G2), the
/// ones spreadsheet `SKEW`/`KURT` report. Each is `None` when the sample is
/// too small (n < 2, 3, 4 respectively) or has zero spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Mean after dropping ⌊0.05·n⌋ values from each end.
    pub trimmed_mean: f64,
    pub median: f64,
    pub std: Option<f64>,
    pub std_error: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = values.len();
    let nf = n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mean = if sorted[0] == sorted[n - 1] {
        sorted[0]
    } else {
        sorted.iter().sum::<f64>() / nf
    };
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let cut = (TRIM_FRACTION * nf).floor() as usize;
    let kept = &sorted[cut..n - cut];
    let trimmed_mean = kept.iter().sum::<f64>() / kept.len() as f64;

    let m2: f64 = sorted.iter().map(|x| (x - mean).powi(2)).sum();
    let std = (n >= 2).then(|| (m2 / (nf - 1.0)).sqrt());
    let std_error = std.map(|s| s / nf.sqrt());
    let spread = std.filter(|&s| s > 0.0);

    let skewness = spread.filter(|_| n >= 3).map(|s| {
        let sum3: f64 = sorted.iter().map(|x| ((x - mean) / s).powi(3)).sum();
        nf / ((nf - 1.0) * (nf - 2.0)) * sum3
    });
    let kurtosis = spread.filter(|_| n >= 4).map(|s| {
        let sum4: f64 = sorted.iter().map(|x| ((x - mean) / s).powi(4)).sum();
        nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * sum4
            - 3.0 * (nf - 1.0).powi(2) / ((nf - 2.0) * (nf - 3.0))
    });

    Ok(SummaryStats {
        n,
        min: sorted[0],
        max: sorted[n - 1],
        mean,
        trimmed_mean,
        median,
        std,
        std_error,
        skewness,
        kurtosis,
    })
}
