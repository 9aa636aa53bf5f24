//! Chi-square goodness-of-fit against an MLE-fitted log-normal.

use super::StatsError;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma_lr;

/// One histogram bin after tail merging.
#[derive(Debug, Clone, PartialEq)]
pub struct GofBin {
    pub low: f64,
    pub high: f64,
    pub observed: f64,
    pub expected: f64,
}

/// Log-normal fit parameters plus the chi-square test outcome.
#[derive(Debug, Clone)]
pub struct GofResult {
    pub mu: f64,
    pub sigma: f64,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub bins: Vec<GofBin>,
}

/// Fits log-normal parameters by MLE on `ln(scores)` and tests the fit with
/// a chi-square statistic over equal-probability bins.
///
/// Bins are laid out so each carries probability `1/bin_count` under the
/// fitted distribution; bins are merged inward from the tails until every
/// expected count is at least 5. Degrees of freedom are
/// `bins - 1 - 2` (two fitted parameters); the p-value comes from the
/// regularized lower incomplete gamma function.
pub fn lognormal_gof(scores: &[f64], bin_count: usize) -> Result<GofResult, StatsError> {
    if scores.iter().any(|&s| s <= 0.0) {
        return Err(StatsError::NonPositiveSupport);
    }
    if scores.len() < 2 || bin_count < 2 {
        return Err(StatsError::TooFewBins);
    }

    let n = scores.len() as f64;
    let logs: Vec<f64> = scores.iter().map(|s| s.ln()).collect();
    if logs.iter().all(|&l| l == logs[0]) {
        return Err(StatsError::ZeroVariance);
    }
    let mu = logs.iter().sum::<f64>() / n;
    let sigma = (logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n).sqrt();
    if sigma == 0.0 {
        return Err(StatsError::ZeroVariance);
    }

    // Equal-probability edges: quantiles of the fitted log-normal.
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut edges = Vec::with_capacity(bin_count + 1);
    edges.push(0.0);
    for k in 1..bin_count {
        let q = normal.inverse_cdf(k as f64 / bin_count as f64);
        edges.push((mu + sigma * q).exp());
    }
    edges.push(f64::INFINITY);

    let mut bins: Vec<GofBin> = (0..bin_count)
        .map(|k| GofBin {
            low: edges[k],
            high: edges[k + 1],
            observed: 0.0,
            expected: n / bin_count as f64,
        })
        .collect();
    for &s in scores {
        // edges are sorted; first bin whose high edge covers the score
        let k = bins
            .iter()
            .position(|b| s <= b.high)
            .expect("score below +inf edge");
        bins[k].observed += 1.0;
    }

    // Merge inward from whichever tail is below the expected-count floor.
    while bins.len() > 1 {
        if bins.first().unwrap().expected < 5.0 {
            let b = bins.remove(0);
            bins[0].low = b.low;
            bins[0].observed += b.observed;
            bins[0].expected += b.expected;
        } else if bins.last().unwrap().expected < 5.0 {
            let b = bins.pop().unwrap();
            let last = bins.last_mut().unwrap();
            last.high = b.high;
            last.observed += b.observed;
            last.expected += b.expected;
        } else if let Some(i) = bins.iter().position(|b| b.expected < 5.0) {
            let b = bins.remove(i);
            let into = if i == 0 { 0 } else { i - 1 };
            bins[into].high = bins[into].high.max(b.high);
            bins[into].low = bins[into].low.min(b.low);
            bins[into].observed += b.observed;
            bins[into].expected += b.expected;
        } else {
            break;
        }
    }

    if bins.len() < 4 {
        // df = bins - 1 - 2 must stay >= 1
        return Err(StatsError::TooFewBins);
    }
    let df = bins.len() - 3;

    let statistic: f64 = bins
        .iter()
        .map(|b| (b.observed - b.expected) * (b.observed - b.expected) / b.expected)
        .sum();
    let p_value = chi_square_sf(statistic, df);

    Ok(GofResult {
        mu,
        sigma,
        statistic,
        df,
        p_value,
        bins,
    })
}

/// `1 - ChiSquareCDF(x, df)` via the regularized lower incomplete gamma
/// function; exposed for report tooling and direct checks.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (1.0 - gamma_lr(df as f64 / 2.0, x / 2.0)).clamp(0.0, 1.0)
}
