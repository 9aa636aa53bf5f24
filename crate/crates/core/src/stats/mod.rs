//! Numerical core: rank correlations with significance, min-max scaling,
//! least squares, Nelder-Mead simplex minimization, and log-normal
//! goodness-of-fit.

mod gof;
mod regression;
mod simplex;

pub use gof::{chi_square_sf, lognormal_gof, GofBin, GofResult};
pub use regression::{linear_regression, RegressionFit};
pub use simplex::{nelder_mead, SimplexConfig, SimplexResult};

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("zero variance")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("insufficient data: need at least {need} observations, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("design matrix is rank-deficient: columns {0:?} are linearly dependent")]
    RankDeficient(Vec<usize>),
    #[error("log-normal requires positive support")]
    NonPositiveSupport,
    #[error("too few bins")]
    TooFewBins,
}

/// Which correlation coefficient a [`CorrelationResult`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    KendallB,
    Spearman,
    Pearson,
}

impl CorrelationMethod {
    pub fn id(&self) -> &'static str {
        match self {
            CorrelationMethod::KendallB => "kendall_b",
            CorrelationMethod::Spearman => "spearman",
            CorrelationMethod::Pearson => "pearson",
        }
    }
}

impl std::str::FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kendall" | "kendall_b" => Ok(CorrelationMethod::KendallB),
            "spearman" => Ok(CorrelationMethod::Spearman),
            "pearson" => Ok(CorrelationMethod::Pearson),
            other => Err(format!("unknown correlation method: {other}")),
        }
    }
}

/// A correlation coefficient together with its sample size and two-sided
/// p-value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub n: usize,
    pub p_value: f64,
    pub method: CorrelationMethod,
}

fn check_paired(x: &[f64], y: &[f64]) -> Result<usize, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::InsufficientData {
            need: 2,
            got: x.len(),
        });
    }
    Ok(x.len())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Kendall tau-b rank correlation with tie correction.
///
/// tau = (C - D) / sqrt((n0 - n1)(n0 - n2)) where n0 = n(n-1)/2 and n1, n2
/// are the tied-pair counts in x and y. C - D is computed with the
/// sort-and-merge counting method rather than pair enumeration, so it stays
/// O(n log n). The p-value uses the normal approximation of the tau-b
/// variance (two-sided).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = check_paired(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
    });

    // Tie statistics over x and over joint (x, y) groups.
    let x_groups = run_lengths(pairs.iter().map(|p| p.0));
    let xy_groups = run_lengths_pairs(&pairs);
    let tied_x: f64 = x_groups.iter().map(|&t| pair_count(t)).sum();
    let tied_xy: f64 = xy_groups.iter().map(|&t| pair_count(t)).sum();

    // Merge sort on y counting the exchanges (each exchange is a discordant
    // step relative to the x order).
    let swaps = merge_count_swaps(&mut pairs);

    let y_groups = run_lengths(pairs.iter().map(|p| p.1));
    let tied_y: f64 = y_groups.iter().map(|&t| pair_count(t)).sum();

    let n_f = n as f64;
    let n0 = n_f * (n_f - 1.0) / 2.0;
    let s = n0 - tied_x - tied_y + tied_xy - 2.0 * swaps as f64;
    let denom = ((n0 - tied_x) * (n0 - tied_y)).sqrt();
    if denom == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let tau = (s / denom).clamp(-1.0, 1.0);

    // Tie-corrected variance of S (Kendall's classic form).
    let vt: f64 = x_groups
        .iter()
        .map(|&t| t as f64 * (t as f64 - 1.0) * (2.0 * t as f64 + 5.0))
        .sum();
    let vu: f64 = y_groups
        .iter()
        .map(|&u| u as f64 * (u as f64 - 1.0) * (2.0 * u as f64 + 5.0))
        .sum();
    let t1: f64 = x_groups.iter().map(|&t| t as f64 * (t as f64 - 1.0)).sum();
    let u1: f64 = y_groups.iter().map(|&u| u as f64 * (u as f64 - 1.0)).sum();
    let t2: f64 = x_groups
        .iter()
        .map(|&t| t as f64 * (t as f64 - 1.0) * (t as f64 - 2.0))
        .sum();
    let u2: f64 = y_groups
        .iter()
        .map(|&u| u as f64 * (u as f64 - 1.0) * (u as f64 - 2.0))
        .sum();

    let mut var_s = (n_f * (n_f - 1.0) * (2.0 * n_f + 5.0) - vt - vu) / 18.0
        + t1 * u1 / (2.0 * n_f * (n_f - 1.0));
    if n > 2 {
        var_s += t2 * u2 / (9.0 * n_f * (n_f - 1.0) * (n_f - 2.0));
    }
    let p_value = if var_s > 0.0 {
        let z = s / var_s.sqrt();
        two_sided_normal_p(z)
    } else {
        1.0
    };

    Ok(CorrelationResult {
        coefficient: tau,
        n,
        p_value,
        method: CorrelationMethod::KendallB,
    })
}

/// Spearman rho: Pearson correlation of fractional ranks (tie-aware).
/// The p-value uses the t-statistic approximation with n-2 degrees of
/// freedom.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = check_paired(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    let rx = fractional_ranks(x);
    let ry = fractional_ranks(y);
    let r = pearson_coefficient(&rx, &ry)?;
    Ok(CorrelationResult {
        coefficient: r,
        n,
        p_value: t_approx_p(r, n),
        method: CorrelationMethod::Spearman,
    })
}

/// Pearson product-moment correlation with a t-approximation p-value.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let n = check_paired(x, y)?;
    let r = pearson_coefficient(x, y)?;
    Ok(CorrelationResult {
        coefficient: r,
        n,
        p_value: t_approx_p(r, n),
        method: CorrelationMethod::Pearson,
    })
}

/// Min-max scaling onto [0,1]. A constant input maps to all zeros: a
/// component with no spread carries no ranking information.
pub fn minmax_scale(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - min) / (max - min)).collect()
}

/// Fractional (average) ranks, ascending: the smallest value gets rank 1 and
/// tied values share the mean of the positions they occupy.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j are 1-based ranks i+1..=j+1
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson_coefficient(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn two_sided_normal_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0)
}

fn t_approx_p(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("t distribution");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

fn pair_count(t: usize) -> f64 {
    (t * (t - 1) / 2) as f64
}

fn run_lengths(values: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

fn run_lengths_pairs(sorted_pairs: &[(f64, f64)]) -> Vec<usize> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted_pairs.len() {
        let mut j = i;
        while j + 1 < sorted_pairs.len() && sorted_pairs[j + 1] == sorted_pairs[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

/// Bottom-up merge sort on the y component counting the number of inverted
/// element moves, which equals the number of discordant steps.
fn merge_count_swaps(pairs: &mut Vec<(f64, f64)>) -> u64 {
    let n = pairs.len();
    let mut swaps = 0u64;
    let mut buf: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = usize::min(lo + width, n);
            let hi = usize::min(lo + 2 * width, n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid || j < hi {
                if i < mid && (j >= hi || pairs[i].1 <= pairs[j].1) {
                    buf[k] = pairs[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    buf[k] = pairs[j];
                    j += 1;
                }
                k += 1;
            }
            lo = hi;
        }
        std::mem::swap(pairs, &mut buf);
        width *= 2;
    }
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tau_identity_and_reverse() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y_rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau(&x, &x).unwrap().coefficient, 1.0);
        assert_eq!(kendall_tau(&x, &y_rev).unwrap().coefficient, -1.0);
    }

    #[test]
    fn tau_known_third() {
        // C=4, D=2 over the 6 pairs, no ties: tau = 2/6 = 1/3.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        let r = kendall_tau(&x, &y).unwrap();
        assert_abs_diff_eq!(r.coefficient, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.n, 4);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn tau_zero_variance() {
        let x = [1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(kendall_tau(&x, &y), Err(StatsError::ZeroVariance));
        assert_eq!(kendall_tau(&y, &x), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn rho_identity_and_known() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(spearman_rho(&x, &x).unwrap().coefficient, 1.0);
        // d^2 = (0, 1, 1): rho = 1 - 6*2/(3*8) = 0.5
        let y = [1.0, 3.0, 2.0];
        assert_abs_diff_eq!(
            spearman_rho(&x, &y).unwrap().coefficient,
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rho_with_ties_matches_rank_pearson() {
        // ranks (1.5, 1.5, 3) vs (1, 2, 3): Pearson = sqrt(3)/2
        let x = [1.0, 1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        let r = spearman_rho(&x, &y).unwrap();
        assert_abs_diff_eq!(r.coefficient, 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn pearson_affine_and_known() {
        let x = [1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_eq!(pearson_r(&x, &y).unwrap().coefficient, 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson_r(&x, &neg).unwrap().coefficient, -1.0);
        // direct formula: r = 3 / sqrt(2 * 14/3)
        let y2 = [1.0, 2.0, 4.0];
        let expect = 3.0 / (2.0f64 * 14.0 / 3.0).sqrt();
        assert_abs_diff_eq!(
            pearson_r(&x, &y2).unwrap().coefficient,
            expect,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(expect, 0.98198, epsilon = 1e-5);
    }

    #[test]
    fn minmax_rules() {
        assert_eq!(minmax_scale(&[0.0, 5.0, 10.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_scale(&[7.0, 7.0, 7.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(minmax_scale(&[-2.0, 0.0, 2.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn fractional_rank_ties() {
        assert_eq!(fractional_ranks(&[10.0, 20.0, 20.0, 30.0]), vec![
            1.0, 2.5, 2.5, 4.0
        ]);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert_eq!(
            kendall_tau(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
    }
}
