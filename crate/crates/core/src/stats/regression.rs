//! Small dense least squares via Householder QR with column pivoting.
//!
//! The design matrices in this crate are a handful of columns wide, so a
//! direct factorization is both fast and numerically stable; pivoting lets
//! rank deficiency be reported with the offending column indices.

use super::StatsError;

/// Result of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// One coefficient per design column, in input order.
    pub coefficients: Vec<f64>,
    /// Fitted intercept; 0 when the fit was requested without one.
    pub intercept: f64,
    /// `||X beta - y||_2` over the rows used in the fit.
    pub residual_norm: f64,
}

/// Least-squares solution minimizing `||X beta - y||_2`.
///
/// `rows` holds the design matrix one observation per entry; every row must
/// have the same number of columns. With `with_intercept` a constant column
/// is appended internally and reported separately in the fit.
pub fn linear_regression(
    rows: &[Vec<f64>],
    targets: &[f64],
    with_intercept: bool,
) -> Result<RegressionFit, StatsError> {
    if rows.len() != targets.len() {
        return Err(StatsError::LengthMismatch(rows.len(), targets.len()));
    }
    let m = rows.len();
    let base_cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if base_cols == 0 {
        return Err(StatsError::InsufficientData { need: 1, got: 0 });
    }
    if rows.iter().any(|r| r.len() != base_cols) {
        return Err(StatsError::LengthMismatch(base_cols, 0));
    }
    let n = base_cols + usize::from(with_intercept);
    if m < n {
        return Err(StatsError::InsufficientData { need: n, got: m });
    }

    // Column-major copy, intercept column last.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            if j < base_cols {
                rows.iter().map(|r| r[j]).collect()
            } else {
                vec![1.0; m]
            }
        })
        .collect();
    let mut y = targets.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    let scale = a
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let tol = scale * 1e-12 * (m.max(n) as f64);

    for k in 0..n {
        // Pivot: bring the column with the largest remaining norm to front.
        let (pivot, best_norm) = (k..n)
            .map(|j| (j, a[j][k..].iter().map(|v| v * v).sum::<f64>().sqrt()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if best_norm <= tol {
            let mut dependent: Vec<usize> = perm[k..].to_vec();
            dependent.sort_unstable();
            return Err(StatsError::RankDeficient(dependent));
        }
        a.swap(k, pivot);
        perm.swap(k, pivot);

        // Householder reflector annihilating a[k][k+1..].
        let alpha = -a[k][k].signum()
            * a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi * ci).sum();
                let f = 2.0 * dot / vnorm2;
                for (vi, ci) in v.iter().zip(col[k..].iter_mut()) {
                    *ci -= f * vi;
                }
            }
            let dot: f64 = v.iter().zip(&y[k..]).map(|(vi, yi)| vi * yi).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, yi) in v.iter().zip(y[k..].iter_mut()) {
                *yi -= f * vi;
            }
        }
        a[k][k] = alpha;
    }

    // Back substitution on R (stored in the upper triangle of the permuted
    // columns).
    let mut beta_perm = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for j in k + 1..n {
            s -= a[j][k] * beta_perm[j];
        }
        beta_perm[k] = s / a[k][k];
    }
    let mut beta = vec![0.0; n];
    for (k, &orig) in perm.iter().enumerate() {
        beta[orig] = beta_perm[k];
    }

    // Residual from the original system.
    let mut residual2 = 0.0;
    for (row, &t) in rows.iter().zip(targets) {
        let mut fitted: f64 = row.iter().zip(&beta[..base_cols]).map(|(x, b)| x * b).sum();
        if with_intercept {
            fitted += beta[base_cols];
        }
        residual2 += (t - fitted) * (t - fitted);
    }

    let intercept = if with_intercept { beta[base_cols] } else { 0.0 };
    beta.truncate(base_cols);
    Ok(RegressionFit {
        coefficients: beta,
        intercept,
        residual_norm: residual2.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_affine_fit() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let fit = linear_regression(&rows, &y, true).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.intercept, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.residual_norm, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
        let y = vec![0.0; 5];
        match linear_regression(&rows, &y, false) {
            Err(StatsError::RankDeficient(cols)) => assert_eq!(cols.len(), 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn constant_targets_with_intercept() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![(i % 4) as f64, (i / 2) as f64])
            .collect();
        let y = vec![3.25; 8];
        let fit = linear_regression(&rows, &y, true).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.intercept, 3.25, epsilon = 1e-10);
    }

    #[test]
    fn fewer_rows_than_columns_rejected() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        let y = vec![1.0, 2.0];
        assert!(matches!(
            linear_regression(&rows, &y, false),
            Err(StatsError::InsufficientData { .. })
        ));
    }
}
