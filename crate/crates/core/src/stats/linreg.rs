//! Ordinary least squares for the small regressions run by the synthetic
//! studies (at most a handful of predictors).

/// Fits `y ~ intercept + X beta` by normal equations and returns the
/// coefficients (intercept first) and the coefficient of determination.
///
/// `predictors` holds one column per predictor; all columns must have the
/// same length as `targets`.
pub fn linear_regression(predictors: &[Vec<f64>], targets: &[f64]) -> (Vec<f64>, f64) {
    let n = targets.len();
    assert!(n > 0, "no observations");
    assert!(predictors.iter().all(|c| c.len() == n), "ragged predictors");
    let k = predictors.len() + 1;

    // Normal equations X^T X beta = X^T y with an implicit intercept column.
    let design = |row: usize, col: usize| -> f64 {
        if col == 0 {
            1.0
        } else {
            predictors[col - 1][row]
        }
    };
    let mut xtx = vec![vec![0.0f64; k]; k];
    let mut xty = vec![0.0f64; k];
    for row in 0..n {
        for a in 0..k {
            let da = design(row, a);
            xty[a] += da * targets[row];
            for b in 0..k {
                xtx[a][b] += da * design(row, b);
            }
        }
    }

    let beta = solve(&mut xtx, &mut xty);

    let mean_y = targets.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for row in 0..n {
        let predicted: f64 = (0..k).map(|c| beta[c] * design(row, c)).sum();
        ss_res += (targets[row] - predicted).powi(2);
        ss_tot += (targets[row] - mean_y).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (beta, r2)
}

/// Gaussian elimination with partial pivoting; the systems here are tiny.
fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        assert!(diag.abs() > 1e-12, "singular design matrix");
        for row in (col + 1)..k {
            let factor = a[row][col] / diag;
            for c in col..k {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in (col + 1)..k {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    x
}
