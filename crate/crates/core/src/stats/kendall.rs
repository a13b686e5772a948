//! Kendall rank correlation (tau-b) via merge-sort inversion counting.

use crate::error::{Error, Result};

/// Tie-corrected Kendall tau-b in `O(n log n)`.
///
/// Pairs are sorted by `(x, y)`; tie counts come from run lengths and the
/// discordant count from the number of swaps a merge sort needs to order the
/// `y` sequence.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::LengthMismatch { left: n, right: 2 });
    }

    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Ties in x and joint ties from run lengths in the sorted order.
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                ties_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            ties_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            ties_xy += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    ties_x += run_x * (run_x - 1) / 2;
    ties_xy += run_xy * (run_xy - 1) / 2;

    let mut y_seq: Vec<f64> = pairs.iter().map(|&(_, y)| y).collect();
    let mut buf = vec![0.0f64; n];
    let swaps = merge_count(&mut y_seq, &mut buf);

    // y ties from the now fully sorted y sequence.
    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in y_seq.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    ties_y += run_y * (run_y - 1) / 2;

    let total = (n as u64 * (n as u64 - 1) / 2) as f64;
    let (t_x, t_y, t_xy) = (ties_x as f64, ties_y as f64, ties_xy as f64);
    let denom = (total - t_x) * (total - t_y);
    if denom <= 0.0 {
        return Err(Error::AllTied);
    }
    let concordant_minus_discordant = total - t_x - t_y + t_xy - 2.0 * swaps as f64;
    Ok(concordant_minus_discordant / denom.sqrt())
}

/// Bottom-up merge sort that counts the swaps needed to sort `values`.
fn merge_count(values: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = values.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo + width < n {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if values[i] <= values[j] {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    // values[i..mid] are all greater than values[j].
                    swaps += (mid - i) as u64;
                    buf[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            while i < mid {
                buf[k] = values[i];
                i += 1;
                k += 1;
            }
            while j < hi {
                buf[k] = values[j];
                j += 1;
                k += 1;
            }
            values[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn perfectly_sorted_and_reversed() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0
        );
    }

    #[test]
    fn one_discordant_pair_out_of_three() {
        let tau = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_on_bad_inputs() {
        assert!(matches!(
            kendall_tau(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(kendall_tau(&[1.0], &[1.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            kendall_tau(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::AllTied)
        ));
    }

    /// Pairwise oracle for tau-b.
    pub(crate) fn brute_force_tau(xs: &[f64], ys: &[f64]) -> Option<f64> {
        // f64::signum maps +-0.0 to +-1.0, so spell the three-way sign out.
        let sign = |d: f64| {
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        };
        let n = xs.len();
        let (mut con, mut dis, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = sign(xs[i] - xs[j]);
                let dy = sign(ys[i] - ys[j]);
                if dx == 0.0 {
                    tx += 1;
                }
                if dy == 0.0 {
                    ty += 1;
                }
                if dx * dy > 0.0 {
                    con += 1;
                } else if dx * dy < 0.0 {
                    dis += 1;
                }
            }
        }
        let total = (n * (n - 1) / 2) as f64;
        let denom = (total - tx as f64) * (total - ty as f64);
        if denom <= 0.0 {
            return None;
        }
        Some((con - dis) as f64 / denom.sqrt())
    }

    #[test]
    fn matches_pair_enumeration_with_ties() {
        let mut rng = rng_from_seed(41);
        let grid = [0.1, 0.2, 0.3, 0.4];
        for _ in 0..500 {
            let n = rng.gen_range(2..=8);
            let xs: Vec<f64> = (0..n).map(|_| grid[rng.gen_range(0..4)]).collect();
            let ys: Vec<f64> = (0..n).map(|_| grid[rng.gen_range(0..4)]).collect();
            match brute_force_tau(&xs, &ys) {
                Some(expected) => {
                    let tau = kendall_tau(&xs, &ys).unwrap();
                    assert!((tau - expected).abs() < 1e-12, "xs={xs:?} ys={ys:?}");
                }
                None => assert!(kendall_tau(&xs, &ys).is_err()),
            }
        }
    }

    #[test]
    fn antisymmetric_under_reversal() {
        let mut rng = rng_from_seed(42);
        let xs: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
        let ys: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
        let tau = kendall_tau(&xs, &ys).unwrap();
        let neg: Vec<f64> = ys.iter().map(|&y| -y).collect();
        assert!((kendall_tau(&xs, &neg).unwrap() + tau).abs() < 1e-12);
    }
}
