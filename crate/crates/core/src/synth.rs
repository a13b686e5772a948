//! Synthetic-matrix machinery: iid samplers over the unit-interval families,
//! the noisy sorting process that plants controlled spatial concentration,
//! the sortedness criterion that measures it, the erf-based inversion from a
//! target sortedness to a noise level, and the ensemble studies built on
//! top of these pieces.

use crate::error::{Error, Result};
use crate::model::WeightMatrix;
use crate::persistence::{max_spanning_tree, neural_persistence, np_bounds};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{erf, erfinv, kendall_tau, DistributionSpec};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Parameters of the noisy sorting process: entries are rearranged by the
/// sort order of the matrix plus Gaussian noise of scale `noise_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisySortConfig {
    /// Standard deviation of the added Gaussian perturbation.
    pub noise_level: f64,
    pub seed: u64,
}

/// Entry orders the sortedness criterion considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryOrder {
    RowMajor,
    ColMajor,
    Diagonal,
}

impl EntryOrder {
    pub fn name(self) -> &'static str {
        match self {
            EntryOrder::RowMajor => "row_major",
            EntryOrder::ColMajor => "col_major",
            EntryOrder::Diagonal => "diagonal",
        }
    }
}

/// Sortedness of a matrix: the best rank correlation between entry values
/// and position over the three candidate orders, after mean-sorting rows
/// and columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortednessReport {
    /// Maximum of the three per-order values, in `[-1, 1]`.
    pub value: f64,
    pub winning_order: EntryOrder,
    /// Per-order values: row-major, column-major, diagonal.
    pub per_order: [f64; 3],
}

/// Samples a `rows x cols` matrix with iid entries from `dist`.
pub fn sample_matrix(
    rows: usize,
    cols: usize,
    dist: &DistributionSpec,
    seed: u64,
) -> WeightMatrix {
    let mut rng = rng_from_seed(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
    WeightMatrix::new(rows, cols, data).unwrap()
}

/// Rearranges the entries of `matrix` so that their row-major position rank
/// matches the value rank of `matrix + noise_level * eps` with iid standard
/// normal `eps`. The multiset of entries is preserved exactly; value-rank
/// ties break by original row-major position.
pub fn noisy_sort(matrix: &WeightMatrix, config: &NoisySortConfig) -> WeightMatrix {
    let mut rng = rng_from_seed(config.seed);
    let flat = matrix.data();
    let noisy: Vec<f64> = flat
        .iter()
        .map(|&w| w + config.noise_level * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut order: Vec<usize> = (0..flat.len()).collect();
    order.sort_by(|&a, &b| noisy[a].partial_cmp(&noisy[b]).unwrap().then(a.cmp(&b)));
    let data: Vec<f64> = order.into_iter().map(|pos| flat[pos]).collect();
    WeightMatrix::new(matrix.rows(), matrix.cols(), data).unwrap()
}

/// Rank correlation of the entry sequence against ascending position order.
fn order_tau(values: &[f64]) -> Result<f64> {
    let positions: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    kendall_tau(&positions, values)
}

/// Measures the spatial concentration of large entries: rows and columns are
/// first sorted ascending by mean, then the Kendall tau of the entries
/// against row-major, column-major, and diagonal position order is taken;
/// the maximum of the three is the sortedness value.
pub fn sortedness(matrix: &WeightMatrix) -> Result<SortednessReport> {
    if matrix.data().len() < 2 {
        return Err(Error::AllTied);
    }
    let presorted = mean_sorted(matrix);
    let (n, m) = (presorted.rows(), presorted.cols());

    let row_major = order_tau(presorted.data())?;
    let col_major = order_tau(presorted.transpose().data())?;

    let mut diag_positions: Vec<(usize, usize)> =
        (0..n * m).map(|k| (k / m, k % m)).collect();
    diag_positions.sort_by_key(|&(i, j)| (i + j, i));
    let diag_values: Vec<f64> = diag_positions
        .into_iter()
        .map(|(i, j)| presorted.get(i, j))
        .collect();
    let diagonal = order_tau(&diag_values)?;

    let per_order = [row_major, col_major, diagonal];
    let orders = [EntryOrder::RowMajor, EntryOrder::ColMajor, EntryOrder::Diagonal];
    let best = (0..3)
        .max_by(|&a, &b| per_order[a].partial_cmp(&per_order[b]).unwrap())
        .unwrap();
    Ok(SortednessReport {
        value: per_order[best],
        winning_order: orders[best],
        per_order,
    })
}

/// Sorts rows, then columns, ascending by mean value.
fn mean_sorted(matrix: &WeightMatrix) -> WeightMatrix {
    let (n, m) = (matrix.rows(), matrix.cols());
    let mut row_order: Vec<usize> = (0..n).collect();
    let row_means: Vec<f64> = (0..n)
        .map(|r| (0..m).map(|c| matrix.get(r, c)).sum::<f64>() / m as f64)
        .collect();
    row_order.sort_by(|&a, &b| row_means[a].partial_cmp(&row_means[b]).unwrap());

    let mut col_order: Vec<usize> = (0..m).collect();
    let col_means: Vec<f64> = (0..m)
        .map(|c| (0..n).map(|r| matrix.get(r, c)).sum::<f64>() / n as f64)
        .collect();
    col_order.sort_by(|&a, &b| col_means[a].partial_cmp(&col_means[b]).unwrap());

    let mut data = Vec::with_capacity(n * m);
    for &r in &row_order {
        for &c in &col_order {
            data.push(matrix.get(r, c));
        }
    }
    WeightMatrix::new(n, m, data).unwrap()
}

const DELTA_PAIRS: usize = 10_000;

/// Inverts the expected-sortedness relationship
/// `E[sortedness] = erf(mu_delta / (sqrt(2) sqrt(2 s^2 + sigma_delta^2)))`
/// for the noise level `s` that targets `target`. The pairwise gap moments
/// `mu_delta, sigma_delta` are estimated from 10,000 random entry pairs.
pub fn noise_for_target_sortedness(
    matrix: &WeightMatrix,
    target: f64,
    seed: u64,
) -> Result<f64> {
    assert!(target > 0.0 && target < 1.0, "target must be in (0, 1)");
    let flat = matrix.data();
    assert!(flat.len() >= 2, "matrix must have at least two entries");

    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..DELTA_PAIRS {
        let a = rng.gen_range(0..flat.len());
        let mut b = rng.gen_range(0..flat.len());
        while b == a {
            b = rng.gen_range(0..flat.len());
        }
        let gap = (flat[a] - flat[b]).abs();
        sum += gap;
        sum_sq += gap * gap;
    }
    let mu = sum / DELTA_PAIRS as f64;
    let var = (sum_sq / DELTA_PAIRS as f64 - mu * mu).max(0.0);

    let cap = erf(mu / (2.0 * var).sqrt());
    if cap < target {
        return Err(Error::InfeasibleTarget { target, cap });
    }
    let z = erfinv(target);
    let s_squared = (mu * mu / (2.0 * z * z) - var) / 2.0;
    Ok(s_squared.max(0.0).sqrt())
}

/// One row of the size-dependence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeDependenceRow {
    pub rows: usize,
    pub cols: usize,
    pub mean_normalised_np: f64,
}

/// Mean normalised neural persistence over `trials` iid matrices for each
/// requested size.
pub fn size_dependence_study(
    dist: &DistributionSpec,
    sizes: &[(usize, usize)],
    trials: usize,
    seed: u64,
) -> Result<Vec<SizeDependenceRow>> {
    if trials == 0 {
        return Err(Error::EmptyStudy);
    }
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(size_idx, &(rows, cols))| {
            let total: f64 = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let s = derive_seed(seed, (size_idx * trials + trial) as u64);
                    let w = sample_matrix(rows, cols, dist, s);
                    neural_persistence(&max_spanning_tree(&w).unwrap(), true)
                })
                .sum();
            SizeDependenceRow {
                rows,
                cols,
                mean_normalised_np: total / trials as f64,
            }
        })
        .collect())
}

/// One matrix of the truncated-Pareto / noisy-sorting ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleRow {
    pub trial: usize,
    pub rows: usize,
    pub cols: usize,
    /// Truncated-Pareto shape parameter, `60 * Beta(1, 2)`.
    pub b: f64,
    /// Noise level of the sorting process, `log10 s ~ U[-10, 0]`.
    pub s: f64,
    pub sortedness: f64,
    pub log_variance: f64,
    /// Normalised neural persistence at `p = 2`.
    pub np: f64,
    /// Bounds divided by the same `(n + m - 1)^(1/p)` normaliser as `np`.
    pub lower: f64,
    pub upper: f64,
}

/// Samples `trials` matrices with entries iid truncated-Pareto
/// (`b = 60 Beta(1, 2)`), plants spatial concentration by noisy sorting with
/// `log10 s ~ U[-10, 0]`, and records sortedness, variance, persistence,
/// and the bounds for each.
pub fn pareto_sortedness_ensemble(
    trials: usize,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<Vec<EnsembleRow>> {
    if trials == 0 {
        return Err(Error::EmptyStudy);
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_from_seed(derive_seed(seed, trial as u64));
            // Beta(1, 2) via its inverse CDF.
            let u: f64 = rng.gen();
            let b = (60.0 * (1.0 - (1.0 - u).sqrt())).max(1e-6);
            let s = 10f64.powf(rng.gen_range(-10.0f64..0.0));

            let base = sample_matrix(
                rows,
                cols,
                &DistributionSpec::TruncPareto { b },
                rng.gen::<u64>(),
            );
            let sorted = noisy_sort(
                &base,
                &NoisySortConfig {
                    noise_level: s,
                    seed: rng.gen::<u64>(),
                },
            );

            let report = sortedness(&sorted).expect("continuous entries cannot all tie");
            let diagram = max_spanning_tree(&sorted).unwrap();
            let np = neural_persistence(&diagram, true);
            let bounds = np_bounds(&sorted, 2.0).unwrap();
            let normaliser = ((rows + cols - 1) as f64).sqrt();

            EnsembleRow {
                trial,
                rows,
                cols,
                b,
                s,
                sortedness: report.value,
                log_variance: sorted.variance().ln(),
                np,
                lower: bounds.lower / normaliser,
                upper: bounds.upper / normaliser,
            }
        })
        .collect())
}
