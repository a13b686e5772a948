//! Neural persistence of a single weight matrix: the maximum spanning tree
//! of its complete bipartite graph, the persistence value derived from the
//! tree's edge weights, and closed-form lower/upper bounds on that value.
//!
//! Row vertices and column vertices form the two sides of the bipartition;
//! entry `(j, i)` is the edge weight between row vertex `j` and column
//! vertex `i`. Entries must already be normalised to `[0, 1]`.

use crate::error::Result;
use crate::model::{check_unit_range, WeightMatrix};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;

/// Multiset of MST edge weights (sorted descending) plus the source shape
/// and the norm order `p` used when evaluating persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    mst_weights: Vec<f64>,
    n_rows: usize,
    m_cols: usize,
    p: f64,
}

impl PersistenceDiagram {
    /// MST edge weights, sorted descending; always `n + m - 1` values in `[0, 1]`.
    pub fn mst_weights(&self) -> &[f64] {
        &self.mst_weights
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn m_cols(&self) -> usize {
        self.m_cols
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Returns the diagram with a different norm order.
    pub fn with_p(mut self, p: f64) -> Self {
        assert!(p > 0.0, "norm order must be positive");
        self.p = p;
        self
    }

    /// Total MST edge weight; handy for oracle comparisons.
    pub fn total_weight(&self) -> f64 {
        self.mst_weights.iter().sum()
    }
}

/// Lower/upper bounds on neural persistence together with the per-column
/// and per-row maxima terms and the set of columns whose maximum coincides
/// with no row maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    /// `(1 - max over rows of column b)^p` for each column.
    pub phi: Vec<f64>,
    /// `(1 - max over columns of row a)^p` for each row.
    pub psi: Vec<f64>,
    /// Columns that are not the (tie-broken) argmax of any row, ascending.
    pub b_not_sim_a: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal's algorithm over the complete bipartite graph of `matrix`.
///
/// Edges are taken in descending weight order; ties break on smaller row
/// index, then smaller column index, which stands in for the uniqueness-by-
/// perturbation assumption deterministically. Entries may exceed `[0, 1]`
/// by at most `1e-12`; anything further is rejected.
pub fn max_spanning_tree(matrix: &WeightMatrix) -> Result<PersistenceDiagram> {
    check_unit_range(matrix)?;
    let (n, m) = (matrix.rows(), matrix.cols());
    let mut edges: Vec<(usize, usize)> = (0..n * m).map(|k| (k / m, k % m)).collect();
    edges.sort_by(|&(r1, c1), &(r2, c2)| {
        matrix
            .get(r2, c2)
            .partial_cmp(&matrix.get(r1, c1))
            .unwrap()
            .then(r1.cmp(&r2))
            .then(c1.cmp(&c2))
    });

    let mut uf = UnionFind::new(n + m);
    let mut weights = Vec::with_capacity(n + m - 1);
    for (r, c) in edges {
        if uf.union(r, n + c) {
            weights.push(matrix.get(r, c).clamp(0.0, 1.0));
            if weights.len() == n + m - 1 {
                break;
            }
        }
    }
    debug_assert_eq!(weights.len(), n + m - 1);
    Ok(PersistenceDiagram {
        mst_weights: weights,
        n_rows: n,
        m_cols: m,
        p: 2.0,
    })
}

/// `(1 + sum over MST weights of (1 - w)^p)^(1/p)`, optionally divided by
/// the size normaliser `(n + m - 1)^(1/p)`.
pub fn neural_persistence(diagram: &PersistenceDiagram, normalised: bool) -> f64 {
    let p = diagram.p;
    let sum: f64 = diagram
        .mst_weights
        .iter()
        .map(|&w| (1.0 - w).powf(p))
        .sum();
    let raw = (1.0 + sum).powf(1.0 / p);
    if normalised {
        raw / ((diagram.n_rows + diagram.m_cols - 1) as f64).powf(1.0 / p)
    } else {
        raw
    }
}

/// Computes the lower and upper bounds on neural persistence from the
/// per-row and per-column maxima of `matrix`.
///
/// Row argmaxes break ties towards the smallest column index, mirroring the
/// MST tie-break, so the bounds and the tree agree on which edges coincide.
pub fn np_bounds(matrix: &WeightMatrix, p: f64) -> Result<BoundsReport> {
    check_unit_range(matrix)?;
    assert!(p > 0.0, "norm order must be positive");
    let (n, m) = (matrix.rows(), matrix.cols());

    let mut row_max = vec![f64::NEG_INFINITY; n];
    let mut row_argmax = vec![0usize; n];
    let mut col_max = vec![f64::NEG_INFINITY; m];
    for a in 0..n {
        for b in 0..m {
            let w = matrix.get(a, b);
            if w > row_max[a] {
                row_max[a] = w;
                row_argmax[a] = b;
            }
            if w > col_max[b] {
                col_max[b] = w;
            }
        }
    }

    let mut is_row_argmax = vec![false; m];
    for &b in &row_argmax {
        is_row_argmax[b] = true;
    }
    let b_not_sim_a: Vec<usize> = (0..m).filter(|&b| !is_row_argmax[b]).collect();

    let phi: Vec<f64> = col_max
        .iter()
        .map(|&w| (1.0 - w.clamp(0.0, 1.0)).powf(p))
        .collect();
    let psi: Vec<f64> = row_max
        .iter()
        .map(|&w| (1.0 - w.clamp(0.0, 1.0)).powf(p))
        .collect();

    let psi_sum: f64 = psi.iter().sum();
    let lower = (phi.iter().sum::<f64>() + psi_sum).powf(1.0 / p);
    let covered = (m - b_not_sim_a.len()) as f64;
    let upper = (covered + b_not_sim_a.iter().map(|&b| phi[b]).sum::<f64>() + psi_sum)
        .powf(1.0 / p);

    Ok(BoundsReport {
        lower,
        upper,
        phi,
        psi,
        b_not_sim_a,
    })
}

/// Uniformly random reassignment of entries to positions: the multiset of
/// weights is preserved exactly while any spatial structure is destroyed.
pub fn shuffle_entries(matrix: &WeightMatrix, seed: u64) -> WeightMatrix {
    let mut data = matrix.data().to_vec();
    data.shuffle(&mut rng_from_seed(seed));
    WeightMatrix::new(matrix.rows(), matrix.cols(), data).unwrap()
}
