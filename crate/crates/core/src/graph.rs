//! Whole-network persistence: the max-min path summary matrix, deep graph
//! persistence computed from it, the sample-weighted variant built on
//! activation graphs, and the layer-wise / final-layer baseline features
//! used for shift detection.

use crate::error::Result;
use crate::model::{
    activation_graph, normalise, normalise_stack, softmax_features, Network, NormalisedNetwork,
    WeightMatrix,
};
use crate::persistence::{max_spanning_tree, neural_persistence, PersistenceDiagram};

/// Matrix of bottleneck capacities: entry `(o, i)` is the maximum over all
/// directed input-to-output paths of the minimum edge weight along the path.
/// Shape is `output_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryMatrix {
    matrix: WeightMatrix,
}

impl SummaryMatrix {
    pub fn matrix(&self) -> &WeightMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> WeightMatrix {
        self.matrix
    }
}

/// How normalised feature vectors were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Sorted MST weights of the sample-weighted summary matrix.
    DgpMst,
    /// Concatenated sorted per-layer MST weights of the activation graph.
    TuLayerwise,
    /// Flattened final layer of the activation graph.
    MagdiffFinal,
    /// Softmax output probabilities.
    Softmax,
}

/// A feature vector of fixed dimension for a given kind and architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

/// Which divisor maps sample-weighted edge values into `[0, 1]`. Each
/// activation graph is its own graph, so the per-sample maximum is the
/// default; a fixed divisor lets callers reuse the static-weight maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalMax {
    PerSample,
    Fixed(f64),
}

/// Runs the backward dynamic program over the layer stack: starting from the
/// last layer, each step folds one more layer into the bottleneck matrix via
/// `S'[o, i] = max over h of min(S[o, h], W[h, i])`.
fn summary_of_layers(layers: &[WeightMatrix]) -> SummaryMatrix {
    let mut s = layers.last().unwrap().clone();
    for layer in layers.iter().rev().skip(1) {
        let (outs, hidden, ins) = (s.rows(), layer.rows(), layer.cols());
        debug_assert_eq!(s.cols(), hidden);
        let mut next = vec![0.0f64; outs * ins];
        for o in 0..outs {
            for h in 0..hidden {
                let through = s.get(o, h);
                for i in 0..ins {
                    let bottleneck = through.min(layer.get(h, i));
                    let cell = &mut next[o * ins + i];
                    if bottleneck > *cell {
                        *cell = bottleneck;
                    }
                }
            }
        }
        s = WeightMatrix::new(outs, ins, next).unwrap();
    }
    SummaryMatrix { matrix: s }
}

/// Summary matrix of a normalised network; exact min/max dynamic
/// programming, no floating-point reordering.
pub fn summary_matrix(net: &NormalisedNetwork) -> SummaryMatrix {
    summary_of_layers(net.layers())
}

/// A deep-graph-persistence value in raw and size-normalised form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpValue {
    pub raw: f64,
    /// Raw value divided by `(input_dim + output_dim - 1)^(1/p)`.
    pub normalised: f64,
}

/// Persistence of the summary matrix of an already-normalised network.
pub fn dgp_of_normalised(net: &NormalisedNetwork, p: f64) -> DgpValue {
    let s = summary_matrix(net);
    let diagram = max_spanning_tree(s.matrix()).unwrap().with_p(p);
    DgpValue {
        raw: neural_persistence(&diagram, false),
        normalised: neural_persistence(&diagram, true),
    }
}

/// Deep graph persistence of a network: standardise (by default) and
/// normalise the weights, build the summary matrix, and evaluate the
/// persistence of its maximum spanning tree.
pub fn dgp(net: &Network, p: f64, standardise: bool) -> Result<DgpValue> {
    Ok(dgp_of_normalised(&normalise(net, standardise)?, p))
}

fn mst_feature(matrix: &WeightMatrix, kind: FeatureKind) -> FeatureVector {
    let diagram: PersistenceDiagram = max_spanning_tree(matrix).unwrap();
    FeatureVector {
        kind,
        values: diagram.mst_weights().to_vec(),
    }
}

fn normalise_sample_stack(
    graph_layers: &[WeightMatrix],
    standardise: bool,
    divisor: GlobalMax,
) -> Result<Vec<WeightMatrix>> {
    match divisor {
        GlobalMax::PerSample => Ok(normalise_stack(graph_layers, standardise)?.0),
        GlobalMax::Fixed(max) => {
            let (layers, sample_max) = normalise_stack(graph_layers, standardise)?;
            // Undo the per-sample divisor, re-divide by the fixed one, and cap
            // at 1 so the MST precondition still holds.
            Ok(layers
                .iter()
                .map(|l| l.map(|w| (w * sample_max / max).min(1.0)))
                .collect())
        }
    }
}

/// Sample-weighted DGP features: the sorted MST weights of the summary
/// matrix built from the activation graph of `net` at `x`. Dimension is
/// `input_dim + output_dim - 1`.
pub fn sample_weighted_dgp_features(
    net: &Network,
    x: &[f64],
    standardise: bool,
) -> Result<FeatureVector> {
    sample_weighted_dgp_features_with(net, x, standardise, GlobalMax::PerSample)
}

/// As [`sample_weighted_dgp_features`] with an explicit choice of the
/// `[0, 1]` divisor.
pub fn sample_weighted_dgp_features_with(
    net: &Network,
    x: &[f64],
    standardise: bool,
    divisor: GlobalMax,
) -> Result<FeatureVector> {
    let graph = activation_graph(net, x)?;
    let layers = normalise_sample_stack(graph.layers(), standardise, divisor)?;
    let s = summary_of_layers(&layers);
    Ok(mst_feature(s.matrix(), FeatureKind::DgpMst))
}

/// Layer-wise MST features of the activation graph, concatenated in layer
/// order. Layer `l` with an `r x c` matrix contributes `r + c - 1` sorted
/// weights; downstream distance computations treat each layer as its own
/// segment (see the shift-detection module).
pub fn tu_features(net: &Network, x: &[f64], standardise: bool) -> Result<FeatureVector> {
    let graph = activation_graph(net, x)?;
    let layers = normalise_stack(graph.layers(), standardise)?.0;
    let mut values = Vec::new();
    for layer in &layers {
        values.extend_from_slice(max_spanning_tree(layer).unwrap().mst_weights());
    }
    Ok(FeatureVector {
        kind: FeatureKind::TuLayerwise,
        values,
    })
}

/// Per-layer segment lengths of the TU feature vector for a given network:
/// layer `l` contributes `rows + cols - 1` values.
pub fn tu_segments(net: &Network) -> Vec<usize> {
    net.layers()
        .iter()
        .map(|l| l.rows() + l.cols() - 1)
        .collect()
}

/// The final layer of the activation graph flattened row-major; dimension
/// is `hidden_dim * output_dim`.
pub fn magdiff_features(net: &Network, x: &[f64]) -> Result<FeatureVector> {
    let graph = activation_graph(net, x)?;
    Ok(FeatureVector {
        kind: FeatureKind::MagdiffFinal,
        values: graph.layers().last().unwrap().data().to_vec(),
    })
}

/// Softmax output probabilities as a feature vector.
pub fn softmax_feature_vector(net: &Network, x: &[f64]) -> Result<FeatureVector> {
    Ok(FeatureVector {
        kind: FeatureKind::Softmax,
        values: softmax_features(net, x)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Activation;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn unit_net(layers: &[&[Vec<f64>]]) -> NormalisedNetwork {
        let ls = layers
            .iter()
            .map(|rows| WeightMatrix::from_rows(rows).unwrap())
            .collect();
        NormalisedNetwork::from_unit_layers(ls, Activation::Relu).unwrap()
    }

    #[test]
    fn summary_matrix_two_layer_example() {
        let net = unit_net(&[
            &[vec![0.9, 0.1], vec![0.2, 0.8]],
            &[vec![0.5, 0.7]],
        ]);
        let s = summary_matrix(&net);
        assert_eq!(s.matrix().data(), &[0.5, 0.7]);
    }

    #[test]
    fn summary_matrix_single_layer_is_identity_op() {
        let net = unit_net(&[&[vec![0.3, 0.6], vec![0.2, 0.9]]]);
        let s = summary_matrix(&net);
        assert_eq!(s.matrix().data(), &[0.3, 0.6, 0.2, 0.9]);
    }

    #[test]
    fn summary_matrix_of_all_ones_network() {
        let ones3 = vec![vec![1.0; 3]; 3];
        let net = unit_net(&[&ones3, &ones3, &[vec![1.0; 3], vec![1.0; 3]]]);
        let s = summary_matrix(&net);
        assert!(s.matrix().data().iter().all(|&w| w == 1.0));
        assert_eq!((s.matrix().rows(), s.matrix().cols()), (2, 3));
    }

    /// Brute-force max-min oracle over every input-to-output path.
    pub(crate) fn brute_force_summary(layers: &[WeightMatrix]) -> WeightMatrix {
        let ins = layers[0].cols();
        let outs = layers.last().unwrap().rows();
        let mut data = vec![0.0f64; outs * ins];
        for i in 0..ins {
            // paths[k] = (unit index in current level, bottleneck so far)
            let mut paths: Vec<(usize, f64)> = vec![(i, f64::INFINITY)];
            for layer in layers {
                let mut next = Vec::with_capacity(paths.len() * layer.rows());
                for &(u, bottleneck) in &paths {
                    for j in 0..layer.rows() {
                        next.push((j, bottleneck.min(layer.get(j, u))));
                    }
                }
                paths = next;
            }
            for (o, bottleneck) in paths {
                let cell = &mut data[o * ins + i];
                if bottleneck > *cell {
                    *cell = bottleneck;
                }
            }
        }
        WeightMatrix::new(outs, ins, data).unwrap()
    }

    #[test]
    fn summary_matrix_matches_path_enumeration() {
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let depth = rng.gen_range(1..=4);
            let mut dims: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=6)).collect();
            dims[0] = dims[0].max(2);
            let layers: Vec<WeightMatrix> = (0..depth)
                .map(|l| {
                    let (r, c) = (dims[l + 1], dims[l]);
                    WeightMatrix::new(r, c, (0..r * c).map(|_| rng.gen::<f64>()).collect())
                        .unwrap()
                })
                .collect();
            let net =
                NormalisedNetwork::from_unit_layers(layers.clone(), Activation::Relu).unwrap();
            let s = summary_matrix(&net);
            let oracle = brute_force_summary(&layers);
            assert_eq!(s.matrix().data(), oracle.data());
        }
    }

    #[test]
    fn summary_matrix_is_monotone_in_edge_weights() {
        let mut rng = rng_from_seed(22);
        for _ in 0..50 {
            let layers: Vec<WeightMatrix> = vec![
                WeightMatrix::new(4, 3, (0..12).map(|_| rng.gen::<f64>() * 0.9).collect())
                    .unwrap(),
                WeightMatrix::new(2, 4, (0..8).map(|_| rng.gen::<f64>() * 0.9).collect())
                    .unwrap(),
            ];
            let before = summary_of_layers(&layers);
            let mut bumped = layers.clone();
            let which = rng.gen_range(0..2);
            let idx = rng.gen_range(0..bumped[which].data().len());
            let (r, c) = (idx / bumped[which].cols(), idx % bumped[which].cols());
            let v = (bumped[which].get(r, c) + 0.1).min(1.0);
            bumped[which].set(r, c, v);
            let after = summary_of_layers(&bumped);
            for (a, b) in after.matrix().data().iter().zip(before.matrix().data()) {
                assert!(a >= b);
            }
        }
    }

    #[test]
    fn dgp_equals_np_for_single_layer() {
        let mut rng = rng_from_seed(23);
        for _ in 0..20 {
            let w = WeightMatrix::new(3, 4, (0..12).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .unwrap();
            let net = Network::new(vec![w], Activation::Relu).unwrap();
            let value = dgp(&net, 2.0, false).unwrap();
            let norm = normalise(&net, false).unwrap();
            let d = max_spanning_tree(&norm.layers()[0]).unwrap();
            assert!((value.raw - neural_persistence(&d, false)).abs() < 1e-12);
            assert!((value.normalised - neural_persistence(&d, true)).abs() < 1e-12);
        }
    }

    #[test]
    fn dgp_of_two_layer_summary_example() {
        let net = unit_net(&[
            &[vec![0.9, 0.1], vec![0.2, 0.8]],
            &[vec![0.5, 0.7]],
        ]);
        let value = dgp_of_normalised(&net, 2.0);
        assert!((value.raw - 1.34f64.sqrt()).abs() < 1e-12);
    }

    fn permute_hidden(net: &Network, perm: &[usize]) -> Network {
        // Rows of layer 0 and columns of layer 1 move together.
        let l0 = &net.layers()[0];
        let rows: Vec<Vec<f64>> = perm
            .iter()
            .map(|&r| (0..l0.cols()).map(|c| l0.get(r, c)).collect())
            .collect();
        let l1 = &net.layers()[1];
        let cols: Vec<Vec<f64>> = (0..l1.rows())
            .map(|r| perm.iter().map(|&c| l1.get(r, c)).collect())
            .collect();
        Network::new(
            vec![
                WeightMatrix::from_rows(&rows).unwrap(),
                WeightMatrix::from_rows(&cols).unwrap(),
            ],
            net.activation(),
        )
        .unwrap()
    }

    #[test]
    fn dgp_is_invariant_under_hidden_permutation() {
        let mut rng = rng_from_seed(24);
        let l0 = WeightMatrix::new(5, 3, (0..15).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .unwrap();
        let l1 = WeightMatrix::new(2, 5, (0..10).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .unwrap();
        let net = Network::new(vec![l0, l1], Activation::Relu).unwrap();
        let base = dgp(&net, 2.0, true).unwrap();
        let permuted = permute_hidden(&net, &[3, 0, 4, 1, 2]);
        let other = dgp(&permuted, 2.0, true).unwrap();
        assert!((base.raw - other.raw).abs() < 1e-12);
    }

    #[test]
    fn standardised_dgp_is_invariant_under_layer_affine_maps() {
        let mut rng = rng_from_seed(25);
        let l0 = WeightMatrix::new(4, 3, (0..12).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .unwrap();
        let l1 = WeightMatrix::new(2, 4, (0..8).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .unwrap();
        let net = Network::new(vec![l0.clone(), l1.clone()], Activation::Relu).unwrap();
        let base = dgp(&net, 2.0, true).unwrap();

        let rescaled = Network::new(
            vec![l0.map(|w| 3.5 * w + 0.25), l1.map(|w| 0.2 * w - 1.0)],
            Activation::Relu,
        )
        .unwrap();
        let other = dgp(&rescaled, 2.0, true).unwrap();
        assert!((base.raw - other.raw).abs() < 1e-9);
        assert!((base.normalised - other.normalised).abs() < 1e-9);
    }

    #[test]
    fn sample_weighted_features_on_ones_input_match_static_weights() {
        let w = WeightMatrix::from_rows(&[vec![0.4, -0.8], vec![0.2, 0.6], vec![-1.0, 0.3]])
            .unwrap();
        let net = Network::new(vec![w.clone()], Activation::Relu).unwrap();
        let f = sample_weighted_dgp_features(&net, &[1.0, 1.0], false).unwrap();
        let norm = normalise(&net, false).unwrap();
        let d = max_spanning_tree(&norm.layers()[0]).unwrap();
        assert_eq!(f.values, d.mst_weights());
    }

    #[test]
    fn dgp_feature_dimension_is_inputs_plus_outputs_minus_one() {
        let mut rng = rng_from_seed(26);
        let l0 = WeightMatrix::new(5, 4, (0..20).map(|_| rng.gen::<f64>() + 0.1).collect())
            .unwrap();
        let l1 = WeightMatrix::new(3, 5, (0..15).map(|_| rng.gen::<f64>() + 0.1).collect())
            .unwrap();
        let net = Network::new(vec![l0, l1], Activation::Relu).unwrap();
        let x = vec![0.3, 0.9, 0.5, 0.7];
        let f = sample_weighted_dgp_features(&net, &x, true).unwrap();
        assert_eq!(f.values.len(), 4 + 3 - 1);

        let again = sample_weighted_dgp_features(&net, &x, true).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn degenerate_activation_layer_is_reported() {
        let w = WeightMatrix::from_rows(&[vec![0.4, -0.8], vec![0.2, 0.6]]).unwrap();
        let net = Network::new(vec![w], Activation::Relu).unwrap();
        let err = sample_weighted_dgp_features(&net, &[0.0, 0.0], true);
        assert!(matches!(
            err,
            Err(crate::error::Error::DegenerateLayer { .. })
        ));
    }

    #[test]
    fn tu_features_single_layer_coincide_with_dgp_features() {
        let w = WeightMatrix::from_rows(&[vec![0.4, -0.8], vec![0.2, 0.6], vec![-1.0, 0.3]])
            .unwrap();
        let net = Network::new(vec![w], Activation::Relu).unwrap();
        let x = [0.7, 0.2];
        let tu = tu_features(&net, &x, false).unwrap();
        let dgp_f = sample_weighted_dgp_features(&net, &x, false).unwrap();
        assert_eq!(tu.values, dgp_f.values);
    }

    #[test]
    fn tu_segments_give_tree_sizes_per_layer() {
        let mut rng = rng_from_seed(27);
        let l0 = WeightMatrix::new(5, 4, (0..20).map(|_| rng.gen::<f64>() + 0.05).collect())
            .unwrap();
        let l1 = WeightMatrix::new(3, 5, (0..15).map(|_| rng.gen::<f64>() + 0.05).collect())
            .unwrap();
        let net = Network::new(vec![l0, l1], Activation::Relu).unwrap();
        assert_eq!(tu_segments(&net), vec![5 + 4 - 1, 3 + 5 - 1]);
        let f = tu_features(&net, &[0.5, 0.1, 0.9, 0.2], false).unwrap();
        assert_eq!(f.values.len(), 8 + 7);
    }

    #[test]
    fn magdiff_flattens_final_activation_layer() {
        let w = WeightMatrix::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let net = Network::new(vec![w], Activation::Relu).unwrap();
        let f = magdiff_features(&net, &[0.5, 1.0]).unwrap();
        assert_eq!(f.values, vec![0.5, 2.0]);

        let zero = magdiff_features(&net, &[0.0, 0.0]).unwrap();
        assert_eq!(zero.values, vec![0.0, 0.0]);
    }

    #[test]
    fn magdiff_dimension_is_hidden_times_outputs() {
        let mut rng = rng_from_seed(28);
        let l0 = WeightMatrix::new(3, 4, (0..12).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let l1 = WeightMatrix::new(2, 3, (0..6).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let net = Network::new(vec![l0, l1], Activation::Relu).unwrap();
        let f = magdiff_features(&net, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(f.values.len(), 6);
    }
}
