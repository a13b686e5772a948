//! Domain types for weight stacks and the transforms every measure depends on:
//! normalisation/standardisation, forward passes, and activation graphs.
//!
//! Conventions used throughout the crate:
//!
//! - A layer's weight matrix is stored row-major with `rows` output units and
//!   `cols` input units, so entry `(j, i)` is the weight from input unit `i`
//!   to output unit `j`.
//! - Biases do not exist in this graph view; a network is exactly its ordered
//!   stack of weight matrices plus an activation function.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense real matrix, row-major. Entry `(j, i)` is the weight from input
/// unit `i` to output unit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    /// Builds a matrix from row-major data. Rejects empty shapes, length
    /// mismatches, and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch {
                expected: 1,
                got: 0,
                context: "matrix dimensions must be at least 1x1",
            });
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                got: data.len(),
                context: "matrix data length",
            });
        }
        if !data.iter().all(|w| w.is_finite()) {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                got: data.iter().filter(|w| w.is_finite()).count(),
                context: "all matrix entries must be finite",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch {
                expected: m,
                got: rows.iter().map(Vec::len).find(|&l| l != m).unwrap_or(0),
                context: "ragged rows",
            });
        }
        Self::new(n, m, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    /// Matrix-vector product `W x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: self.cols,
                got: x.len(),
                context: "matvec input length",
            });
        }
        Ok((0..self.rows)
            .map(|j| {
                let row = &self.data[j * self.cols..(j + 1) * self.cols];
                row.iter().zip(x).map(|(w, xi)| w * xi).sum()
            })
            .collect())
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for j in 0..self.rows {
            for i in 0..self.cols {
                data[i * self.rows + j] = self.data[j * self.cols + i];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Mean of all entries.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population variance of all entries.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.data.iter().map(|w| (w - mu) * (w - mu)).sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, w| acc.max(w.abs()))
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&w| f(w)).collect(),
        }
    }
}

/// Element-wise activation applied between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative evaluated at the pre-activation value.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::Tanh => write!(f, "tanh"),
        }
    }
}

/// Ordered stack of layers plus an activation function. Adjacent layers must
/// chain: layer `l`'s input count equals layer `l-1`'s output count.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<WeightMatrix>,
    activation: Activation,
}

impl Network {
    pub fn new(layers: Vec<WeightMatrix>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: 1,
                got: 0,
                context: "a network needs at least one layer",
            });
        }
        for pair in layers.windows(2) {
            if pair[1].cols() != pair[0].rows() {
                return Err(Error::ShapeMismatch {
                    expected: pair[0].rows(),
                    got: pair[1].cols(),
                    context: "adjacent layer dimensions must chain",
                });
            }
        }
        Ok(Self { layers, activation })
    }

    pub fn layers(&self) -> &[WeightMatrix] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of input features.
    pub fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    /// Number of output units.
    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().rows()
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [WeightMatrix] {
        &mut self.layers
    }
}

/// A network whose entries have been mapped to `[0, 1]`; the global maximum
/// maps to exactly 1. Carries the divisor and whether layer standardisation
/// was applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalisedNetwork {
    layers: Vec<WeightMatrix>,
    activation: Activation,
    standardised: bool,
    global_max: f64,
}

impl NormalisedNetwork {
    /// Wraps layers whose entries are already in `[0, 1]`. Intended for
    /// analysing stored normalised stacks and for tests; `normalise` is the
    /// usual constructor.
    pub fn from_unit_layers(layers: Vec<WeightMatrix>, activation: Activation) -> Result<Self> {
        for layer in &layers {
            check_unit_range(layer)?;
        }
        let net = Network::new(layers, activation)?;
        Ok(Self {
            layers: net.layers,
            activation,
            standardised: false,
            global_max: 1.0,
        })
    }

    pub fn layers(&self) -> &[WeightMatrix] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn standardised(&self) -> bool {
        self.standardised
    }

    /// The divisor used to map entries into `[0, 1]`.
    pub fn global_max(&self) -> f64 {
        self.global_max
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().rows()
    }

    /// Pooled population variance over every entry of every layer.
    pub fn pooled_variance(&self) -> f64 {
        let count: usize = self.layers.iter().map(|l| l.data().len()).sum();
        let mean: f64 = self
            .layers
            .iter()
            .flat_map(|l| l.data())
            .sum::<f64>()
            / count as f64;
        self.layers
            .iter()
            .flat_map(|l| l.data())
            .map(|w| (w - mean) * (w - mean))
            .sum::<f64>()
            / count as f64
    }
}

pub(crate) fn check_unit_range(layer: &WeightMatrix) -> Result<()> {
    for (idx, &w) in layer.data().iter().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(&w) {
            return Err(Error::NotNormalised {
                row: idx / layer.cols(),
                col: idx % layer.cols(),
                value: w,
            });
        }
    }
    Ok(())
}

const DEGENERATE_STD: f64 = 1e-12;

/// Standardises (optionally) and normalises a stack of layer matrices:
/// each layer is first mapped to `(W - mean) / std` when `standardise` is
/// set, then every entry is replaced by `|entry| / global_max` where
/// `global_max` is the largest absolute entry across the whole stack.
///
/// Shared by the static-weight path and the activation-graph path.
pub(crate) fn normalise_stack(
    layers: &[WeightMatrix],
    standardise: bool,
) -> Result<(Vec<WeightMatrix>, f64)> {
    let mut out: Vec<WeightMatrix> = Vec::with_capacity(layers.len());
    for (idx, layer) in layers.iter().enumerate() {
        if standardise {
            let mu = layer.mean();
            let sigma = layer.variance().sqrt();
            if sigma <= DEGENERATE_STD {
                return Err(Error::DegenerateLayer {
                    layer: idx,
                    std: sigma,
                });
            }
            out.push(layer.map(|w| (w - mu) / sigma));
        } else {
            out.push(layer.clone());
        }
    }
    let global_max = out.iter().map(WeightMatrix::max_abs).fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    for layer in &mut out {
        *layer = layer.map(|w| w.abs() / global_max);
    }
    Ok((out, global_max))
}

/// Maps a network's weights to `[0, 1]`, optionally standardising each layer
/// first by subtracting the layer mean and dividing by the (population)
/// standard deviation.
pub fn normalise(net: &Network, standardise: bool) -> Result<NormalisedNetwork> {
    let (layers, global_max) = normalise_stack(net.layers(), standardise)?;
    Ok(NormalisedNetwork {
        layers,
        activation: net.activation(),
        standardised: standardise,
        global_max,
    })
}

/// Result of a forward pass: the input activation vector of each layer and
/// the final pre-activation output (logits).
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `inputs[l]` is the activation vector fed into layer `l`.
    pub inputs: Vec<Vec<f64>>,
    /// Output of the last layer with no activation applied.
    pub output: Vec<f64>,
}

/// Runs the network on `x`. Hidden layers apply the activation function;
/// the final layer emits raw logits.
pub fn forward(net: &Network, x: &[f64]) -> Result<ForwardPass> {
    if x.len() != net.input_dim() {
        return Err(Error::ShapeMismatch {
            expected: net.input_dim(),
            got: x.len(),
            context: "forward input length",
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            got: x.iter().filter(|v| v.is_finite()).count(),
            context: "forward input must be finite",
        });
    }
    let mut inputs = Vec::with_capacity(net.layers().len());
    let mut current = x.to_vec();
    let last = net.layers().len() - 1;
    let mut output = Vec::new();
    for (l, layer) in net.layers().iter().enumerate() {
        inputs.push(current.clone());
        let pre = layer.matvec(&current)?;
        if l == last {
            output = pre;
        } else {
            current = pre.into_iter().map(|v| net.activation().apply(v)).collect();
        }
    }
    Ok(ForwardPass { inputs, output })
}

/// The input-induced graph of Def.-5 style: layer `l`'s edge `(j, i)` weighs
/// `|W^l_{j,i} * x^l_i|` where `x^l` is the activation entering layer `l`.
#[derive(Debug, Clone)]
pub struct ActivationGraph {
    layers: Vec<WeightMatrix>,
    inputs: Vec<Vec<f64>>,
}

impl ActivationGraph {
    /// Per-layer edge-weight matrices; shapes match the source network.
    pub fn layers(&self) -> &[WeightMatrix] {
        &self.layers
    }

    /// The activation vector entering each layer.
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }
}

/// Builds the activation graph of `net` for input `x`.
pub fn activation_graph(net: &Network, x: &[f64]) -> Result<ActivationGraph> {
    let pass = forward(net, x)?;
    let layers = net
        .layers()
        .iter()
        .zip(&pass.inputs)
        .map(|(layer, xin)| {
            let mut data = Vec::with_capacity(layer.rows() * layer.cols());
            for j in 0..layer.rows() {
                for (i, xi) in xin.iter().enumerate() {
                    data.push((layer.get(j, i) * xi).abs());
                }
            }
            WeightMatrix::new(layer.rows(), layer.cols(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ActivationGraph {
        layers,
        inputs: pass.inputs,
    })
}

/// Numerically stable softmax of a logit vector.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax of the network's output logits for input `x`.
pub fn softmax_features(net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    Ok(softmax(&forward(net, x)?.output))
}
