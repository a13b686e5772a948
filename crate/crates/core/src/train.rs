//! A small deterministic MLP trainer (softmax cross-entropy with Adam),
//! checkpointing on quarter-epoch boundaries, early stopping over metric
//! series, and the per-checkpoint criteria the stopping rule consumes.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::dgp;
use crate::model::{normalise, softmax, Activation, Network, WeightMatrix};
use crate::persistence::{max_spanning_tree, neural_persistence};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;

/// Trainer configuration. The defaults mirror the usual Adam setup:
/// learning rate 0.003, `beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`,
/// batch size 32.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Hidden layer widths; input/output dims come from the dataset.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Checkpoint after every quarter epoch instead of only at epoch ends.
    pub quarter_epoch_checkpoints: bool,
}

impl TrainConfig {
    pub fn new(hidden: Vec<usize>, activation: Activation, epochs: usize, seed: u64) -> Self {
        Self {
            hidden,
            activation,
            learning_rate: 0.003,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs,
            seed,
            quarter_epoch_checkpoints: true,
        }
    }
}

/// A snapshot of the network during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Fraction of epochs completed, e.g. 0.25 after the first quarter.
    pub epoch_progress: f64,
    pub network: Network,
}

/// Ordered `(step, value)` pairs for one evaluation criterion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricSeries {
    pub points: Vec<(f64, f64)>,
}

impl MetricSeries {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Output of a training run: the checkpoint sequence and the mean training
/// loss recorded at each checkpoint boundary.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoints: Vec<Checkpoint>,
    pub train_loss: MetricSeries,
}

/// Uniform Kaiming-style fan-in initialisation: entries drawn from
/// `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`.
fn init_network(dims: &[usize], activation: Activation, rng: &mut impl Rng) -> Network {
    let layers: Vec<WeightMatrix> = dims
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            WeightMatrix::new(fan_out, fan_in, data).unwrap()
        })
        .collect();
    Network::new(layers, activation).unwrap()
}

/// Mean cross-entropy loss and per-layer weight gradients over a batch.
pub fn loss_and_gradients(
    net: &Network,
    features: &[&[f64]],
    labels: &[usize],
) -> Result<(f64, Vec<WeightMatrix>)> {
    if features.len() != labels.len() || features.is_empty() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let depth = net.layers().len();
    let mut grads: Vec<Vec<f64>> = net
        .layers()
        .iter()
        .map(|l| vec![0.0; l.rows() * l.cols()])
        .collect();
    let mut total_loss = 0.0f64;
    let scale = 1.0 / features.len() as f64;

    for (&x, &label) in features.iter().zip(labels) {
        // Forward pass keeping layer inputs and pre-activations.
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(depth);
        let mut pres: Vec<Vec<f64>> = Vec::with_capacity(depth);
        let mut current = x.to_vec();
        for (l, layer) in net.layers().iter().enumerate() {
            inputs.push(current.clone());
            let pre = layer.matvec(&current)?;
            if l + 1 < depth {
                current = pre.iter().map(|&v| net.activation().apply(v)).collect();
            }
            pres.push(pre);
        }
        let probs = softmax(&pres[depth - 1]);
        total_loss -= probs[label].max(1e-300).ln();

        // Backward pass: gradient of mean CE w.r.t. logits is p - onehot.
        let mut dz: Vec<f64> = probs;
        dz[label] -= 1.0;
        for l in (0..depth).rev() {
            let layer = &net.layers()[l];
            let grad = &mut grads[l];
            for j in 0..layer.rows() {
                let gj = dz[j];
                for (i, xi) in inputs[l].iter().enumerate() {
                    grad[j * layer.cols() + i] += scale * gj * xi;
                }
            }
            if l > 0 {
                let mut dx = vec![0.0f64; layer.cols()];
                for j in 0..layer.rows() {
                    let gj = dz[j];
                    for (i, dxi) in dx.iter_mut().enumerate() {
                        *dxi += layer.get(j, i) * gj;
                    }
                }
                dz = dx
                    .iter()
                    .zip(&pres[l - 1])
                    .map(|(&dxi, &pre)| dxi * net.activation().derivative(pre))
                    .collect();
            }
        }
    }

    let grads = net
        .layers()
        .iter()
        .zip(grads)
        .map(|(l, g)| WeightMatrix::new(l.rows(), l.cols(), g).unwrap())
        .collect();
    Ok((total_loss * scale, grads))
}

struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u32,
}

impl AdamState {
    fn new(net: &Network) -> Self {
        let zeros: Vec<Vec<f64>> = net
            .layers()
            .iter()
            .map(|l| vec![0.0; l.rows() * l.cols()])
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, grads: &[WeightMatrix], cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for (l, layer) in net.layers_mut().iter_mut().enumerate() {
            let g = grads[l].data();
            let cols = layer.cols();
            for idx in 0..g.len() {
                let m = &mut self.m[l][idx];
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g[idx];
                let v = &mut self.v[l][idx];
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g[idx] * g[idx];
                let update =
                    cfg.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + cfg.epsilon);
                let (r, c) = (idx / cols, idx % cols);
                layer.set(r, c, layer.get(r, c) - update);
            }
        }
    }
}

/// Trains an MLP with softmax cross-entropy and Adam; deterministic given
/// the seed. Returns the checkpoints (quarter-epoch or epoch cadence) and
/// the training-loss series at the same boundaries.
pub fn train_mlp(data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut rng = rng_from_seed(cfg.seed);
    let mut dims = vec![data.feature_dim()];
    dims.extend(&cfg.hidden);
    dims.push(data.num_classes());
    let mut net = init_network(&dims, cfg.activation, &mut rng);
    let mut adam = AdamState::new(&net);

    let n = data.len();
    let batches_per_epoch = n.div_ceil(cfg.batch_size).max(1);
    let marks_per_epoch = if cfg.quarter_epoch_checkpoints { 4 } else { 1 };
    // Batch indices (1-based) after which a checkpoint is taken.
    let marks: Vec<usize> = (1..=marks_per_epoch)
        .map(|q| (q * batches_per_epoch).div_ceil(marks_per_epoch))
        .collect();

    let mut checkpoints = Vec::new();
    let mut train_loss = MetricSeries::default();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut step = 0usize;

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0f64;
        let mut seen_batches = 0usize;
        for (batch_idx, batch) in indices.chunks(cfg.batch_size).enumerate() {
            let feats: Vec<&[f64]> = batch.iter().map(|&i| &data.features()[i][..]).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| data.labels()[i]).collect();
            let (loss, grads) = loss_and_gradients(&net, &feats, &labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { step });
            }
            adam.step(&mut net, &grads, cfg);
            epoch_loss += loss;
            seen_batches += 1;
            step += 1;

            if marks.contains(&(batch_idx + 1)) {
                let progress = epoch as f64 + (batch_idx + 1) as f64 / batches_per_epoch as f64;
                checkpoints.push(Checkpoint {
                    epoch_progress: progress,
                    network: net.clone(),
                });
                train_loss
                    .points
                    .push((progress, epoch_loss / seen_batches as f64));
            }
        }
    }

    Ok(TrainOutcome {
        checkpoints,
        train_loss,
    })
}

/// Fraction of samples whose argmax logit matches the label.
pub fn accuracy(net: &Network, data: &LabeledDataset) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &label) in data.features().iter().zip(data.labels()) {
        let out = crate::model::forward(net, x)?.output;
        let argmax = out
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if argmax == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Early-stopping rule: after `burn_in` evaluations are skipped, training
/// stops at the first evaluation where `patience` consecutive evaluations
/// have failed to improve on the running best (strict improvement beyond
/// 1e-12). Returns the index of the stopping evaluation, or the final index
/// when the rule never triggers.
pub fn early_stopping_epoch(
    series: &MetricSeries,
    burn_in: usize,
    patience: usize,
    higher_is_better: bool,
) -> Result<usize> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let last = series.len() - 1;
    if burn_in > last {
        return Ok(last);
    }
    if patience == 0 {
        return Ok(burn_in);
    }
    let mut best: Option<f64> = None;
    let mut failures = 0usize;
    for (idx, value) in series.values().enumerate().skip(burn_in) {
        let improved = match best {
            None => true,
            Some(b) => {
                if higher_is_better {
                    value > b + 1e-12
                } else {
                    value < b - 1e-12
                }
            }
        };
        if improved {
            best = Some(value);
            failures = 0;
        } else {
            failures += 1;
            if failures >= patience {
                return Ok(idx);
            }
        }
    }
    Ok(last)
}

/// Evaluation criteria computable from a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Mean normalised neural persistence over layers (p = 2).
    Np,
    /// Pooled variance of the normalised weights.
    Variance,
    /// Normalised deep graph persistence (p = 2).
    Dgp { standardise: bool },
    /// Accuracy on held-out data.
    ValAccuracy,
}

/// Evaluates `criterion` at every checkpoint in order.
pub fn criterion_series(
    checkpoints: &[Checkpoint],
    criterion: Criterion,
    val_data: Option<&LabeledDataset>,
) -> Result<MetricSeries> {
    if checkpoints.is_empty() {
        return Err(Error::EmptySeries);
    }
    if matches!(criterion, Criterion::ValAccuracy) && val_data.is_none() {
        return Err(Error::MissingValidationData);
    }
    let mut series = MetricSeries::default();
    for cp in checkpoints {
        let value = match criterion {
            Criterion::Np => {
                let norm = normalise(&cp.network, false)?;
                let total: f64 = norm
                    .layers()
                    .iter()
                    .map(|l| neural_persistence(&max_spanning_tree(l).unwrap(), true))
                    .sum();
                total / norm.layers().len() as f64
            }
            Criterion::Variance => normalise(&cp.network, false)?.pooled_variance(),
            Criterion::Dgp { standardise } => dgp(&cp.network, 2.0, standardise)?.normalised,
            Criterion::ValAccuracy => accuracy(&cp.network, val_data.unwrap())?,
        };
        series.points.push((cp.epoch_progress, value));
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_blobs;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn blob_data(seed: u64) -> LabeledDataset {
        synthetic_blobs(300, &[vec![0.8, 0.2], vec![0.2, 0.8]], 0.05, seed)
    }

    #[test]
    fn separable_blobs_reach_high_accuracy() {
        let data = blob_data(1);
        let cfg = TrainConfig::new(vec![], Activation::Relu, 40, 7);
        let outcome = train_mlp(&data, &cfg).unwrap();
        let final_net = &outcome.checkpoints.last().unwrap().network;
        let acc = accuracy(final_net, &data).unwrap();
        assert!(acc >= 0.95, "train accuracy {acc}");
    }

    #[test]
    fn zero_learning_rate_keeps_weights_bit_identical() {
        let data = blob_data(2);
        let mut cfg = TrainConfig::new(vec![4], Activation::Tanh, 2, 9);
        cfg.learning_rate = 0.0;
        let outcome = train_mlp(&data, &cfg).unwrap();
        let first = &outcome.checkpoints.first().unwrap().network;
        let last = &outcome.checkpoints.last().unwrap().network;
        assert_eq!(first, last);

        // The initial weights themselves: rerun with one epoch and compare.
        let one_epoch = TrainConfig {
            epochs: 1,
            ..cfg.clone()
        };
        let again = train_mlp(&data, &one_epoch).unwrap();
        assert_eq!(
            again.checkpoints.last().unwrap().network,
            *last,
            "lr = 0 must reproduce initialisation exactly"
        );
    }

    #[test]
    fn identical_seeds_give_identical_checkpoints() {
        let data = blob_data(3);
        let cfg = TrainConfig::new(vec![5], Activation::Relu, 3, 11);
        let a = train_mlp(&data, &cfg).unwrap();
        let b = train_mlp(&data, &cfg).unwrap();
        assert_eq!(a.checkpoints.len(), b.checkpoints.len());
        for (ca, cb) in a.checkpoints.iter().zip(&b.checkpoints) {
            assert_eq!(ca.network, cb.network);
        }
    }

    #[test]
    fn adam_ignores_all_zero_gradients() {
        let data = blob_data(4);
        let cfg = TrainConfig::new(vec![3], Activation::Relu, 1, 5);
        let outcome = train_mlp(&data, &cfg).unwrap();
        let mut net = outcome.checkpoints.last().unwrap().network.clone();
        let before = net.clone();
        let zero_grads: Vec<WeightMatrix> = net
            .layers()
            .iter()
            .map(|l| WeightMatrix::new(l.rows(), l.cols(), vec![0.0; l.rows() * l.cols()]).unwrap())
            .collect();
        let mut adam = AdamState::new(&net);
        adam.step(&mut net, &zero_grads, &cfg);
        assert_eq!(net, before);
    }

    fn series(values: &[f64]) -> MetricSeries {
        MetricSeries {
            points: values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect(),
        }
    }

    #[test]
    fn early_stopping_hand_cases() {
        let s = series(&[1.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(early_stopping_epoch(&s, 0, 2, true).unwrap(), 3);

        let improving = series(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(early_stopping_epoch(&improving, 0, 2, true).unwrap(), 3);

        assert_eq!(early_stopping_epoch(&s, 10, 2, true).unwrap(), 4);

        assert!(matches!(
            early_stopping_epoch(&MetricSeries::default(), 0, 1, true),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn early_stopping_is_monotone_in_patience() {
        let mut rng = rng_from_seed(33);
        for _ in 0..200 {
            let len = rng.gen_range(3..30);
            let values: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
            let s = series(&values);
            let burn_in = rng.gen_range(0..5);
            let mut last_stop = 0usize;
            for patience in 1..=6 {
                let stop = early_stopping_epoch(&s, burn_in, patience, true).unwrap();
                assert!(stop >= last_stop, "series {values:?}");
                last_stop = stop;
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (seed, activation) in [(61u64, Activation::Tanh), (62, Activation::Relu)] {
            let mut rng = rng_from_seed(seed);
            let dims = [4usize, 5, 5, 3];
            let net = init_network(&dims, activation, &mut rng);
            let features: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..4).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let refs: Vec<&[f64]> = features.iter().map(|f| &f[..]).collect();
            let labels: Vec<usize> = (0..8).map(|_| rng.gen_range(0..3)).collect();

            let (_, analytic) = loss_and_gradients(&net, &refs, &labels).unwrap();

            let h = 1e-5;
            let mut num_sq = 0.0f64;
            let mut den_sq = 0.0f64;
            for l in 0..net.layers().len() {
                let layer = &net.layers()[l];
                for idx in 0..layer.data().len() {
                    let (r, c) = (idx / layer.cols(), idx % layer.cols());
                    let mut plus = net.clone();
                    plus.layers_mut()[l].set(r, c, layer.get(r, c) + h);
                    let mut minus = net.clone();
                    minus.layers_mut()[l].set(r, c, layer.get(r, c) - h);
                    let (lp, _) = loss_and_gradients(&plus, &refs, &labels).unwrap();
                    let (lm, _) = loss_and_gradients(&minus, &refs, &labels).unwrap();
                    let fd = (lp - lm) / (2.0 * h);
                    let an = analytic[l].get(r, c);
                    num_sq += (fd - an) * (fd - an);
                    den_sq += fd * fd + an * an;
                }
            }
            let rel = num_sq.sqrt() / den_sq.sqrt().max(1e-12);
            assert!(rel < 1e-4, "{activation}: relative gradient error {rel}");
        }
    }

    #[test]
    fn criterion_series_matches_single_layer_identities() {
        let data = blob_data(5);
        let cfg = TrainConfig::new(vec![], Activation::Relu, 1, 13);
        let outcome = train_mlp(&data, &cfg).unwrap();

        let np = criterion_series(&outcome.checkpoints, Criterion::Np, None).unwrap();
        let dgp_raw = criterion_series(
            &outcome.checkpoints,
            Criterion::Dgp { standardise: false },
            None,
        )
        .unwrap();
        for ((_, a), (_, b)) in np.points.iter().zip(&dgp_raw.points) {
            assert!((a - b).abs() < 1e-12);
        }

        let constant = vec![outcome.checkpoints[0].clone(), outcome.checkpoints[0].clone()];
        let var = criterion_series(&constant, Criterion::Variance, None).unwrap();
        assert_eq!(var.points[0].1, var.points[1].1);

        assert!(matches!(
            criterion_series(&constant, Criterion::ValAccuracy, None),
            Err(Error::MissingValidationData)
        ));

        // Scale invariance of the variance criterion.
        let mut scaled = outcome.checkpoints[0].clone();
        for layer in scaled.network.layers_mut() {
            *layer = layer.map(|w| w * 4.0);
        }
        let var_scaled =
            criterion_series(&[scaled], Criterion::Variance, None).unwrap();
        assert_eq!(var.points[0].1, var_scaled.points[0].1);
    }
}
