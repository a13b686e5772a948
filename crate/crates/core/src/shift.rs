//! Covariate-shift detection: image corruptions with the built-in parameter
//! table, class prototypes, distance vectors, per-dimension KS tests with
//! Bonferroni correction, and the full detection experiment over a
//! (corruption, intensity, ratio, sample size) grid.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::{
    magdiff_features, sample_weighted_dgp_features, softmax_feature_vector, tu_features,
    tu_segments,
};
use crate::model::Network;
use crate::rng::{derive_seed, rng_from_seed, SeededRng};
use crate::stats::ks_two_sample;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// A corruption with resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corruption {
    GaussianBlur { sigma: f64, kernel: (usize, usize) },
    GaussianNoise { sigma: f64 },
    UniformNoise { sigma: f64 },
    PixelDropout { p: f64 },
}

/// Corruption families selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionKind {
    GaussianBlur,
    GaussianNoise,
    UniformNoise,
    PixelDropout,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 4] = [
        CorruptionKind::GaussianBlur,
        CorruptionKind::GaussianNoise,
        CorruptionKind::UniformNoise,
        CorruptionKind::PixelDropout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::GaussianBlur => "gaussian_blur",
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::UniformNoise => "uniform_noise",
            CorruptionKind::PixelDropout => "pixel_dropout",
        }
    }
}

impl std::str::FromStr for CorruptionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian_blur" => Ok(CorruptionKind::GaussianBlur),
            "gaussian_noise" => Ok(CorruptionKind::GaussianNoise),
            "uniform_noise" => Ok(CorruptionKind::UniformNoise),
            "pixel_dropout" => Ok(CorruptionKind::PixelDropout),
            other => Err(format!("unknown corruption '{other}'")),
        }
    }
}

/// Which dataset's corruption-parameter column to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetTable {
    Mnist,
    FashionMnist,
    Cifar10,
}

impl DatasetTable {
    pub fn name(self) -> &'static str {
        match self {
            DatasetTable::Mnist => "mnist",
            DatasetTable::FashionMnist => "fashion_mnist",
            DatasetTable::Cifar10 => "cifar10",
        }
    }
}

impl std::str::FromStr for DatasetTable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mnist" => Ok(DatasetTable::Mnist),
            "fashion_mnist" | "fashion-mnist" => Ok(DatasetTable::FashionMnist),
            "cifar10" | "cifar-10" => Ok(DatasetTable::Cifar10),
            other => Err(format!("unknown dataset table '{other}'")),
        }
    }
}

/// A corruption spec: family, intensity level 1-6, and the ratio of
/// corrupted samples in a test batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub corruption: Corruption,
    pub intensity_level: u8,
    pub corrupted_ratio: f64,
}

const BLUR_SIGMA_SMALL: [f64; 6] = [0.35, 0.4, 0.5, 0.6, 0.7, 0.8];
const BLUR_SIGMA_CIFAR: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
const BLUR_KERNEL_CIFAR: [(usize, usize); 6] = [(3, 3), (3, 5), (5, 5), (5, 7), (7, 7), (9, 9)];
const NOISE_SIGMA_MNIST: [f64; 6] = [25.0, 40.0, 55.0, 70.0, 85.0, 100.0];
const NOISE_SIGMA_FASHION: [f64; 6] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
const NOISE_SIGMA_CIFAR: [f64; 6] = [30.0, 60.0, 85.0, 100.0, 120.0, 140.0];
const DROPOUT_P: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];

/// Resolves the corruption parameters for a dataset and intensity level
/// (1 to 6) from the built-in table.
pub fn corruption_for(table: DatasetTable, kind: CorruptionKind, level: u8) -> Corruption {
    assert!((1..=6).contains(&level), "intensity level must be 1..=6");
    let i = (level - 1) as usize;
    match (kind, table) {
        (CorruptionKind::GaussianBlur, DatasetTable::Cifar10) => Corruption::GaussianBlur {
            sigma: BLUR_SIGMA_CIFAR[i],
            kernel: BLUR_KERNEL_CIFAR[i],
        },
        (CorruptionKind::GaussianBlur, _) => Corruption::GaussianBlur {
            sigma: BLUR_SIGMA_SMALL[i],
            kernel: (3, 3),
        },
        (CorruptionKind::GaussianNoise, table) => Corruption::GaussianNoise {
            sigma: noise_sigma(table, i),
        },
        (CorruptionKind::UniformNoise, table) => Corruption::UniformNoise {
            sigma: noise_sigma(table, i),
        },
        (CorruptionKind::PixelDropout, _) => Corruption::PixelDropout { p: DROPOUT_P[i] },
    }
}

fn noise_sigma(table: DatasetTable, i: usize) -> f64 {
    let raw = match table {
        DatasetTable::Mnist => NOISE_SIGMA_MNIST[i],
        DatasetTable::FashionMnist => NOISE_SIGMA_FASHION[i],
        DatasetTable::Cifar10 => NOISE_SIGMA_CIFAR[i],
    };
    raw / 255.0
}

/// Reflect-101 index mapping: the border pixel is not repeated.
fn reflect(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - center).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

/// Applies a corruption to an `h x w` image stored row-major in `[0, 1]`.
/// Noise corruptions clip back to `[0, 1]`; blur uses a normalised Gaussian
/// kernel with reflect padding; dropout zeroes pixels independently.
pub fn corrupt(
    image: &[f64],
    shape: (usize, usize),
    corruption: &Corruption,
    seed: u64,
) -> Result<Vec<f64>> {
    let (h, w) = shape;
    if image.len() != h * w {
        return Err(Error::BadShape {
            expected: h * w,
            got: image.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let out = match *corruption {
        Corruption::GaussianNoise { sigma } => image
            .iter()
            .map(|&x| (x + sigma * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
            .collect(),
        Corruption::UniformNoise { sigma } => image
            .iter()
            .map(|&x| (x + sigma * rng.gen_range(-1.0..1.0)).clamp(0.0, 1.0))
            .collect(),
        Corruption::PixelDropout { p } => image
            .iter()
            .map(|&x| if rng.gen::<f64>() < p { 0.0 } else { x })
            .collect(),
        Corruption::GaussianBlur { sigma, kernel } => {
            let (kh, kw) = kernel;
            if kh % 2 == 0 || kw % 2 == 0 {
                return Err(Error::EvenKernel { kh, kw });
            }
            // A 2-D Gaussian is the outer product of its 1-D slices, so two
            // separable passes produce the exact normalised 2-D convolution.
            let krow = gaussian_kernel(kw, sigma);
            let kcol = gaussian_kernel(kh, sigma);
            let mut horizontal = vec![0.0f64; h * w];
            let half_w = (kw / 2) as i64;
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for (t, &kv) in krow.iter().enumerate() {
                        let sx = reflect(x as i64 + t as i64 - half_w, w);
                        acc += kv * image[y * w + sx];
                    }
                    horizontal[y * w + x] = acc;
                }
            }
            let half_h = (kh / 2) as i64;
            let mut blurred = vec![0.0f64; h * w];
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for (t, &kv) in kcol.iter().enumerate() {
                        let sy = reflect(y as i64 + t as i64 - half_h, h);
                        acc += kv * horizontal[sy * w + x];
                    }
                    blurred[y * w + x] = acc.clamp(0.0, 1.0);
                }
            }
            blurred
        }
    };
    debug_assert!(out.iter().all(|&x| (0.0..=1.0).contains(&x)));
    Ok(out)
}

/// Per-class mean feature vectors with their sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrototypes {
    means: Vec<Vec<f64>>,
    counts: Vec<usize>,
}

impl ClassPrototypes {
    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }
}

/// Builds per-class mean representations; every class in
/// `0..num_classes` must appear at least once.
pub fn build_prototypes(
    features: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
) -> Result<ClassPrototypes> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    let dim = features[0].len();
    let mut means = vec![vec![0.0f64; dim]; num_classes];
    let mut counts = vec![0usize; num_classes];
    for (f, &y) in features.iter().zip(labels) {
        if f.len() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                got: f.len(),
                context: "feature length",
            });
        }
        if y >= num_classes {
            return Err(Error::MissingClass { class: y });
        }
        counts[y] += 1;
        for (m, v) in means[y].iter_mut().zip(f) {
            *m += v;
        }
    }
    for (class, (mean, &count)) in means.iter_mut().zip(&counts).enumerate() {
        if count == 0 {
            return Err(Error::MissingClass { class });
        }
        for m in mean.iter_mut() {
            *m /= count as f64;
        }
    }
    Ok(ClassPrototypes { means, counts })
}

/// Euclidean distances from `features` to every class prototype.
pub fn delta_vector(features: &[f64], prototypes: &ClassPrototypes) -> Result<Vec<f64>> {
    if features.len() != prototypes.dim() {
        return Err(Error::ShapeMismatch {
            expected: prototypes.dim(),
            got: features.len(),
            context: "delta feature length",
        });
    }
    Ok(prototypes
        .means
        .iter()
        .map(|mu| euclidean(features, mu))
        .collect())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Per-segment distances to every class prototype, averaged across the
/// segments. Used for layer-wise features where each layer contributes one
/// segment.
pub fn delta_vector_segmented(
    features: &[f64],
    prototypes: &ClassPrototypes,
    segments: &[usize],
) -> Result<Vec<f64>> {
    if features.len() != prototypes.dim() || segments.iter().sum::<usize>() != features.len() {
        return Err(Error::ShapeMismatch {
            expected: prototypes.dim(),
            got: features.len(),
            context: "segmented delta feature length",
        });
    }
    let c = prototypes.num_classes();
    let mut deltas = vec![0.0f64; c];
    let mut offset = 0usize;
    for &len in segments {
        let range = offset..offset + len;
        for (j, mu) in prototypes.means.iter().enumerate() {
            deltas[j] += euclidean(&features[range.clone()], &mu[range.clone()]);
        }
        offset += len;
    }
    for d in &mut deltas {
        *d /= segments.len() as f64;
    }
    Ok(deltas)
}

/// Outcome of one detection trial: per-dimension KS p-values and the
/// Bonferroni-corrected verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrialResult {
    pub p_values: Vec<f64>,
    pub detected: bool,
    pub min_p: f64,
}

/// Runs a two-sample KS test per feature dimension; a shift is declared if
/// any p-value falls below `0.05 / d`.
pub fn detect_shift(clean: &[Vec<f64>], test: &[Vec<f64>]) -> Result<ShiftTrialResult> {
    if clean.is_empty() || test.is_empty() {
        return Err(Error::EmptySample);
    }
    if clean.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: test.len(),
        });
    }
    let d = clean[0].len();
    if d == 0 || test[0].len() != d {
        return Err(Error::ShapeMismatch {
            expected: d.max(1),
            got: test[0].len(),
            context: "delta dimensions",
        });
    }
    let mut p_values = Vec::with_capacity(d);
    for dim in 0..d {
        let xs: Vec<f64> = clean.iter().map(|row| row[dim]).collect();
        let ys: Vec<f64> = test.iter().map(|row| row[dim]).collect();
        p_values.push(ks_two_sample(&xs, &ys)?.p_value);
    }
    let min_p = p_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ShiftTrialResult {
        detected: min_p < 0.05 / d as f64,
        p_values,
        min_p,
    })
}

/// Feature extraction methods compared by the detection protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Softmax,
    Tu,
    Magdiff,
    Dgp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Softmax, Method::Tu, Method::Magdiff, Method::Dgp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Softmax => "softmax",
            Method::Tu => "tu",
            Method::Magdiff => "magdiff",
            Method::Dgp => "dgp",
        }
    }

    /// Default layer standardisation: on for DGP (its defining transform),
    /// off for plain TU; the experiment config can override both ablations.
    pub fn default_standardise(self) -> bool {
        matches!(self, Method::Dgp)
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "softmax" => Ok(Method::Softmax),
            "tu" => Ok(Method::Tu),
            "magdiff" => Ok(Method::Magdiff),
            "dgp" => Ok(Method::Dgp),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

fn extract_features(
    method: Method,
    net: &Network,
    x: &[f64],
    standardise: bool,
) -> Result<Vec<f64>> {
    Ok(match method {
        Method::Softmax => softmax_feature_vector(net, x)?.values,
        Method::Tu => tu_features(net, x, standardise)?.values,
        Method::Magdiff => magdiff_features(net, x)?.values,
        Method::Dgp => sample_weighted_dgp_features(net, x, standardise)?.values,
    })
}

/// Configuration of a detection experiment over the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub corruption: CorruptionKind,
    pub table: DatasetTable,
    pub intensity_levels: Vec<u8>,
    /// Ratios of corrupted samples per test batch; 0 gives the clean-vs-
    /// clean calibration cell.
    pub corrupted_ratios: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub image_shape: (usize, usize),
    /// Labeled samples used for class prototypes.
    pub prototype_count: usize,
    /// Layer standardisation for TU/DGP features.
    pub standardise: bool,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(
        method: Method,
        corruption: CorruptionKind,
        image_shape: (usize, usize),
        seed: u64,
    ) -> Self {
        Self {
            method,
            corruption,
            table: DatasetTable::Mnist,
            intensity_levels: (1..=6).collect(),
            corrupted_ratios: vec![0.25, 0.5, 0.75, 1.0],
            sample_sizes: vec![10, 20, 50, 100, 200],
            trials: 100,
            image_shape,
            prototype_count: 1000,
            standardise: method.default_standardise(),
            seed,
        }
    }
}

/// One grid cell of the detection-ratio table.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRow {
    pub method: Method,
    pub corruption: CorruptionKind,
    pub intensity_level: u8,
    pub corrupted_ratio: f64,
    pub n: usize,
    pub trials: usize,
    pub detection_ratio: f64,
}

/// Runs the detection protocol: disjoint prototype/clean/test splits from a
/// seeded shuffle, per-trial sampling of `n` clean and `n` test batches
/// (the test batch corrupted at the requested ratio), feature extraction,
/// distance vectors against the prototypes, and Bonferroni-corrected KS
/// tests. Trials run in parallel; each derives its own RNG stream, so the
/// output is schedule-independent.
pub fn run_detection_experiment(
    net: &Network,
    data: &LabeledDataset,
    cfg: &ExperimentConfig,
) -> Result<Vec<DetectionRow>> {
    if cfg.trials == 0 {
        return Err(Error::EmptyStudy);
    }
    let max_n = cfg.sample_sizes.iter().copied().max().unwrap_or(0);
    if max_n == 0 {
        return Err(Error::EmptySample);
    }
    let (h, w) = cfg.image_shape;
    if h * w != data.feature_dim() {
        return Err(Error::BadShape {
            expected: data.feature_dim(),
            got: h * w,
        });
    }
    let needed = cfg.prototype_count + 2 * max_n;
    if data.len() < needed {
        return Err(Error::TooFewSamples {
            got: data.len(),
            need: needed,
        });
    }

    // Disjoint splits from a seeded shuffle.
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut split_rng = rng_from_seed(derive_seed(cfg.seed, 0));
    use rand::seq::SliceRandom;
    order.shuffle(&mut split_rng);
    let prototype_idx = &order[..cfg.prototype_count];
    let rest = &order[cfg.prototype_count..];
    let clean_pool: Vec<usize> = rest[..rest.len() / 2].to_vec();
    let test_pool: Vec<usize> = rest[rest.len() / 2..].to_vec();

    let prototypes = if cfg.method == Method::Softmax {
        None
    } else {
        let feats: Vec<Vec<f64>> = prototype_idx
            .par_iter()
            .map(|&i| extract_features(cfg.method, net, &data.features()[i], cfg.standardise))
            .collect::<Result<_>>()?;
        let labels: Vec<usize> = prototype_idx.iter().map(|&i| data.labels()[i]).collect();
        Some(build_prototypes(&feats, &labels, data.num_classes())?)
    };
    let segments = tu_segments(net);

    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &level in &cfg.intensity_levels {
        let corruption = corruption_for(cfg.table, cfg.corruption, level);
        for &ratio in &cfg.corrupted_ratios {
            for &n in &cfg.sample_sizes {
                cell += 1;
                let cell_seed = derive_seed(cfg.seed, cell);
                let detections: Result<Vec<bool>> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng =
                            rng_from_seed(derive_seed(cell_seed, trial as u64));
                        run_single_trial(
                            net,
                            data,
                            cfg,
                            prototypes.as_ref(),
                            &segments,
                            &clean_pool,
                            &test_pool,
                            &corruption,
                            ratio,
                            n,
                            &mut rng,
                        )
                    })
                    .collect();
                let detections = detections?;
                let hits = detections.iter().filter(|&&d| d).count();
                rows.push(DetectionRow {
                    method: cfg.method,
                    corruption: cfg.corruption,
                    intensity_level: level,
                    corrupted_ratio: ratio,
                    n,
                    trials: cfg.trials,
                    detection_ratio: hits as f64 / cfg.trials as f64,
                });
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_single_trial(
    net: &Network,
    data: &LabeledDataset,
    cfg: &ExperimentConfig,
    prototypes: Option<&ClassPrototypes>,
    segments: &[usize],
    clean_pool: &[usize],
    test_pool: &[usize],
    corruption: &Corruption,
    ratio: f64,
    n: usize,
    rng: &mut SeededRng,
) -> Result<bool> {
    let clean_pick = sample_indices(rng, clean_pool.len(), n.min(clean_pool.len()));
    let test_pick = sample_indices(rng, test_pool.len(), n.min(test_pool.len()));
    let corrupt_count = (ratio * n as f64).round() as usize;

    let mut clean_rows = Vec::with_capacity(n);
    for i in clean_pick.iter() {
        let x = &data.features()[clean_pool[i]];
        clean_rows.push(trial_representation(cfg, net, x, prototypes, segments)?);
    }
    let mut test_rows = Vec::with_capacity(n);
    for (k, i) in test_pick.iter().enumerate() {
        let x = &data.features()[test_pool[i]];
        let x = if k < corrupt_count {
            corrupt(x, cfg.image_shape, corruption, rng.gen::<u64>())?
        } else {
            x.clone()
        };
        test_rows.push(trial_representation(cfg, net, &x, prototypes, segments)?);
    }
    Ok(detect_shift(&clean_rows, &test_rows)?.detected)
}

/// The per-sample vector entering the KS tests: raw softmax probabilities
/// for the softmax method, distance vectors against the class prototypes
/// for everything else (segment-averaged for TU).
fn trial_representation(
    cfg: &ExperimentConfig,
    net: &Network,
    x: &[f64],
    prototypes: Option<&ClassPrototypes>,
    segments: &[usize],
) -> Result<Vec<f64>> {
    let features = extract_features(cfg.method, net, x, cfg.standardise)?;
    match cfg.method {
        Method::Softmax => Ok(features),
        Method::Tu => delta_vector_segmented(&features, prototypes.unwrap(), segments),
        Method::Magdiff | Method::Dgp => delta_vector(&features, prototypes.unwrap()),
    }
}
