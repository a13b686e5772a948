//! In-memory labeled datasets with features in `[0, 1]`, plus the synthetic
//! generators used by the desk-scale experiments.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;

/// Feature vectors in `[0, 1]` with nonnegative integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: labels.len(),
            });
        }
        let dim = features[0].len();
        for (row, f) in features.iter().enumerate() {
            if f.len() != dim {
                return Err(Error::ShapeMismatch {
                    expected: dim,
                    got: f.len(),
                    context: "ragged feature rows",
                });
            }
            if let Some(col) = f.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Parse {
                    file: String::from("<memory>"),
                    line: row + 1,
                    column: col + 1,
                    message: format!("feature value {} outside [0, 1]", f[col]),
                });
            }
        }
        let num_classes = labels.iter().max().unwrap() + 1;
        Ok(Self {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }
}

/// Two-dimensional Gaussian blobs around the given centers, clipped to
/// `[0, 1]`. Class `k` uses `centers[k]`.
pub fn synthetic_blobs(
    n_per_class: usize,
    centers: &[Vec<f64>],
    std: f64,
    seed: u64,
) -> LabeledDataset {
    let mut rng = rng_from_seed(seed);
    let mut features = Vec::with_capacity(n_per_class * centers.len());
    let mut labels = Vec::with_capacity(n_per_class * centers.len());
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let point: Vec<f64> = center
                .iter()
                .map(|&c| (c + std * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0))
                .collect();
            features.push(point);
            labels.push(class);
        }
    }
    LabeledDataset::new(features, labels).unwrap()
}

/// 8x8 glyph templates for the ten digits; `#` marks lit pixels.
const DIGIT_GLYPHS: [[&str; 8]; 10] = [
    [
        "..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.",
        "..####..",
    ],
    [
        "...##...", "..###...", ".####...", "...##...", "...##...", "...##...", "...##...",
        ".######.",
    ],
    [
        "..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....", ".##.....",
        ".######.",
    ],
    [
        "..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".....##.", ".##..##.",
        "..####..",
    ],
    [
        "....##..", "...###..", "..####..", ".##.##..", ".######.", "....##..", "....##..",
        "....##..",
    ],
    [
        ".######.", ".##.....", ".##.....", ".#####..", ".....##.", ".....##.", ".##..##.",
        "..####..",
    ],
    [
        "..####..", ".##..##.", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.",
        "..####..",
    ],
    [
        ".######.", ".....##.", "....##..", "....##..", "...##...", "...##...", "..##....",
        "..##....",
    ],
    [
        "..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.", ".##..##.",
        "..####..",
    ],
    [
        "..####..", ".##..##.", ".##..##.", ".##..##.", "..#####.", ".....##.", ".##..##.",
        "..####..",
    ],
];

/// Synthetic 8x8 digit images: glyph templates with a random one-pixel
/// shift and additive Gaussian pixel noise of scale `noise`, clipped to
/// `[0, 1]`. Ten classes, `n_per_class` samples each.
pub fn synthetic_digits(n_per_class: usize, noise: f64, seed: u64) -> LabeledDataset {
    const SIDE: usize = 8;
    let mut rng = rng_from_seed(seed);
    let templates: Vec<Vec<f64>> = DIGIT_GLYPHS
        .iter()
        .map(|glyph| {
            glyph
                .iter()
                .flat_map(|row| row.bytes().map(|b| if b == b'#' { 0.9 } else { 0.05 }))
                .collect()
        })
        .collect();

    let mut features = Vec::with_capacity(10 * n_per_class);
    let mut labels = Vec::with_capacity(10 * n_per_class);
    for (class, template) in templates.iter().enumerate() {
        for _ in 0..n_per_class {
            let dy = rng.gen_range(-1i32..=1);
            let dx = rng.gen_range(-1i32..=1);
            let mut image = vec![0.05f64; SIDE * SIDE];
            for y in 0..SIDE {
                for x in 0..SIDE {
                    let sy = y as i32 - dy;
                    let sx = x as i32 - dx;
                    if (0..SIDE as i32).contains(&sy) && (0..SIDE as i32).contains(&sx) {
                        image[y * SIDE + x] = template[sy as usize * SIDE + sx as usize];
                    }
                }
            }
            for pixel in &mut image {
                *pixel =
                    (*pixel + noise * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0);
            }
            features.push(image);
            labels.push(class);
        }
    }
    LabeledDataset::new(features, labels).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_labeled_per_center() {
        let data = synthetic_blobs(10, &[vec![0.8, 0.2], vec![0.2, 0.8]], 0.05, 1);
        assert_eq!(data.len(), 20);
        assert_eq!(data.num_classes(), 2);
        assert!(data.features().iter().all(|f| f
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v))));
    }

    #[test]
    fn digits_have_ten_separable_classes() {
        let data = synthetic_digits(5, 0.12, 3);
        assert_eq!(data.len(), 50);
        assert_eq!(data.num_classes(), 10);
        assert_eq!(data.feature_dim(), 64);
        let again = synthetic_digits(5, 0.12, 3);
        assert_eq!(data, again);
    }

    #[test]
    fn dataset_rejects_out_of_range_features() {
        let err = LabeledDataset::new(vec![vec![0.5, 1.5]], vec![0]);
        assert!(matches!(err, Err(Error::Parse { line: 1, column: 2, .. })));
    }
}
