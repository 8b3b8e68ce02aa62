use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DifferenceImage, LabelGrid};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Width of a pixel's 3×3 neighborhood pattern.
pub const PATTERN_DIM: usize = 9;

pub type Pattern = [f64; PATTERN_DIM];

/// Labeled patterns with optional source pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    patterns: Vec<Pattern>,
    labels: Vec<u8>,
    coords: Option<Vec<(u32, u32)>>,
}

impl LabeledDataset {
    pub fn new(
        patterns: Vec<Pattern>,
        labels: Vec<u8>,
        coords: Option<Vec<(u32, u32)>>,
    ) -> Result<Self> {
        if patterns.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: patterns.len(),
                right: labels.len(),
            });
        }
        if let Some(c) = &coords {
            if c.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    left: c.len(),
                    right: labels.len(),
                });
            }
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} is not 0 or 1"
            )));
        }
        if patterns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("patterns"));
        }
        Ok(LabeledDataset {
            patterns,
            labels,
            coords,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&[(u32, u32)]> {
        self.coords.as_deref()
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Row indices of `class`, ascending.
    pub fn class_indices(&self, class: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Rows at `indices`, in the given order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            patterns: indices.iter().map(|&i| self.patterns[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            coords: self
                .coords
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    /// Appends rows that have no source pixel; drops coordinates.
    pub(crate) fn extend_synthetic(&mut self, rows: Vec<Pattern>, label: u8) {
        self.labels.extend(std::iter::repeat_n(label, rows.len()));
        self.patterns.extend(rows);
        if !self.labels.is_empty() {
            self.coords = None;
        }
    }

    /// Patterns as an n×9 matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.len(), PATTERN_DIM, |r, c| self.patterns[r][c])
    }
}

/// 3×3 neighborhood of every pixel, row-major, replicating edge pixels.
pub fn neighborhood_patterns(diff: &DifferenceImage) -> Vec<Pattern> {
    let (w, h) = (diff.width(), diff.height());
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut p = [0.0; PATTERN_DIM];
            let mut k = 0;
            for dy in [-1isize, 0, 1] {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in [-1isize, 0, 1] {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    p[k] = diff.get(xx, yy);
                    k += 1;
                }
            }
            out.push(p);
        }
    }
    out
}

pub fn extract_patterns(diff: &DifferenceImage, labels: &LabelGrid) -> Result<LabeledDataset> {
    if diff.width() != labels.width() || diff.height() != labels.height() {
        return Err(Error::DimensionMismatch(format!(
            "difference image is {}x{} but labels are {}x{}",
            diff.width(),
            diff.height(),
            labels.width(),
            labels.height()
        )));
    }
    let w = diff.width();
    let coords = (0..diff.height())
        .flat_map(|y| (0..w).map(move |x| (x as u32, y as u32)))
        .collect();
    Ok(LabeledDataset {
        patterns: neighborhood_patterns(diff),
        labels: labels.labels().to_vec(),
        coords: Some(coords),
    })
}

/// Stratified split: per class, `max(1, floor(fraction·count))` rows go to train.
///
/// Both outputs keep the original row order.
pub fn split_dataset(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; data.len()];
    for class in [0u8, 1] {
        let mut idx = data.class_indices(class);
        if idx.len() < 2 {
            return Err(Error::InsufficientClassSamples {
                class,
                count: idx.len(),
                required: 2,
            });
        }
        let n_train = ((train_fraction * idx.len() as f64).floor() as usize).max(1);
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| in_train[i]);
    Ok((data.select(&train), data.select(&test)))
}

/// Per-dimension z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Pattern,
    /// Population standard deviation, with zeros replaced by 1.
    pub std: Pattern,
}

impl Standardization {
    pub fn identity() -> Self {
        Standardization {
            mean: [0.0; PATTERN_DIM],
            std: [1.0; PATTERN_DIM],
        }
    }

    pub fn fit(patterns: &[Pattern]) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot standardize an empty training set".into(),
            ));
        }
        let n = patterns.len() as f64;
        let mut mean = [0.0; PATTERN_DIM];
        for p in patterns {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; PATTERN_DIM];
        for p in patterns {
            for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = [1.0; PATTERN_DIM];
        for (s, v) in std.iter_mut().zip(&var) {
            let sd = (v / n).sqrt();
            if sd > 0.0 {
                *s = sd;
            }
        }
        Ok(Standardization { mean, std })
    }

    pub fn apply(&self, p: &Pattern) -> Pattern {
        let mut out = [0.0; PATTERN_DIM];
        for i in 0..PATTERN_DIM {
            out[i] = (p[i] - self.mean[i]) / self.std[i];
        }
        out
    }

    pub fn apply_dataset(&self, data: &LabeledDataset) -> LabeledDataset {
        LabeledDataset {
            patterns: data.patterns.iter().map(|p| self.apply(p)).collect(),
            labels: data.labels.clone(),
            coords: data.coords.clone(),
        }
    }
}

/// Z-scores `train` with its own statistics and applies the same map to `others`.
pub fn standardize(
    train: &LabeledDataset,
    others: &[&LabeledDataset],
) -> Result<(LabeledDataset, Vec<LabeledDataset>, Standardization)> {
    let stats = Standardization::fit(train.patterns())?;
    let rest = others.iter().map(|d| stats.apply_dataset(d)).collect();
    Ok((stats.apply_dataset(train), rest, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize, values: Vec<f64>) -> DifferenceImage {
        DifferenceImage::new(w, h, values).unwrap()
    }

    fn toy(n0: usize, n1: usize) -> LabeledDataset {
        let n = n0 + n1;
        let patterns = (0..n).map(|i| [i as f64; PATTERN_DIM]).collect();
        let labels = (0..n).map(|i| u8::from(i >= n0)).collect();
        LabeledDataset::new(patterns, labels, None).unwrap()
    }

    #[test]
    fn replicate_padding_at_corner() {
        let d = grid(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let p = neighborhood_patterns(&d);
        assert_eq!(p.len(), 4);
        assert_eq!(p[0], [1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 3.0, 3.0, 4.0]);
        assert_eq!(p[3], [1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn constant_field_gives_constant_patterns() {
        let d = grid(3, 3, vec![2.5; 9]);
        let labels = LabelGrid::new(3, 3, vec![0; 9]).unwrap();
        let data = extract_patterns(&d, &labels).unwrap();
        assert_eq!(data.len(), 9);
        assert_eq!(data.patterns()[4], [2.5; PATTERN_DIM]);
        assert_eq!(data.coords().unwrap()[4], (1, 1));
    }

    #[test]
    fn interior_pattern_is_row_major_window() {
        let d = grid(4, 3, (0..12).map(f64::from).collect());
        let p = neighborhood_patterns(&d);
        // pixel (1,1) sees rows 0..=2, cols 0..=2
        assert_eq!(p[5], [0.0, 1.0, 2.0, 4.0, 5.0, 6.0, 8.0, 9.0, 10.0]);
    }

    #[test]
    fn extract_rejects_size_mismatch() {
        let d = grid(2, 2, vec![0.0; 4]);
        let labels = LabelGrid::new(3, 1, vec![0; 3]).unwrap();
        assert!(matches!(
            extract_patterns(&d, &labels),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn split_counts_follow_floor_rule() {
        let data = toy(100, 10);
        let (train, test) = split_dataset(&data, 0.7, 3).unwrap();
        assert_eq!((train.class_count(0), train.class_count(1)), (70, 7));
        assert_eq!((test.class_count(0), test.class_count(1)), (30, 3));

        let small = toy(2, 2);
        let (train, _) = split_dataset(&small, 0.1, 0).unwrap();
        assert_eq!((train.class_count(0), train.class_count(1)), (1, 1));
    }

    #[test]
    fn split_is_a_seeded_partition() {
        let data = toy(50, 20);
        let (a_train, a_test) = split_dataset(&data, 0.7, 11).unwrap();
        let (b_train, b_test) = split_dataset(&data, 0.7, 11).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);

        let mut ids: Vec<u64> = a_train
            .patterns()
            .iter()
            .chain(a_test.patterns())
            .map(|p| p[0] as u64)
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..70).collect::<Vec<_>>());

        let (c_train, _) = split_dataset(&data, 0.7, 12).unwrap();
        assert_ne!(a_train, c_train);
    }

    #[test]
    fn split_requires_two_per_class() {
        let data = toy(10, 1);
        assert!(matches!(
            split_dataset(&data, 0.7, 0),
            Err(Error::InsufficientClassSamples {
                class: 1,
                count: 1,
                ..
            })
        ));
        assert!(split_dataset(&toy(5, 5), 1.0, 0).is_err());
    }

    #[test]
    fn standardize_examples() {
        let mut a = [3.0; PATTERN_DIM];
        let mut b = [3.0; PATTERN_DIM];
        a[0] = 0.0;
        b[0] = 2.0;
        let train = LabeledDataset::new(vec![a, b], vec![0, 1], None).unwrap();
        let other = LabeledDataset::new(vec![[3.0; PATTERN_DIM]], vec![0], None).unwrap();
        let (t, rest, stats) = standardize(&train, &[&other]).unwrap();
        assert_eq!(t.patterns()[0][0], -1.0);
        assert_eq!(t.patterns()[1][0], 1.0);
        // constant columns: divisor 1, value minus mean
        assert_eq!(stats.std[1], 1.0);
        assert_eq!(t.patterns()[0][1], 0.0);
        assert_eq!(rest[0].patterns()[0][0], 2.0);

        let empty = LabeledDataset::new(vec![], vec![], None).unwrap();
        assert!(standardize(&empty, &[]).is_err());
    }

    #[test]
    fn standardized_train_has_zero_mean() {
        let patterns: Vec<Pattern> = (0..37)
            .map(|i| std::array::from_fn(|d| ((i * (d + 3)) % 11) as f64 * 0.37 + d as f64))
            .collect();
        let labels = (0..37).map(|i| (i % 2) as u8).collect();
        let data = LabeledDataset::new(patterns, labels, None).unwrap();
        let (t, _, _) = standardize(&data, &[]).unwrap();
        for d in 0..PATTERN_DIM {
            let m: f64 = t.patterns().iter().map(|p| p[d]).sum::<f64>() / t.len() as f64;
            assert!(m.abs() < 1e-9);
        }
    }
}
