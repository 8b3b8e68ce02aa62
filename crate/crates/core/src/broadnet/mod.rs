//! Broad learning classifier with recursively grown enhancement layers.
//!
//! Layer 0 is the standardized 9-wide input. Each enhancement layer `k` is
//! `tanh(H_{k-1} · W_k)` where `W_k` is the encoder of a sparse autoencoder
//! trained on the previous layer's activations, and its width is the
//! previous enhancement width scaled by the compression rate. The output
//! layer reads the concatenation `[input | layer 1 | … | layer L]` through
//! weights obtained from a ridge pseudo-inverse solve against one-hot
//! targets.

mod fit;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{Pattern, Standardization, PATTERN_DIM};
use crate::linalg::{concat_columns, enhance, Matrix, SparseAutoencoderConfig};

pub use fit::{cross_validated_afs, fit, one_hot, should_stop, stratified_folds};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};

/// Number of output classes (unchanged, changed).
pub const NUM_CLASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadNetConfig {
    pub max_layers: usize,
    /// Width of a new layer relative to the previous one, in (0, 1].
    pub compression: f64,
    pub first_layer_width: usize,
    /// Growth stops once the cross-validated AFS gains less than this
    /// (percentage points).
    pub afs_epsilon: f64,
    pub cv_folds: usize,
    pub ridge_lambda: f64,
    pub autoencoder: SparseAutoencoderConfig,
    pub seed: u64,
}

impl Default for BroadNetConfig {
    fn default() -> Self {
        BroadNetConfig {
            max_layers: 5,
            compression: 0.9,
            first_layer_width: 8,
            afs_epsilon: 0.5,
            cv_folds: 3,
            ridge_lambda: 1e-6,
            autoencoder: SparseAutoencoderConfig::default(),
            seed: 0,
        }
    }
}

impl BroadNetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.max_layers == 0 {
            return bad("max_layers must be at least 1".into());
        }
        if !(self.compression > 0.0 && self.compression <= 1.0) {
            return bad(format!("compression {} outside (0, 1]", self.compression));
        }
        if self.first_layer_width == 0 {
            return bad("first_layer_width must be at least 1".into());
        }
        if !(self.afs_epsilon > 0.0 && self.afs_epsilon.is_finite()) {
            return bad(format!(
                "afs_epsilon must be positive, got {}",
                self.afs_epsilon
            ));
        }
        if self.cv_folds < 2 {
            return bad(format!(
                "cv_folds must be at least 2, got {}",
                self.cv_folds
            ));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return bad(format!(
                "ridge_lambda must be non-negative, got {}",
                self.ridge_lambda
            ));
        }
        self.autoencoder.validate()
    }

    /// Width of enhancement layer `layer` (1-based).
    pub fn layer_width(&self, layer: usize) -> usize {
        (1..layer).fold(self.first_layer_width, |w, _| {
            next_width(w, self.compression)
        })
    }
}

/// `max(1, ⌊compression · previous⌋)`, tolerant of binary rounding in the
/// product (0.9 · 90 must give 81).
pub fn next_width(previous: usize, compression: f64) -> usize {
    ((compression * previous as f64 + 1e-9).floor() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadNetModel {
    config: BroadNetConfig,
    standardization: Standardization,
    layers: Vec<Matrix>,
    output_weights: Matrix,
    trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u8>,
    /// n×2 raw linear outputs.
    pub scores: Matrix,
}

impl BroadNetModel {
    pub(crate) fn from_parts(
        config: BroadNetConfig,
        standardization: Standardization,
        layers: Vec<Matrix>,
        output_weights: Matrix,
        trace: Vec<f64>,
    ) -> Result<Self> {
        let mut prev = PATTERN_DIM;
        for (k, layer) in layers.iter().enumerate() {
            if layer.rows() != prev {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} expects {} inputs but previous width is {prev}",
                    k + 1,
                    layer.rows()
                )));
            }
            prev = layer.cols();
        }
        let width = PATTERN_DIM + layers.iter().map(Matrix::cols).sum::<usize>();
        if output_weights.rows() != width || output_weights.cols() != NUM_CLASSES {
            return Err(Error::DimensionMismatch(format!(
                "output weights are {}x{}, expected {width}x{NUM_CLASSES}",
                output_weights.rows(),
                output_weights.cols()
            )));
        }
        if trace.len() != layers.len() {
            return Err(Error::LengthMismatch {
                left: trace.len(),
                right: layers.len(),
            });
        }
        Ok(BroadNetModel {
            config,
            standardization,
            layers,
            output_weights,
            trace,
        })
    }

    pub fn config(&self) -> &BroadNetConfig {
        &self.config
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    /// Encoder matrices; layer `k` maps layer `k−1` activations.
    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        self.layers.iter().map(Matrix::cols).collect()
    }

    pub fn output_weights(&self) -> &Matrix {
        &self.output_weights
    }

    /// Cross-validated AFS after each layer was added.
    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    /// Width of the concatenated feature vector.
    pub fn feature_width(&self) -> usize {
        self.output_weights.rows()
    }

    pub fn forward_features(&self, x: &Matrix) -> Result<Matrix> {
        self.forward_features_upto(x, self.layers.len())
    }

    /// Standardizes raw patterns and returns `[input | layer 1 | … | layer n_layers]`.
    pub fn forward_features_upto(&self, x: &Matrix, n_layers: usize) -> Result<Matrix> {
        if x.cols() != PATTERN_DIM {
            return Err(Error::DimensionMismatch(format!(
                "expected {PATTERN_DIM}-wide patterns, got {}",
                x.cols()
            )));
        }
        let s = &self.standardization;
        let input = Matrix::from_fn(x.rows(), PATTERN_DIM, |r, c| {
            (x.get(r, c) - s.mean[c]) / s.std[c]
        });
        let mut blocks = vec![input];
        for enc in self.layers.iter().take(n_layers) {
            let next = enhance(blocks.last().expect("input block"), enc)?;
            blocks.push(next);
        }
        let refs: Vec<&Matrix> = blocks.iter().collect();
        concat_columns(&refs)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Prediction> {
        let scores = self.forward_features(x)?.matmul(&self.output_weights)?;
        Ok(Prediction {
            labels: argmax_labels(&scores),
            scores,
        })
    }

    pub fn predict_patterns(&self, patterns: &[Pattern]) -> Result<Prediction> {
        let x = Matrix::from_fn(patterns.len(), PATTERN_DIM, |r, c| patterns[r][c]);
        self.predict(&x)
    }
}

/// Row-wise argmax over two score columns; ties go to class 0.
pub fn argmax_labels(scores: &Matrix) -> Vec<u8> {
    (0..scores.rows())
        .map(|r| u8::from(scores.get(r, 1) > scores.get(r, 0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_recurrence() {
        let cfg = BroadNetConfig::default();
        assert_eq!(
            (1..=3).map(|k| cfg.layer_width(k)).collect::<Vec<_>>(),
            vec![8, 7, 6]
        );
        assert_eq!(next_width(100, 0.9), 90);
        assert_eq!(next_width(90, 0.9), 81);
        assert_eq!(next_width(10, 0.7), 7);
        assert_eq!(next_width(1, 0.7), 1);
        assert_eq!(next_width(5, 1.0), 5);
    }

    #[test]
    fn argmax_tie_goes_to_unchanged() {
        let s = Matrix::new(3, 2, vec![0.9, 0.1, 0.5, 0.5, 0.2, 0.3]).unwrap();
        assert_eq!(argmax_labels(&s), vec![0, 0, 1]);
    }

    #[test]
    fn zero_layer_model_passes_standardized_input() {
        let mut st = Standardization::identity();
        st.mean[0] = 1.0;
        st.std[0] = 2.0;
        let model = BroadNetModel::from_parts(
            BroadNetConfig::default(),
            st,
            vec![],
            Matrix::zeros(PATTERN_DIM, 2),
            vec![],
        )
        .unwrap();
        let x = Matrix::from_fn(2, PATTERN_DIM, |r, c| (r + c) as f64);
        let f = model.forward_features(&x).unwrap();
        assert_eq!(f.cols(), PATTERN_DIM);
        assert_eq!(f.get(1, 0), 0.0);
        assert_eq!(f.get(1, 3), 4.0);
        assert!(model.forward_features(&Matrix::zeros(1, 8)).is_err());
    }

    #[test]
    fn from_parts_checks_shapes() {
        let cfg = BroadNetConfig::default();
        let st = Standardization::identity();
        let l1 = Matrix::zeros(PATTERN_DIM, 4);
        let l2 = Matrix::zeros(4, 3);
        assert!(BroadNetModel::from_parts(
            cfg,
            st,
            vec![l1.clone(), l2.clone()],
            Matrix::zeros(16, 2),
            vec![1.0, 2.0]
        )
        .is_ok());
        assert!(BroadNetModel::from_parts(
            cfg,
            st,
            vec![l2.clone()],
            Matrix::zeros(12, 2),
            vec![1.0]
        )
        .is_err());
        assert!(BroadNetModel::from_parts(
            cfg,
            st,
            vec![l1.clone()],
            Matrix::zeros(12, 2),
            vec![1.0]
        )
        .is_err());
        assert!(
            BroadNetModel::from_parts(cfg, st, vec![l1], Matrix::zeros(13, 2), vec![]).is_err()
        );
    }

    #[test]
    fn config_validation() {
        assert!(BroadNetConfig::default().validate().is_ok());
        for bad in [
            BroadNetConfig {
                max_layers: 0,
                ..Default::default()
            },
            BroadNetConfig {
                compression: 0.0,
                ..Default::default()
            },
            BroadNetConfig {
                compression: 1.1,
                ..Default::default()
            },
            BroadNetConfig {
                afs_epsilon: 0.0,
                ..Default::default()
            },
            BroadNetConfig {
                cv_folds: 1,
                ..Default::default()
            },
            BroadNetConfig {
                first_layer_width: 0,
                ..Default::default()
            },
            BroadNetConfig {
                ridge_lambda: -1.0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
