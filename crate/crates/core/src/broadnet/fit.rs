use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{argmax_labels, BroadNetConfig, BroadNetModel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::eval::{confusion, f_scores};
use crate::exec::Execution;
use crate::imagery::{LabeledDataset, Standardization};
use crate::linalg::{
    concat_columns, enhance, ridge_pseudoinverse_solve, train_sparse_autoencoder, Matrix,
};
use crate::seed::derive_seed;

/// True once the latest AFS gain falls below `epsilon`. Needs two entries.
pub fn should_stop(trace: &[f64], epsilon: f64) -> bool {
    match trace {
        [.., prev, last] => last - prev < epsilon,
        _ => false,
    }
}

/// n×2 targets with a 1 in the column of each row's class.
pub fn one_hot(labels: &[u8]) -> Matrix {
    Matrix::from_fn(labels.len(), NUM_CLASSES, |r, c| {
        if labels[r] as usize == c {
            1.0
        } else {
            0.0
        }
    })
}

/// Assigns each row a fold in `0..folds`, dealing shuffled members of each
/// class round-robin so every fold sees both classes.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.cols(), |r, c| m.get(rows[r], c))
}

/// Mean over folds of the held-out AFS when only the output weights are
/// re-solved on the remaining folds.
pub fn cross_validated_afs(
    features: &Matrix,
    labels: &[u8],
    folds: &[usize],
    n_folds: usize,
    lambda: f64,
) -> Result<f64> {
    let per_fold = Execution::default().map_range(n_folds, |f| -> Result<f64> {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..labels.len()).partition(|&i| folds[i] == f);
        let train_y: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let w =
            ridge_pseudoinverse_solve(&select_rows(features, &train), &one_hot(&train_y), lambda)?;
        let scores = select_rows(features, &test).matmul(&w)?;
        let truth: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        Ok(f_scores(&confusion(&truth, &argmax_labels(&scores))?).afs)
    });
    let mut total = 0.0;
    for afs in per_fold {
        total += afs?;
    }
    Ok(total / n_folds as f64)
}

/// Grows enhancement layers until the cross-validated AFS stops improving
/// by `afs_epsilon` or `max_layers` is reached, then solves the output
/// weights on the full training set.
pub fn fit(config: &BroadNetConfig, train: &LabeledDataset) -> Result<BroadNetModel> {
    config.validate()?;
    for class in [0u8, 1] {
        let count = train.class_count(class);
        if count < config.cv_folds {
            return Err(Error::InsufficientClassSamples {
                class,
                count,
                required: config.cv_folds,
            });
        }
    }
    let standardization = Standardization::fit(train.patterns())?;
    let input = standardization.apply_dataset(train).to_matrix();
    let labels = train.labels();
    let targets = one_hot(labels);
    let folds = stratified_folds(labels, config.cv_folds, derive_seed(config.seed, 0xF01D));

    let mut blocks = vec![input];
    let mut layers = Vec::new();
    let mut trace = Vec::new();
    for k in 1..=config.max_layers {
        let width = config.layer_width(k);
        let ae = crate::linalg::SparseAutoencoderConfig {
            seed: derive_seed(config.autoencoder.seed, k as u64),
            ..config.autoencoder
        };
        let previous = blocks.last().expect("input block");
        let encoder = train_sparse_autoencoder(previous, width, &ae)?.encoder;
        let activations = enhance(previous, &encoder)?;
        blocks.push(activations);
        layers.push(encoder);

        let features = concat_columns(&blocks.iter().collect::<Vec<_>>())?;
        trace.push(cross_validated_afs(
            &features,
            labels,
            &folds,
            config.cv_folds,
            config.ridge_lambda,
        )?);
        if should_stop(&trace, config.afs_epsilon) {
            break;
        }
    }
    let features = concat_columns(&blocks.iter().collect::<Vec<_>>())?;
    let output_weights = ridge_pseudoinverse_solve(&features, &targets, config.ridge_lambda)?;
    BroadNetModel::from_parts(*config, standardization, layers, output_weights, trace)
}
