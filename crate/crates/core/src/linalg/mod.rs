//! Dense matrices, the ridge pseudo-inverse solve, and the sparse
//! autoencoder that produces enhancement-layer weights.

mod autoencoder;
mod matrix;
mod solve;

pub use autoencoder::{
    autoencoder_objective, train_sparse_autoencoder, AutoencoderFit, SparseAutoencoderConfig,
    DECODER_RIDGE,
};
pub use matrix::Matrix;
pub use solve::{ridge_pseudoinverse_solve, Cholesky};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Enhancement-node activation: elementwise `tanh(x · w_enc)`.
pub fn enhance(x: &Matrix, w_enc: &Matrix) -> Result<Matrix> {
    enhance_with(x, w_enc, Execution::default())
}

pub fn enhance_with(x: &Matrix, w_enc: &Matrix, exec: Execution) -> Result<Matrix> {
    let mut z = x.matmul_with(w_enc, exec)?;
    let cols = z.cols();
    exec.for_each_chunk(z.data_mut(), cols.max(1), |_, row| {
        row.iter_mut().for_each(|v| *v = v.tanh())
    });
    Ok(z)
}

/// Horizontal concatenation in block order.
pub fn concat_columns(blocks: &[&Matrix]) -> Result<Matrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::InvalidParameter("no blocks to concatenate".into()));
    };
    let rows = first.rows();
    if let Some(bad) = blocks.iter().find(|b| b.rows() != rows) {
        return Err(Error::DimensionMismatch(format!(
            "cannot concatenate blocks with {} and {} rows",
            rows,
            bad.rows()
        )));
    }
    let cols: usize = blocks.iter().map(|b| b.cols()).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for b in blocks {
            data.extend_from_slice(b.row(r));
        }
    }
    Matrix::new(rows, cols, data)
}
