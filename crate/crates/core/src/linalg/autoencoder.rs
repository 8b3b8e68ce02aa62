//! Linear sparse autoencoder trained by alternating a closed-form decoder
//! update with proximal-gradient (soft-thresholding) steps on the encoder.
//!
//! Objective, for inputs `X` (n×d), encoder `W` (d×m), decoder `D` (m×d):
//!
//! ```text
//! F(W, D) = ‖X W D − X‖²_F / (2n) + (μ/2)‖D‖²_F + l1 · ‖W‖₁
//! ```
//!
//! with `μ = DECODER_RIDGE`. Every term is evaluated through the Gram
//! matrix `XᵀX`, so iterations cost O(d²m) regardless of n.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cholesky, Matrix};
use crate::error::{Error, Result};

/// Ridge weight on the decoder; keeps the decoder solve well posed when
/// encoder columns vanish.
pub const DECODER_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseAutoencoderConfig {
    pub l1_weight: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub seed: u64,
}

impl Default for SparseAutoencoderConfig {
    fn default() -> Self {
        SparseAutoencoderConfig {
            l1_weight: 1e-3,
            max_iterations: 100,
            step_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl SparseAutoencoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l1_weight >= 0.0 && self.l1_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "l1 weight must be finite and non-negative, got {}",
                self.l1_weight
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step tolerance must be positive, got {}",
                self.step_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AutoencoderFit {
    /// d×m encoder; becomes the enhancement-layer weights.
    pub encoder: Matrix,
    /// m×d decoder.
    pub decoder: Matrix,
    /// Objective after initialization and after every accepted iteration.
    pub objectives: Vec<f64>,
}

/// Largest number of step halvings tried before giving up on an iteration.
const MAX_BACKTRACKS: usize = 30;

pub fn train_sparse_autoencoder(
    x: &Matrix,
    out_dim: usize,
    cfg: &SparseAutoencoderConfig,
) -> Result<AutoencoderFit> {
    cfg.validate()?;
    if out_dim == 0 {
        return Err(Error::InvalidParameter(
            "autoencoder width must be at least 1".into(),
        ));
    }
    if x.rows() == 0 {
        return Err(Error::InvalidParameter(
            "autoencoder needs at least one sample".into(),
        ));
    }
    if !x.is_finite() {
        return Err(Error::NonFiniteInput("autoencoder input"));
    }
    let n = x.rows() as f64;
    let d = x.cols();
    let gram = x.t_matmul(x)?;
    let gram_radius = gram.spd_spectral_radius();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = Matrix::from_fn(d, out_dim, |_, _| rng.random_range(-1.0..=1.0));
    let mut dec = solve_decoder(&gram, &w, n)?;
    let mut obj = objective(&gram, &w, &dec, n, cfg.l1_weight)?;
    let mut objectives = vec![obj];

    for _ in 0..cfg.max_iterations {
        let grad = encoder_gradient(&gram, &w, &dec, n)?;
        let dd_t = dec.matmul(&dec.transpose())?;
        let lipschitz = gram_radius / n * dd_t.spd_spectral_radius();
        if lipschitz.is_nan() || lipschitz <= 0.0 {
            // Zero decoder: the smooth term no longer depends on W.
            break;
        }
        let mut step = 1.0 / lipschitz;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = Matrix::from_fn(d, out_dim, |r, c| {
                soft_threshold(w.get(r, c) - step * grad.get(r, c), step * cfg.l1_weight)
            });
            let cand_dec = solve_decoder(&gram, &cand, n)?;
            let cand_obj = objective(&gram, &cand, &cand_dec, n, cfg.l1_weight)?;
            if cand_obj <= obj {
                accepted = Some((cand, cand_dec, cand_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((nw, ndec, nobj)) = accepted else {
            break;
        };
        let rel = (obj - nobj) / obj.abs().max(f64::MIN_POSITIVE);
        w = nw;
        dec = ndec;
        obj = nobj;
        objectives.push(obj);
        if rel < cfg.step_tolerance {
            break;
        }
    }
    Ok(AutoencoderFit {
        encoder: w,
        decoder: dec,
        objectives,
    })
}

/// Evaluates the autoencoder objective directly from the data matrix.
pub fn autoencoder_objective(
    x: &Matrix,
    encoder: &Matrix,
    decoder: &Matrix,
    l1_weight: f64,
) -> Result<f64> {
    let recon = x.matmul(encoder)?.matmul(decoder)?;
    let err = recon.sub(x)?.frobenius_norm();
    let dn = decoder.frobenius_norm();
    Ok(err * err / (2.0 * x.rows() as f64)
        + 0.5 * DECODER_RIDGE * dn * dn
        + l1_weight * encoder.l1_norm())
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// argmin_D of the objective for fixed W: `(WᵀGW/n + μI) D = WᵀG/n`.
fn solve_decoder(gram: &Matrix, w: &Matrix, n: f64) -> Result<Matrix> {
    let wt_g = w.t_matmul(gram)?.scale(1.0 / n);
    let mut lhs = wt_g.matmul(w)?;
    lhs.add_diagonal(DECODER_RIDGE);
    Cholesky::factor(&lhs)?.solve(&wt_g)
}

fn residual_map(w: &Matrix, dec: &Matrix) -> Result<Matrix> {
    let mut m = w.matmul(dec)?;
    m.add_diagonal(-1.0);
    Ok(m)
}

fn objective(gram: &Matrix, w: &Matrix, dec: &Matrix, n: f64, l1: f64) -> Result<f64> {
    // ‖X(WD − I)‖² = tr(Mᵀ G M)
    let m = residual_map(w, dec)?;
    let gm = gram.matmul(&m)?;
    let sq: f64 = m.data().iter().zip(gm.data()).map(|(a, b)| a * b).sum();
    let dn = dec.frobenius_norm();
    Ok(sq.max(0.0) / (2.0 * n) + 0.5 * DECODER_RIDGE * dn * dn + l1 * w.l1_norm())
}

/// ∇_W of the smooth part: `G (WD − I) Dᵀ / n`.
fn encoder_gradient(gram: &Matrix, w: &Matrix, dec: &Matrix, n: f64) -> Result<Matrix> {
    let m = residual_map(w, dec)?;
    Ok(gram.matmul(&m)?.matmul(&dec.transpose())?.scale(1.0 / n))
}
