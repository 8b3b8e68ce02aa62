//! Change detection for co-registered aerial image pairs.
//!
//! The pipeline turns two RGB images into a CIE L*a*b* difference image,
//! extracts 3×3 neighborhood patterns around every pixel, rebalances the
//! labeled patterns to a chosen imbalance ratio, and classifies them with a
//! broad learning network whose enhancement layers are grown one at a time
//! by a sparse autoencoder. Output weights come from a ridge-regularized
//! pseudo-inverse solve; growth stops once the cross-validated average
//! F-score stops improving.
//!
//! Data-parallel kernels run on rayon when the `parallel` feature is on
//! (the default) and fall back to plain loops otherwise. Both paths
//! produce bit-identical results; see [`exec`].

pub mod broadnet;
pub mod error;
pub mod eval;
pub mod exec;
pub mod imagery;
pub mod linalg;
pub mod resample;
mod seed;

pub use error::{Error, Result};
pub use exec::Execution;
pub use seed::derive_seed;
