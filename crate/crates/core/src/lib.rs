//! Independent component analysis by approximate joint diagonalization of
//! Gaussian-weighted covariance matrices.
//!
//! If `W` unmixes a random vector `X`, it also diagonalizes the covariance of
//! `X` re-weighted by any Gaussian `N(m, cov X)`. Drawing several centres `mᵢ`
//! from the data and jointly diagonalizing the weighted covariances recovers
//! `W` up to column permutation and scale.
//!
//! ```no_run
//! use mweica::harness::{mix, random_mixing_matrix, synth_sources, SourceKind};
//! use mweica::ica::{mweica, MweicaOptions};
//! use mweica::eval::match_sources;
//!
//! # fn main() -> mweica::Result<()> {
//! let truth = synth_sources(SourceKind::Uniform, 10_000, 2, 7)?.data;
//! let mixed = mix(&truth, &random_mixing_matrix(2, 7, 20.0)?)?;
//! let result = mweica(&mixed, &MweicaOptions::for_samples(10_000).with_seed(7))?;
//! let score = match_sources(&result.sources, &truth)?.mean_abs_congruence;
//! assert!(score > 0.95);
//! # Ok(())
//! # }
//! ```
//!
//! Samples are rows throughout: data is `k × d` and sources are
//! `(X − mean)·W`.

pub mod error;
pub mod eval;
pub mod harness;
pub mod ica;
pub mod independence;
pub mod joint_diag;
pub mod rng;
pub mod sampling;
pub mod weighted_stats;

mod linalg;

pub use error::{Error, Result};
pub use weighted_stats::{DataMatrix, SpdMatrix, WeightVector};
