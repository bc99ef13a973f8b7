//! Independence index: the expected diagonalization error of the weighted
//! covariance `cov X_[m]` over centres `m` drawn from the data.
//!
//! The index is zero for data with independent coordinates (every weighted
//! covariance is then diagonal) and grows as the coordinates become
//! dependent. It is invariant under permutation and positive rescaling of
//! the coordinates.

use crate::error::{Error, Result};
use crate::sampling::DrawPlan;
use crate::weighted_stats::{
    diag_error, regularize, sample_covariance, sample_mean, DataMatrix, SpdMatrix,
};
use nalgebra::SymmetricEigen;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub index: f64,
    pub n_used: usize,
    /// Diagonalization error of each accepted weight point, in draw order.
    pub per_point: Vec<f64>,
    /// Data rows used as centres, aligned with `per_point`.
    pub rows: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexOptions {
    pub n: usize,
    pub seed: u64,
    /// `None` means `d + 1`.
    pub ess_floor: Option<f64>,
    pub max_redraws: usize,
}

impl IndexOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        IndexOptions {
            n,
            seed,
            ess_floor: None,
            max_redraws: 64,
        }
    }
}

pub fn independence_index(x: &DataMatrix, n: usize, seed: u64) -> Result<IndexReport> {
    independence_index_with(x, &IndexOptions::new(n, seed))
}

pub fn independence_index_with(x: &DataMatrix, opts: &IndexOptions) -> Result<IndexReport> {
    if opts.n == 0 {
        return Err(Error::InvalidData("index needs at least one weight point".into()));
    }
    x.require_full_rank_shape()?;
    let d = x.ndims();
    let centered = DataMatrix::new(x.shifted(&sample_mean(x)))?;
    let sigma = sample_covariance(&centered);
    let plan = DrawPlan {
        data: &centered,
        sigma: &sigma,
        wanted: opts.n.min(x.nsamples()),
        seed: opts.seed,
        ess_floor: opts.ess_floor.unwrap_or((d + 1) as f64),
        max_redraws: opts.max_redraws,
    };
    let draw = plan.run(definite_or_jittered)?;
    if draw.points.is_empty() {
        return Err(Error::TooFewValidWeightPoints {
            found: 0,
            required: 1,
        });
    }
    let per_point = draw
        .points
        .iter()
        .map(|p| diag_error(&p.covariance))
        .collect::<Result<Vec<_>>>()?;
    let index = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok(IndexReport {
        index,
        n_used: per_point.len(),
        per_point,
        rows: draw.points.iter().map(|p| p.row).collect(),
        seed: opts.seed,
    })
}

/// Keeps strictly definite covariances, nudges those that miss definiteness
/// by rounding only, and rejects the rest.
fn definite_or_jittered(cov: SpdMatrix) -> Option<SpdMatrix> {
    if cov.cholesky().is_ok() {
        return Some(cov);
    }
    let min_eig = SymmetricEigen::new(cov.as_matrix().clone())
        .eigenvalues
        .min();
    if min_eig >= -1e-12 * cov.trace() {
        let jittered = regularize(&cov, 1e-12).ok()?;
        jittered.cholesky().ok().map(|_| jittered)
    } else {
        None
    }
}
