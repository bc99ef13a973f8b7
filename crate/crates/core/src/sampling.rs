//! Drawing weight points from the data and assembling their weighted
//! covariances.
//!
//! Weight points are data rows drawn without replacement. Candidates are
//! fixed up front from the seed (the first `wanted` are the initial draws, the
//! rest serve as replacements), so the accepted set depends only on the seed,
//! the row count and the data, never on thread scheduling.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::weighted_stats::{
    effective_sample_size, gaussian_log_weights, weighted_covariance, DataMatrix, SpdMatrix,
};

#[derive(Debug, Clone)]
pub struct WeightPoint {
    /// Row of the data used as the Gaussian centre.
    pub row: usize,
    pub center: DVector<f64>,
    pub ess: f64,
    pub covariance: SpdMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct Draw {
    pub points: Vec<WeightPoint>,
    pub rejected: usize,
}

pub(crate) struct DrawPlan<'a> {
    pub data: &'a DataMatrix,
    pub sigma: &'a SpdMatrix,
    pub wanted: usize,
    pub seed: u64,
    pub ess_floor: f64,
    pub max_redraws: usize,
}

/// Row order in which weight-point candidates are tried.
pub(crate) fn candidate_rows(k: usize, wanted: usize, max_redraws: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    let amount = wanted.saturating_add(max_redraws).min(k);
    rand::seq::index::sample(&mut rng, k, amount).into_vec()
}

impl DrawPlan<'_> {
    /// Accepts candidates in order until `wanted` survive. `finish` may adjust
    /// or veto a weighted covariance; a veto counts as a rejection.
    pub fn run<F>(&self, finish: F) -> Result<Draw>
    where
        F: Fn(SpdMatrix) -> Option<SpdMatrix> + Sync,
    {
        let candidates = candidate_rows(
            self.data.nsamples(),
            self.wanted,
            self.max_redraws,
            self.seed,
        );
        let mut points = Vec::with_capacity(self.wanted);
        let mut rejected = 0;
        let mut next = 0;
        while points.len() < self.wanted && next < candidates.len() {
            let batch_len = (self.wanted - points.len()).min(candidates.len() - next);
            let batch = &candidates[next..next + batch_len];
            next += batch_len;
            let evaluated: Vec<Result<Option<WeightPoint>>> = batch
                .par_iter()
                .map(|&row| self.evaluate(row, &finish))
                .collect();
            for item in evaluated {
                match item? {
                    Some(p) => points.push(p),
                    None => rejected += 1,
                }
            }
        }
        Ok(Draw { points, rejected })
    }

    fn evaluate<F>(&self, row: usize, finish: &F) -> Result<Option<WeightPoint>>
    where
        F: Fn(SpdMatrix) -> Option<SpdMatrix>,
    {
        let center = self.data.row(row);
        let weights = gaussian_log_weights(self.data, &center, self.sigma)?;
        let ess = effective_sample_size(&weights);
        if !(ess >= self.ess_floor) {
            return Ok(None);
        }
        let cov = match weighted_covariance(self.data, &weights) {
            Ok(c) => c,
            Err(Error::WeightUnderflow { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(finish(cov).map(|covariance| WeightPoint {
            row,
            center,
            ess,
            covariance,
        }))
    }
}
