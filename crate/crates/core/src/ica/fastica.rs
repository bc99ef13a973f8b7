//! Symmetric FastICA with the log-cosh contrast, kept as a comparison
//! baseline.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::{ess_summary, normalize_unmixing, transform, Diagnostics, MweicaOptions, UnmixingResult};
use crate::error::{Error, Result};
use crate::joint_diag::{mean_diag_error, spectrum_diagnostics, DiagSet};
use crate::linalg::inv_sqrt_spd;
use crate::rng;
use crate::sampling::DrawPlan;
use crate::weighted_stats::{sample_covariance, sample_mean, DataMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastIcaOptions {
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FastIcaOptions {
    fn default() -> Self {
        FastIcaOptions {
            seed: 0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

/// `(R Rᵀ)^{-1/2} R`: the nearest matrix with orthonormal rows.
fn decorrelate(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(inv_sqrt_spd(&(r * r.transpose()))? * r)
}

pub fn fastica_baseline(x: &DataMatrix, opts: &FastIcaOptions) -> Result<UnmixingResult> {
    x.require_full_rank_shape()?;
    let (k, d) = (x.nsamples(), x.ndims());
    let mean = sample_mean(x);
    let centered = DataMatrix::new(x.shifted(&mean))?;
    let sigma = sample_covariance(&centered);

    let eig = SymmetricEigen::new(sigma.as_matrix().clone());
    let top = eig.eigenvalues.amax();
    if let Some(c) = eig.eigenvalues.iter().position(|&l| l <= top * 1e-12) {
        return Err(Error::DegenerateData { column: c });
    }
    // Symmetric whitening: Z = C·K has identity covariance.
    let whitening = inv_sqrt_spd(sigma.as_matrix())?;
    let z = centered.values() * &whitening;

    let mut rng = rng::seeded(opts.seed);
    let init = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let mut rotation = decorrelate(&init)?;

    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let y = &z * rotation.transpose();
        let g = y.map(f64::tanh);
        let g_prime_mean: Vec<f64> = g
            .column_iter()
            .map(|c| c.iter().map(|v| 1.0 - v * v).sum::<f64>() / k as f64)
            .collect();
        let mut next = g.transpose() * &z / k as f64;
        for (c, gp) in g_prime_mean.iter().enumerate() {
            let row = rotation.row(c) * *gp;
            let mut target = next.row_mut(c);
            target -= row;
        }
        let next = decorrelate(&next)?;
        let change = (0..d)
            .map(|c| (1.0 - next.row(c).dot(&rotation.row(c)).abs()).abs())
            .fold(0.0_f64, f64::max);
        rotation = next;
        iterations += 1;
        history.push(change);
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let unmixing = normalize_unmixing(&(whitening * rotation.transpose()), x)?;
    let sources = transform(x, &unmixing)?;

    // Score the result on the same weighted-covariance criterion MWeICA
    // minimizes, so residuals are comparable across methods.
    let defaults = MweicaOptions::for_samples(k).with_seed(opts.seed);
    let plan = DrawPlan {
        data: &centered,
        sigma: &sigma,
        wanted: defaults.n_weights,
        seed: opts.seed,
        ess_floor: (d + 1) as f64,
        max_redraws: defaults.max_redraws,
    };
    let draw = plan.run(|cov| cov.cholesky().is_ok().then_some(cov))?;
    if draw.points.is_empty() {
        return Err(Error::TooFewValidWeightPoints {
            found: 0,
            required: 1,
        });
    }
    let set = DiagSet::new(draw.points.iter().map(|p| p.covariance.clone()).collect())?;
    let residual = mean_diag_error(&unmixing, &set)?;
    let spectrum = spectrum_diagnostics(&unmixing, &set);
    let (min_ess, median_ess) = ess_summary(&draw.points);

    Ok(UnmixingResult {
        unmixing,
        sources,
        residual,
        weight_points: draw.points,
        diagnostics: Diagnostics {
            criterion_history: history,
            sweeps_used: iterations,
            converged,
            near_degenerate: spectrum.near_degenerate,
            spectrum,
            rejected_points: draw.rejected,
            min_ess,
            median_ess,
        },
    })
}
