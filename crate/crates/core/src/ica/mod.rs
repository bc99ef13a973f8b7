//! Unmixing by multiple Gaussian data-weightings.
//!
//! Samples are rows, so the column-vector statement "`WᵀX` has independent
//! components" reads `S = (X − mean)·W` here: each recovered source is the
//! projection of the centred data on one column of `W`.
//!
//! [`mweica`] draws `n` data rows as Gaussian centres `mᵢ`, weights the data
//! by `N(mᵢ, cov X)`, and jointly diagonalizes the weighted covariances.
//! [`weica`] is the two-centre special case, solved in closed form.
//! [`fastica_baseline`] is a symmetric FastICA used only for comparison.

mod fastica;

pub use fastica::{fastica_baseline, FastIcaOptions};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::joint_diag::{
    mean_diag_error, pham_joint_diag, simultaneous_diag_pair, DiagResult, DiagSet, PhamOptions,
    SpectrumDiagnostics,
};
use crate::linalg::fix_column_signs;
use crate::sampling::{DrawPlan, WeightPoint};
use crate::weighted_stats::{sample_covariance, sample_mean, DataMatrix};

/// Upper bound on the default number of weight points.
pub const DEFAULT_MAX_WEIGHTS: usize = 32;

/// Spectral separation below `SEPARATION_NOISE / √ESS` (median ESS of the
/// weight points) is indistinguishable from sampling noise in the weighted
/// covariances.
pub const SEPARATION_NOISE: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MweicaOptions {
    pub n_weights: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Effective-sample-size floor for a weight point; `None` means `d + 1`.
    pub ess_floor: Option<f64>,
    pub max_redraws: usize,
    pub precondition: bool,
}

impl Default for MweicaOptions {
    fn default() -> Self {
        let pham = PhamOptions::default();
        MweicaOptions {
            n_weights: DEFAULT_MAX_WEIGHTS,
            seed: 0,
            tol: pham.tol,
            max_sweeps: pham.max_sweeps,
            ess_floor: None,
            max_redraws: 64,
            precondition: pham.precondition,
        }
    }
}

impl MweicaOptions {
    /// Defaults for a sample of `k` rows: `n_weights = min(32, k)`.
    pub fn for_samples(k: usize) -> Self {
        MweicaOptions {
            n_weights: DEFAULT_MAX_WEIGHTS.min(k),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_weights(mut self, n: usize) -> Self {
        self.n_weights = n;
        self
    }

    fn pham(&self) -> PhamOptions {
        PhamOptions {
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            precondition: self.precondition,
        }
    }

    fn validate(&self, x: &DataMatrix) -> Result<()> {
        if self.n_weights < 2 {
            return Err(Error::InvalidData(format!(
                "n_weights must be at least 2, got {}",
                self.n_weights
            )));
        }
        if self.n_weights > x.nsamples() {
            return Err(Error::InvalidData(format!(
                "n_weights {} exceeds the {} available rows",
                self.n_weights,
                x.nsamples()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub criterion_history: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub spectrum: SpectrumDiagnostics,
    /// Weight points rejected for low effective sample size or a
    /// non-definite covariance.
    pub rejected_points: usize,
    pub min_ess: f64,
    pub median_ess: f64,
    /// Directions are not identifiable from these weighted covariances
    /// (Gaussian-like data, or coinciding spectra).
    pub near_degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct UnmixingResult {
    pub unmixing: DMatrix<f64>,
    pub sources: DataMatrix,
    /// Mean diagonalization error of the weighted covariances at `unmixing`.
    pub residual: f64,
    pub weight_points: Vec<WeightPoint>,
    pub diagnostics: Diagnostics,
}

impl UnmixingResult {
    pub fn weight_rows(&self) -> Vec<usize> {
        self.weight_points.iter().map(|p| p.row).collect()
    }

    pub fn covariance_set(&self) -> Result<DiagSet> {
        DiagSet::new(
            self.weight_points
                .iter()
                .map(|p| p.covariance.clone())
                .collect(),
        )
    }
}

/// Centred data and its covariance, the inputs to every weighting.
struct Prepared {
    centered: DataMatrix,
    sigma: crate::weighted_stats::SpdMatrix,
}

fn prepare(x: &DataMatrix) -> Result<Prepared> {
    x.require_full_rank_shape()?;
    let mean = sample_mean(x);
    let centered = DataMatrix::new(x.shifted(&mean))?;
    let sigma = sample_covariance(&centered);
    Ok(Prepared { centered, sigma })
}

fn draw_points(p: &Prepared, wanted: usize, opts: &MweicaOptions) -> Result<(Vec<WeightPoint>, usize)> {
    let d = p.centered.ndims();
    let plan = DrawPlan {
        data: &p.centered,
        sigma: &p.sigma,
        wanted,
        seed: opts.seed,
        ess_floor: opts.ess_floor.unwrap_or((d + 1) as f64),
        max_redraws: opts.max_redraws,
    };
    let draw = plan.run(|cov| cov.cholesky().is_ok().then_some(cov))?;
    Ok((draw.points, draw.rejected))
}

fn assemble(
    x: &DataMatrix,
    solved: DiagResult,
    points: Vec<WeightPoint>,
    rejected: usize,
) -> Result<UnmixingResult> {
    let set = DiagSet::new(points.iter().map(|p| p.covariance.clone()).collect())?;
    let unmixing = normalize_unmixing(&solved.unmixing, x)?;
    let residual = mean_diag_error(&unmixing, &set)?;
    let sources = transform(x, &unmixing)?;
    let (min_ess, median_ess) = ess_summary(&points);
    let noise_floor = SEPARATION_NOISE / median_ess.sqrt();
    let near_degenerate = solved.spectrum.near_degenerate
        || (x.ndims() > 1 && solved.spectrum.min_separation < noise_floor);
    Ok(UnmixingResult {
        unmixing,
        sources,
        residual,
        weight_points: points,
        diagnostics: Diagnostics {
            criterion_history: solved.criterion_history,
            sweeps_used: solved.sweeps_used,
            converged: solved.converged,
            spectrum: solved.spectrum,
            rejected_points: rejected,
            min_ess,
            median_ess,
            near_degenerate,
        },
    })
}

pub(crate) fn ess_summary(points: &[WeightPoint]) -> (f64, f64) {
    let mut ess: Vec<f64> = points.iter().map(|p| p.ess).collect();
    ess.sort_by(f64::total_cmp);
    let median = match ess.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => ess[n / 2],
        n => 0.5 * (ess[n / 2 - 1] + ess[n / 2]),
    };
    (ess.first().copied().unwrap_or(f64::NAN), median)
}

/// Multiple-weighted ICA.
pub fn mweica(x: &DataMatrix, opts: &MweicaOptions) -> Result<UnmixingResult> {
    opts.validate(x)?;
    let prepared = prepare(x)?;
    let (points, rejected) = draw_points(&prepared, opts.n_weights, opts)?;
    if points.len() < 2 {
        return Err(Error::TooFewValidWeightPoints {
            found: points.len(),
            required: 2,
        });
    }
    let set = DiagSet::new(points.iter().map(|p| p.covariance.clone()).collect())?;
    let solved = pham_joint_diag(&set, &opts.pham())?;
    assemble(x, solved, points, rejected)
}

/// Two-centre weighted ICA via exact simultaneous diagonalization.
pub fn weica(x: &DataMatrix, seed: u64) -> Result<UnmixingResult> {
    weica_with(x, &MweicaOptions::default().with_seed(seed))
}

/// [`weica`] honouring the seed, ESS floor and redraw budget of `opts`;
/// `n_weights` is ignored.
pub fn weica_with(x: &DataMatrix, opts: &MweicaOptions) -> Result<UnmixingResult> {
    let opts = MweicaOptions {
        n_weights: 2,
        ..opts.clone()
    };
    opts.validate(x)?;
    let prepared = prepare(x)?;
    let (points, rejected) = draw_points(&prepared, 2, &opts)?;
    if points.len() < 2 {
        return Err(Error::TooFewValidWeightPoints {
            found: points.len(),
            required: 2,
        });
    }
    let solved = simultaneous_diag_pair(&points[0].covariance, &points[1].covariance)?;
    assemble(x, solved, points, rejected)
}

/// Rescales each column of `w` so its source has unit variance and flips it
/// so its largest-magnitude entry is positive. Column order is kept.
pub fn normalize_unmixing(w: &DMatrix<f64>, x: &DataMatrix) -> Result<DMatrix<f64>> {
    let d = x.ndims();
    if w.nrows() != d || w.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "W is {}x{}, data has {d} columns",
            w.nrows(),
            w.ncols()
        )));
    }
    let sigma = sample_covariance(x);
    let scale = sigma.trace().abs() / d as f64;
    let mut out = w.clone();
    for (c, mut col) in out.column_iter_mut().enumerate() {
        let var = (col.transpose() * sigma.as_matrix() * &col)[(0, 0)];
        if !(var > 1e-20 * col.norm_squared() * scale) {
            return Err(Error::ZeroVarianceSource(c));
        }
        col /= var.sqrt();
    }
    fix_column_signs(&mut out);
    Ok(out)
}

/// `S = (X − mean)·W`.
pub fn transform(x: &DataMatrix, w: &DMatrix<f64>) -> Result<DataMatrix> {
    if w.nrows() != x.ndims() {
        return Err(Error::ShapeMismatch(format!(
            "W has {} rows, data has {} columns",
            w.nrows(),
            x.ndims()
        )));
    }
    DataMatrix::new(x.shifted(&sample_mean(x)) * w)
}
