//! Sample moments under Gaussian re-weighting.
//!
//! Weighting a sample by the normal density `N(m, Σ)` with `Σ = cov X`
//! produces the sample analogue of the weighted random vector `X_[m]`. The
//! weights are kept in the log domain and only ever used after normalization,
//! so the normal density's constant factors are dropped.
//!
//! Samples are rows: a [`DataMatrix`] is `k × d`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

/// Relative ridge applied to `Σ` before it is inverted for weighting.
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;

/// `k` samples (rows) by `d` dimensions (columns) of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidData("data matrix is empty".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidData(format!(
                "non-finite value at row {row}, column {col}"
            )));
        }
        Ok(DataMatrix(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!(
                "row {bad} has {} entries, expected {d}",
                rows[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(k, d, |i, j| rows[i][j]))
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let k = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != k) {
            return Err(Error::ShapeMismatch(format!(
                "column {bad} has {} entries, expected {k}",
                columns[bad].len()
            )));
        }
        Self::new(DMatrix::from_fn(k, d, |i, j| columns[j][i]))
    }

    pub fn nsamples(&self) -> usize {
        self.0.nrows()
    }

    pub fn ndims(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Contiguous view of one column.
    pub fn column(&self, j: usize) -> &[f64] {
        let k = self.nsamples();
        &self.0.as_slice()[j * k..(j + 1) * k]
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.0.row(i).transpose()
    }

    /// Enforces `k ≥ d + 1`, the minimum for a nondegenerate covariance.
    pub fn require_full_rank_shape(&self) -> Result<()> {
        if self.nsamples() < self.ndims() + 1 {
            return Err(Error::InvalidData(format!(
                "{} samples cannot support a {}-dimensional covariance",
                self.nsamples(),
                self.ndims()
            )));
        }
        Ok(())
    }

    /// Rows with `offset` subtracted.
    pub(crate) fn shifted(&self, offset: &DVector<f64>) -> DMatrix<f64> {
        let mut out = self.0.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.add_scalar_mut(-offset[j]);
        }
        out
    }
}

/// Symmetric positive semidefinite `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Validates symmetry (relative 1e-12) and eigenvalues ≥ -1e-12·trace/d.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() || values.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("matrix has non-finite entries".into()));
        }
        let scale = values.amax().max(f64::MIN_POSITIVE);
        let asym = (&values - values.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidData(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let mut values = values;
        symmetrize(&mut values);
        let d = values.nrows() as f64;
        let floor = -1e-12 * values.trace().abs() / d;
        let min_eig = SymmetricEigen::new(values.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < floor {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue {min_eig:e}"
            )));
        }
        Ok(SpdMatrix(values))
    }

    /// Wraps a matrix that is PSD by construction, forcing exact symmetry.
    pub(crate) fn from_psd_unchecked(mut values: DMatrix<f64>) -> Self {
        symmetrize(&mut values);
        SpdMatrix(values)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Cholesky factor, failing unless strictly positive definite.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.0.clone())
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
    }

    /// `W^T A W`.
    pub fn congruence(&self, w: &DMatrix<f64>) -> SpdMatrix {
        SpdMatrix::from_psd_unchecked(w.transpose() * &self.0 * w)
    }
}

/// Per-sample weights held as logarithms, up to a shared additive constant.
///
/// Entries may be `-inf` (zero weight); at least one must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    log_weights: Vec<f64>,
}

impl WeightVector {
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidData("log-weight is NaN or +inf".into()));
        }
        if !log_weights.iter().any(|v| v.is_finite()) {
            return Err(Error::WeightUnderflow {
                ess: 0.0,
                required: 1.0,
            });
        }
        Ok(WeightVector { log_weights })
    }

    /// From nonnegative linear-scale weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidData(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())
    }

    pub fn uniform(k: usize) -> Self {
        WeightVector {
            log_weights: vec![0.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Weights shifted by their maximum, exponentiated and scaled to sum 1.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self
            .log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = self.log_weights.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        w
    }

    /// Shifts every log-weight by `c`; leaves all normalized quantities unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        WeightVector {
            log_weights: self.log_weights.iter().map(|l| l + c).collect(),
        }
    }
}

pub fn sample_mean(x: &DataMatrix) -> DVector<f64> {
    let k = x.nsamples() as f64;
    DVector::from_iterator(
        x.ndims(),
        (0..x.ndims()).map(|j| x.column(j).iter().sum::<f64>() / k),
    )
}

/// Mean-centred second moment, normalized by `k`.
pub fn sample_covariance(x: &DataMatrix) -> SpdMatrix {
    weighted_covariance_normalized(x, None).1
}

/// As [`sample_covariance`] but rejects constant columns.
pub fn sample_covariance_strict(x: &DataMatrix) -> Result<SpdMatrix> {
    let cov = sample_covariance(x);
    let scale = cov.trace().abs().max(f64::MIN_POSITIVE);
    for j in 0..cov.dim() {
        let col = x.column(j);
        let constant = col.iter().all(|v| *v == col[0]);
        if constant || cov.as_matrix()[(j, j)] <= 1e-300 * scale {
            return Err(Error::DegenerateData { column: j });
        }
    }
    Ok(cov)
}

/// `Σ + ε·(trace Σ / d)·I`.
pub fn regularize(sigma: &SpdMatrix, eps: f64) -> Result<SpdMatrix> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidData(format!(
            "regularization must be nonnegative, got {eps}"
        )));
    }
    let tr = sigma.trace();
    if tr == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let d = sigma.dim();
    let ridge = eps * tr / d as f64;
    let mut m = sigma.as_matrix().clone();
    for i in 0..d {
        m[(i, i)] += ridge;
    }
    Ok(SpdMatrix(m))
}

/// Log of the `N(m, Σ)` density at each row, up to an additive constant,
/// with the default ridge `ε·diag Σ` applied to `Σ`.
pub fn gaussian_log_weights(
    x: &DataMatrix,
    m: &DVector<f64>,
    sigma: &SpdMatrix,
) -> Result<WeightVector> {
    gaussian_log_weights_with(x, m, sigma, DEFAULT_REGULARIZATION)
}

pub fn gaussian_log_weights_with(
    x: &DataMatrix,
    m: &DVector<f64>,
    sigma: &SpdMatrix,
    eps: f64,
) -> Result<WeightVector> {
    let d = x.ndims();
    if m.len() != d || sigma.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if m.len() != d { m.len() } else { sigma.dim() },
        });
    }
    let reg = ridge_standardized(sigma, eps).map_err(|_| Error::SingularWeightCovariance)?;
    let chol = reg.cholesky().map_err(|_| Error::SingularWeightCovariance)?;
    // z_j = L^{-1}(x_j - m) for every row at once: Z^T = L^{-1} (X - m)^T.
    let centered_t = x.shifted(m).transpose();
    let z = chol
        .l()
        .solve_lower_triangular(&centered_t)
        .ok_or(Error::SingularWeightCovariance)?;
    let log_weights = z
        .column_iter()
        .map(|c| -0.5 * c.norm_squared())
        .collect::<Vec<_>>();
    WeightVector::from_log_weights(log_weights)
}

/// [`regularize`] applied to the correlation form of `Σ`, i.e. `Σ + ε·diag Σ`,
/// so weights are unchanged by rescaling coordinates. Falls back to the
/// plain trace ridge when a variance is zero.
fn ridge_standardized(sigma: &SpdMatrix, eps: f64) -> Result<SpdMatrix> {
    let m = sigma.as_matrix();
    let d = sigma.dim();
    if (0..d).any(|i| !(m[(i, i)] > 0.0)) {
        return regularize(sigma, eps);
    }
    let mut out = m.clone();
    for i in 0..d {
        out[(i, i)] += eps * m[(i, i)];
    }
    Ok(SpdMatrix(out))
}

/// `(Σ wⱼ)² / Σ wⱼ²`, in `[1, k]`.
pub fn effective_sample_size(w: &WeightVector) -> f64 {
    let nw = w.normalized();
    1.0 / nw.iter().map(|v| v * v).sum::<f64>()
}

fn check_weights(x: &DataMatrix, w: &WeightVector) -> Result<Vec<f64>> {
    if w.len() != x.nsamples() {
        return Err(Error::DimensionMismatch {
            expected: x.nsamples(),
            found: w.len(),
        });
    }
    let ess = effective_sample_size(w);
    if !(ess >= 1.0 - 1e-9) {
        return Err(Error::WeightUnderflow { ess, required: 1.0 });
    }
    Ok(w.normalized())
}

pub fn weighted_mean(x: &DataMatrix, w: &WeightVector) -> Result<DVector<f64>> {
    let nw = check_weights(x, w)?;
    Ok(mean_with(x, Some(&nw)))
}

pub fn weighted_covariance(x: &DataMatrix, w: &WeightVector) -> Result<SpdMatrix> {
    let nw = check_weights(x, w)?;
    Ok(weighted_covariance_normalized(x, Some(&nw)).1)
}

/// Weighted mean and covariance with already-normalized weights
/// (`None` means uniform).
pub(crate) fn weighted_covariance_normalized(
    x: &DataMatrix,
    weights: Option<&[f64]>,
) -> (DVector<f64>, SpdMatrix) {
    let (k, d) = (x.nsamples(), x.ndims());
    let mean = mean_with(x, weights);
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|j| x.column(j).iter().map(|v| v - mean[j]).collect())
        .collect();
    let mut cov = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let (ca, cb) = (&centered[a], &centered[b]);
            let s = match weights {
                Some(w) => (0..k).map(|j| w[j] * ca[j] * cb[j]).sum::<f64>(),
                None => (0..k).map(|j| ca[j] * cb[j]).sum::<f64>() / k as f64,
            };
            cov[(a, b)] = s;
            cov[(b, a)] = s;
        }
    }
    (mean, SpdMatrix(cov))
}

fn mean_with(x: &DataMatrix, weights: Option<&[f64]>) -> DVector<f64> {
    match weights {
        None => sample_mean(x),
        Some(w) => DVector::from_iterator(
            x.ndims(),
            (0..x.ndims()).map(|j| x.column(j).iter().zip(w).map(|(v, w)| v * w).sum()),
        ),
    }
}

/// `log(det diag(A) / det A)`: zero iff `A` is diagonal, positive otherwise.
pub fn diag_error(a: &SpdMatrix) -> Result<f64> {
    diag_error_matrix(a.as_matrix())
}

pub(crate) fn diag_error_matrix(a: &DMatrix<f64>) -> Result<f64> {
    let d = a.nrows();
    if let Some(i) = (0..d).find(|&i| !(a[(i, i)] > 0.0)) {
        return Err(Error::NotPositiveDefinite(format!(
            "diagonal entry {i} is {}",
            a[(i, i)]
        )));
    }
    // On the unit-diagonal correlation form the criterion is −log det R, so
    // the logs stay as small as the result itself.
    let scale: Vec<f64> = (0..d).map(|i| a[(i, i)].sqrt().recip()).collect();
    let r = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            a[(i, j)] * scale[i] * scale[j]
        }
    });
    let chol = Cholesky::new(r)
        .ok_or_else(|| Error::NotPositiveDefinite("determinant is not positive".into()))?;
    let l = chol.l_dirty();
    let log_det: f64 = (0..d).map(|i| 2.0 * l[(i, i)].ln()).sum();
    Ok((-log_det).max(0.0))
}
