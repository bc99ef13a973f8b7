//! Joint diagonalization of symmetric positive definite matrices.
//!
//! Two routes are provided. [`simultaneous_diag_pair`] solves the two-matrix
//! case exactly through the generalized symmetric eigenproblem.
//! [`pham_joint_diag`] approximately diagonalizes any number of matrices by
//! minimizing the mean log-det diagonalization error
//!
//! ```text
//!     (1/n) Σᵢ log( det diag(WᵀSᵢW) / det(WᵀSᵢW) )
//! ```
//!
//! with cyclic sweeps over index pairs. Each pair update is the closed-form
//! 2×2 Newton-type transformation of Pham's algorithm for positive definite
//! matrices. The criterion change of a pair update only involves two diagonal
//! entries per matrix, so it is evaluated exactly before the update is applied
//! and the step is halved until it does not increase the criterion.
//!
//! Columns of the returned `W` are the diagonalizing directions; they are
//! applied as `WᵀSW`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{fix_column_signs, inv_sqrt_spd};
use crate::weighted_stats::{diag_error_matrix, SpdMatrix};

/// Spectra closer than this (relative) are reported as near-degenerate.
pub const NEAR_DEGENERATE_GAP: f64 = 1e-8;

/// Ordered set of strictly positive definite matrices of one dimension.
#[derive(Debug, Clone)]
pub struct DiagSet {
    matrices: Vec<SpdMatrix>,
}

impl DiagSet {
    pub fn new(matrices: Vec<SpdMatrix>) -> Result<Self> {
        let d = matrices
            .first()
            .ok_or_else(|| Error::InvalidData("empty matrix set".into()))?
            .dim();
        for (i, m) in matrices.iter().enumerate() {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            m.cholesky().map_err(|_| {
                Error::NotPositiveDefinite(format!("matrix {i} of the set"))
            })?;
        }
        Ok(DiagSet { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.matrices
    }
}

/// How well the diagonalized set pins down each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDiagnostics {
    /// Smallest, over column pairs, spread of `log(Dᵢ[p]/Dᵢ[q])` across the
    /// set. Zero means two directions cannot be told apart.
    pub min_separation: f64,
    pub near_degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct DiagResult {
    pub unmixing: DMatrix<f64>,
    /// Mean diagonalization error at the start and after every sweep.
    pub criterion_history: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub spectrum: SpectrumDiagnostics,
}

impl DiagResult {
    pub fn final_criterion(&self) -> f64 {
        *self.criterion_history.last().expect("history is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhamOptions {
    /// Stop once the largest applied pair update falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Start from the inverse square root of the set's mean matrix when that
    /// lowers the starting criterion.
    pub precondition: bool,
}

impl Default for PhamOptions {
    fn default() -> Self {
        PhamOptions {
            tol: 1e-9,
            max_sweeps: 100,
            precondition: true,
        }
    }
}

/// Mean of `diag_error(WᵀSᵢW)` over the set.
pub fn mean_diag_error(w: &DMatrix<f64>, set: &DiagSet) -> Result<f64> {
    if w.nrows() != set.dim() || w.ncols() != set.dim() {
        return Err(Error::ShapeMismatch(format!(
            "W is {}x{}, set dimension is {}",
            w.nrows(),
            w.ncols(),
            set.dim()
        )));
    }
    let wt = w.transpose();
    let mut total = 0.0;
    for m in &set.matrices {
        total += diag_error_matrix(&(&wt * m.as_matrix() * w))?;
    }
    Ok(total / set.len() as f64)
}

/// Exact simultaneous diagonalization of two matrices.
///
/// Whitens by the Cholesky factor `Σ₁ = LLᵀ`, then eigendecomposes
/// `L⁻¹Σ₂L⁻ᵀ = UΛUᵀ`, giving `W = L⁻ᵀU` with `WᵀΣ₁W = I` and `WᵀΣ₂W = Λ`.
/// The columns of `W` are eigenvectors of `Σ₁⁻¹Σ₂`.
pub fn simultaneous_diag_pair(first: &SpdMatrix, second: &SpdMatrix) -> Result<DiagResult> {
    if first.dim() != second.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            found: second.dim(),
        });
    }
    let l = first.cholesky()?.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(first.dim(), first.dim()))
        .ok_or(Error::SingularMatrix)?;
    let mut whitened = &l_inv * second.as_matrix() * l_inv.transpose();
    crate::linalg::symmetrize(&mut whitened);
    let eig = SymmetricEigen::new(whitened);
    let mut w = l_inv.transpose() * eig.eigenvectors;

    let set = DiagSet::new(vec![first.clone(), second.clone()]);
    canonicalize_columns(&mut w, first.as_matrix());

    let (criterion, spectrum) = match set {
        Ok(set) => {
            let spectrum = spectrum_diagnostics(&w, &set);
            (mean_diag_error(&w, &set)?, spectrum)
        }
        // Σ₂ only semidefinite: the criterion is undefined, fall back to the
        // generalized eigenvalue gaps.
        Err(_) => (f64::NAN, eigen_gap_diagnostics(eig.eigenvalues.as_slice())),
    };
    Ok(DiagResult {
        unmixing: w,
        criterion_history: vec![criterion],
        sweeps_used: 0,
        converged: true,
        spectrum,
    })
}

fn eigen_gap_diagnostics(eigenvalues: &[f64]) -> SpectrumDiagnostics {
    let mut vals = eigenvalues.to_vec();
    vals.sort_by(|a, b| a.total_cmp(b));
    let min_gap = vals
        .windows(2)
        .map(|p| (p[1] - p[0]).abs() / p[0].abs().max(p[1].abs()).max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    SpectrumDiagnostics {
        min_separation: min_gap,
        near_degenerate: min_gap < NEAR_DEGENERATE_GAP,
    }
}

/// Approximate joint diagonalization minimizing the mean diagonalization error.
pub fn pham_joint_diag(set: &DiagSet, opts: &PhamOptions) -> Result<DiagResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidData(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let d = set.dim();
    let n = set.len();
    let identity = DMatrix::<f64>::identity(d, d);

    // `transform` holds Wᵀ; the working copies are Wᵀ Sᵢ W.
    let mut transform = identity.clone();
    let mut start = mean_diag_error(&identity, set)?;
    if opts.precondition && d > 1 {
        let mut mean = DMatrix::zeros(d, d);
        for m in &set.matrices {
            mean += m.as_matrix();
        }
        mean /= n as f64;
        if let Ok(p) = inv_sqrt_spd(&mean) {
            if let Ok(c) = mean_diag_error(&p, set) {
                if c < start {
                    start = c;
                    transform = p;
                }
            }
        }
    }
    let mut work: Vec<DMatrix<f64>> = set
        .matrices
        .iter()
        .map(|m| &transform * m.as_matrix() * transform.transpose())
        .collect();

    let mut history = vec![start];
    let mut converged = d < 2;
    let mut sweeps_used = 0;
    while !converged && sweeps_used < opts.max_sweeps {
        let mut largest_step = 0.0_f64;
        for i in 1..d {
            for j in 0..i {
                if let Some((a, b)) = pair_update(&work, i, j) {
                    largest_step = largest_step.max(a.abs()).max(b.abs());
                    for m in work.iter_mut() {
                        apply_rows(m, i, j, a, b);
                        apply_cols(m, i, j, a, b);
                    }
                    apply_rows(&mut transform, i, j, a, b);
                }
            }
        }
        sweeps_used += 1;
        history.push(mean_criterion(&work)?);
        converged = largest_step < opts.tol;
    }

    let mut w = transform.transpose();
    canonicalize_columns(&mut w, set.matrices[0].as_matrix());
    let spectrum = spectrum_diagnostics(&w, set);
    Ok(DiagResult {
        unmixing: w,
        criterion_history: history,
        sweeps_used,
        converged,
        spectrum,
    })
}

fn mean_criterion(work: &[DMatrix<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for m in work {
        total += diag_error_matrix(m)?;
    }
    Ok(total / work.len() as f64)
}

/// Elementary transformation for the pair `(i, j)`, as the row coefficients
/// `(a, b)` in `rowᵢ ← rowᵢ − a·rowⱼ`, `rowⱼ ← rowⱼ − b·rowᵢ`. `None` when no
/// step length decreases the criterion.
fn pair_update(work: &[DMatrix<f64>], i: usize, j: usize) -> Option<(f64, f64)> {
    let n = work.len() as f64;
    let (mut g12, mut g21, mut omega12, mut omega21) = (0.0, 0.0, 0.0, 0.0);
    for m in work {
        let (c1, c2, c12) = (m[(i, i)], m[(j, j)], m[(i, j)]);
        g12 += c12 / c1;
        g21 += c12 / c2;
        omega12 += c2 / c1;
        omega21 += c1 / c2;
    }
    g12 /= n;
    g21 /= n;
    omega12 /= n;
    omega21 /= n;

    let omega = (omega12 * omega21).sqrt();
    let ratio = (omega21 / omega12).sqrt();
    let sym = (ratio * g12 + g21) / (omega + 1.0);
    let anti = (ratio * g12 - g21) / (omega - 1.0).max(1e-9);
    let h12 = sym + anti;
    let h21 = (sym - anti) / ratio;
    let t = 1.0 + (1.0 - h12 * h21).max(0.0).sqrt();
    let (a0, b0) = (h12 / t, h21 / t);
    if !(a0.is_finite() && b0.is_finite()) {
        return None;
    }
    if a0 == 0.0 && b0 == 0.0 {
        return Some((0.0, 0.0));
    }

    let mut scale = 1.0;
    for _ in 0..40 {
        let (a, b) = (a0 * scale, b0 * scale);
        if let Some(delta) = pair_delta(work, i, j, a, b) {
            if delta <= 0.0 {
                return Some((a, b));
            }
        }
        scale *= 0.5;
    }
    None
}

/// Exact change of the mean criterion under the pair transformation. The
/// determinant of every matrix scales by `(1 − ab)²` and only the diagonal
/// entries `i`, `j` move.
fn pair_delta(work: &[DMatrix<f64>], i: usize, j: usize, a: f64, b: f64) -> Option<f64> {
    let det_t = 1.0 - a * b;
    if det_t.abs() < 1e-12 {
        return None;
    }
    let mut log_diag = 0.0;
    for m in work {
        let (c1, c2, c12) = (m[(i, i)], m[(j, j)], m[(i, j)]);
        let r1 = (-2.0 * a * c12 + a * a * c2) / c1;
        let r2 = (-2.0 * b * c12 + b * b * c1) / c2;
        if r1 <= -1.0 || r2 <= -1.0 {
            return None;
        }
        log_diag += r1.ln_1p() + r2.ln_1p();
    }
    let log_det = if det_t > 0.0 {
        (-a * b).ln_1p()
    } else {
        det_t.abs().ln()
    };
    Some(log_diag / work.len() as f64 - 2.0 * log_det)
}

fn apply_rows(m: &mut DMatrix<f64>, i: usize, j: usize, a: f64, b: f64) {
    for col in 0..m.ncols() {
        let (ri, rj) = (m[(i, col)], m[(j, col)]);
        m[(i, col)] = ri - a * rj;
        m[(j, col)] = rj - b * ri;
    }
}

fn apply_cols(m: &mut DMatrix<f64>, i: usize, j: usize, a: f64, b: f64) {
    for row in 0..m.nrows() {
        let (ci, cj) = (m[(row, i)], m[(row, j)]);
        m[(row, i)] = ci - a * cj;
        m[(row, j)] = cj - b * ci;
    }
}

/// Unit-norm columns, ordered by the conjugated diagonal of `reference`
/// (descending), each with its largest-magnitude entry positive.
pub(crate) fn canonicalize_columns(w: &mut DMatrix<f64>, reference: &DMatrix<f64>) {
    for mut col in w.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let keys: Vec<f64> = w
        .column_iter()
        .map(|c| (c.transpose() * reference * c)[(0, 0)])
        .collect();
    let mut order: Vec<usize> = (0..w.ncols()).collect();
    order.sort_by(|&p, &q| keys[q].total_cmp(&keys[p]));
    *w = w.select_columns(&order);
    fix_column_signs(w);
}

/// Spread of log diagonal ratios across the conjugated set, minimized over
/// column pairs.
pub fn spectrum_diagnostics(w: &DMatrix<f64>, set: &DiagSet) -> SpectrumDiagnostics {
    let d = set.dim();
    let wt = w.transpose();
    let diags: Vec<Vec<f64>> = set
        .matrices
        .iter()
        .map(|m| (&wt * m.as_matrix() * w).diagonal().iter().cloned().collect())
        .collect();
    let mut min_sep = f64::INFINITY;
    for p in 0..d {
        for q in (p + 1)..d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for diag in &diags {
                let r = (diag[p] / diag[q]).ln();
                lo = lo.min(r);
                hi = hi.max(r);
            }
            min_sep = min_sep.min(hi - lo);
        }
    }
    SpectrumDiagnostics {
        min_separation: min_sep,
        near_degenerate: min_sep < NEAR_DEGENERATE_GAP,
    }
}
