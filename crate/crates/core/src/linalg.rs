//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// `M^{-1/2}` of a symmetric positive definite matrix.
pub(crate) fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 || eig.eigenvalues.iter().any(|&l| l <= max * 1e-14) {
        return Err(Error::NotPositiveDefinite(
            "cannot take inverse square root".into(),
        ));
    }
    let scale = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&scale) * v.transpose();
    symmetrize(&mut out);
    Ok(out)
}

/// Ratio of extreme singular values; infinite for singular input.
pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() || condition_number(m) > 1e14 {
        return Err(Error::SingularMatrix);
    }
    m.clone().try_inverse().ok_or(Error::SingularMatrix)
}

/// Index of the entry with the largest magnitude; ties go to the first.
pub(crate) fn argmax_abs(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v.abs() > best_val {
            best = i;
            best_val = v.abs();
        }
    }
    best
}

/// Flips each column so its largest-magnitude entry is positive.
pub(crate) fn fix_column_signs(w: &mut DMatrix<f64>) {
    for c in 0..w.ncols() {
        let idx = argmax_abs(w.column(c).iter().cloned());
        if w[(idx, c)] < 0.0 {
            w.column_mut(c).neg_mut();
        }
    }
}
