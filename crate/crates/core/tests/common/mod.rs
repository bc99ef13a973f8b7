#![allow(dead_code)]

use mweica::rng;
use mweica::{DataMatrix, SpdMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut rng::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// Gaussian matrix redrawn until its condition number is below `bound`.
pub fn well_conditioned(d: usize, bound: f64, rng: &mut rng::Rng) -> DMatrix<f64> {
    loop {
        let b = gaussian_matrix(d, d, rng);
        if condition(&b) < bound {
            return b;
        }
    }
}

pub fn random_spd(d: usize, rng: &mut rng::Rng) -> SpdMatrix {
    let g = gaussian_matrix(d, d, rng);
    let m = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
    SpdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// `{B Dᵢ Bᵀ}` with log-uniform diagonal entries in `[e⁻¹, e]`.
pub fn oracle_set(b: &DMatrix<f64>, n: usize, rng: &mut rng::Rng) -> Vec<SpdMatrix> {
    let d = b.nrows();
    (0..n)
        .map(|_| {
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
                rng.random_range(-1.0f64..1.0).exp()
            }));
            let m = b * diag * b.transpose();
            SpdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
        })
        .collect()
}

/// Amari distance of `G` from the scaled permutations, written out directly.
pub fn amari_of(g: &DMatrix<f64>) -> f64 {
    let d = g.nrows();
    let a = g.map(f64::abs);
    let mut rows = 0.0;
    for i in 0..d {
        let r: Vec<f64> = (0..d).map(|j| a[(i, j)]).collect();
        let max = r.iter().cloned().fold(0.0, f64::max);
        rows += r.iter().sum::<f64>() / max - 1.0;
    }
    let mut cols = 0.0;
    for j in 0..d {
        let c: Vec<f64> = (0..d).map(|i| a[(i, j)]).collect();
        let max = c.iter().cloned().fold(0.0, f64::max);
        cols += c.iter().sum::<f64>() / max - 1.0;
    }
    (rows + cols) / (2.0 * d as f64)
}

/// Every permutation of `0..n`, by recursion.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn off_diagonal_max(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn column_moments(x: &DataMatrix, j: usize) -> (f64, f64, f64) {
    let c = x.column(j);
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = c.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (mean, var, m4 / (var * var) - 3.0)
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Every combination of the given column values, one per row: an empirical
/// distribution whose coordinates are exactly independent.
pub fn product_grid(columns: &[Vec<f64>]) -> DataMatrix {
    let total: usize = columns.iter().map(Vec::len).product();
    let d = columns.len();
    let mut m = DMatrix::zeros(total, d);
    for row in 0..total {
        let mut rest = row;
        for (j, col) in columns.iter().enumerate() {
            m[(row, j)] = col[rest % col.len()];
            rest /= col.len();
        }
    }
    DataMatrix::new(m).unwrap()
}
