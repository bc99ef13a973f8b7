//! Separation-quality metrics.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::invert;
use crate::weighted_stats::DataMatrix;

/// Largest dimension for which matching enumerates every permutation.
pub const EXHAUSTIVE_MATCH_LIMIT: usize = 8;

/// `Σxᵢyᵢ / √(Σxᵢ² Σyᵢ²)`.
pub fn tucker_congruence(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((xy / (xx.sqrt() * yy.sqrt())).clamp(-1.0, 1.0))
}

fn centered_column(x: &DataMatrix, j: usize) -> Vec<f64> {
    let col = x.column(j);
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    col.iter().map(|v| v - mean).collect()
}

/// Entry `(i, j)` is the congruence of estimated column `i` with true column
/// `j`, both centred first.
pub fn congruence_matrix(estimated: &DataMatrix, truth: &DataMatrix) -> Result<DMatrix<f64>> {
    if estimated.nsamples() != truth.nsamples() || estimated.ndims() != truth.ndims() {
        return Err(Error::ShapeMismatch(format!(
            "estimated is {}x{}, truth is {}x{}",
            estimated.nsamples(),
            estimated.ndims(),
            truth.nsamples(),
            truth.ndims()
        )));
    }
    let d = truth.ndims();
    let est: Vec<Vec<f64>> = (0..d).map(|j| centered_column(estimated, j)).collect();
    let tru: Vec<Vec<f64>> = (0..d).map(|j| centered_column(truth, j)).collect();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = tucker_congruence(&est[i], &tru[j])?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub congruences: DMatrix<f64>,
    /// `permutation[i]` is the true component matched to estimated `i`.
    pub permutation: Vec<usize>,
    pub mean_abs_congruence: f64,
    pub amari: Option<f64>,
}

/// Pairs estimated with true components to maximize `Σ|C(i, σ(i))|`.
pub fn match_components(c: &DMatrix<f64>) -> MatchReport {
    let d = c.nrows();
    let abs = c.map(f64::abs);
    let permutation = if d <= EXHAUSTIVE_MATCH_LIMIT {
        best_permutation_exhaustive(&abs)
    } else {
        hungarian_max(&abs)
    };
    let mean_abs_congruence = if d == 0 {
        0.0
    } else {
        permutation
            .iter()
            .enumerate()
            .map(|(i, &j)| abs[(i, j)])
            .sum::<f64>()
            / d as f64
    };
    MatchReport {
        congruences: c.clone(),
        permutation,
        mean_abs_congruence,
        amari: None,
    }
}

/// Convenience: congruence grid, matching, and score in one call.
pub fn match_sources(estimated: &DataMatrix, truth: &DataMatrix) -> Result<MatchReport> {
    Ok(match_components(&congruence_matrix(estimated, truth)?))
}

fn best_permutation_exhaustive(score: &DMatrix<f64>) -> Vec<usize> {
    let d = score.nrows();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut best = perm.clone();
    let mut best_score = f64::NEG_INFINITY;
    // Heap's algorithm, iterative form.
    let mut counters = vec![0usize; d];
    let eval = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| score[(i, j)]).sum::<f64>();
    let s = eval(&perm);
    if s > best_score {
        best_score = s;
        best.clone_from(&perm);
    }
    let mut i = 0;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let s = eval(&perm);
            if s > best_score {
                best_score = s;
                best.clone_from(&perm);
            }
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    best
}

/// Maximum-weight perfect matching on a square score matrix (Hungarian
/// algorithm with potentials, O(d³)).
pub fn hungarian_max(score: &DMatrix<f64>) -> Vec<usize> {
    let n = score.nrows();
    let top = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Minimize cost = top - score, 1-based arrays as in the classical form.
    let cost = |i: usize, j: usize| top - score[(i - 1, j - 1)];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = col0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        col1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Amari error of `G = WᵀA`; zero iff `G` is a scaled permutation.
pub fn amari_index(w: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    if w.shape() != a.shape() || !w.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "W is {:?}, A is {:?}",
            w.shape(),
            a.shape()
        )));
    }
    invert(w)?;
    invert(a)?;
    let g = (w.transpose() * a).map(f64::abs);
    let d = g.nrows();
    let mut total = 0.0;
    for i in 0..d {
        let row = g.row(i);
        total += row.sum() / row.max() - 1.0;
    }
    for j in 0..d {
        let col = g.column(j);
        total += col.sum() / col.max() - 1.0;
    }
    Ok(total / (2.0 * d as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    /// Methods in sorted name order.
    pub methods: Vec<String>,
    /// `ranks[m][t]`: rank of method `m` on trial `t` (1 = best).
    pub ranks: Vec<Vec<f64>>,
    pub summaries: Vec<RankSummary>,
}

/// Per-trial ranks by descending score; ties share the mean rank.
pub fn rank_methods(scores: &BTreeMap<String, Vec<f64>>) -> Result<RankTable> {
    let trials = scores.values().next().map_or(0, Vec::len);
    if scores.values().any(|s| s.len() != trials) {
        return Err(Error::MismatchedTrialSets);
    }
    let methods: Vec<String> = scores.keys().cloned().collect();
    let columns: Vec<&Vec<f64>> = scores.values().collect();
    let m = methods.len();
    let mut ranks = vec![vec![0.0; trials]; m];
    for t in 0..trials {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| columns[b][t].total_cmp(&columns[a][t]));
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && columns[order[end]][t] == columns[order[start]][t] {
                end += 1;
            }
            // Positions start..end hold equal scores: ranks start+1..=end.
            let shared = (start + 1 + end) as f64 / 2.0;
            for &idx in &order[start..end] {
                ranks[idx][t] = shared;
            }
            start = end;
        }
    }
    let summaries = ranks.iter().map(|r| summarize(r)).collect();
    Ok(RankTable {
        methods,
        ranks,
        summaries,
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(values: &[f64]) -> RankSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    RankSummary {
        min: quantile(&sorted, 0.0),
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: quantile(&sorted, 1.0),
        mean: values.iter().sum::<f64>() / values.len().max(1) as f64,
    }
}
