use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{SignalBundle, SignalKind};
use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::rng;
use crate::weighted_stats::DataMatrix;

pub const DEFAULT_CONDITION_BOUND: f64 = 20.0;
const MIXING_ATTEMPTS: usize = 10_000;

/// Square mixing matrix applied to rows as `x = A s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixSpec {
    pub matrix: DMatrix<f64>,
    pub seed: u64,
    pub condition_bound: f64,
    pub condition_number: f64,
}

/// Standard normal entries, redrawn until the condition number is within
/// `condition_bound`. Entries are drawn row by row.
pub fn random_mixing_matrix(d: usize, seed: u64, condition_bound: f64) -> Result<MixSpec> {
    if d < 2 {
        return Err(Error::InvalidData(format!(
            "mixing needs at least 2 dimensions, got {d}"
        )));
    }
    if !(condition_bound >= 1.0) {
        return Err(Error::InvalidData(format!(
            "condition bound must be at least 1, got {condition_bound}"
        )));
    }
    let mut rng = rng::seeded(seed);
    for _ in 0..MIXING_ATTEMPTS {
        let entries: Vec<f64> = (0..d * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let matrix = DMatrix::from_row_slice(d, d, &entries);
        let cond = condition_number(&matrix);
        if cond <= condition_bound {
            return Ok(MixSpec {
                matrix,
                seed,
                condition_bound,
                condition_number: cond,
            });
        }
    }
    Err(Error::RetryExhausted {
        attempts: MIXING_ATTEMPTS,
        reason: format!("no {d}x{d} draw had condition number ≤ {condition_bound}"),
    })
}

/// `X = S·Aᵀ`.
pub fn mix(sources: &DataMatrix, spec: &MixSpec) -> Result<DataMatrix> {
    if sources.ndims() != spec.matrix.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{} source columns for a {}x{} mixing matrix",
            sources.ndims(),
            spec.matrix.nrows(),
            spec.matrix.ncols()
        )));
    }
    DataMatrix::new(sources.values() * spec.matrix.transpose())
}

/// Resamples every column independently with replacement, each from its own
/// generator stream.
pub fn bootstrap_sources(columns: &[Vec<f64>], n_samples: usize, seed: u64) -> Result<SignalBundle> {
    if let Some(c) = columns.iter().position(Vec::is_empty) {
        return Err(Error::EmptyColumn(c));
    }
    let out: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(c, col)| {
            let mut rng = rng::substream(seed, c as u64);
            (0..n_samples)
                .map(|_| col[rng.random_range(0..col.len())])
                .collect()
        })
        .collect();
    let descriptors = (0..columns.len())
        .map(|c| format!("bootstrap[{c}]"))
        .collect();
    Ok(SignalBundle::new(DataMatrix::from_columns(&out)?, SignalKind::Bootstrap)
        .with_descriptors(descriptors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Uniform,
    Laplace,
    SineMixture,
    Bimodal,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Uniform => "uniform",
            SourceKind::Laplace => "laplace",
            SourceKind::SineMixture => "sine-mixture",
            SourceKind::Bimodal => "bimodal",
        }
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SourceKind::Uniform),
            "laplace" => Ok(SourceKind::Laplace),
            "sine-mixture" | "sine_mixture" => Ok(SourceKind::SineMixture),
            "bimodal" => Ok(SourceKind::Bimodal),
            other => Err(Error::InvalidData(format!("unknown source kind {other:?}"))),
        }
    }
}

// Bimodal: ±MU with spread SIGMA, MU² + SIGMA² = 1.
const BIMODAL_MU: f64 = 0.9;

// Cycles over the sample span for column c are FREQ_BASE·√PRIMES[c]:
// pairwise incommensurate.
const FREQ_BASE: f64 = 37.0;
const PRIMES: [f64; 16] = [
    2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0,
];

/// `d` independent zero-mean unit-variance columns of the chosen family.
pub fn synth_sources(kind: SourceKind, k: usize, d: usize, seed: u64) -> Result<SignalBundle> {
    if k < d + 1 || d == 0 {
        return Err(Error::InvalidData(format!(
            "need k ≥ d + 1 and d ≥ 1, got k = {k}, d = {d}"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let mut rng = rng::substream(seed, c as u64);
            match kind {
                SourceKind::Uniform => {
                    let half = 3f64.sqrt();
                    (0..k).map(|_| rng.random_range(-half..half)).collect()
                }
                SourceKind::Laplace => {
                    let b = std::f64::consts::FRAC_1_SQRT_2;
                    (0..k)
                        .map(|_| {
                            let e: f64 = Exp1.sample(&mut rng);
                            if rng.random::<bool>() { b * e } else { -b * e }
                        })
                        .collect()
                }
                SourceKind::Bimodal => {
                    let sigma = (1.0 - BIMODAL_MU * BIMODAL_MU).sqrt();
                    (0..k)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            let mu = if rng.random::<bool>() { BIMODAL_MU } else { -BIMODAL_MU };
                            mu + sigma * z
                        })
                        .collect()
                }
                SourceKind::SineMixture => sine_column(c, k, &mut rng),
            }
        })
        .collect();
    let descriptors = (0..d).map(|c| format!("{}[{c}]", kind.name())).collect();
    Ok(SignalBundle::new(DataMatrix::from_columns(&columns)?, SignalKind::Synthetic)
        .with_descriptors(descriptors))
}

/// A sinusoid with a random phase, standardized to zero mean and unit
/// variance over the sample.
fn sine_column(c: usize, k: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let cycles = FREQ_BASE * PRIMES[c % PRIMES.len()].sqrt() * (1 + c / PRIMES.len()) as f64;
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let raw: Vec<f64> = (0..k)
        .map(|j| (std::f64::consts::TAU * cycles * j as f64 / k as f64 + phase).sin())
        .collect();
    let mean = raw.iter().sum::<f64>() / k as f64;
    let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k as f64;
    let sd = var.sqrt();
    raw.iter().map(|v| (v - mean) / sd).collect()
}
