//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities next to their thresholds. Exits non-zero if any criterion
//! fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mweica::eval::match_sources;
use mweica::harness::{mix, random_mixing_matrix, synth_sources, write_pgm, SourceKind};
use mweica::ica::{mweica, weica_with, MweicaOptions};
use mweica::independence::independence_index;
use mweica::joint_diag::{mean_diag_error, pham_joint_diag, simultaneous_diag_pair, DiagSet, PhamOptions};
use mweica::rng;
use mweica::weighted_stats::{gaussian_log_weights, sample_covariance, weighted_covariance};
use mweica::{DataMatrix, SpdMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian(rows: usize, cols: usize, r: &mut rng::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

fn spd(m: DMatrix<f64>) -> SpdMatrix {
    SpdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// Amari distance of `G` from the scaled permutations.
fn amari_of(g: &DMatrix<f64>) -> f64 {
    let a = g.map(f64::abs);
    let d = a.nrows();
    let rows: f64 = (0..d).map(|i| a.row(i).sum() / a.row(i).max() - 1.0).sum();
    let cols: f64 = (0..d).map(|j| a.column(j).sum() / a.column(j).max() - 1.0).sum();
    (rows + cols) / (2.0 * d as f64)
}

fn off_diagonal_max(m: &DMatrix<f64>) -> f64 {
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

fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn joint_diagonalization_oracle() -> Outcome {
    let clock = Instant::now();
    let (mut worst_de, mut worst_amari) = (0.0_f64, 0.0_f64);
    for seed in 0..10 {
        let mut r = rng::seeded(seed);
        let b = loop {
            let b = gaussian(4, 4, &mut r);
            if condition(&b) <= 10.0 {
                break b;
            }
        };
        let set: Vec<SpdMatrix> = (0..8)
            .map(|_| {
                let diag = DVector::from_fn(4, |_, _| r.random_range(-1.0f64..1.0).exp());
                spd(&b * DMatrix::from_diagonal(&diag) * b.transpose())
            })
            .collect();
        let set = DiagSet::new(set).unwrap();
        let res = pham_joint_diag(&set, &PhamOptions::default()).unwrap();
        worst_de = worst_de.max(mean_diag_error(&res.unmixing, &set).unwrap());
        worst_amari = worst_amari.max(amari_of(&(res.unmixing.transpose() * &b)));
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        worst_de < 1e-9 && worst_amari < 1e-4 && secs < 1.0,
        format!("max mean DE {worst_de:.2e} (< 1e-9), max Amari {worst_amari:.2e} (< 1e-4), {secs:.3} s (< 1 s)"),
    )
}

fn pair_diagonalization() -> Outcome {
    let clock = Instant::now();
    let mut r = rng::seeded(2);
    let mut worst = 0.0_f64;
    let mut cases = 0;
    while cases < 100 {
        let d = 2 + cases % 5;
        let g1 = gaussian(d, d, &mut r);
        let g2 = gaussian(d, d, &mut r);
        let s1 = spd(&g1 * g1.transpose() + DMatrix::identity(d, d) * 0.1);
        let s2 = spd(&g2 * g2.transpose() + DMatrix::identity(d, d) * 0.1);
        let res = simultaneous_diag_pair(&s1, &s2).unwrap();
        // Distinct generalized spectra only.
        let conj1 = res.unmixing.transpose() * s1.as_matrix() * &res.unmixing;
        let conj2 = res.unmixing.transpose() * s2.as_matrix() * &res.unmixing;
        let mut ratios: Vec<f64> = (0..d).map(|i| conj2[(i, i)] / conj1[(i, i)]).collect();
        ratios.sort_by(f64::total_cmp);
        if ratios.windows(2).any(|w| w[1] - w[0] < 1e-6 * w[1]) {
            continue;
        }
        for c in [&conj1, &conj2] {
            worst = worst.max(off_diagonal_max(c) / c.trace());
        }
        cases += 1;
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 1.0,
        format!("max off-diagonal/trace {worst:.2e} (< 1e-10) over 100 pairs, {secs:.3} s (< 1 s)"),
    )
}

fn affine_equivariance() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..50 {
        let mut r = rng::seeded(100 + seed);
        let x = DataMatrix::new(gaussian(2000, 3, &mut r).map(|v| v * v.abs())).unwrap();
        let sigma = sample_covariance(&x);
        let m = DVector::from_fn(3, |_, _| r.random_range(-1.0..1.0));
        let a = loop {
            let a = gaussian(3, 3, &mut r);
            if condition(&a) < 50.0 {
                break a;
            }
        };
        let b = DVector::from_fn(3, |_, _| r.random_range(-5.0..5.0));
        let mut y = x.values() * a.transpose();
        for mut row in y.row_iter_mut() {
            row += b.transpose();
        }
        let y = DataMatrix::new(y).unwrap();
        let sigma_y = spd(&a * sigma.as_matrix() * a.transpose());
        let cx = weighted_covariance(&x, &gaussian_log_weights(&x, &m, &sigma).unwrap()).unwrap();
        let cy = weighted_covariance(&y, &gaussian_log_weights(&y, &(&a * &m + &b), &sigma_y).unwrap()).unwrap();
        let expected = &a * cx.as_matrix() * a.transpose();
        worst = worst.max((cy.as_matrix() - &expected).norm() / expected.norm());
    }
    outcome(worst < 1e-8, format!("max relative error {worst:.2e} (< 1e-8) over 50 cases"))
}

fn normalized_off_diagonal(c: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..c.nrows() {
        for j in i + 1..c.ncols() {
            worst = worst.max(c[(i, j)].abs() / (c[(i, i)] * c[(j, j)]).sqrt());
        }
    }
    worst
}

/// Fixed centres use the literal `5/√k`; random data-row centres use
/// `5/√ESS`, the same tolerance at the sample size the weights retain.
fn observation_one() -> Outcome {
    let k = 20_000;
    let bound = 5.0 / (k as f64).sqrt();
    let centres = [[0.0, 0.0, 0.0], [0.5, -0.5, 0.5], [1.0, 1.0, -1.0], [-1.5, 0.3, 0.8]];
    let (mut worst_fixed, mut worst_scaled) = (0.0_f64, 0.0_f64);
    for seed in 0..10 {
        let u = synth_sources(SourceKind::Uniform, k, 1, seed).unwrap().data;
        let l = synth_sources(SourceKind::Laplace, k, 1, 50 + seed).unwrap().data;
        let bi = synth_sources(SourceKind::Bimodal, k, 1, 90 + seed).unwrap().data;
        let x = DataMatrix::from_columns(&[u.column(0).to_vec(), l.column(0).to_vec(), bi.column(0).to_vec()]).unwrap();
        let sigma = sample_covariance(&x);
        for c in centres {
            let w = gaussian_log_weights(&x, &DVector::from_row_slice(&c), &sigma).unwrap();
            let cov = weighted_covariance(&x, &w).unwrap();
            worst_fixed = worst_fixed.max(normalized_off_diagonal(cov.as_matrix()) / bound);
        }
        let mut r = rng::seeded(seed);
        for _ in 0..5 {
            let w = gaussian_log_weights(&x, &x.row(r.random_range(0..k)), &sigma).unwrap();
            let ess = 1.0 / w.normalized().iter().map(|v| v * v).sum::<f64>();
            let cov = weighted_covariance(&x, &w).unwrap();
            worst_scaled = worst_scaled.max(normalized_off_diagonal(cov.as_matrix()) * ess.sqrt() / 5.0);
        }
    }
    outcome(
        worst_fixed < 1.0 && worst_scaled < 1.0,
        format!(
            "fixed centres: max normalized off-diagonal {:.4} (< 5/√k = {bound:.4}); data-row centres: max ratio to 5/√ESS {worst_scaled:.3} (< 1)",
            worst_fixed * bound
        ),
    )
}

struct SeparationRun {
    label: String,
    mweica: Vec<f64>,
    weica: Vec<f64>,
    secs_mweica: f64,
}

fn separation_runs() -> Vec<SeparationRun> {
    let mut runs = Vec::new();
    for kind in [SourceKind::Uniform, SourceKind::Laplace] {
        for d in [2, 3] {
            let mut run = SeparationRun {
                label: format!("{} d={d}", kind.name()),
                mweica: Vec::new(),
                weica: Vec::new(),
                secs_mweica: 0.0,
            };
            for seed in 0..20 {
                let s = synth_sources(kind, 10_000, d, seed).unwrap().data;
                let a = random_mixing_matrix(d, 1000 + seed, 20.0).unwrap();
                let x = mix(&s, &a).unwrap();
                let opts = MweicaOptions::for_samples(10_000).with_seed(seed).with_n_weights(16);
                let clock = Instant::now();
                let res = mweica(&x, &opts).unwrap();
                run.secs_mweica += clock.elapsed().as_secs_f64();
                run.mweica.push(match_sources(&res.sources, &s).unwrap().mean_abs_congruence);
                let pair = weica_with(&x, &opts).unwrap();
                run.weica.push(match_sources(&pair.sources, &s).unwrap().mean_abs_congruence);
            }
            runs.push(run);
        }
    }
    runs
}

fn separation_quality(runs: &[SeparationRun]) -> Outcome {
    let secs: f64 = runs.iter().map(|r| r.secs_mweica).sum();
    let parts: Vec<String> = runs
        .iter()
        .map(|r| format!("{} {}/20", r.label, r.mweica.iter().filter(|&&t| t >= 0.95).count()))
        .collect();
    let pass = runs.iter().all(|r| r.mweica.iter().filter(|&&t| t >= 0.95).count() >= 18);
    outcome(
        pass && secs < 30.0,
        format!("seeds with |Tucker| ≥ 0.95 (need ≥ 18): {}; mweica {secs:.2} s (< 30 s)", parts.join(", ")),
    )
}

fn stability(runs: &[SeparationRun]) -> Outcome {
    let parts: Vec<String> = runs
        .iter()
        .map(|r| format!("{} {:.2e} vs {:.2e}", r.label, sample_sd(&r.mweica), sample_sd(&r.weica)))
        .collect();
    let pass = runs.iter().all(|r| sample_sd(&r.mweica) <= sample_sd(&r.weica));
    outcome(pass, format!("sd mweica vs weica: {}", parts.join(", ")))
}

fn index_contrast() -> Outcome {
    let mut wins = 0;
    for seed in 0..20 {
        let kind = if seed % 2 == 0 { SourceKind::Uniform } else { SourceKind::Laplace };
        let s = synth_sources(kind, 5000, 2, seed).unwrap().data;
        let x = mix(&s, &random_mixing_matrix(2, 500 + seed, 20.0).unwrap()).unwrap();
        let unmixed = independence_index(&s, 32, seed).unwrap().index;
        let mixed = independence_index(&x, 32, seed).unwrap().index;
        if unmixed < mixed {
            wins += 1;
        }
    }
    let u = synth_sources(SourceKind::Uniform, 50_000, 1, 7).unwrap().data;
    let l = synth_sources(SourceKind::Laplace, 50_000, 1, 8).unwrap().data;
    let aligned = DataMatrix::from_columns(&[u.column(0).to_vec(), l.column(0).to_vec()]).unwrap();
    let index = independence_index(&aligned, 32, 7).unwrap().index;
    outcome(
        wins >= 19 && index < 0.01,
        format!("unmixed < mixed in {wins}/20 (need ≥ 19); axis-aligned index at k=50000 {index:.2e} (< 0.01)"),
    )
}

fn texture(seed: u64, kind: usize) -> Vec<u8> {
    let mut r = rng::seeded(seed);
    let blocks: Vec<f64> = (0..64).map(|_| r.random_range(0.0..1.0)).collect();
    (0..64 * 64)
        .map(|i| {
            let (x, y) = ((i % 64) as f64, (i / 64) as f64);
            let v = match kind {
                0 => 0.5 + 0.45 * (std::f64::consts::TAU * (x / 7.3 + y / 31.0)).sin(),
                _ => blocks[(i / 64 / 8) * 8 + (i % 64) / 8],
            };
            (v * 255.0).round() as u8
        })
        .collect()
}

fn cli(args: &[&str], cwd: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mweica"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn meta_value(dir: &Path, key: &str) -> Option<String> {
    fs::read_to_string(dir.join("meta.txt"))
        .ok()?
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(String::from))
}

fn image_toy() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_pgm(p.join("stripes.pgm"), 64, 64, &texture(1, 0)).unwrap();
    write_pgm(p.join("blocks.pgm"), 64, 64, &texture(2, 1)).unwrap();
    let clock = Instant::now();
    let run = cli(&["mix", "stripes.pgm", "blocks.pgm", "--seed", "7", "--out", "mixed"], p).and_then(|_| {
        cli(
            &[
                "unmix", "mixed/mixed_0.pgm", "mixed/mixed_1.pgm", "--reference", "stripes.pgm", "blocks.pgm",
                "--seed", "7", "--out", "unmixed",
            ],
            p,
        )
    });
    let secs = clock.elapsed().as_secs_f64();
    if let Err(e) = run {
        return outcome(false, e);
    }
    let score: f64 = meta_value(&p.join("unmixed"), "tucker_mean").and_then(|v| v.parse().ok()).unwrap_or(0.0);
    let images = (0..2).all(|j| p.join(format!("unmixed/source_{j}.pgm")).exists());
    outcome(
        score >= 0.9 && images && secs < 5.0,
        format!("matched |Tucker| {score:.4} (≥ 0.9), source images written {images}, {secs:.2} s (< 5 s)"),
    )
}

fn timing_slope() -> Outcome {
    let mut points = Vec::new();
    for (i, k) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
        let s = synth_sources(SourceKind::Laplace, k, 4, i as u64).unwrap().data;
        let x = mix(&s, &random_mixing_matrix(4, 77, 20.0).unwrap()).unwrap();
        let opts = MweicaOptions::for_samples(k).with_seed(3).with_n_weights(16);
        let best = (0..3)
            .map(|_| {
                let clock = Instant::now();
                mweica(&x, &opts).unwrap();
                clock.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min);
        points.push(((k as f64).ln(), best));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let times: Vec<String> = points.iter().map(|p| format!("{:.4} s", p.1)).collect();
    outcome(
        slope <= 1.2,
        format!("log-log slope {slope:.3} (≤ 1.2); best of 3 at k=1e3,1e4,1e5: {}", times.join(", ")),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if path.is_dir() {
            for (k, v) in snapshot(&path) {
                out.insert(format!("{name}/{k}"), v);
            }
        } else if name != "timing.csv" {
            out.insert(name, fs::read(&path).unwrap());
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_pgm(p.join("a.pgm"), 64, 64, &texture(3, 0)).unwrap();
    write_pgm(p.join("b.pgm"), 64, 64, &texture(4, 1)).unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["mix", "--source", "laplace", "--dim", "3", "--seed", "11", "--out", "run/mix"],
        vec!["mix", "a.pgm", "b.pgm", "--seed", "5", "--out", "run/mix_img"],
        vec!["unmix", "run/mix/mixed.csv", "--seed", "2", "--reference", "run/mix/sources.csv", "--out", "run/mweica"],
        vec!["unmix", "run/mix/mixed.csv", "--method", "weica", "--seed", "2", "--out", "run/weica"],
        vec!["unmix", "run/mix/mixed.csv", "--method", "fastica", "--seed", "2", "--out", "run/fastica"],
        vec!["unmix", "run/mix_img/mixed_0.pgm", "run/mix_img/mixed_1.pgm", "--out", "run/img"],
        vec!["index", "run/mix/mixed.csv", "--seed", "4", "--out", "run/index"],
        vec!["bench", "--trials", "6", "--samples", "2000,4000", "--seed", "9", "--out", "run/bench"],
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let _ = fs::remove_dir_all(p.join("run"));
        for c in &commands {
            if let Err(e) = cli(c, p) {
                return outcome(false, e);
            }
        }
        runs.push(snapshot(&p.join("run")));
    }
    let differing: Vec<&String> = runs[0]
        .iter()
        .filter(|(k, v)| runs[1].get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    outcome(
        differing.is_empty() && runs[0].len() == runs[1].len(),
        format!(
            "{} output files from {} commands compared byte for byte, {} differ (timing.csv excluded)",
            runs[0].len(),
            commands.len(),
            differing.len()
        ),
    )
}

fn main() {
    let suite_clock = Instant::now();
    let runs = separation_runs();
    let criteria: Vec<Criterion> = vec![
        ("joint-diagonalization oracle", Box::new(joint_diagonalization_oracle)),
        ("closed-form pair diagonalization", Box::new(pair_diagonalization)),
        ("affine equivariance of weighted covariance", Box::new(affine_equivariance)),
        ("independent coordinates, diagonal weighted covariance", Box::new(observation_one)),
        ("separation quality", Box::new(|| separation_quality(&runs))),
        ("stability against two-point weighting", Box::new(|| stability(&runs))),
        ("independence index contrast", Box::new(index_contrast)),
        ("image toy through the CLI", Box::new(image_toy)),
        ("linear timing in sample size", Box::new(timing_slope)),
        ("CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        suite_clock.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
