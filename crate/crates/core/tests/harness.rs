mod common;

use std::f64::consts::TAU;
use std::fs;

use common::*;
use mweica::harness::*;
use mweica::{DataMatrix, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn csv_round_trip_is_exact() {
    let mut r = mweica::rng::seeded(4);
    let m = gaussian_matrix(100, 3, &mut r).map(|v| v * 1e3_f64.powf(v));
    let bundle = SignalBundle::new(DataMatrix::new(m).unwrap(), SignalKind::Csv)
        .with_descriptors(vec!["a".into(), "b".into(), "c".into()]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    save_csv(&bundle, &p).unwrap();
    let back = load_csv(&p).unwrap();
    assert_eq!(back.data, bundle.data);
    assert_eq!(back.descriptors, bundle.descriptors);
}

#[test]
fn csv_header_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("h.csv");
    fs::write(&p, "s1,s2\n1,2\n3,4\n").unwrap();
    let b = load_csv(&p).unwrap();
    assert_eq!(b.data.values(), &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    fs::write(&p, "1,2\n3\n").unwrap();
    assert!(matches!(load_csv(&p), Err(Error::RaggedRows { line: 2, .. })));
    fs::write(&p, "1,2\n3,4\n5,x\n").unwrap();
    let err = load_csv(&p).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    assert!(err.to_string().contains('3'));
}

#[test]
fn wav_sine_round_trip_within_one_step() {
    let rate = 8000;
    let tone: Vec<f64> = (0..rate).map(|i| 0.8 * (TAU * 1000.0 * i as f64 / rate as f64).sin()).collect();
    let bundle = SignalBundle::new(
        DataMatrix::from_columns(std::slice::from_ref(&tone)).unwrap(),
        SignalKind::Wav { sample_rate: rate as u32 },
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tone.wav");
    save_wav(&bundle, &p, rate as u32).unwrap();
    let back = load_wav(&p).unwrap();
    assert_eq!(back.sample_rate(), Some(rate as u32));
    let worst = back.data.column(0).iter().zip(&tone).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1.0 / 32768.0, "{worst}");
}

#[test]
fn wav_errors_name_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.wav");
    fs::write(&p, b"RIFX\0\0\0\0WAVE").unwrap();
    let err = load_wav(&p).unwrap_err();
    assert!(matches!(err, Error::CorruptHeader { offset: 0, .. }), "{err}");
}

#[test]
fn mixing_fixture_is_bit_exact() {
    let a = random_mixing_matrix(2, 20240601, 20.0).unwrap();
    let bits: Vec<u64> = a.matrix.transpose().iter().map(|v| v.to_bits()).collect();
    assert_eq!(
        bits,
        [0xbfe2eaf428138c4e, 0x3ff08bf4f23fa428, 0xbffeb8530b352fa7, 0xbfe221c26bd32da0]
    );
}

#[test]
fn bootstrap_moments() {
    let input: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
    let (mu, var) = {
        let n = input.len() as f64;
        let mu = input.iter().sum::<f64>() / n;
        (mu, input.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n)
    };
    for n in [1000usize, 10_000, 100_000] {
        let b = bootstrap_sources(&[input.clone(), input.clone()], n, 3).unwrap();
        for c in 0..2 {
            let m = b.data.column(c).iter().sum::<f64>() / n as f64;
            assert!((m - mu).abs() < 5.0 * var.sqrt() / (n as f64).sqrt(), "n {n} col {c}");
        }
        let rho = correlation(b.data.column(0), b.data.column(1));
        assert!(rho.abs() < 5.0 / (n as f64).sqrt(), "n {n}: ρ = {rho}");
    }
}

#[test]
fn synthetic_families_have_their_moments() {
    let k = 40_000;
    let bound = 5.0 / (k as f64).sqrt();
    for seed in 0..3 {
        let u = synth_sources(SourceKind::Uniform, k, 2, seed).unwrap().data;
        let l = synth_sources(SourceKind::Laplace, k, 2, seed).unwrap().data;
        let bi = synth_sources(SourceKind::Bimodal, k, 2, seed).unwrap().data;
        for c in 0..2 {
            let (mean, var, excess) = column_moments(&u, c);
            assert!(mean.abs() < bound && (var - 1.0).abs() < bound);
            // Population excess kurtosis: −1.2 uniform, +3 Laplace.
            assert!(excess < -1.0, "uniform {excess}");
            let (_, var, excess) = column_moments(&l, c);
            assert!((var - 1.0).abs() < 4.0 * bound, "laplace var {var}");
            assert!(excess > 2.0, "laplace {excess}");
            let (_, var, excess) = column_moments(&bi, c);
            assert!((var - 1.0).abs() < bound && excess < -1.0);
        }
    }
}

#[test]
fn sine_columns_are_uncorrelated() {
    for k in [1000usize, 10_000] {
        let s = synth_sources(SourceKind::SineMixture, k, 4, 1).unwrap().data;
        for a in 0..4 {
            for b in a + 1..4 {
                let rho = correlation(s.column(a), s.column(b));
                assert!(rho.abs() < 5.0 / (k as f64).sqrt(), "k {k} ({a},{b}): {rho}");
            }
        }
    }
}

#[test]
fn randomized_outputs_depend_only_on_seed() {
    assert_eq!(
        synth_sources(SourceKind::Laplace, 100, 3, 8).unwrap().data,
        synth_sources(SourceKind::Laplace, 100, 3, 8).unwrap().data
    );
    let cols = [vec![1.0, 2.0, 3.0]];
    assert_eq!(
        bootstrap_sources(&cols, 50, 2).unwrap().data,
        bootstrap_sources(&cols, 50, 2).unwrap().data
    );
}

#[test]
fn images_rescale_to_full_range() {
    let values = [-3.0, -1.0, 0.5, 2.0];
    let px = pixels_minmax(&values, None);
    assert_eq!((px.iter().min(), px.iter().max()), (Some(&0), Some(&255)));
    let reference = [0.0, 0.2, 0.3, 1.0];
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    assert_eq!(pixels_minmax(&negated, Some(&reference)), pixels_minmax(&values, Some(&reference)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trips_any_finite_table(v in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 12)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let data = DataMatrix::new(DMatrix::from_vec(4, 3, v)).unwrap();
        save_csv(&SignalBundle::new(data.clone(), SignalKind::Csv), &p).unwrap();
        prop_assert_eq!(load_csv(&p).unwrap().data, data);
    }
}
