//! Reading stacked inputs and writing signals back in their own medium.

use std::path::{Path, PathBuf};

use mweica::harness::{
    load_csv, load_image_gray, load_wav, pixels_minmax, save_csv, save_wav, write_pgm,
    SignalBundle, SignalKind,
};
use mweica::DataMatrix;

use crate::error::{input, Result};
use crate::output::{sha256_file, Meta, Staging};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    Csv,
    Wav { rate: u32 },
    Image { width: usize, height: usize },
}

impl Medium {
    pub fn name(self) -> &'static str {
        match self {
            Medium::Csv => "csv",
            Medium::Wav { .. } => "wav",
            Medium::Image { .. } => "pgm",
        }
    }
}

#[derive(Debug)]
pub struct Loaded {
    pub data: DataMatrix,
    pub medium: Medium,
    pub files: Vec<(PathBuf, String)>,
}

impl Loaded {
    /// Records each input path and its SHA-256 under `prefix`.
    pub fn describe(&self, meta: &mut Meta, prefix: &str) {
        meta.set(format!("{prefix}.count"), self.files.len());
        for (i, (path, digest)) in self.files.iter().enumerate() {
            meta.set(format!("{prefix}.{i}.path"), path.display());
            meta.set(format!("{prefix}.{i}.sha256"), digest);
        }
        meta.set(format!("{prefix}.medium"), self.medium.name());
    }
}

fn load_one(path: &Path) -> Result<(SignalBundle, Medium)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "csv" => Ok((load_csv(path)?, Medium::Csv)),
        "wav" => {
            let b = load_wav(path)?;
            let rate = b.sample_rate().unwrap_or(0);
            Ok((b, Medium::Wav { rate }))
        }
        "pgm" => {
            let b = load_image_gray(path)?;
            let (width, height) = b.image_dims().unwrap_or((0, 0));
            Ok((b, Medium::Image { width, height }))
        }
        _ => Err(input(format!(
            "{}: unrecognized extension, expected .csv, .wav or .pgm",
            path.display()
        ))),
    }
}

/// Loads every path and stacks their columns. All inputs must share one
/// medium and one length.
pub fn load_inputs(paths: &[PathBuf]) -> Result<Loaded> {
    if paths.is_empty() {
        return Err(input("no input files given"));
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut medium: Option<Medium> = None;
    let mut files = Vec::with_capacity(paths.len());
    for path in paths {
        let (bundle, m) = load_one(path)?;
        match medium {
            None => medium = Some(m),
            Some(first) if first != m => {
                return Err(input(format!(
                    "{}: {} input does not match the first input ({:?} vs {:?})",
                    path.display(),
                    m.name(),
                    m,
                    first
                )))
            }
            Some(_) => {}
        }
        if let Some(first) = columns.first() {
            if first.len() != bundle.data.nsamples() {
                return Err(input(format!(
                    "{}: {} samples, expected {} like the first input",
                    path.display(),
                    bundle.data.nsamples(),
                    first.len()
                )));
            }
        }
        for j in 0..bundle.data.ndims() {
            columns.push(bundle.data.column(j).to_vec());
        }
        files.push((path.clone(), sha256_file(path)?));
    }
    Ok(Loaded {
        data: DataMatrix::from_columns(&columns)?,
        medium: medium.expect("at least one input"),
        files,
    })
}

pub fn save_table(staging: &mut Staging, name: &str, data: &DataMatrix, label: &str) -> Result<()> {
    let descriptors = (0..data.ndims()).map(|j| format!("{label}{j}")).collect();
    let bundle = SignalBundle::new(data.clone(), SignalKind::Csv).with_descriptors(descriptors);
    save_csv(&bundle, staging.file(name))?;
    Ok(())
}

/// Writes `data` in `medium`: one image per column, or one multichannel WAV
/// scaled so its largest sample is `WAV_PEAK`. CSV needs nothing extra.
/// Returns the WAV scale factor when one was applied.
pub fn save_medium(
    staging: &mut Staging,
    stem: &str,
    data: &DataMatrix,
    medium: Medium,
    references: Option<Vec<&[f64]>>,
) -> Result<Option<f64>> {
    match medium {
        Medium::Csv => Ok(None),
        Medium::Image { width, height } => {
            for j in 0..data.ndims() {
                let reference = references.as_ref().map(|r| r[j]);
                let pixels = pixels_minmax(data.column(j), reference);
                write_pgm(staging.file(&format!("{stem}_{j}.pgm")), width, height, &pixels)?;
            }
            Ok(None)
        }
        Medium::Wav { rate } => {
            let peak = data.values().amax();
            let scale = if peak > 0.0 { WAV_PEAK / peak } else { 1.0 };
            let bundle = SignalBundle::new(
                DataMatrix::new(data.values() * scale)?,
                SignalKind::Wav { sample_rate: rate },
            );
            save_wav(&bundle, staging.file(&format!("{stem}.wav")), rate)?;
            Ok(Some(scale))
        }
    }
}

pub const WAV_PEAK: f64 = 0.9;
