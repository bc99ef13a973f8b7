//! Data ingestion, source synthesis and mixing for separation experiments.
//!
//! Three on-disk formats are supported: CSV tables, 16-bit PCM WAV and binary
//! PGM (P5, maxval 255).

mod csv;
mod pgm;
mod synth;
mod wav;

pub use self::csv::{format_value, load_csv, save_csv, write_csv_records, write_csv_table};
pub use self::pgm::{
    load_image_gray, pixels_minmax, pixels_unit, read_pgm, save_image_gray, write_pgm,
};
pub use self::synth::{
    bootstrap_sources, mix, random_mixing_matrix, synth_sources, MixSpec, SourceKind,
    DEFAULT_CONDITION_BOUND,
};
pub use self::wav::{load_wav, save_wav};

use crate::weighted_stats::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    Csv,
    Wav { sample_rate: u32 },
    Image { width: usize, height: usize },
    Synthetic,
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalBundle {
    pub data: DataMatrix,
    pub kind: SignalKind,
    /// One label per column (CSV header names, generator descriptions).
    pub descriptors: Vec<String>,
}

impl SignalBundle {
    pub fn new(data: DataMatrix, kind: SignalKind) -> Self {
        SignalBundle {
            data,
            kind,
            descriptors: Vec::new(),
        }
    }

    pub fn with_descriptors(mut self, descriptors: Vec<String>) -> Self {
        self.descriptors = descriptors;
        self
    }

    pub fn sample_rate(&self) -> Option<u32> {
        match self.kind {
            SignalKind::Wav { sample_rate } => Some(sample_rate),
            _ => None,
        }
    }

    pub fn image_dims(&self) -> Option<(usize, usize)> {
        match self.kind {
            SignalKind::Image { width, height } => Some((width, height)),
            _ => None,
        }
    }
}
