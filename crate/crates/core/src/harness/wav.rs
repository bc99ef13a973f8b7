//! RIFF/WAVE reader and writer, 16-bit PCM only.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{SignalBundle, SignalKind};
use crate::error::{Error, Result};
use crate::weighted_stats::DataMatrix;

const PCM: u16 = 1;
const SCALE: f64 = 32768.0;

fn corrupt(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::CorruptHeader {
        path: path.to_owned(),
        offset,
        message: message.into(),
    }
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Samples scaled to `[-1, 1)` by dividing by 32768; channels become columns.
pub fn load_wav(path: impl AsRef<Path>) -> Result<SignalBundle> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(corrupt(path, 0, "missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(corrupt(path, 8, "missing WAVE tag"));
    }

    let mut fmt: Option<(u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(&bytes, at + 4) as usize;
        let body = at + 8;
        if body + size > bytes.len() {
            return Err(corrupt(path, at, "chunk runs past end of file"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(corrupt(path, at, "fmt chunk shorter than 16 bytes"));
                }
                let format = u16_at(&bytes, body);
                let channels = u16_at(&bytes, body + 2);
                let rate = u32_at(&bytes, body + 4);
                let bits = u16_at(&bytes, body + 14);
                if format != PCM {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_owned(),
                        message: format!("audio format {format} is not PCM"),
                    });
                }
                if bits != 16 {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_owned(),
                        message: format!("{bits}-bit samples, only 16-bit is supported"),
                    });
                }
                if channels == 0 {
                    return Err(corrupt(path, body + 2, "zero channels"));
                }
                if rate == 0 {
                    return Err(corrupt(path, body + 4, "zero sample rate"));
                }
                fmt = Some((format, rate, channels));
            }
            b"data" => data = Some(&bytes[body..body + size]),
            _ => {}
        }
        // Chunks are padded to even length.
        at = body + size + (size & 1);
    }
    let (_, rate, channels) = fmt.ok_or_else(|| corrupt(path, 12, "no fmt chunk"))?;
    let payload = data.ok_or_else(|| corrupt(path, 12, "no data chunk"))?;
    let channels = channels as usize;
    let frame = 2 * channels;
    if payload.len() % frame != 0 {
        return Err(corrupt(path, 12, "data length is not a whole number of frames"));
    }
    let frames = payload.len() / frame;
    if frames == 0 {
        return Err(corrupt(path, 12, "no samples"));
    }
    let values = DMatrix::from_fn(frames, channels, |i, c| {
        let at = i * frame + 2 * c;
        i16::from_le_bytes([payload[at], payload[at + 1]]) as f64 / SCALE
    });
    Ok(SignalBundle::new(
        DataMatrix::new(values)?,
        SignalKind::Wav { sample_rate: rate },
    ))
}

/// Writes every column as a channel. Values are clamped to the 16-bit range.
pub fn save_wav(bundle: &SignalBundle, path: impl AsRef<Path>, rate: u32) -> Result<()> {
    let path = path.as_ref();
    if rate == 0 {
        return Err(Error::InvalidData("sample rate must be positive".into()));
    }
    let values = bundle.data.values();
    let (frames, channels) = values.shape();
    if channels > u16::MAX as usize {
        return Err(Error::InvalidData(format!("{channels} channels")));
    }
    let data_len = frames * channels * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * channels as u32 * 2).to_le_bytes());
    out.extend_from_slice(&(channels as u16 * 2).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..frames {
        for c in 0..channels {
            let q = (values[(i, c)] * SCALE).round().clamp(-32768.0, 32767.0) as i16;
            out.extend_from_slice(&q.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
