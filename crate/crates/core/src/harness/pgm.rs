//! Binary PGM (P5, maxval 255) images as single-column signals.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{SignalBundle, SignalKind};
use crate::error::{Error, Result};
use crate::weighted_stats::DataMatrix;

fn corrupt(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::CorruptHeader {
        path: path.to_owned(),
        offset,
        message: message.into(),
    }
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn next_token(path: &Path, bytes: &[u8], at: &mut usize) -> Result<(usize, usize)> {
    loop {
        while *at < bytes.len() && bytes[*at].is_ascii_whitespace() {
            *at += 1;
        }
        if *at < bytes.len() && bytes[*at] == b'#' {
            while *at < bytes.len() && bytes[*at] != b'\n' {
                *at += 1;
            }
            continue;
        }
        break;
    }
    let start = *at;
    while *at < bytes.len() && !bytes[*at].is_ascii_whitespace() {
        *at += 1;
    }
    if start == *at {
        return Err(corrupt(path, start, "truncated header"));
    }
    let text = std::str::from_utf8(&bytes[start..*at])
        .map_err(|_| corrupt(path, start, "header is not ASCII"))?;
    let value = text
        .parse::<usize>()
        .map_err(|_| corrupt(path, start, format!("expected an integer, found {text:?}")))?;
    Ok((start, value))
}

/// Returns `(width, height, pixels)` with pixels in row-major order.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(corrupt(path, 0, "missing P magic"));
    }
    if bytes[1] != b'5' {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            message: format!("netpbm variant P{}, only binary P5 is supported", bytes[1] as char),
        });
    }
    let mut at = 2;
    let (_, width) = next_token(path, &bytes, &mut at)?;
    let (_, height) = next_token(path, &bytes, &mut at)?;
    let (max_at, maxval) = next_token(path, &bytes, &mut at)?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            message: format!("maxval {maxval} at byte {max_at}, only 255 is supported"),
        });
    }
    if width == 0 || height == 0 {
        return Err(corrupt(path, 2, "zero image dimension"));
    }
    if at >= bytes.len() || !bytes[at].is_ascii_whitespace() {
        return Err(corrupt(path, at, "missing separator before pixel data"));
    }
    at += 1;
    let expected = width * height;
    let payload = &bytes[at..];
    if payload.len() < expected {
        return Err(corrupt(
            path,
            at,
            format!("expected {expected} pixel bytes, found {}", payload.len()),
        ));
    }
    Ok((width, height, payload[..expected].to_vec()))
}

pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if pixels.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: pixels.len(),
        });
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One column of pixels scaled to `[0, 1]`; dimensions kept in the kind.
pub fn load_image_gray(path: impl AsRef<Path>) -> Result<SignalBundle> {
    let (width, height, pixels) = read_pgm(path)?;
    let values = DMatrix::from_iterator(pixels.len(), 1, pixels.iter().map(|&p| p as f64 / 255.0));
    Ok(SignalBundle::new(
        DataMatrix::new(values)?,
        SignalKind::Image { width, height },
    ))
}

/// Writes a single-column image bundle, values in `[0, 1]` mapped to bytes.
pub fn save_image_gray(bundle: &SignalBundle, path: impl AsRef<Path>) -> Result<()> {
    let (width, height) = bundle
        .image_dims()
        .ok_or_else(|| Error::InvalidData("bundle carries no image dimensions".into()))?;
    if bundle.data.ndims() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "an image bundle has one column, found {}",
            bundle.data.ndims()
        )));
    }
    if bundle.data.nsamples() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: bundle.data.nsamples(),
        });
    }
    write_pgm(path, width, height, &pixels_unit(bundle.data.column(0)))
}

/// `round(255·v)`, clamped.
pub fn pixels_unit(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Affine min-max rescale to `[0, 255]`. Orientation: positively correlated
/// with `reference` when given, otherwise the median pixel is at most half
/// scale.
pub fn pixels_minmax(values: &[f64], reference: Option<&[f64]>) -> Vec<u8> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if !(span > 0.0) {
        return vec![0; values.len()];
    }
    let mut unit: Vec<f64> = values.iter().map(|v| (v - min) / span).collect();
    let flip = match reference {
        Some(r) => {
            let mu = unit.iter().sum::<f64>() / unit.len() as f64;
            let mr = r.iter().sum::<f64>() / r.len() as f64;
            unit.iter().zip(r).map(|(u, r)| (u - mu) * (r - mr)).sum::<f64>() < 0.0
        }
        None => {
            let mut sorted = unit.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[(sorted.len() - 1) / 2] > 0.5
        }
    };
    if flip {
        unit.iter_mut().for_each(|u| *u = 1.0 - *u);
    }
    pixels_unit(&unit)
}
