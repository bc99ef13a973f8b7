use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SignalBundle, SignalKind};
use crate::error::{Error, Result};
use crate::weighted_stats::DataMatrix;

/// Reads a rectangular numeric table. A first line with any non-numeric
/// field is taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<SignalBundle> {
    let path = path.as_ref();
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            header = Some(record.iter().map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows {
                path: path.to_owned(),
                line,
                expected,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(expected);
        for (col, (value, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_owned(),
                        line,
                        message: format!("field {} is not a finite number: {raw:?}", col + 1),
                    })
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            message: "no numeric rows".into(),
        });
    }
    let data = DataMatrix::from_rows(&rows)?;
    Ok(SignalBundle::new(data, SignalKind::Csv).with_descriptors(header.unwrap_or_default()))
}

fn csv_error(path: &Path, e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_owned(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes the bundle's data, with a header line when the bundle carries one
/// descriptor per column.
pub fn save_csv(bundle: &SignalBundle, path: impl AsRef<Path>) -> Result<()> {
    let header = (bundle.descriptors.len() == bundle.data.ndims())
        .then(|| bundle.descriptors.clone());
    let values = bundle.data.values();
    let rows = (0..values.nrows()).map(|i| values.row(i).iter().cloned().collect::<Vec<_>>());
    write_csv_table(path, header.as_deref(), rows)
}

/// Writes rows of numbers; values are printed with the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv_table<I, R>(path: impl AsRef<Path>, header: Option<&[String]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    write_csv_records(
        path,
        header,
        rows.into_iter()
            .map(|r| r.as_ref().iter().map(|v| format_value(*v)).collect::<Vec<_>>()),
    )
}

/// Round-trip text form of a value in every emitted table.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Writes rows of text fields, quoting only fields that need it.
pub fn write_csv_records<I, R, S>(path: impl AsRef<Path>, header: Option<&[String]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    let mut emit = |fields: &mut dyn Iterator<Item = &str>, line: &mut String| {
        line.clear();
        for (j, f) in fields.enumerate() {
            if j > 0 {
                line.push(',');
            }
            if f.contains([',', '"', '\n', '\r']) {
                line.push('"');
                line.push_str(&f.replace('"', "\"\""));
                line.push('"');
            } else {
                line.push_str(f);
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
    };
    if let Some(h) = header {
        emit(&mut h.iter().map(String::as_str), &mut line)?;
    }
    for row in rows {
        let fields: Vec<S> = row.into_iter().collect();
        emit(&mut fields.iter().map(AsRef::as_ref), &mut line)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
