use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::TimeSeries;

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Reads a `timestamp,value` CSV. A first row whose first field is
/// `timestamp` is a header; a blank value is a missing sample.
pub fn load_csv(path: &Path) -> Result<TimeSeries> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, path)
}

fn parse_csv(text: &str, path: &Path) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut stamps = Vec::new();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if i == 0 && record[0].eq_ignore_ascii_case("timestamp") {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let value = match &record[1] {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("bad value {s:?}: {e}"),
            })?),
        };
        if let Some(v) = value {
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("value {v} is not finite"),
                });
            }
        }
        stamps.push(record[0].to_string());
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    TimeSeries::from_options(samples).with_timestamps(stamps)
}

/// Serializes a series as `timestamp,value`, with sample indices standing in
/// for missing timestamps. Missing samples are written blank.
pub fn series_to_csv(series: &TimeSeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["timestamp", "value"]).map_err(csv_err)?;
    for (i, (&v, &missing)) in series
        .values()
        .iter()
        .zip(series.missing_mask())
        .enumerate()
    {
        let stamp = match series.timestamps() {
            Some(t) => t[i].clone(),
            None => i.to_string(),
        };
        let value = if missing {
            String::new()
        } else {
            format_f64(v)
        };
        w.write_record([stamp, value]).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn save_series_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    write_atomic(path, &series_to_csv(series)?)
}

/// Writes rows of already formatted cells as CSV.
pub(crate) fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}
