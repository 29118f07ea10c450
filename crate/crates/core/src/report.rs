//! Deterministic report emission: JSON with sorted keys, RFC 4180 CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Convert any serializable value to a `serde_json::Value`. The default
/// `serde_json` map is BTree-backed, so object keys come out sorted.
pub fn to_sorted_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Format(format!("json: {e}")))
}

pub fn write_json_sorted(w: &mut impl Write, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Format(format!("json: {e}")))?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Serialize `value` to `path` as UTF-8 JSON with sorted keys.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let v = to_sorted_value(value)?;
    let mut w = BufWriter::new(File::create(path)?);
    write_json_sorted(&mut w, &v)?;
    w.flush()?;
    Ok(())
}

/// Fixed 17-significant-digit float formatting for CSV cells; round-trips
/// f64 exactly and is byte-stable across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') || cell.contains('\r') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Write an RFC 4180 CSV table (CRLF line endings).
pub fn save_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(&mut w, header, rows)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv(w: &mut impl Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let head: Vec<String> = header.iter().map(|h| csv_escape(h)).collect();
    w.write_all(head.join(",").as_bytes())?;
    w.write_all(b"\r\n")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| csv_escape(c)).collect();
        w.write_all(cells.join(",").as_bytes())?;
        w.write_all(b"\r\n")?;
    }
    Ok(())
}
