//! Deterministic number formatting and small CSV helpers shared by the
//! diagram, field and CLI writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Significant digits kept in every written float.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds `v` to 9 significant digits and prints the shortest string that
/// reads back to the rounded value. Negative zero prints as `0.0`.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        return "0.0".to_string();
    }
    format!("{rounded:?}")
}

/// Opens `path` for buffered writing, creating parent directories.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes a header line and rows of already formatted cells.
pub fn write_rows<W: Write>(mut w: W, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Writes a CSV file from a header and formatted rows.
pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let w = create(path)?;
    write_rows(w, header, rows).map_err(|e| Error::io(path, e))
}

/// Writes pretty-printed JSON.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
