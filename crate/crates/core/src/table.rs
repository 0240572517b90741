//! Reading of headed CSV tables with line-numbered diagnostics.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// One data row: its 1-based line number and the requested cells in the
/// order the columns were asked for.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub line: u64,
    pub cells: Vec<String>,
}

impl Row {
    /// Cell `i` parsed as a finite float.
    pub fn number(&self, i: usize, column: &str) -> Result<f64> {
        let cell = &self.cells[i];
        cell.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(format!("`{column}` is not a number: {cell:?}")))
    }

    pub fn error(&self, message: String) -> Error {
        Error::Parse {
            file: None,
            line: self.line,
            message,
        }
    }
}

/// Reads the named columns of a headed CSV table. Rows whose first cell
/// starts with `#` are skipped.
pub fn read_columns(reader: impl Read, columns: &[&str]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        file: None,
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let idx = columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.get(0).is_some_and(|c| c.starts_with('#')) {
            continue;
        }
        if rec.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let cells = idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect();
        rows.push(Row { line, cells });
    }
    Ok(rows)
}

/// Opens `file` and hands it to `parse`, attaching the file name to parse
/// errors.
pub fn with_file<T>(file: &Path, parse: impl FnOnce(std::fs::File) -> Result<T>) -> Result<T> {
    let f = std::fs::File::open(file).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing(format!("{} does not exist", file.display())),
        _ => Error::io(file, e),
    })?;
    parse(f).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            file: Some(file.to_path_buf()),
            line,
            message,
        },
        other => other,
    })
}
