// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited text input.

use crate::CliError;
use energy_cp::TimeSeries;
use std::path::Path;

/// Reads a rectangular numeric table; rows are observations in time order.
///
/// Ragged rows, empty cells and non-numeric or non-finite cells are rejected
/// with their line and 1-based column.
pub fn ingest_csv(path: &Path, has_header: bool, delimiter: u8) -> Result<TimeSeries, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&bytes, has_header, delimiter)
        .map_err(|msg| CliError::Data(format!("{}: {msg}", path.display())))
}

pub(crate) fn parse_table(
    bytes: &[u8],
    has_header: bool,
    delimiter: u8,
) -> Result<TimeSeries, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut width = if has_header {
        let header = reader.headers().map_err(|e| e.to_string())?;
        Some(header.len())
    } else {
        None
    };

    let mut data = Vec::new();
    let mut len = 0;
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(format!(
                "line {line}: expected {expected} columns, found {}",
                record.len()
            ));
        }
        for (col, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    if cell.is_empty() {
                        format!("line {line}, column {}: missing value", col + 1)
                    } else {
                        format!(
                            "line {line}, column {}: `{cell}` is not a finite number",
                            col + 1
                        )
                    }
                })?;
            data.push(value);
        }
        len += 1;
    }
    if len == 0 {
        return Err("no observations".into());
    }
    TimeSeries::from_flat(data, len, width.unwrap_or(0)).map_err(|e| e.to_string())
}

/// One label per non-empty line.
pub fn read_labels(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}
