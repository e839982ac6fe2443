//! CSV ingestion: rows are observations, columns are variables.

use std::path::Path;

use hdmt_core::DataMatrix;
use ndarray::Array2;

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// `Some(true)`: the first row is a header. `None`: treat the first row
    /// as a header when none of its cells parse as numbers.
    pub header: Option<bool>,
    /// Rescale each column so that `(1/n) sum_i x_ij^2 = 1`.
    pub normalize: bool,
}

fn from_rows(rows: Vec<Vec<f64>>, p: usize) -> Result<DataMatrix, String> {
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((n, p), flat).map_err(|e| e.to_string())?;
    DataMatrix::new(values).map_err(|e| e.to_string())
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

/// Reads a rectangular numeric CSV. Errors name the offending line (1-based,
/// counting a header line) and column.
pub fn load_matrix(path: &Path, options: LoadOptions) -> Result<DataMatrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if idx == 0 {
            let is_header = match options.header {
                Some(h) => h,
                None => record.iter().all(|c| parse_cell(c).is_none()),
            };
            if is_header {
                width = Some(record.len());
                continue;
            }
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Data(format!(
                "{}: row {line} has {} fields, expected {expected}",
                path.display(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(expected);
        for (j, cell) in record.iter().enumerate() {
            let value = parse_cell(cell).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: row {line}, column {}: cannot parse '{cell}' as a number",
                    path.display(),
                    j + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: row {line}, column {}: non-finite value '{cell}'",
                    path.display(),
                    j + 1
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    let p = width.unwrap_or(0);
    let mut data = from_rows(rows, p).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if options.normalize {
        if let Some(j) = data.view().columns().into_iter().position(|c| c.iter().all(|&v| v == 0.0)) {
            return Err(CliError::Data(format!(
                "{}: column {} is identically zero and cannot be normalized",
                path.display(),
                j + 1
            )));
        }
        data.normalize_second_moment();
    }
    Ok(data)
}
