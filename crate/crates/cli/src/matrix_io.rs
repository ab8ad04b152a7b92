//! Matrix files: JSON `{rows, cols, entries: [[re, im], ...]}` (row-major) and
//! real CSV (one matrix row per line, `#` lines ignored).

use std::fs;
use std::path::Path;

use mpinv_core::{Matrix, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&Matrix> for MatrixFile {
    fn from(m: &Matrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<Matrix, String> {
        if self.entries.len() != self.rows * self.cols {
            return Err(format!(
                "{} entries for a {}x{} matrix",
                self.entries.len(),
                self.rows,
                self.cols
            ));
        }
        let data = self.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        Matrix::from_row_major(self.rows, self.cols, data).map_err(|e| e.to_string())
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a matrix, choosing CSV for a `.csv` extension and JSON otherwise.
/// Rejects empty and non-finite matrices.
pub fn read_matrix(path: &Path) -> Result<Matrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m = if is_csv(path) {
        parse_csv(&text)
    } else {
        serde_json::from_str::<MatrixFile>(&text)
            .map_err(|e| e.to_string())
            .and_then(MatrixFile::into_matrix)
    }
    .map_err(|e| format!("{}: {e}", path.display()))?;
    if m.rows() == 0 || m.cols() == 0 {
        return Err(format!("{}: empty matrix", path.display()));
    }
    if let Some((i, j)) = m.find_non_finite() {
        return Err(format!("{}: non-finite entry at ({i}, {j})", path.display()));
    }
    Ok(m)
}

pub fn parse_csv(text: &str) -> Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| format!("row {}: {s:?}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Matrix::from_real(rows.len(), cols, &flat).map_err(|e| e.to_string())
}

/// Real CSV body. Fails if any entry has a nonzero imaginary part.
pub fn matrix_csv(m: &Matrix) -> Result<String, String> {
    if m.as_slice().iter().any(|z| z.im != 0.0) {
        return Err("complex result cannot be written as CSV; use --format json".into());
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|z| format!("{:?}", z.re)))
            .map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}
