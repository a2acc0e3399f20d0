//! Text formats shared by the library and the command-line front end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Floats are written with 12 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    format!("{x:.11e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Minimal in-memory CSV builder: optional `#` comment lines, one header
/// row, comma-separated rows, `\n` line endings.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// On-disk form of a 4×4 complex matrix: `{"real": [[..4]..4], "imag": [[..4]..4]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix<4>) -> Self {
        let real = (0..4).map(|r| (0..4).map(|c| m[(r, c)].re).collect()).collect();
        let imag = (0..4).map(|r| (0..4).map(|c| m[(r, c)].im).collect()).collect();
        Self { real, imag }
    }

    pub fn to_matrix(&self) -> Result<CMatrix<4>> {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == 4 && rows.iter().all(|r| r.len() == 4);
        if !shape_ok(&self.real) || !shape_ok(&self.imag) {
            return Err(Error::Parse("matrix must be 4x4 in both `real` and `imag`".into()));
        }
        let mut m = CMatrix::<4>::zeros();
        for r in 0..4 {
            for c in 0..4 {
                let (re, im) = (self.real[r][c], self.imag[r][c]);
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::Parse(format!("non-finite entry at ({r}, {c})")));
                }
                m[(r, c)] = C64::new(re, im);
            }
        }
        Ok(m)
    }
}

pub fn parse_matrix_json(text: &str) -> Result<CMatrix<4>> {
    let file: MatrixFile = serde_json::from_str(text)?;
    file.to_matrix()
}
