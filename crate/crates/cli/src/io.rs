//! Kernel files: a JSON object `{states, matrix, kind}`, or a bare CSV
//! matrix read as a stochastic kernel.

use std::fs;
use std::path::Path;

use mhrev::{RateGenerator, SignedKernel, StochasticKernel};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Row sums must match within this tolerance for a file to load.
pub const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Stochastic,
    Signed,
    Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub states: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub kind: Kind,
}

pub fn default_states(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

impl KernelFile {
    pub fn new(matrix: &DMatrix<f64>, kind: Kind, states: Vec<String>) -> Self {
        Self {
            states,
            matrix: matrix.row_iter().map(|r| r.iter().copied().collect()).collect(),
            kind,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.matrix.len();
        if n == 0 {
            return Err(CliError::Parse("matrix is empty".into()));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CliError::Parse(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if self.states.len() != n {
            return Err(CliError::Parse(format!(
                "{} state names for a {n}x{n} matrix",
                self.states.len()
            )));
        }
        Ok(DMatrix::from_fn(n, n, |x, y| self.matrix[x][y]))
    }

    pub fn stochastic(&self) -> Result<StochasticKernel> {
        if self.kind != Kind::Stochastic {
            return Err(CliError::Parse(format!(
                "expected a stochastic kernel, file is tagged {:?}",
                self.kind
            )));
        }
        Ok(StochasticKernel::with_tolerance(self.to_matrix()?, ROW_TOL)?)
    }

    /// Checks the structural invariants for the declared kind.
    pub fn validate(&self) -> Result<()> {
        let m = self.to_matrix()?;
        match self.kind {
            Kind::Stochastic => drop(StochasticKernel::with_tolerance(m, ROW_TOL)?),
            Kind::Signed => drop(SignedKernel::with_tolerance(m, ROW_TOL)?),
            Kind::Generator => drop(RateGenerator::with_tolerance(m, ROW_TOL)?),
        }
        Ok(())
    }

    pub fn parse(text: &str, csv_hint: bool) -> Result<Self> {
        let trimmed = text.trim_start();
        let file = if !csv_hint && trimmed.starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?
        } else {
            let matrix = parse_csv(text)?;
            KernelFile {
                states: default_states(matrix.len()),
                matrix,
                kind: Kind::Stochastic,
            }
        };
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        Self::parse(&text, csv)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("kernel files serialize");
        s.push('\n');
        s
    }

    /// Bare matrix; `{:?}` prints the shortest representation that reads
    /// back to the same f64.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.matrix {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|e| CliError::Parse(format!("row {i}: {cell:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
