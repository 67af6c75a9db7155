use std::path::Path;

use crate::error::{Error, ParseError, Result};

/// Labelled square matrix of distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            values: vec![vec![0.0; n]; n],
        }
    }

    pub fn from_rows(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("expected a {n}x{n} matrix")));
        }
        Ok(Self { labels, values })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i][j] = v;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.size();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.values[i][j] - self.values[j][i]).abs())
            .fold(0.0, f64::max)
    }

    /// Mean of the off-diagonal entries.
    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.size();
        if n < 2 {
            return 0.0;
        }
        let sum: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| self.values[i][j])
            .sum();
        sum / (n * (n - 1)) as f64
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.size();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| self.values[i][j])
            .fold(0.0, f64::max)
    }
}

/// CSV with a header row of labels, a label column, and six decimals.
pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DistanceMatrix) -> Result<()> {
    let path = path.as_ref();
    crate::fsutil::write_bytes_atomic(path, matrix_csv_bytes(m).as_bytes())
}

pub(crate) fn matrix_csv_bytes(m: &DistanceMatrix) -> String {
    let mut out = String::from("network");
    for l in &m.labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (label, row) in m.labels.iter().zip(&m.values) {
        out.push_str(label);
        for v in row {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut values = Vec::with_capacity(n);
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != n + 1 {
            return Err(ParseError::WidthMismatch(format!(
                "line {line}: {} values in a {n}-column matrix",
                rec.len().saturating_sub(1)
            ))
            .into());
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::from(ParseError::Malformed {
                        line,
                        message: format!("`{v}` is not a number"),
                    })
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    if values.len() != n {
        return Err(ParseError::WidthMismatch(format!("{} rows in a {n}-column matrix", values.len())).into());
    }
    Ok(DistanceMatrix { labels, values })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        ParseError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        }
        .into()
    }
}
