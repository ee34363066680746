//! Observation panels and their radial/angular decomposition.
//!
//! A [`DataMatrix`] holds `n` observations of a `d`-dimensional vector in
//! row-major order. [`RadialSample`] is the L1 decomposition of such a panel:
//! every row is split into its radius `R_i = sum_j X_ij` and its direction
//! `W_i = X_i / R_i`, and the radii are kept sorted so that upper order
//! statistics can be read off directly.

use std::path::Path;

use crate::error::{MesError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a panel from row-major values. Every entry must be finite.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(MesError::InvalidInput(format!(
                "panel must have positive dimensions, got {n}x{d}"
            )));
        }
        if values.len() != n * d {
            return Err(MesError::InvalidInput(format!(
                "expected {} values for a {n}x{d} panel, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(MesError::InvalidInput(format!(
                "non-finite entry at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(MesError::InvalidInput(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(n, d, values)
    }

    /// A single-column panel.
    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The panel multiplied entrywise by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            d: self.d,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.d) {
            return Err(MesError::InvalidInput(format!(
                "column {bad} out of range for d = {}",
                self.d
            )));
        }
        let mut values = Vec::with_capacity(self.n * columns.len());
        for row in self.rows() {
            values.extend(columns.iter().map(|&j| row[j]));
        }
        Self::new(self.n, columns.len(), values)
    }
}

/// A panel with column labels, as read from or written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPanel {
    pub names: Vec<String>,
    pub data: DataMatrix,
}

impl LabeledPanel {
    /// Labels `x1..xd`.
    pub fn unnamed(data: DataMatrix) -> Self {
        let names = (1..=data.d()).map(|j| format!("x{j}")).collect();
        Self { names, data }
    }

    /// Reads a CSV file with a header row of column names and one numeric
    /// observation per line.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut values = Vec::new();
        let mut n = 0;
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            for raw in record.iter() {
                values.push(raw.trim().parse::<f64>().map_err(|_| {
                    MesError::Parse(format!("row {}: '{raw}' is not a number", line + 2))
                })?);
            }
            n += 1;
        }
        let data = DataMatrix::new(n, names.len(), values)?;
        Ok(Self { names, data })
    }

    /// Shortest round-tripping decimal form of every value.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.names)?;
        for row in self.data.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// L1 radial/angular decomposition of a [`DataMatrix`].
#[derive(Debug, Clone)]
pub struct RadialSample {
    d: usize,
    radii: Vec<f64>,
    order: Vec<usize>,
    sorted: Vec<f64>,
    angular: Vec<f64>,
    zero_rows: Vec<usize>,
}

/// Splits every row into its radius and direction.
///
/// Rows with zero radius carry no direction; their angular entries are NaN
/// and their indices are listed in [`RadialSample::zero_rows`].
pub fn radial_decompose(x: &DataMatrix) -> RadialSample {
    let d = x.d();
    let radii: Vec<f64> = x.rows().map(|r| r.iter().sum()).collect();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    // stable: equal radii keep their row order
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let sorted = order.iter().map(|&i| radii[i]).collect();

    let mut angular = Vec::with_capacity(x.values().len());
    let mut zero_rows = Vec::new();
    for (i, (row, &r)) in x.rows().zip(&radii).enumerate() {
        if r == 0.0 {
            zero_rows.push(i);
            angular.extend(std::iter::repeat_n(f64::NAN, d));
        } else {
            angular.extend(row.iter().map(|v| v / r));
        }
    }
    RadialSample {
        d,
        radii,
        order,
        sorted,
        angular,
        zero_rows,
    }
}

impl RadialSample {
    /// Decomposes a bare series of radii (a one-column panel).
    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        Ok(radial_decompose(&DataMatrix::from_column(radii)?))
    }

    pub fn n(&self) -> usize {
        self.radii.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Radii in row order.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Row indices sorting the radii ascending.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Radii sorted ascending: `sorted()[m - 1]` is `R_(m,n)`.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Direction of row `i`, `None` for zero-radius rows.
    pub fn angular(&self, i: usize) -> Option<&[f64]> {
        if self.radii[i] == 0.0 {
            None
        } else {
            Some(&self.angular[i * self.d..(i + 1) * self.d])
        }
    }

    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }

    pub fn check_k(&self, k: usize) -> Result<()> {
        let max = self.n().saturating_sub(1);
        if k == 0 || k > max {
            return Err(MesError::InvalidK { k, max });
        }
        Ok(())
    }

    /// The intermediate order statistic `R_(n-k,n)`.
    pub fn threshold(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        Ok(self.sorted[self.n() - k - 1])
    }

    /// Rows whose radius strictly exceeds `R_(n-k,n)`, in row order.
    ///
    /// With ties at the threshold the count can differ from `k`; a warning is
    /// logged in that case.
    pub fn exceedances(&self, k: usize) -> Result<Vec<usize>> {
        let threshold = self.threshold(k)?;
        let rows: Vec<usize> = self
            .radii
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > threshold)
            .map(|(i, _)| i)
            .collect();
        if rows.len() != k {
            log::warn!(
                "{} radii exceed the threshold {threshold} at k = {k} (ties)",
                rows.len()
            );
        }
        Ok(rows)
    }
}
