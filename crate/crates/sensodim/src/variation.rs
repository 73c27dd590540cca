//! Sensory variation matrices: columns of `phi(C_i) - phi(C_0)` with
//! per-row centering and reduction.

use std::io::{self, BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::sim::{sense, Configuration, ExplorationMode, SimError, System};

/// Rows with raw standard deviation below this are left centered but not
/// divided (zero-variance sensors would otherwise blow up).
pub const REDUCTION_STD_FLOOR: f64 = 1e-30;

/// Per-row preprocessing applied by [`explore`]: subtracted mean and the
/// divisor (1.0 when the row variance was below the floor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowScaling {
    pub mean: f64,
    pub scale: f64,
}

/// Centered-and-reduced sensory variation data for one exploration.
#[derive(Debug, Clone)]
pub struct VariationMatrix {
    /// n x N, one column per movement.
    pub data: DMatrix<f64>,
    pub mode: ExplorationMode,
    /// Maximal movement amplitude this exploration was sampled with, degrees.
    pub amplitude: f64,
    pub preprocessing: Vec<RowScaling>,
}

/// Raw (uncentered, unreduced) variations `phi(C_i) - phi(C_0)` as an
/// n x N matrix. This is what the bootstrap consumes; the estimators go
/// through [`explore`] instead.
pub fn raw_variations(system: &System, configs: &[Configuration]) -> Result<DMatrix<f64>, SimError> {
    if configs.is_empty() {
        return Err(SimError::EmptyConfigurations);
    }
    let s0 = sense(system, &system.reference_config)?.values;
    let n = s0.len();
    let mut data = DMatrix::zeros(n, configs.len());
    for (i, config) in configs.iter().enumerate() {
        let s = sense(system, config)?.values;
        for r in 0..n {
            data[(r, i)] = s[r] - s0[r];
        }
    }
    Ok(data)
}

/// Centers every row to mean zero and divides by its (population) standard
/// deviation when that deviation is above [`REDUCTION_STD_FLOOR`]. Returns
/// the per-row record of what was applied.
pub fn center_and_reduce(data: &mut DMatrix<f64>) -> Vec<RowScaling> {
    let (n, cols) = data.shape();
    let inv = 1.0 / cols as f64;
    let mut records = Vec::with_capacity(n);
    for r in 0..n {
        let mean = data.row(r).sum() * inv;
        let mut var = 0.0;
        for c in 0..cols {
            let d = data[(r, c)] - mean;
            data[(r, c)] = d;
            var += d * d;
        }
        let std = (var * inv).sqrt();
        let scale = if std < REDUCTION_STD_FLOOR { 1.0 } else { std };
        if scale != 1.0 {
            for c in 0..cols {
                data[(r, c)] /= scale;
            }
        }
        records.push(RowScaling { mean, scale });
    }
    records
}

/// Runs the exploration defined by `configs` and returns the
/// centered-and-reduced variation matrix.
pub fn explore(
    system: &System,
    configs: &[Configuration],
    mode: ExplorationMode,
    amplitude: f64,
) -> Result<VariationMatrix, SimError> {
    let mut data = raw_variations(system, configs)?;
    let preprocessing = center_and_reduce(&mut data);
    Ok(VariationMatrix {
        data,
        mode,
        amplitude,
        preprocessing,
    })
}

impl VariationMatrix {
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }

    /// Writes the matrix as CSV: n rows, N columns, full double precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in 0..self.data.nrows() {
            let mut first = true;
            for c in 0..self.data.ncols() {
                if !first {
                    write!(out, ",")?;
                }
                first = false;
                // `{}` on f64 prints the shortest representation that
                // round-trips, so full precision survives.
                write!(out, "{}", self.data[(r, c)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads a matrix back from CSV produced by [`Self::write_csv`] (or any
    /// numeric CSV with one sensory component per row).
    pub fn read_csv<R: BufRead>(
        reader: R,
        mode: ExplorationMode,
        amplitude: f64,
    ) -> io::Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> =
                line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            if let Some(prev) = rows.first() {
                if row.len() != prev.len() {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        "ragged CSV: rows of unequal length",
                    ));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "empty CSV"));
        }
        let n = rows.len();
        let cols = rows[0].len();
        let data = DMatrix::from_fn(n, cols, |r, c| rows[r][c]);
        let preprocessing = vec![RowScaling { mean: 0.0, scale: 1.0 }; n];
        Ok(Self {
            data,
            mode,
            amplitude,
            preprocessing,
        })
    }
}
