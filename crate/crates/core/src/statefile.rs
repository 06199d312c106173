//! JSON state files: `{"dims": [dA, dB], "matrix": [[[re, im], …], …]}`.
//!
//! Rows are composite indices in first-subsystem-major order. Numbers are
//! written with 17 significant digits, which round-trips every `f64`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{BipartiteDensityMatrix, ValidationReport};

/// A parsed but unvalidated state file.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub dims: (usize, usize),
    pub matrix: ComplexMatrix,
}

#[derive(Deserialize)]
struct Wire {
    dims: [usize; 2],
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct WireOut {
    dims: [usize; 2],
    matrix: Vec<Vec<[Box<RawValue>; 2]>>,
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let wire: Wire = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let [da, db] = wire.dims;
        let d = da * db;
        if d == 0 {
            return Err(Error::Format("dims must be positive".into()));
        }
        if wire.matrix.len() != d {
            return Err(Error::Format(format!("expected {d} rows, found {}", wire.matrix.len())));
        }
        let mut data = Vec::with_capacity(d * d);
        for (i, row) in wire.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Format(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        Ok(Self {
            dims: (da, db),
            matrix: ComplexMatrix::from_vec(d, data)?,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_state(rho: &BipartiteDensityMatrix) -> Self {
        Self {
            dims: rho.dims(),
            matrix: rho.matrix().clone(),
        }
    }

    pub fn report(&self) -> Result<ValidationReport> {
        ValidationReport::measure(self.dims.0, self.dims.1, &self.matrix)
    }

    pub fn into_state(self) -> Result<BipartiteDensityMatrix> {
        BipartiteDensityMatrix::validate(self.dims.0, self.dims.1, self.matrix)
    }

    pub fn to_json(&self) -> String {
        let d = self.matrix.dim();
        let out = WireOut {
            dims: [self.dims.0, self.dims.1],
            matrix: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let z = self.matrix[(i, j)];
                            [number(z.re), number(z.im)]
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&out).expect("finite entries always serialize")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// A JSON number with 17 significant digits.
pub fn number(x: f64) -> Box<RawValue> {
    RawValue::from_string(format_f64(x)).expect("formatted float is valid JSON")
}

/// `x` in scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    // -0.0 prints as "-0e0", which is still valid JSON and keeps the sign bit
    format!("{x:.16e}")
}
