//! Multivariate observations on the copula scale.

use crate::bicop::{PairSample, CLAMP};
use crate::error::{Error, Result};

/// `N` observations of `n` variables, stored row-major. Column `j` holds the
/// variable with label `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSample {
    dim: usize,
    data: Vec<f64>,
}

impl CopulaSample {
    /// Values must lie in `[0, 1]`; they are clamped into the open interval.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        if !data.len().is_multiple_of(dim) {
            // the trailing partial row
            return Err(Error::Dimension {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if data.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let data = data
            .into_iter()
            .map(|x| {
                if (0.0..=1.0).contains(&x) {
                    Ok(x.clamp(CLAMP, 1.0 - CLAMP))
                } else {
                    Err(Error::Domain {
                        what: "observation",
                        value: x,
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(CopulaSample { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    /// Values already inside `[CLAMP, 1 - CLAMP]`.
    pub(crate) fn from_clamped(dim: usize, data: Vec<f64>) -> Self {
        debug_assert!(data.len().is_multiple_of(dim));
        CopulaSample { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_obs(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Columns `i` and `j` (0-based) as a pair sample.
    pub fn pair(&self, i: usize, j: usize) -> PairSample {
        PairSample::from_clamped(self.column(i), self.column(j))
    }

    /// The first `count` rows.
    pub fn head(&self, count: usize) -> CopulaSample {
        let count = count.min(self.n_obs());
        CopulaSample::from_clamped(self.dim, self.data[..count * self.dim].to_vec())
    }
}
