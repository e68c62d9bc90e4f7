use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form, used for neighbor aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub weight: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(column, weight)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut weight = Vec::new();
        row_ptr.push(0);
        for r in rows {
            for (c, w) in r {
                if c >= n {
                    return Err(Error::Dimension {
                        op: "csr",
                        detail: format!("column {c} outside {n}x{n}"),
                    });
                }
                col.push(c);
                weight.push(w);
            }
            row_ptr.push(col.len());
        }
        Ok(Csr {
            n,
            row_ptr,
            col,
            weight,
        })
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    /// `out += A x` for an `n x cols` row-major `x`.
    pub fn mul_into(&self, x: &[f64], cols: usize, out: &mut [f64]) {
        for r in 0..self.n {
            let dst = &mut out[r * cols..(r + 1) * cols];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let w = self.weight[k];
                let src = &x[self.col[k] * cols..(self.col[k] + 1) * cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }

    /// `out += Aᵀ y`.
    pub fn mul_transpose_into(&self, y: &[f64], cols: usize, out: &mut [f64]) {
        for r in 0..self.n {
            let src = &y[r * cols..(r + 1) * cols];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let w = self.weight[k];
                let c = self.col[k];
                let dst = &mut out[c * cols..(c + 1) * cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

/// Row-to-group assignment for pooled readouts; ids are nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments {
    pub ids: Vec<usize>,
    pub count: usize,
    pub sizes: Vec<usize>,
}

impl Segments {
    pub fn new(ids: Vec<usize>, count: usize) -> Result<Self> {
        if ids.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Dimension {
                op: "segments",
                detail: "segment ids must be nondecreasing".into(),
            });
        }
        if ids.last().is_some_and(|&l| l >= count) {
            return Err(Error::Dimension {
                op: "segments",
                detail: format!("segment id beyond count {count}"),
            });
        }
        let mut sizes = vec![0; count];
        for &i in &ids {
            sizes[i] += 1;
        }
        Ok(Segments { ids, count, sizes })
    }
}
