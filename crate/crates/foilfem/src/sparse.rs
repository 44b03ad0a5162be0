//! Minimal compressed-sparse-row matrices for the assembled real blocks.
//!
//! Assembly accumulates (row, col, value) triplets in element order; the
//! conversion to CSR sorts and sums duplicates, so the stored matrix is
//! independent of accumulation order up to floating-point addition order,
//! which is itself fixed by the deterministic sort. This keeps assembled
//! matrices bitwise reproducible between runs.

use std::io::{self, Write};

use num_complex::Complex64;

/// Real sparse matrix in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets; duplicate (row, col) entries are summed in
    /// (row, col) order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut rows: Vec<usize> = Vec::with_capacity(entries.len());

        for &(r, c, v) in &entries {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }

        let mut row_ptr = vec![0usize; nrows + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }

        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    /// All-zero matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Stored value at (i, j), or 0.0 when the entry is not present.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Iterate over stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    /// Entries of one row as (col, value) pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    /// y = A x (real).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// y = A x with complex x.
    pub fn matvec_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![Complex64::ZERO; self.nrows];
        for i in 0..self.nrows {
            let mut acc = Complex64::ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            y[i] = acc;
        }
        y
    }

    /// y = Aᵀ x with complex x.
    pub fn matvec_transpose_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![Complex64::ZERO; self.ncols];
        for i in 0..self.nrows {
            let xi = x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[k]] += xi * self.vals[k];
            }
        }
        y
    }

    /// Largest absolute stored value (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |a_ij − a_ji| over all stored positions; 0 for an exactly
    /// symmetric matrix. Panics if not square.
    pub fn symmetry_error(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols, "symmetry check needs square matrix");
        let mut err: f64 = 0.0;
        for (i, j, v) in self.iter() {
            err = err.max((v - self.get(j, i)).abs());
        }
        err
    }

    /// Minimum Gershgorin disc lower bound, min_i (a_ii − Σ_{j≠i} |a_ij|).
    /// Every eigenvalue of a symmetric matrix is ≥ this bound.
    pub fn gershgorin_lower_bound(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        let mut bound = f64::INFINITY;
        for i in 0..self.nrows {
            let mut diag = 0.0;
            let mut off = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    diag = self.vals[k];
                } else {
                    off += self.vals[k].abs();
                }
            }
            bound = bound.min(diag - off);
        }
        if self.nrows == 0 {
            0.0
        } else {
            bound
        }
    }

    /// Indices of rows holding at least one structurally nonzero value.
    pub fn nonzero_rows(&self) -> Vec<usize> {
        (0..self.nrows)
            .filter(|&i| (self.row_ptr[i]..self.row_ptr[i + 1]).any(|k| self.vals[k] != 0.0))
            .collect()
    }

    /// Dense submatrix on the given (sorted) index set, row and column.
    pub fn dense_submatrix(&self, idx: &[usize]) -> faer::Mat<f64> {
        let pos: std::collections::HashMap<usize, usize> =
            idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = faer::Mat::<f64>::zeros(idx.len(), idx.len());
        for (&i, &ki) in pos.iter() {
            for (j, v) in self.row(i) {
                if let Some(&kj) = pos.get(&j) {
                    m[(ki, kj)] = v;
                }
            }
        }
        m
    }

    /// Write in Matrix Market coordinate format (real general, 1-based).
    pub fn write_matrix_market(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// Write a dense vector in Matrix Market array format (real general, n×1).
pub fn write_vector_matrix_market(v: &[f64], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}
