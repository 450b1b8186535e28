//! CSR storage, SpMV and the streaming vector kernels used by the solver.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    rowptr: Vec<usize>,
    colind: Vec<usize>,
    pub vals: Vec<f64>,
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays, checking the CSR invariants.
    pub fn new(n: usize, rowptr: Vec<usize>, colind: Vec<usize>, vals: Vec<f64>) -> Result<Self> {
        check_len(n + 1, rowptr.len())?;
        check_len(colind.len(), vals.len())?;
        if rowptr[0] != 0 || rowptr[n] != colind.len() {
            return Err(Error::config("row pointer must start at 0 and end at nnz"));
        }
        for i in 0..n {
            if rowptr[i] > rowptr[i + 1] || rowptr[i + 1] > colind.len() {
                return Err(Error::config(format!("row pointer decreases at row {i}")));
            }
            let row = &colind[rowptr[i]..rowptr[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= n) {
                return Err(Error::config(format!("row {i} has unsorted or out-of-range columns")));
            }
        }
        Ok(Self {
            n,
            rowptr,
            colind,
            vals,
        })
    }

    /// Zero-valued matrix with the given per-row column sets.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let mut rowptr = Vec::with_capacity(n + 1);
        rowptr.push(0);
        let mut colind = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            colind.extend(r);
            rowptr.push(colind.len());
        }
        let nnz = colind.len();
        Self::new(n, rowptr, colind, vec![0.0; nnz])
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut rowptr = vec![0];
        let mut colind = Vec::new();
        let mut vals = Vec::new();
        for row in a {
            check_len(n, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    colind.push(j);
                    vals.push(v);
                }
            }
            rowptr.push(colind.len());
        }
        Self::new(n, rowptr, colind, vals)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rowptr: (0..=n).collect(),
            colind: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.colind.len()
    }

    pub fn rowptr(&self) -> &[usize] {
        &self.rowptr
    }

    pub fn colind(&self) -> &[usize] {
        &self.colind
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.rowptr[i]..self.rowptr[i + 1];
        (&self.colind[r.clone()], &self.vals[r])
    }

    /// Position of `(row, col)` in the value array.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.rowptr[row];
        self.colind[start..self.rowptr[row + 1]]
            .binary_search(&col)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.find(row, col).map_or(0.0, |k| self.vals[k])
    }

    pub fn fill(&mut self, v: f64) {
        self.vals.iter_mut().for_each(|x| *x = v);
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.rowptr == other.rowptr && self.colind == other.colind
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] = x;
            }
        }
        d
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            let (c, v) = self.row(i);
            c.iter()
                .zip(v)
                .all(|(&j, &x)| self.find(j, i).is_some_and(|k| (self.vals[k] - x).abs() <= tol))
        })
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.colind {
            counts[j + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let rowptr = counts.clone();
        let mut next = counts;
        let mut colind = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                colind[next[j]] = i;
                vals[next[j]] = x;
                next[j] += 1;
            }
        }
        CsrMatrix {
            n: self.n,
            rowptr,
            colind,
            vals,
        }
    }

    /// `sum_c B_c diag(w_c) B_c^T` for square matrices `B_c` of one size.
    pub fn weighted_gram(blocks: &[CsrMatrix], weights: &[&[f64]]) -> Result<CsrMatrix> {
        let n = blocks.first().map_or(0, |b| b.n);
        check_len(blocks.len(), weights.len())?;
        for w in weights {
            check_len(n, w.len())?;
        }
        let transposed: Vec<CsrMatrix> = blocks.iter().map(CsrMatrix::transpose).collect();
        let mut rowptr = vec![0];
        let mut colind = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut cols = Vec::new();
        for i in 0..n {
            cols.clear();
            for ((b, bt), w) in blocks.iter().zip(&transposed).zip(weights) {
                check_len(n, b.n)?;
                let (bc, bv) = b.row(i);
                for (&j, &bij) in bc.iter().zip(bv) {
                    let s = bij * w[j];
                    let (tc, tv) = bt.row(j);
                    for (&k, &bkj) in tc.iter().zip(tv) {
                        if mark[k] != i {
                            mark[k] = i;
                            acc[k] = 0.0;
                            cols.push(k);
                        }
                        acc[k] += s * bkj;
                    }
                }
            }
            if mark[i] != i {
                cols.push(i);
                acc[i] = 0.0;
            }
            cols.sort_unstable();
            for &k in &cols {
                colind.push(k);
                vals.push(acc[k]);
            }
            rowptr.push(colind.len());
        }
        CsrMatrix::new(n, rowptr, colind, vals)
    }

    /// Symmetric elimination of Dirichlet rows: moves known columns to the
    /// right-hand side and replaces each constrained row and column by the
    /// identity.
    pub fn apply_dirichlet(&mut self, fixed: &[(usize, f64)], rhs: Option<&mut [f64]>) {
        let mut value = vec![None; self.n];
        for &(i, v) in fixed {
            value[i] = Some(v);
        }
        let mut rhs = rhs;
        for i in 0..self.n {
            for k in self.rowptr[i]..self.rowptr[i + 1] {
                let j = self.colind[k];
                if value[i].is_some() {
                    self.vals[k] = if i == j { 1.0 } else { 0.0 };
                } else if let Some(vj) = value[j] {
                    if let Some(b) = rhs.as_deref_mut() {
                        b[i] -= self.vals[k] * vj;
                    }
                    self.vals[k] = 0.0;
                }
            }
            if let (Some(v), Some(b)) = (value[i], rhs.as_deref_mut()) {
                b[i] = v;
            }
        }
    }

    /// Pins one unknown to zero (row and column replaced by identity).
    pub fn pin(&mut self, node: usize) {
        self.apply_dirichlet(&[(node, 0.0)], None);
    }

    /// Coordinate-format dump, one `i j value` line per stored entry, 1-based.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, x)?;
            }
        }
        Ok(())
    }
}

/// `y = A x`, row sums in ascending column order.
pub fn spmv(a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len(a.n, x.len())?;
    check_len(a.n, y.len())?;
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = row_dot(a, i, x);
    }
    Ok(())
}

#[inline(always)]
fn row_dot(a: &CsrMatrix, i: usize, x: &[f64]) -> f64 {
    let (c, v) = a.row(i);
    let mut s = 0.0;
    for (&j, &aij) in c.iter().zip(v) {
        s += aij * x[j];
    }
    s
}

/// Row-partitioned parallel SpMV; each row is summed exactly as in [`spmv`].
pub fn spmv_par(a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len(a.n, x.len())?;
    check_len(a.n, y.len())?;
    y.par_iter_mut()
        .enumerate()
        .with_min_len(1024)
        .for_each(|(i, yi)| *yi = row_dot(a, i, x));
    Ok(())
}

/// `y <- alpha x + y`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len(x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// `y <- x + beta y`
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) -> Result<()> {
    check_len(x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
    Ok(())
}

/// Left-to-right sequential sum of `x_i y_i`.
pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    Ok(s)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// AXPY over `[f64; W]` chunks, the lane-blocked variant benchmarked against
/// the plain loop.
pub fn axpy_chunked<const W: usize>(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len(x.len(), y.len())?;
    let mut yc = y.chunks_exact_mut(W);
    let mut xc = x.chunks_exact(W);
    for (yb, xb) in (&mut yc).zip(&mut xc) {
        for l in 0..W {
            yb[l] += alpha * xb[l];
        }
    }
    for (yi, xi) in yc.into_remainder().iter_mut().zip(xc.remainder()) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// Dot product with `W` interleaved partial sums.
pub fn dot_chunked<const W: usize>(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    let mut acc = [0.0; W];
    let xc = x.chunks_exact(W);
    let yc = y.chunks_exact(W);
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (xb, yb) in xc.zip(yc) {
        for l in 0..W {
            acc[l] += xb[l] * yb[l];
        }
    }
    Ok(acc.iter().sum::<f64>() + tail)
}

pub fn dot_par(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    Ok(x.par_chunks(4096)
        .zip(y.par_chunks(4096))
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>())
        .sum())
}

/// Diagonal of `A` for Jacobi preconditioning.
pub fn jacobi_diagonal(a: &CsrMatrix) -> Result<Vec<f64>> {
    (0..a.n)
        .map(|i| match a.find(i, i).map(|k| a.vals[k]) {
            Some(d) if d != 0.0 && d.is_finite() => Ok(d),
            other => Err(Error::SingularPreconditioner {
                row: i,
                value: other.unwrap_or(0.0),
            }),
        })
        .collect()
}
