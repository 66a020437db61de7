use std::fmt::Debug;
use std::ops::Add;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Element type storable in a [`SparseMatrix`].
pub trait Scalar: Copy + Default + PartialEq + Debug + Add<Output = Self> {
    fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl Scalar for f64 {}
impl Scalar for num_complex::Complex64 {}

/// Compressed sparse column matrix. Row indices are strictly increasing
/// within each column and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T = f64> {
    n_rows: usize,
    n_cols: usize,
    col_starts: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Validates and wraps raw CSC arrays.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_starts: Vec<usize>,
        row_indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if col_starts.len() != n_cols + 1 {
            return Err(Error::Structure(format!(
                "column_starts has length {}, expected {}",
                col_starts.len(),
                n_cols + 1
            )));
        }
        if col_starts[0] != 0 || *col_starts.last().unwrap() != row_indices.len() {
            return Err(Error::Structure("column_starts must run from 0 to nnz".into()));
        }
        if row_indices.len() != values.len() {
            return Err(Error::Structure("row_indices and values differ in length".into()));
        }
        for j in 0..n_cols {
            if col_starts[j] > col_starts[j + 1] {
                return Err(Error::Structure(format!("column_starts decreases at column {j}")));
            }
            let rows = &row_indices[col_starts[j]..col_starts[j + 1]];
            for (k, &r) in rows.iter().enumerate() {
                if r >= n_rows {
                    return Err(Error::Structure(format!("row index {r} out of range in column {j}")));
                }
                if k > 0 && rows[k - 1] >= r {
                    return Err(Error::Structure(format!(
                        "row indices not strictly increasing in column {j}"
                    )));
                }
            }
        }
        if values.iter().any(Scalar::is_zero) {
            return Err(Error::Structure("explicit zero entries are not allowed".into()));
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_starts,
            row_indices,
            values,
        })
    }

    /// Builds from coordinate triplets, summing duplicates and dropping
    /// entries that sum to exactly zero.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= n_rows || j >= n_cols {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (j, i));
        let mut col_starts = vec![0usize; n_cols + 1];
        let mut row_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut cols = Vec::with_capacity(sorted.len());
        let mut k = 0;
        while k < sorted.len() {
            let (i, j, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
                v = v + sorted[k].2;
                k += 1;
            }
            if !v.is_zero() {
                row_indices.push(i);
                values.push(v);
                cols.push(j);
            }
        }
        for &j in &cols {
            col_starts[j + 1] += 1;
        }
        for j in 0..n_cols {
            col_starts[j + 1] += col_starts[j];
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_starts,
            row_indices,
            values,
        })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn col_starts(&self) -> &[usize] {
        &self.col_starts
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let r = self.col_starts[j]..self.col_starts[j + 1];
        (&self.row_indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (rows, vals) = self.col(j);
        rows.binary_search(&i).ok().map(|k| vals[k])
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n_cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_rows + 1];
        for &i in &self.row_indices {
            counts[i + 1] += 1;
        }
        for i in 0..self.n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; self.nnz()];
        let mut vals = vec![T::default(); self.nnz()];
        for j in 0..self.n_cols {
            let (ri, vi) = self.col(j);
            for (&i, &v) in ri.iter().zip(vi) {
                let p = next[i];
                rows[p] = j;
                vals[p] = v;
                next[i] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            col_starts: counts,
            row_indices: rows,
            values: vals,
        }
    }

    /// `B[i, j] = A[p_row[i], p_col[j]]`; both permutations map new
    /// position to old index.
    pub fn permute(&self, p_row: &[usize], p_col: &[usize]) -> Result<Self> {
        check_permutation(p_row, self.n_rows)?;
        check_permutation(p_col, self.n_cols)?;
        let inv_row = invert_permutation(p_row);
        let mut col_starts = Vec::with_capacity(self.n_cols + 1);
        col_starts.push(0);
        let mut row_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut buf: Vec<(usize, T)> = Vec::new();
        for &old_j in p_col {
            let (ri, vi) = self.col(old_j);
            buf.clear();
            buf.extend(ri.iter().zip(vi).map(|(&i, &v)| (inv_row[i], v)));
            buf.sort_unstable_by_key(|&(i, _)| i);
            for &(i, v) in &buf {
                row_indices.push(i);
                values.push(v);
            }
            col_starts.push(row_indices.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_starts,
            row_indices,
            values,
        })
    }

    /// Whether the pattern equals the pattern of its transpose.
    pub fn is_structurally_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let t = self.transpose();
        t.col_starts == self.col_starts && t.row_indices == self.row_indices
    }

    /// Off-diagonal adjacency of the symmetrized pattern `|A| + |A|ᵀ`,
    /// each list sorted ascending.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.n_rows.max(self.n_cols);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn map_values<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<SparseMatrix<U>> {
        SparseMatrix::new(
            self.n_rows,
            self.n_cols,
            self.col_starts.clone(),
            self.row_indices.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

impl SparseMatrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            col_starts: (0..=n).collect(),
            row_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for j in 0..d.n_cols() {
            for i in 0..d.n_rows() {
                if d[(i, j)] != 0.0 {
                    t.push((i, j, d[(i, j)]));
                }
            }
        }
        Self::from_triplets(d.n_rows(), d.n_cols(), &t).expect("in-range triplets")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            let (ri, vi) = self.col(j);
            for (&i, &v) in ri.iter().zip(vi) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// `diag(d_row) · A · diag(d_col)`.
    pub fn scale(&self, d_row: &[f64], d_col: &[f64]) -> Self {
        let mut out = self.clone();
        for j in 0..self.n_cols {
            for k in self.col_starts[j]..self.col_starts[j + 1] {
                out.values[k] *= d_row[self.row_indices[k]] * d_col[j];
            }
        }
        out
    }

    /// Rewrites each stored value as `f(row, col, value)`; the result must
    /// stay nonzero.
    pub(crate) fn update_values(&mut self, f: impl Fn(usize, usize, f64) -> f64) {
        for j in 0..self.n_cols {
            for k in self.col_starts[j]..self.col_starts[j + 1] {
                self.values[k] = f(self.row_indices[k], j, self.values[k]);
            }
        }
    }

    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (new, &old) in p.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

pub fn check_permutation(p: &[usize], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Dimension(format!("permutation length {} for dimension {n}", p.len())));
    }
    let mut seen = vec![false; n];
    for &x in p {
        if x >= n || seen[x] {
            return Err(Error::Structure(format!("not a permutation of 0..{n}")));
        }
        seen[x] = true;
    }
    Ok(())
}

/// Newline-separated 0-based indices.
pub fn write_permutation(p: &[usize]) -> String {
    let mut s = String::with_capacity(p.len() * 4);
    for x in p {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

pub fn read_permutation(text: &str) -> Result<Vec<usize>> {
    let p: Vec<usize> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(k, l)| {
            l.parse::<usize>()
                .map_err(|_| Error::Structure(format!("line {}: not an index: {l:?}", k + 1)))
        })
        .collect::<Result<_>>()?;
    check_permutation(&p, p.len())?;
    Ok(p)
}
