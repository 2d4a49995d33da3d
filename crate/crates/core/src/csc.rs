//! Compressed sparse column storage and the linear-operator abstraction used by
//! the solvers and polynomial filters.

use nalgebra::DMatrix;

/// Square matrix in compressed sparse column layout.
///
/// Row indices are strictly increasing within every column.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            col_ptr: vec![0; n + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros are dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self {
            n,
            col_ptr,
            row_idx,
            values,
        };
        m.prune(|_, _, v| v != 0.0);
        m
    }

    /// Assemble from per-column `(row, value)` lists. Each list must already be
    /// sorted by row without duplicates.
    pub fn from_columns(n: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(columns.len(), n, "column count must equal dimension");
        let nnz = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for col in columns {
            for (r, v) in col {
                debug_assert!(r < n);
                debug_assert!(row_idx.len() == *col_ptr.last().unwrap() || *row_idx.last().unwrap() < r);
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let columns = (0..n)
            .map(|j| {
                (0..n)
                    .filter_map(|i| {
                        let v = m[(i, j)];
                        (v != 0.0).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_columns(n, columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.values[a..b])
    }

    pub fn column_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.column(j);
        match rows.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Iterate over stored entries as `(row, col, value)`, column by column.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.column(j).1.iter().sum()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (i, _, v) in self.iter() {
            s[i] += v;
        }
        s
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.iter() {
            let p = next[i];
            row_idx[p] = j;
            values[p] = v;
            next[i] += 1;
        }
        Self {
            n: self.n,
            col_ptr: counts,
            row_idx,
            values,
        }
    }

    /// Largest `|M_ij - M_ji|` over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j, v)| self.get(j, i) == v)
    }

    /// Keep only entries for which `keep(row, col, value)` holds.
    pub fn prune(&mut self, mut keep: impl FnMut(usize, usize, f64) -> bool) {
        let mut w = 0;
        let mut new_ptr = vec![0usize; self.n + 1];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let (i, v) = (self.row_idx[p], self.values[p]);
                if keep(i, j, v) {
                    self.row_idx[w] = i;
                    self.values[w] = v;
                    w += 1;
                }
            }
            new_ptr[j + 1] = w;
        }
        self.row_idx.truncate(w);
        self.values.truncate(w);
        self.col_ptr = new_ptr;
    }

    /// Scale entry `(i, j)` by `f(i, j)`.
    pub fn scale_entries(&mut self, f: impl Fn(usize, usize) -> f64) {
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                self.values[p] *= f(self.row_idx[p], j);
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }
}

/// A square linear map applied to dense vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = M x`. `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOperator for CscMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
}

/// `I - M` for a wrapped operator `M`, e.g. a normalized Laplacian from its
/// transition matrix.
pub struct IdentityMinus<'a, M: LinearOperator + ?Sized>(pub &'a M);

impl<M: LinearOperator + ?Sized> LinearOperator for IdentityMinus<'_, M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - *yi;
        }
    }
}
