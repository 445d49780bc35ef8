//! Compressed sparse row storage and the sparse matrix-vector product.

use crate::error::{Error, Result};
use crate::precision::{Precision, Scalar};

/// Square sparse matrix in CSR form.
///
/// Column indices are strictly increasing within each row. Explicit zeros are
/// kept: the sparsity pattern is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Assemble from `(row, col, value)` triplets. Duplicate positions are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, T)]) -> Result<Self> {
        for (index, &(row, col, _)) in entries.iter().enumerate() {
            if row >= n || col >= n {
                return Err(Error::IndexOutOfRange { index, row, col, n });
            }
        }

        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in entries {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; entries.len()];
        let mut vals = vec![T::zero(); entries.len()];
        for &(r, c, v) in entries {
            cols[cursor[r]] = c;
            vals[cursor[r]] = v;
            cursor[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            // stable sort keeps insertion order among duplicates, so sums are reproducible
            scratch.sort_by_key(|&(c, _)| c);
            let mut iter = scratch.iter().copied();
            if let Some((mut cur_c, mut cur_v)) = iter.next() {
                for (c, v) in iter {
                    if c == cur_c {
                        cur_v = cur_v + v;
                    } else {
                        col_idx.push(cur_c);
                        values.push(cur_v);
                        cur_c = c;
                        cur_v = v;
                    }
                }
                col_idx.push(cur_c);
                values.push(cur_v);
            }
            row_ptr.push(col_idx.len());
        }

        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Wrap raw CSR arrays after checking every structural invariant.
    pub fn from_raw_parts(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Check the CSR invariants: offsets start at 0, end at nnz, never decrease, and
    /// column indices are in range and strictly increasing per row.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStructure(msg));
        if self.row_ptr.len() != self.n + 1 {
            return bad(format!(
                "row_ptr has length {}, expected {}",
                self.row_ptr.len(),
                self.n + 1
            ));
        }
        if self.row_ptr[0] != 0 {
            return bad("row_ptr[0] != 0".into());
        }
        if self.col_idx.len() != self.values.len() {
            return bad("col_idx and values differ in length".into());
        }
        if self.row_ptr[self.n] != self.values.len() {
            return bad(format!(
                "row_ptr[n] = {} but nnz = {}",
                self.row_ptr[self.n],
                self.values.len()
            ));
        }
        for r in 0..self.n {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if hi < lo {
                return bad(format!("row_ptr decreases at row {r}"));
            }
            let cols = &self.col_idx[lo..hi];
            if let Some(&c) = cols.iter().find(|&&c| c >= self.n) {
                return bad(format!("row {r} has column {c} >= n"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {r} columns are not strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(r, c)`, or zero when the position is not in the pattern.
    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// Average number of stored entries per row.
    pub fn avg_nnz_per_row(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.nnz() as f64 / self.n as f64
        }
    }

    /// `y = A x`, accumulated left to right within each row in `T`.
    pub fn spmv(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_len("spmv input", self.n, x.len())?;
        check_len("spmv output", self.n, y.len())?;
        self.spmv_unchecked(x, y);
        Ok(())
    }

    pub(crate) fn spmv_unchecked(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = T::zero();
            for k in lo..hi {
                acc = acc + self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// Allocating form of [`spmv`](Self::spmv).
    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.n];
        self.spmv(x, &mut y)?;
        Ok(y)
    }

    /// `b - A x` in `T`.
    pub fn residual(&self, b: &[T], x: &[T]) -> Result<Vec<T>> {
        check_len("residual rhs", self.n, b.len())?;
        let mut r = self.mul_vec(x)?;
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(r)
    }

    /// Copy with every value rounded to nearest in `U`; structure arrays are copied verbatim.
    pub fn convert<U: Scalar>(&self) -> CsrMatrix<U> {
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: convert_vector(&self.values),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).1.iter().map(|v| v.as_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.as_f64() * v.as_f64())
            .sum::<f64>()
            .sqrt()
    }

    /// Dense row-major copy; meant for small oracles and diagnostics.
    pub fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[r * self.n + c] = v;
            }
        }
        d
    }

    /// Transpose (structure and values).
    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (c, r, v)));
        }
        Self::from_triplets(self.n, &triplets).expect("transpose indices are in range")
    }
}

/// Round every entry of `x` to nearest in `U`.
pub fn convert_vector<T: Scalar, U: Scalar>(x: &[T]) -> Vec<U> {
    x.iter().map(|&v| U::of(v.as_f64())).collect()
}

/// Precision-tagged conversion of a binary64 matrix, for callers that select the target
/// format at run time.
pub fn convert_matrix(a: &CsrMatrix<f64>, target: Precision) -> AnyCsr {
    match target {
        Precision::Single => AnyCsr::Single(a.convert()),
        Precision::Double => AnyCsr::Double(a.clone()),
    }
}

/// A CSR matrix whose value precision is known only at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCsr {
    Single(CsrMatrix<f32>),
    Double(CsrMatrix<f64>),
}

impl AnyCsr {
    pub fn precision(&self) -> Precision {
        match self {
            AnyCsr::Single(_) => Precision::Single,
            AnyCsr::Double(_) => Precision::Double,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyCsr::Single(a) => a.n(),
            AnyCsr::Double(a) => a.n(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            AnyCsr::Single(a) => a.nnz(),
            AnyCsr::Double(a) => a.nnz(),
        }
    }

    /// Borrow as `CsrMatrix<T>`, failing if the stored precision differs from `T`.
    pub fn as_precision<T: Scalar>(&self) -> Result<&CsrMatrix<T>> {
        use std::any::Any;
        let any: &dyn Any = match self {
            AnyCsr::Single(a) => a,
            AnyCsr::Double(a) => a,
        };
        any.downcast_ref::<CsrMatrix<T>>()
            .ok_or(Error::PrecisionMismatch {
                expected: T::PRECISION,
                actual: self.precision(),
            })
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    } else {
        Ok(())
    }
}
