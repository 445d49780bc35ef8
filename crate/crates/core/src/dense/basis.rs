//! Krylov basis storage and two-pass classical Gram-Schmidt.

use super::blas::{axpy_unchecked, dot_unchecked, norm2};
use crate::error::{Error, Result};
use crate::precision::{Precision, Scalar};
use crate::sparse::csr::check_len;

/// Orthonormal columns `v_1 .. v_count` stored column-major.
#[derive(Debug, Clone)]
pub struct KrylovBasis<T> {
    n: usize,
    capacity: usize,
    count: usize,
    data: Vec<T>,
}

/// Outcome of [`KrylovBasis::cgs2_append`].
#[derive(Debug, Clone, PartialEq)]
pub struct Cgs2Step<T> {
    /// Total projection coefficients of both passes, one per existing column.
    pub h_col: Vec<T>,
    /// Norm of the twice-orthogonalised vector.
    pub beta: T,
    /// `false` on breakdown: the vector was (numerically) in the span of the basis.
    pub appended: bool,
}

impl<T: Scalar> KrylovBasis<T> {
    pub fn new(n: usize, capacity: usize) -> Self {
        Self {
            n,
            capacity,
            count: 0,
            data: vec![T::zero(); n * capacity],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn clear(&mut self) {
        self.count = 0;
    }

    pub fn column(&self, j: usize) -> &[T] {
        assert!(j < self.count, "column {j} of {}", self.count);
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// Append `v / norm` without orthogonalisation (the starting vector of a cycle).
    pub fn push_scaled(&mut self, v: &[T], norm: T) -> Result<()> {
        check_len("basis vector", self.n, v.len())?;
        if self.count == self.capacity {
            return Err(Error::BasisFull {
                capacity: self.capacity,
            });
        }
        let inv = T::one() / norm;
        let dst = &mut self.data[self.count * self.n..(self.count + 1) * self.n];
        for (d, &s) in dst.iter_mut().zip(v) {
            *d = s * inv;
        }
        self.count += 1;
        Ok(())
    }

    /// Orthogonalise `w` against the stored columns with two classical Gram-Schmidt
    /// passes and append it normalised, unless its remaining norm is at or below
    /// `n * u * ||w||` (breakdown). `w` is left holding the orthogonalised vector.
    pub fn cgs2_append(&mut self, w: &mut [T]) -> Result<Cgs2Step<T>> {
        check_len("cgs2 vector", self.n, w.len())?;
        let j = self.count;
        let w_norm = norm2(w);
        let mut h_col = vec![T::zero(); j];
        let mut pass = vec![T::zero(); j];
        for _ in 0..2 {
            for (i, p) in pass.iter_mut().enumerate() {
                *p = dot_unchecked(&self.data[i * self.n..(i + 1) * self.n], w);
            }
            for (i, &p) in pass.iter().enumerate() {
                axpy_unchecked(-p, &self.data[i * self.n..(i + 1) * self.n], w);
            }
            for (h, &p) in h_col.iter_mut().zip(&pass) {
                *h = *h + p;
            }
        }
        let beta = norm2(w);
        let threshold = T::of(self.n as f64) * T::unit_roundoff() * w_norm;
        if beta <= threshold {
            return Ok(Cgs2Step {
                h_col,
                beta,
                appended: false,
            });
        }
        self.push_scaled(w, beta)?;
        Ok(Cgs2Step {
            h_col,
            beta,
            appended: true,
        })
    }

    /// `V_k d` for the first `k = d.len()` columns.
    pub fn combine(&self, d: &[T]) -> Vec<T> {
        assert!(d.len() <= self.count);
        let mut out = vec![T::zero(); self.n];
        for (i, &c) in d.iter().enumerate() {
            axpy_unchecked(c, self.column(i), &mut out);
        }
        out
    }

    /// Largest `|v_i . v_j|` for `i != j` and largest `| ||v_i|| - 1 |`, in binary64.
    pub fn orthogonality_error(&self) -> (f64, f64) {
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for i in 0..self.count {
            for j in 0..=i {
                let d = dot_unchecked(self.column(i), self.column(j)).as_f64();
                if i == j {
                    diag = diag.max((d.sqrt() - 1.0).abs());
                } else {
                    off = off.max(d.abs());
                }
            }
        }
        (off, diag)
    }
}
