//! Upper-Hessenberg least-squares problem `min || gamma e_1 - H y ||` solved
//! incrementally with Givens rotations.

use crate::error::{Error, Result};
use crate::precision::Scalar;

#[derive(Debug, Clone)]
pub struct HessenbergSystem<T> {
    m: usize,
    /// Unrotated `(m+1) x m` Hessenberg matrix, column-major.
    h: Vec<T>,
    /// Rotated copy; its leading `k x k` block is upper triangular after `k` columns.
    r: Vec<T>,
    cosines: Vec<T>,
    sines: Vec<T>,
    /// Rotated right-hand side, length `m + 1`.
    g: Vec<T>,
    gamma: T,
    processed: usize,
}

impl<T: Scalar> HessenbergSystem<T> {
    pub fn new(m: usize, gamma: T) -> Self {
        let mut s = Self {
            m,
            h: vec![T::zero(); (m + 1) * m],
            r: vec![T::zero(); (m + 1) * m],
            cosines: vec![T::zero(); m],
            sines: vec![T::zero(); m],
            g: vec![T::zero(); m + 1],
            gamma,
            processed: 0,
        };
        s.reset(gamma);
        s
    }

    /// Start a new least-squares problem with right-hand side `gamma e_1`.
    pub fn reset(&mut self, gamma: T) {
        self.h.iter_mut().for_each(|v| *v = T::zero());
        self.r.iter_mut().for_each(|v| *v = T::zero());
        self.g.iter_mut().for_each(|v| *v = T::zero());
        self.g[0] = gamma;
        self.gamma = gamma;
        self.processed = 0;
    }

    pub fn max_columns(&self) -> usize {
        self.m
    }

    pub fn processed(&self) -> usize {
        self.processed
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Entry `(i, j)` of the unrotated Hessenberg matrix (0-based).
    pub fn h(&self, i: usize, j: usize) -> T {
        self.h[j * (self.m + 1) + i]
    }

    /// Current implicit residual norm `|g[k]|` after `k` processed columns.
    pub fn implicit_residual(&self) -> T {
        self.g[self.processed].abs()
    }

    /// Add column `j` (1-based, must be the next one): `h_col` holds `h_{1..j, j}`,
    /// `beta` is `h_{j+1, j}`. Applies the previous rotations, forms a new one, and
    /// returns the implicit residual norm `|g[j]|`.
    pub fn lsq_update(&mut self, j: usize, h_col: &[T], beta: T) -> Result<T> {
        if j != self.processed + 1 || j > self.m {
            return Err(Error::ColumnOutOfOrder {
                expected: self.processed + 1,
                got: j,
            });
        }
        if h_col.len() != j {
            return Err(Error::DimensionMismatch {
                context: "hessenberg column",
                expected: j,
                actual: h_col.len(),
            });
        }
        let col = j - 1;
        let base = col * (self.m + 1);
        self.h[base..base + j].copy_from_slice(h_col);
        self.h[base + j] = beta;

        let r = &mut self.r[base..base + self.m + 1];
        r[..j].copy_from_slice(h_col);
        r[j] = beta;
        for i in 0..col {
            let (c, s) = (self.cosines[i], self.sines[i]);
            let t = c * r[i] + s * r[i + 1];
            r[i + 1] = -s * r[i] + c * r[i + 1];
            r[i] = t;
        }
        let (a, b) = (r[col], r[j]);
        let (c, s, rho) = if b == T::zero() {
            (T::one(), T::zero(), a)
        } else {
            let rho = a.hypot(b);
            (a / rho, b / rho, rho)
        };
        self.cosines[col] = c;
        self.sines[col] = s;
        r[col] = rho;
        r[j] = T::zero();
        let gj = self.g[col];
        self.g[col] = c * gj;
        self.g[j] = -s * gj;
        self.processed = j;
        Ok(self.g[j].abs())
    }

    /// Back substitution on the rotated `j x j` triangle: the minimiser `d` of
    /// `|| gamma e_1 - H_j d ||`.
    pub fn lsq_solve(&self, j: usize) -> Result<Vec<T>> {
        if j > self.processed {
            return Err(Error::ColumnOutOfOrder {
                expected: self.processed,
                got: j,
            });
        }
        let ld = self.m + 1;
        let rr = |i: usize, k: usize| self.r[k * ld + i];
        let scale = (0..j)
            .flat_map(|k| (0..=k).map(move |i| (i, k)))
            .map(|(i, k)| rr(i, k).abs())
            .fold(T::zero(), T::max);
        let threshold = T::epsilon() * scale;
        let mut d = vec![T::zero(); j];
        for i in (0..j).rev() {
            let diag = rr(i, i);
            if diag.abs() <= threshold {
                return Err(Error::SingularTriangular {
                    index: i,
                    value: diag.as_f64(),
                });
            }
            let mut acc = self.g[i];
            for k in i + 1..j {
                acc = acc - rr(i, k) * d[k];
            }
            d[i] = acc / diag;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Householder QR least squares on a dense row-major `rows x cols` matrix.
    fn dense_lsq(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Vec<f64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        for k in 0..cols {
            let norm = (k..rows).map(|i| a[i * cols + k].powi(2)).sum::<f64>().sqrt();
            let alpha = if a[k * cols + k] > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..rows).map(|i| a[i * cols + k]).collect();
            v[0] -= alpha;
            let vn = v.iter().map(|x| x * x).sum::<f64>();
            if vn == 0.0 {
                continue;
            }
            for c in k..cols {
                let s: f64 = (k..rows).map(|i| v[i - k] * a[i * cols + c]).sum::<f64>() * 2.0 / vn;
                for i in k..rows {
                    a[i * cols + c] -= s * v[i - k];
                }
            }
            let s: f64 = (k..rows).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vn;
            for i in k..rows {
                b[i] -= s * v[i - k];
            }
        }
        let mut x = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut acc = b[i];
            for k in i + 1..cols {
                acc -= a[i * cols + k] * x[k];
            }
            x[i] = acc / a[i * cols + i];
        }
        x
    }

    fn residual_norm(hs: &HessenbergSystem<f64>, j: usize, d: &[f64]) -> f64 {
        (0..=j)
            .map(|i| {
                let rhs = if i == 0 { hs.gamma() } else { 0.0 };
                let hd: f64 = (0..j).map(|k| hs.h(i, k) * d[k]).sum();
                (rhs - hd).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn random_system(m: usize, seed: u64) -> HessenbergSystem<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hs = HessenbergSystem::new(m, rng.gen_range(0.5..2.0));
        for j in 1..=m {
            let col: Vec<f64> = (0..j).map(|_| rng.gen_range(-1.0..1.0)).collect();
            hs.lsq_update(j, &col, rng.gen_range(0.1..1.0)).unwrap();
        }
        hs
    }

    #[test]
    fn exact_one_by_one() {
        let mut hs = HessenbergSystem::new(1, 4.0);
        assert_eq!(hs.lsq_update(1, &[2.0], 0.0).unwrap(), 0.0);
        assert_eq!(hs.lsq_solve(1).unwrap(), vec![2.0]);
    }

    #[test]
    fn two_by_one_rotation() {
        let mut hs = HessenbergSystem::new(1, 1.0);
        let res = hs.lsq_update(1, &[1.0], 1.0).unwrap();
        assert!((res - 0.5f64.sqrt()).abs() < 1e-15);
        let d = hs.lsq_solve(1).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15);
        let oracle = dense_lsq(&[1.0, 1.0], 2, 1, &[1.0, 0.0]);
        assert!((d[0] - oracle[0]).abs() < 1e-15);
    }

    #[test]
    fn diagonal_system_divides() {
        let mut hs = HessenbergSystem::new(1, 6.0);
        hs.lsq_update(1, &[3.0], 0.0).unwrap();
        assert_eq!(hs.lsq_solve(1).unwrap(), vec![2.0]);
    }

    #[test]
    fn out_of_order_columns_rejected() {
        let mut hs = HessenbergSystem::<f64>::new(3, 1.0);
        assert!(matches!(hs.lsq_update(2, &[1.0, 1.0], 1.0), Err(Error::ColumnOutOfOrder { .. })));
        hs.lsq_update(1, &[1.0], 1.0).unwrap();
        assert!(hs.lsq_update(1, &[1.0], 1.0).is_err());
        assert!(hs.lsq_solve(2).is_err());
    }

    #[test]
    fn singular_triangle_is_reported() {
        let mut hs = HessenbergSystem::new(1, 1.0);
        hs.lsq_update(1, &[0.0], 0.0).unwrap();
        assert!(matches!(hs.lsq_solve(1), Err(Error::SingularTriangular { index: 0, .. })));
    }

    #[test]
    fn random_6x5_matches_dense_qr() {
        let hs = random_system(5, 21);
        let rows = 6;
        let mut dense = vec![0.0; rows * 5];
        for i in 0..rows {
            for k in 0..5 {
                dense[i * 5 + k] = hs.h(i, k);
            }
        }
        let mut rhs = vec![0.0; rows];
        rhs[0] = hs.gamma();
        let oracle = dense_lsq(&dense, rows, 5, &rhs);
        let d = hs.lsq_solve(5).unwrap();
        let err = d.iter().zip(&oracle).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = oracle.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(err <= 32.0 * f64::unit_roundoff() * norm, "{err:e} vs {norm:e}");
        let r = residual_norm(&hs, 5, &d);
        assert!((r - hs.implicit_residual()).abs() <= 1e-14);
    }

    #[test]
    fn implicit_residual_is_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut hs = HessenbergSystem::new(20, 1.0);
        let mut last = 1.0;
        for j in 1..=20 {
            let col: Vec<f64> = (0..j).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let res = hs.lsq_update(j, &col, rng.gen_range(0.01..1.0)).unwrap();
            assert!(res <= last);
            last = res;
        }
    }

    fn condition_number(hs: &HessenbergSystem<f64>, j: usize) -> f64 {
        let m = nalgebra::DMatrix::from_fn(j + 1, j, |i, k| hs.h(i, k));
        let sv = m.singular_values();
        sv.max() / sv.min()
    }

    #[test]
    fn random_systems_match_dense_qr_relative_to_conditioning() {
        for m in 1..=20 {
            for seed in 0..5 {
                let hs = random_system(m, 100 * m as u64 + seed);
                let rows = m + 1;
                let mut dense = vec![0.0; rows * m];
                for i in 0..rows {
                    for k in 0..m {
                        dense[i * m + k] = hs.h(i, k);
                    }
                }
                let mut rhs = vec![0.0; rows];
                rhs[0] = hs.gamma();
                let oracle = dense_lsq(&dense, rows, m, &rhs);
                let d = hs.lsq_solve(m).unwrap();
                let err = d.iter().zip(&oracle).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let norm = oracle.iter().map(|b| b * b).sum::<f64>().sqrt();
                let kappa = condition_number(&hs, m);
                assert!(err <= 64.0 * f64::unit_roundoff() * kappa * norm, "m={m}: {err:e}");
            }
        }
    }

    #[test]
    fn random_10x9_solution_is_optimal() {
        let hs = random_system(9, 8);
        let d = hs.lsq_solve(9).unwrap();
        let best = residual_norm(&hs, 9, &d);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p: Vec<f64> = d.iter().map(|x| x + rng.gen_range(-1e-3..1e-3)).collect();
            assert!(best <= residual_norm(&hs, 9, &p));
        }
    }
}
