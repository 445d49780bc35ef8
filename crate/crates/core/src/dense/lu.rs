//! Dense LU with partial pivoting for small square blocks.

use crate::precision::Scalar;

#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    k: usize,
    /// Row-major; unit-lower `L` below the diagonal, `U` on and above.
    lu: Vec<T>,
    /// `piv[i]` is the original row placed at position `i`.
    piv: Vec<usize>,
}

/// Pivot column whose best pivot fell below the singularity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularPivot(pub usize);

impl<T: Scalar> DenseLu<T> {
    /// Factor a row-major `k x k` matrix. A pivot with magnitude at or below
    /// `k * u * ||a||_inf` is treated as singular.
    pub fn factor(a: &[T], k: usize) -> Result<Self, SingularPivot> {
        assert_eq!(a.len(), k * k);
        let norm = (0..k)
            .map(|i| a[i * k..(i + 1) * k].iter().fold(T::zero(), |s, v| s + v.abs()))
            .fold(T::zero(), T::max);
        let threshold = T::of(k as f64) * T::unit_roundoff() * norm;
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let (p, best) = (col..k)
                .map(|r| (r, lu[r * k + col].abs()))
                .fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= threshold {
                return Err(SingularPivot(col));
            }
            if p != col {
                for c in 0..k {
                    lu.swap(p * k + c, col * k + c);
                }
                piv.swap(p, col);
            }
            let pivot = lu[col * k + col];
            for r in col + 1..k {
                let f = lu[r * k + col] / pivot;
                lu[r * k + col] = f;
                if f != T::zero() {
                    for c in col + 1..k {
                        lu[r * k + c] = lu[r * k + c] - f * lu[col * k + c];
                    }
                }
            }
        }
        Ok(Self { k, lu, piv })
    }

    pub fn size(&self) -> usize {
        self.k
    }

    /// Solve `A x = b` for `x`, reading `b` and writing `x`.
    pub fn solve(&self, b: &[T], x: &mut [T]) {
        let k = self.k;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = b[self.piv[i]];
        }
        for i in 0..k {
            let mut acc = x[i];
            for c in 0..i {
                acc = acc - self.lu[i * k + c] * x[c];
            }
            x[i] = acc;
        }
        for i in (0..k).rev() {
            let mut acc = x[i];
            for c in i + 1..k {
                acc = acc - self.lu[i * k + c] * x[c];
            }
            x[i] = acc / self.lu[i * k + i];
        }
    }

    /// `max |(L U - P A)_{ij}|` against the original matrix, for diagnostics.
    pub fn reconstruction_error(&self, a: &[T]) -> f64 {
        let k = self.k;
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let mut s = 0.0f64;
                for c in 0..=i.min(j) {
                    let l = if c == i { 1.0 } else { self.lu[i * k + c].as_f64() };
                    s += l * self.lu[c * k + j].as_f64();
                }
                worst = worst.max((s - a[self.piv[i] * k + j].as_f64()).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_with_pivoting() {
        // zero leading entry forces a row swap
        let a = [0.0f64, 2.0, 1.0, 1.0];
        let lu = DenseLu::factor(&a, 2).unwrap();
        let mut x = [0.0; 2];
        lu.solve(&[4.0, 3.0], &mut x);
        assert_eq!(x, [1.0, 2.0]);
    }

    #[test]
    fn singular_is_detected() {
        let a = [1.0f64, 2.0, 2.0, 4.0];
        assert_eq!(DenseLu::factor(&a, 2).unwrap_err(), SingularPivot(1));
    }

    #[test]
    fn reconstruction_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [1usize, 5, 17, 42] {
            let a: Vec<f64> = (0..k * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lu = DenseLu::factor(&a, k).unwrap();
            let norm = (0..k)
                .map(|i| a[i * k..(i + 1) * k].iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(lu.reconstruction_error(&a) <= 8.0 * f64::unit_roundoff() * k as f64 * norm);
        }
    }
}
