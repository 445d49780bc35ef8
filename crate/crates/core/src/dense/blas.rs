//! Level-1 vector kernels. Reductions run strictly left to right so results are
//! reproducible for a given input.

use crate::error::Result;
use crate::precision::Scalar;
use crate::sparse::csr::check_len;

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    check_len("dot", x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

pub fn norm2<T: Scalar>(x: &[T]) -> T {
    dot_unchecked(x, x).sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) -> Result<()> {
    check_len("axpy", y.len(), x.len())?;
    axpy_unchecked(alpha, x, y);
    Ok(())
}

/// `x *= alpha`
pub fn scale<T: Scalar>(alpha: T, x: &mut [T]) {
    for v in x {
        *v = *v * alpha;
    }
}

#[inline]
pub(crate) fn dot_unchecked<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub(crate) fn axpy_unchecked<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Neumaier-compensated binary64 dot product of binary64-widened inputs.
    fn compensated_dot(x: &[f64], y: &[f64]) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for (a, b) in x.iter().zip(y) {
            let p = a * b;
            let t = s + p;
            c += if s.abs() >= p.abs() { (s - t) + p } else { (p - t) + s };
            s = t;
        }
        s + c
    }

    #[test]
    fn unit_vector_and_ones() {
        let mut e = vec![0.0f64; 7];
        e[3] = 1.0;
        assert_eq!(norm2(&e), 1.0);
        let ones = vec![1.0f32; 1000];
        assert_eq!(dot(&ones, &ones).unwrap(), 1000.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(dot(&[1.0f64], &[1.0, 2.0]).is_err());
        let mut y = [0.0f64; 2];
        assert!(axpy(1.0, &[1.0], &mut y).is_err());
    }

    #[test]
    fn axpy_and_scale() {
        let mut y = vec![1.0f64, 2.0];
        axpy(2.0, &[0.5, -1.0], &mut y).unwrap();
        assert_eq!(y, vec![2.0, 0.0]);
        scale(-3.0, &mut y);
        assert_eq!(y, vec![-6.0, -0.0]);
    }

    #[test]
    fn dot_within_rounding_bound_of_compensated_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[10usize, 1000, 20000] {
            let x64: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y64: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bound64 = n as f64 * f64::unit_roundoff() * norm2(&x64) * norm2(&y64);
            let d64 = dot(&x64, &y64).unwrap();
            assert!((d64 - compensated_dot(&x64, &y64)).abs() <= bound64);

            let x32: Vec<f32> = x64.iter().map(|&v| v as f32).collect();
            let y32: Vec<f32> = y64.iter().map(|&v| v as f32).collect();
            let xw: Vec<f64> = x32.iter().map(|&v| v as f64).collect();
            let yw: Vec<f64> = y32.iter().map(|&v| v as f64).collect();
            let bound32 = n as f64 * 2f64.powi(-24) * norm2(&xw) * norm2(&yw);
            let d32 = dot(&x32, &y32).unwrap() as f64;
            assert!((d32 - compensated_dot(&xw, &yw)).abs() <= bound32);
        }
    }
}
