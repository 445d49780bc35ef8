//! Floating-point precision tags and the scalar trait shared by every kernel.

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// IEEE-754 interchange format used to store and operate on values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// binary32
    Single,
    /// binary64
    Double,
}

impl Precision {
    /// Unit roundoff: 2^-24 for binary32, 2^-53 for binary64.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Precision::Single => f32::unit_roundoff_f64(),
            Precision::Double => f64::unit_roundoff_f64(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "float" | "fp32" | "binary32" => Ok(Precision::Single),
            "double" | "fp64" | "binary64" => Ok(Precision::Double),
            other => Err(format!("unknown precision `{other}` (expected single or double)")),
        }
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// Real scalar type a matrix or vector is stored in. Implemented for `f32` and `f64` only.
pub trait Scalar:
    Float + Default + fmt::Debug + fmt::Display + Send + Sync + Sum + 'static + sealed::Sealed
{
    const PRECISION: Precision;

    /// Round a binary64 value to nearest in this format.
    fn of(v: f64) -> Self;

    /// Exact widening to binary64.
    fn as_f64(self) -> f64;

    fn unit_roundoff() -> Self {
        Self::of(Self::PRECISION.unit_roundoff())
    }

    #[doc(hidden)]
    fn unit_roundoff_f64() -> f64;

    /// Eigenvalues `(re, im)` of a small dense column-major `n x n` matrix, or `None` if the
    /// QR iteration did not converge.
    fn dense_eigenvalues(col_major: &[Self], n: usize) -> Option<Vec<(Self, Self)>>;
}

macro_rules! impl_scalar {
    ($t:ty, $prec:expr, $u:expr) => {
        impl Scalar for $t {
            const PRECISION: Precision = $prec;

            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            fn unit_roundoff_f64() -> f64 {
                $u
            }

            fn dense_eigenvalues(col_major: &[Self], n: usize) -> Option<Vec<(Self, Self)>> {
                if n == 0 {
                    return Some(Vec::new());
                }
                let m = DMatrix::<$t>::from_column_slice(n, n, col_major);
                let schur = m.try_schur(<$t>::EPSILON, 100 * n.max(10))?;
                Some(
                    schur
                        .complex_eigenvalues()
                        .iter()
                        .map(|z| (z.re, z.im))
                        .collect(),
                )
            }
        }
    };
}

impl_scalar!(f32, Precision::Single, 5.960_464_477_539_063e-8);
impl_scalar!(f64, Precision::Double, 1.110_223_024_625_156_5e-16);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_roundoffs_are_powers_of_two() {
        assert_eq!(Precision::Single.unit_roundoff(), 2f64.powi(-24));
        assert_eq!(Precision::Double.unit_roundoff(), 2f64.powi(-53));
        assert_eq!(f32::unit_roundoff(), 2f32.powi(-24));
    }

    #[test]
    fn parses_aliases() {
        assert_eq!("fp32".parse::<Precision>().unwrap(), Precision::Single);
        assert_eq!("Double".parse::<Precision>().unwrap(), Precision::Double);
        assert!("half".parse::<Precision>().is_err());
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex_pair() {
        // [[0,-1],[1,0]] column-major
        let ev = f64::dense_eigenvalues(&[0.0, 1.0, -1.0, 0.0], 2).unwrap();
        let mut ims: Vec<f64> = ev.iter().map(|e| e.1).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
        assert!(ev.iter().all(|e| e.0.abs() < 1e-12));
    }
}
