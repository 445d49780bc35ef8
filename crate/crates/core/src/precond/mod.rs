//! Right preconditioners `M` applied as `x -> M x` inside GMRES.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{Precision, Scalar};
use crate::sparse::CsrMatrix;

pub mod block_jacobi;
pub mod poly;

pub use block_jacobi::{build_block_jacobi, BlockJacobi};
pub use poly::{build_gmres_poly, random_seed, GmresPoly, PolyRoot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondKind {
    Identity,
    BlockJacobi,
    GmresPoly,
}

/// A linear operator approximating `A^{-1}`.
pub trait Preconditioner<T: Scalar>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn kind(&self) -> PrecondKind;

    /// Precision the operator itself is stored and applied in. Differs from `T` for
    /// cast wrappers around a lower-precision preconditioner.
    fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// `y = M x`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[T], y: &mut [T]);

    /// Checked, allocating form of [`apply`](Self::apply).
    fn apply_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "preconditioner apply",
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let mut y = vec![T::zero(); x.len()];
        self.apply(x, &mut y);
        Ok(y)
    }
}

/// Shared, immutable preconditioner usable from concurrent solves.
pub type PreconditionerHandle<T> = Arc<dyn Preconditioner<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl<T: Scalar> Preconditioner<T> for Identity {
    fn dim(&self) -> usize {
        self.n
    }

    fn kind(&self) -> PrecondKind {
        PrecondKind::Identity
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(x);
    }
}

pub fn identity<T: Scalar>(n: usize) -> PreconditionerHandle<T> {
    Arc::new(Identity::new(n))
}

/// Which preconditioner to build; parsed from `none`, `jacobi:K` or `poly:D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondSpec {
    #[default]
    None,
    BlockJacobi { block_size: usize },
    Poly { degree: usize },
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecondSpec::None => f.write_str("none"),
            PrecondSpec::BlockJacobi { block_size } => write!(f, "jacobi:{block_size}"),
            PrecondSpec::Poly { degree } => write!(f, "poly:{degree}"),
        }
    }
}

impl FromStr for PrecondSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPreconditioner(format!("`{s}` (expected none, jacobi:K or poly:D)"));
        let lower = s.trim().to_ascii_lowercase();
        if lower == "none" {
            return Ok(PrecondSpec::None);
        }
        let (kind, arg) = lower.split_once(':').ok_or_else(bad)?;
        let value: usize = arg.parse().map_err(|_| bad())?;
        if value == 0 {
            return Err(bad());
        }
        match kind {
            "jacobi" | "j" => Ok(PrecondSpec::BlockJacobi { block_size: value }),
            "poly" | "p" => Ok(PrecondSpec::Poly { degree: value }),
            _ => Err(bad()),
        }
    }
}

/// Build the preconditioner named by `spec` for `a`, in `a`'s precision. `seed`
/// starts the polynomial's Arnoldi process and is ignored otherwise.
pub fn build_preconditioner<T: Scalar>(
    spec: PrecondSpec,
    a: &Arc<CsrMatrix<T>>,
    seed: &[T],
) -> Result<PreconditionerHandle<T>> {
    Ok(match spec {
        PrecondSpec::None => identity(a.n()),
        PrecondSpec::BlockJacobi { block_size } => Arc::new(build_block_jacobi(a, block_size)?),
        PrecondSpec::Poly { degree } => Arc::new(build_gmres_poly(Arc::clone(a), degree, seed)?),
    })
}
