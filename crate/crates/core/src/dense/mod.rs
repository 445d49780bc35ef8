//! Dense building blocks of the Arnoldi process.

pub mod basis;
pub mod blas;
pub mod hessenberg;
pub mod lu;

pub use basis::{Cgs2Step, KrylovBasis};
pub use blas::{axpy, dot, norm2, scale};
pub use hessenberg::HessenbergSystem;
pub use lu::DenseLu;
