//! Mixed-precision restarted GMRES for sparse nonsymmetric systems.
//!
//! Matrices are stored in CSR form in either binary32 or binary64 (see
//! [`Scalar`]). [`gmres_restarted`] runs GMRES(m) in one precision;
//! [`gmres_ir`] and [`gmres_fd`] combine a binary32 Krylov solve with binary64
//! residuals. Right preconditioners live in [`precond`].

pub mod dense;
pub mod error;
pub mod gmres;
pub mod multiprecision;
pub mod precision;
pub mod precond;
pub mod report;
pub mod sparse;

pub use error::{Error, Result};
pub use gmres::{detect_loss_of_accuracy, gmres_cycle, gmres_restarted, CycleExit, CycleState, SolverConfig};
pub use multiprecision::{
    gmres_fd, gmres_fd_with, gmres_ir, gmres_ir_with, preconditioner_for_double,
    wrap_low_precision_preconditioner, CastPreconditioner, FdConfig, FdOperators, IrConfig, IrOperators,
};
pub use precision::{Precision, Scalar};
pub use precond::{
    build_preconditioner, identity, PrecondKind, PrecondSpec, Preconditioner, PreconditionerHandle,
};
pub use report::{ConvergenceReport, HistoryEntry, Phase};
pub use sparse::{
    convert_matrix, convert_vector, count_stencil_nnz, generate_stencil, AnyCsr, CsrMatrix, ProblemSpec,
};
