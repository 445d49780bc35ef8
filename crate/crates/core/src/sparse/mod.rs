//! Sparse matrices: storage, products, test problems, file I/O and reordering.

pub mod csr;
pub mod mmio;
pub mod rcm;
pub mod stencil;

pub use csr::{convert_matrix, convert_vector, AnyCsr, CsrMatrix};
pub use mmio::{parse_matrix_market, read_matrix_market, save_matrix_market, write_matrix_market};
pub use rcm::{bandwidth, invert_permutation, permute_system, rcm_ordering, unpermute_vector};
pub use stencil::{count_stencil_nnz, generate_stencil, ProblemSpec};
