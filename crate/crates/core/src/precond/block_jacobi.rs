//! Block Jacobi: exact LU solves with the dense diagonal blocks of `A`, ignoring
//! everything outside them.

use super::{PrecondKind, Preconditioner};
use crate::dense::DenseLu;
use crate::error::{Error, Result};
use crate::precision::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct BlockJacobi<T> {
    n: usize,
    block_size: usize,
    blocks: Vec<DenseLu<T>>,
}

/// Factor the diagonal `k x k` blocks of `a` (the last one smaller when `k` does not
/// divide `n`).
pub fn build_block_jacobi<T: Scalar>(a: &CsrMatrix<T>, k: usize) -> Result<BlockJacobi<T>> {
    let n = a.n();
    if k == 0 || k > n {
        return Err(Error::InvalidPreconditioner(format!(
            "block size {k} must be in 1..={n}"
        )));
    }
    let mut blocks = Vec::with_capacity(n.div_ceil(k));
    let mut dense = Vec::new();
    for (b, start) in (0..n).step_by(k).enumerate() {
        let end = (start + k).min(n);
        let size = end - start;
        dense.clear();
        dense.resize(size * size, T::zero());
        for r in start..end {
            let (cols, vals) = a.row(r);
            let lo = cols.partition_point(|&c| c < start);
            for (&c, &v) in cols[lo..].iter().zip(&vals[lo..]).take_while(|(&c, _)| c < end) {
                dense[(r - start) * size + (c - start)] = v;
            }
        }
        let lu = DenseLu::factor(&dense, size)
            .map_err(|_| Error::SingularBlock { block: b, start, end })?;
        blocks.push(lu);
    }
    Ok(BlockJacobi {
        n,
        block_size: k,
        blocks,
    })
}

impl<T: Scalar> BlockJacobi<T> {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }
}

impl<T: Scalar> Preconditioner<T> for BlockJacobi<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn kind(&self) -> PrecondKind {
        PrecondKind::BlockJacobi
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let k = self.block_size;
        for ((lu, xb), yb) in self.blocks.iter().zip(x.chunks(k)).zip(y.chunks_mut(k)) {
            lu.solve(xb, yb);
        }
    }
}
