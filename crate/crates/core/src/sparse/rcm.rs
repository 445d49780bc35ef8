//! Reverse Cuthill-McKee ordering and symmetric permutation of a linear system.
//!
//! Permutations map new positions to old ones: `perm[new] = old`.

use std::collections::VecDeque;

use super::csr::{check_len, CsrMatrix};
use crate::error::{Error, Result};
use crate::precision::Scalar;

/// Adjacency of the symmetrised pattern `A + A^T`, without self loops.
fn symmetric_adjacency<T: Scalar>(a: &CsrMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut adj = vec![Vec::new(); n];
    for r in 0..n {
        for &c in a.row(r).0 {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Reverse Cuthill-McKee ordering of the symmetrised pattern.
///
/// Each connected component starts from its minimum-degree vertex (lowest index on
/// ties), is visited breadth-first with neighbours in increasing degree, and the
/// component's visit order is reversed in place.
pub fn rcm_ordering<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n();
    let adj = symmetric_adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    // Vertices by (degree, index) so each new component starts at the smallest one.
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs: Vec<usize> = Vec::new();

    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let comp_start = order.len();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        order[comp_start..].reverse();
    }
    order
}

/// Half-bandwidth `max |i - j|` over the stored entries of the symmetrised pattern.
pub fn bandwidth<T: Scalar>(a: &CsrMatrix<T>) -> usize {
    (0..a.n())
        .flat_map(|r| a.row(r).0.iter().map(move |&c| r.abs_diff(c)))
        .max()
        .unwrap_or(0)
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "length {} for a system of size {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("entry {p} is repeated or out of range")));
        }
    }
    Ok(())
}

/// `inv[old] = new` for `perm[new] = old`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Symmetric permutation: returns `(P A P^T, P b)` with `(P A P^T)[i][j] = A[perm[i]][perm[j]]`.
pub fn permute_system<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    perm: &[usize],
) -> Result<(CsrMatrix<T>, Vec<T>)> {
    let n = a.n();
    check_len("permute_system rhs", n, b.len())?;
    check_permutation(perm, n)?;
    let inv = invert_permutation(perm);

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(a.nnz());
    let mut values = Vec::with_capacity(a.nnz());
    row_ptr.push(0);
    let mut row: Vec<(usize, T)> = Vec::new();
    for &old in perm {
        let (cols, vals) = a.row(old);
        row.clear();
        row.extend(cols.iter().zip(vals).map(|(&c, &v)| (inv[c], v)));
        row.sort_unstable_by_key(|&(c, _)| c);
        for &(c, v) in &row {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    let pa = CsrMatrix::from_raw_parts(n, row_ptr, col_idx, values)?;
    let pb = perm.iter().map(|&old| b[old]).collect();
    Ok((pa, pb))
}

/// Map a solution of the permuted system back to the original numbering.
pub fn unpermute_vector<T: Copy>(y: &[T], perm: &[usize]) -> Vec<T> {
    let mut x = y.to_vec();
    for (new, &old) in perm.iter().enumerate() {
        x[old] = y[new];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn identity_gives_identity_permutation() {
        let a = CsrMatrix::<f64>::identity(5);
        assert_eq!(rcm_ordering(&a), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn tridiagonal_stays_bandwidth_one() {
        let a = tridiagonal(10);
        let perm = rcm_ordering(&a);
        let (pa, _) = permute_system(&a, &[0.0; 10], &perm).unwrap();
        assert_eq!(bandwidth(&pa), 1);
    }

    #[test]
    fn reversal_on_diagonal() {
        let a = CsrMatrix::from_diagonal(&[1.0f64, 2.0, 3.0]);
        let (pa, pb) = permute_system(&a, &[1.0, 2.0, 3.0], &[2, 1, 0]).unwrap();
        assert_eq!(pa, CsrMatrix::from_diagonal(&[3.0, 2.0, 1.0]));
        assert_eq!(pb, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn identity_permutation_is_a_no_op() {
        let a = tridiagonal(4);
        let b = [1.0, 2.0, 3.0, 4.0];
        let (pa, pb) = permute_system(&a, &b, &[0, 1, 2, 3]).unwrap();
        assert_eq!(pa, a);
        assert_eq!(pb, b.to_vec());
    }

    #[test]
    fn bad_permutations() {
        let a = tridiagonal(3);
        let b = [0.0; 3];
        assert!(permute_system(&a, &b, &[0, 1]).is_err());
        assert!(permute_system(&a, &b, &[0, 1, 1]).is_err());
        assert!(permute_system(&a, &b, &[0, 1, 3]).is_err());
        assert!(permute_system(&a, &[0.0; 2], &[0, 1, 2]).is_err());
    }

    #[test]
    fn disconnected_components_are_all_covered() {
        // two paths: 0-2-4 and 1-3
        let a = CsrMatrix::from_triplets(
            5,
            &[(0, 2, 1.0f64), (2, 4, 1.0), (1, 3, 1.0), (0, 0, 1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let mut perm = rcm_ordering(&a);
        let (pa, _) = permute_system(&a, &[0.0; 5], &perm).unwrap();
        assert!(bandwidth(&pa) <= 1);
        perm.sort();
        assert_eq!(perm, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn unpermute_inverts() {
        let perm = [3, 0, 2, 1];
        let x = [10.0, 11.0, 12.0, 13.0];
        let px: Vec<f64> = perm.iter().map(|&o| x[o]).collect();
        assert_eq!(unpermute_vector(&px, &perm), x.to_vec());
        assert_eq!(invert_permutation(&[2, 0, 1]), vec![1, 2, 0]);
    }
}
