#![allow(dead_code)]

use mpgmres::CsrMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.n(), a.n(), &a.to_dense())
}

/// Solve with nalgebra's partial-pivoting LU.
pub fn dense_solve(a: &CsrMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let lu = to_dense(a).lu();
    lu.solve(&DVector::from_column_slice(b))
        .expect("oracle matrix is singular")
        .as_slice()
        .to_vec()
}

pub fn dense_inverse(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    to_dense(a).try_inverse().expect("oracle matrix is singular")
}

pub fn condition_2(a: &CsrMatrix<f64>) -> f64 {
    let s = to_dense(a).singular_values();
    s.max() / s.min()
}

pub fn rel_err(x: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|v| v * v).sum();
    (num / den).sqrt()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Diagonally dominant nonsymmetric matrix with about `per_row` off-diagonals per row.
pub fn random_dominant(n: usize, per_row: usize, seed: u64) -> CsrMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        let mut row_sum = 0.0;
        for _ in 0..per_row {
            let j = rng.gen_range(0..n);
            if j != i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                row_sum += v.abs();
                entries.push((i, j, v));
            }
        }
        entries.push((i, i, row_sum + rng.gen_range(0.5..2.0)));
    }
    CsrMatrix::from_triplets(n, &entries).unwrap()
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
