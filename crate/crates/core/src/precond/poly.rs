//! GMRES polynomial preconditioner `M = p(A)`.
//!
//! The polynomial is the one implicitly built by `d + 1` steps of GMRES started
//! from a seed vector: its residual polynomial `pi(t) = prod (1 - t / theta_i)` has
//! the harmonic Ritz values `theta_i` as roots, and `p(t) = (1 - pi(t)) / t` has
//! degree `d`. Roots are kept in modified Leja order and applied in product form,
//! so one application costs exactly `d` sparse products.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PrecondKind, Preconditioner};
use crate::dense::blas::axpy_unchecked;
use crate::dense::{norm2, DenseLu, KrylovBasis};
use crate::error::{Error, Result};
use crate::precision::Scalar;
use crate::sparse::csr::check_len;
use crate::sparse::CsrMatrix;

/// A real root, or a complex conjugate pair `re +- i im` (with `im > 0`) applied through
/// its real quadratic factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolyRoot<T> {
    Real(T),
    Pair { re: T, im: T },
}

impl<T: Scalar> PolyRoot<T> {
    fn multiplicity(&self) -> usize {
        match self {
            PolyRoot::Real(_) => 1,
            PolyRoot::Pair { .. } => 2,
        }
    }

    fn as_f64(&self) -> (f64, f64) {
        match *self {
            PolyRoot::Real(r) => (r.as_f64(), 0.0),
            PolyRoot::Pair { re, im } => (re.as_f64(), im.as_f64()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresPoly<T> {
    a: Arc<CsrMatrix<T>>,
    roots: Vec<PolyRoot<T>>,
    requested_degree: usize,
}

/// Deterministic seed vector with entries uniform in `[-1, 1)`. A random start sees
/// every eigencomponent, unlike structured right-hand sides such as all ones.
pub fn random_seed(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Build a degree-`d` GMRES polynomial for `a` from `seed`, entirely in `T`.
///
/// If the Arnoldi process breaks down after `k <= d` steps the Krylov space is
/// invariant; the polynomial then uses the `k` exact Ritz values and has degree
/// `k - 1` (see [`GmresPoly::truncated`]).
pub fn build_gmres_poly<T: Scalar>(
    a: Arc<CsrMatrix<T>>,
    d: usize,
    seed: &[T],
) -> Result<GmresPoly<T>> {
    let n = a.n();
    check_len("polynomial seed", n, seed.len())?;
    if d == 0 {
        return Err(Error::InvalidPreconditioner("polynomial degree must be >= 1".into()));
    }
    let seed_norm = norm2(seed);
    if seed_norm == T::zero() {
        return Err(Error::InvalidPreconditioner("polynomial seed is zero".into()));
    }

    let steps = (d + 1).min(n);
    let mut basis = KrylovBasis::new(n, steps + 1);
    basis.push_scaled(seed, seed_norm)?;
    // column-major (steps+1) x steps
    let ld = steps + 1;
    let mut h = vec![T::zero(); ld * steps];
    let mut w = vec![T::zero(); n];
    let mut k = 0;
    let mut broke_down = false;
    while k < steps {
        a.spmv_unchecked(basis.column(k), &mut w);
        let step = basis.cgs2_append(&mut w)?;
        h[k * ld..k * ld + k + 1].copy_from_slice(&step.h_col);
        h[k * ld + k + 1] = step.beta;
        k += 1;
        if !step.appended {
            broke_down = true;
            break;
        }
    }

    // square k x k block, column-major
    let mut hk: Vec<T> = (0..k).flat_map(|c| h[c * ld..c * ld + k].to_vec()).collect();
    if !broke_down {
        // harmonic Ritz: H_k + beta^2 f e_k^T with H_k^T f = e_k
        let beta = h[(k - 1) * ld + k];
        let hk_t_row_major = hk.clone(); // column-major H_k is row-major H_k^T
        let lu = DenseLu::factor(&hk_t_row_major, k).map_err(|_| {
            Error::InvalidPreconditioner("Hessenberg matrix is singular; cannot form harmonic Ritz values".into())
        })?;
        let mut ek = vec![T::zero(); k];
        ek[k - 1] = T::one();
        let mut f = vec![T::zero(); k];
        lu.solve(&ek, &mut f);
        for (i, fi) in f.iter().enumerate() {
            hk[(k - 1) * k + i] = hk[(k - 1) * k + i] + beta * beta * *fi;
        }
    }

    let eig = T::dense_eigenvalues(&hk, k).ok_or(Error::EigenFailure)?;
    let roots = leja_order(collect_roots(&eig)?);
    Ok(GmresPoly {
        a,
        roots,
        requested_degree: d,
    })
}

fn collect_roots<T: Scalar>(eig: &[(T, T)]) -> Result<Vec<PolyRoot<T>>> {
    let mut roots = Vec::with_capacity(eig.len());
    let (mut pos, mut neg) = (0, 0);
    for &(re, im) in eig {
        if re.hypot(im) == T::zero() || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidPreconditioner(
                "zero or non-finite harmonic Ritz value".into(),
            ));
        }
        if im > T::zero() {
            pos += 1;
            roots.push(PolyRoot::Pair { re, im });
        } else if im < T::zero() {
            neg += 1;
        } else {
            roots.push(PolyRoot::Real(re));
        }
    }
    if pos != neg {
        return Err(Error::InvalidPreconditioner("unpaired complex harmonic Ritz value".into()));
    }
    Ok(roots)
}

/// Modified Leja ordering: start from the largest-magnitude root, then repeatedly
/// take the root maximising the product of distances to every root already chosen
/// (both members of chosen pairs). Sums of logarithms avoid overflow.
fn leja_order<T: Scalar>(mut pending: Vec<PolyRoot<T>>) -> Vec<PolyRoot<T>> {
    let mut chosen: Vec<PolyRoot<T>> = Vec::with_capacity(pending.len());
    let mut points: Vec<(f64, f64)> = Vec::new();
    while !pending.is_empty() {
        let score = |r: &PolyRoot<T>| -> f64 {
            let (x, y) = r.as_f64();
            if points.is_empty() {
                x.hypot(y)
            } else {
                points.iter().map(|&(px, py)| (x - px).hypot(y - py).ln()).sum()
            }
        };
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, r) in pending.iter().enumerate() {
            let s = score(r);
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        let r = pending.remove(best);
        let (x, y) = r.as_f64();
        points.push((x, y));
        if y != 0.0 {
            points.push((x, -y));
        }
        chosen.push(r);
    }
    chosen
}

impl<T: Scalar> GmresPoly<T> {
    /// Degree of `p`, i.e. sparse products per application.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(PolyRoot::multiplicity).sum::<usize>() - 1
    }

    pub fn requested_degree(&self) -> usize {
        self.requested_degree
    }

    /// `true` when Arnoldi broke down early and the degree is below the request.
    pub fn truncated(&self) -> bool {
        self.degree() < self.requested_degree
    }

    pub fn roots(&self) -> &[PolyRoot<T>] {
        &self.roots
    }

    pub fn matrix(&self) -> &Arc<CsrMatrix<T>> {
        &self.a
    }

    /// Power-basis coefficients `c_0 .. c_d` of `p(t) = sum c_k t^k`, in binary64.
    pub fn coefficients(&self) -> Vec<f64> {
        // pi(t) = prod of (1 - t/theta) or (1 - 2a t/|theta|^2 + t^2/|theta|^2)
        let mut pi = vec![1.0f64];
        for r in &self.roots {
            let factor = match *r {
                PolyRoot::Real(t) => vec![1.0, -1.0 / t.as_f64()],
                PolyRoot::Pair { re, im } => {
                    let (a, b) = (re.as_f64(), im.as_f64());
                    let m2 = a * a + b * b;
                    vec![1.0, -2.0 * a / m2, 1.0 / m2]
                }
            };
            let mut next = vec![0.0; pi.len() + factor.len() - 1];
            for (i, &p) in pi.iter().enumerate() {
                for (j, &q) in factor.iter().enumerate() {
                    next[i + j] += p * q;
                }
            }
            pi = next;
        }
        pi[1..].iter().map(|c| -c).collect()
    }

    /// `y = p(A) x` using `a` as the operator (normally the matrix the polynomial was
    /// built from).
    pub fn apply_with(&self, a: &CsrMatrix<T>, x: &[T], y: &mut [T]) {
        let n = x.len();
        y.iter_mut().for_each(|v| *v = T::zero());
        let mut prod = x.to_vec();
        let mut tmp = vec![T::zero(); n];
        let last = self.roots.len() - 1;
        for (i, root) in self.roots.iter().enumerate() {
            match *root {
                PolyRoot::Real(theta) => {
                    let inv = T::one() / theta;
                    axpy_unchecked(inv, &prod, y);
                    if i < last {
                        a.spmv_unchecked(&prod, &mut tmp);
                        axpy_unchecked(-inv, &tmp, &mut prod);
                    }
                }
                PolyRoot::Pair { re, im } => {
                    let inv_m2 = T::one() / (re * re + im * im);
                    let two_re = re + re;
                    a.spmv_unchecked(&prod, &mut tmp);
                    // increment = (2 re prod - A prod) / |theta|^2
                    for (t, &p) in tmp.iter_mut().zip(&prod) {
                        *t = (two_re * p - *t) * inv_m2;
                    }
                    axpy_unchecked(T::one(), &tmp, y);
                    if i < last {
                        let inc = tmp.clone();
                        a.spmv_unchecked(&inc, &mut tmp);
                        axpy_unchecked(-T::one(), &tmp, &mut prod);
                    }
                }
            }
        }
    }
}

impl<T: Scalar> Preconditioner<T> for GmresPoly<T> {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn kind(&self) -> PrecondKind {
        PrecondKind::GmresPoly
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.apply_with(&self.a, x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_unit_polynomial() {
        for d in [1, 3, 10] {
            let a = Arc::new(CsrMatrix::<f64>::identity(6));
            let p = build_gmres_poly(a, d, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
            assert_eq!(p.degree(), 0);
            assert!(p.truncated());
            let v = [0.5, -1.0, 2.0, 0.0, 3.0, 1.0];
            let y = p.apply_vec(&v).unwrap();
            for (a, b) in y.iter().zip(&v) {
                assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
            }
        }
    }

    #[test]
    fn two_point_spectrum_is_inverted() {
        let a = Arc::new(CsrMatrix::from_diagonal(&[1.0f64, 2.0]));
        let p = build_gmres_poly(a, 2, &[1.0, 1.0]).unwrap();
        assert_eq!(p.degree(), 1);
        let c = p.coefficients();
        assert!((c[0] - 1.5).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12, "{c:?}");
        let y = p.apply_vec(&[3.0, 4.0]).unwrap();
        assert!((y[0] - 3.0).abs() < 1e-12 && (y[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_roots_use_real_quadratic_factor() {
        // rotation-like nonsymmetric 2x2 block has a conjugate pair of eigenvalues
        let a = Arc::new(
            CsrMatrix::from_triplets(2, &[(0, 0, 1.0f64), (0, 1, -2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap(),
        );
        let p = build_gmres_poly(Arc::clone(&a), 2, &[1.0, 0.0]).unwrap();
        assert!(matches!(p.roots()[0], PolyRoot::Pair { .. }));
        assert_eq!(p.degree(), 1);
        // A p(A) = I on a 2x2 with both eigenvalues as roots
        let v = [0.3, -0.7];
        let y = p.apply_vec(&v).unwrap();
        let ay = a.mul_vec(&y).unwrap();
        for (x, z) in ay.iter().zip(&v) {
            assert!((x - z).abs() < 1e-12);
        }
    }

    #[test]
    fn leja_starts_at_largest_magnitude_and_spreads() {
        let roots = vec![PolyRoot::Real(1.0f64), PolyRoot::Real(1.1), PolyRoot::Real(5.0), PolyRoot::Real(2.0)];
        let ordered = leja_order(roots);
        assert_eq!(ordered[0], PolyRoot::Real(5.0));
        assert_eq!(ordered[1], PolyRoot::Real(1.0));
    }

    #[test]
    fn zero_seed_and_degree_rejected() {
        let a = Arc::new(CsrMatrix::<f64>::identity(2));
        assert!(build_gmres_poly(Arc::clone(&a), 1, &[0.0, 0.0]).is_err());
        assert!(build_gmres_poly(Arc::clone(&a), 0, &[1.0, 0.0]).is_err());
        assert!(build_gmres_poly(a, 1, &[1.0]).is_err());
    }
}
