use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::eig::sort_eig;
use super::{dot_c, hermitian_eig, Mat, Scalar};
use crate::{Error, Result};

/// Eigenpairs of a Hermitian matrix whose eigenvalues exceed a relative cut-off.
#[derive(Clone, Debug)]
pub struct TruncatedEig<T> {
    /// Retained eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one column per retained value.
    pub vectors: Mat<T>,
    /// Matrix dimension.
    pub dim: usize,
    /// Dimension of the compressed range used for the eigensolve.
    pub range_dim: usize,
    /// Largest absolute eigenvalue (zero for the zero matrix).
    pub max_abs: f64,
}

impl<T> TruncatedEig<T> {
    /// Whether the discarded spectrum contains (numerically) zero eigenvalues.
    pub fn has_null_space(&self) -> bool {
        self.values.len() < self.dim
    }

    pub fn min_value(&self) -> f64 {
        let m = self.values.last().copied().unwrap_or(0.0);
        if self.has_null_space() {
            m.min(0.0)
        } else {
            m
        }
    }
}

/// Eigenpairs `(λ, v)` of Hermitian `h` with `|λ| > tol·max|λ|`.
///
/// The range of `h` is first compressed with column-pivoted Gram–Schmidt
/// (two passes), stopping once the residual Frobenius norm falls below a
/// fraction of the cut-off; the eigenproblem is then solved on the small
/// projected matrix. For low-rank unfoldings this replaces an `O(N³)` solve by
/// `O(N²·r)` work.
pub fn truncated_hermitian_eig<T: Scalar>(h: &Mat<T>, tol: f64) -> Result<TruncatedEig<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.rows(), found: h.cols() });
    }
    let n = h.rows();
    let fro = h.frob_norm();
    if n == 0 || fro == 0.0 {
        return Ok(TruncatedEig { values: Vec::new(), vectors: Mat::zeros(n, 0), dim: n, range_dim: 0, max_abs: 0.0 });
    }
    let resid = h.hermitian_residual();
    if resid > 1e-10 * fro {
        return Err(Error::NotHermitian(resid / fro));
    }

    // ‖H‖_F/√N ≤ max|λ|, so this threshold sits below tol·max|λ|.
    let noise = 64.0 * f64::EPSILON * fro;
    let stop = (0.1 * tol * fro / (n as f64).sqrt()).max(noise);

    let mut r = h.clone();
    let mut norms: Vec<f64> = (0..n).map(|j| r.col(j).iter().map(|x| x.abs2()).sum()).collect();
    let mut basis: Vec<Vec<T>> = Vec::new();
    while basis.len() < n {
        let total: f64 = norms.iter().sum::<f64>().sqrt();
        if total <= stop {
            break;
        }
        let (jmax, _) = norms
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let mut q = r.col(jmax).to_vec();
        for b in &basis {
            let c = dot_c(b, &q);
            for (qi, &bi) in q.iter_mut().zip(b) {
                *qi -= bi * c;
            }
        }
        let qn = super::norm(&q);
        if qn == 0.0 {
            norms[jmax] = 0.0;
            continue;
        }
        for x in q.iter_mut() {
            *x = x.scale(1.0 / qn);
        }
        for j in 0..n {
            let col = r.col_mut(j);
            let c = dot_c(&q, col);
            for (x, &qi) in col.iter_mut().zip(&q) {
                *x -= qi * c;
            }
            norms[j] = col.iter().map(|x| x.abs2()).sum();
        }
        basis.push(q);
    }
    let k = basis.len();
    drop(r);

    // Projected matrix Qᴴ·H·Q.
    let mut hq = Mat::<T>::zeros(n, k);
    for (j, q) in basis.iter().enumerate() {
        hq.col_mut(j).copy_from_slice(&h.mul_vec(q));
    }
    let mut small = Mat::<T>::zeros(k, k);
    for j in 0..k {
        for (i, q) in basis.iter().enumerate() {
            small[(i, j)] = dot_c(q, hq.col(j));
        }
    }
    let small = small.hermitian_part();
    let eig = hermitian_eig(&small)?;
    let max_abs = eig.values.iter().fold(0.0f64, |m, &x| m.max(Float::abs(x)));
    let cut = tol * max_abs;

    let keep: Vec<usize> = (0..k).filter(|&i| Float::abs(eig.values[i]) > cut).collect();
    let mut vectors = Mat::<T>::zeros(n, keep.len());
    let mut values = Vec::with_capacity(keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        let y = eig.vector(src);
        let mut v = vec![T::zero(); n];
        for (q, &yi) in basis.iter().zip(y) {
            for (vi, &qi) in v.iter_mut().zip(q) {
                *vi += qi * yi;
            }
        }
        vectors.col_mut(dst).copy_from_slice(&v);
        values.push(eig.values[src]);
    }
    let sorted = sort_eig(values, vectors, fro);
    Ok(TruncatedEig { values: sorted.values, vectors: sorted.vectors, dim: n, range_dim: k, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_rank_matches_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 30;
        let u = Mat::from_fn(n, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let d = Mat::from_diag(&[C64::new(4.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.5, 0.0)]);
        let h = u.matmul(&d).matmul(&u.adjoint()).hermitian_part();
        let t = truncated_hermitian_eig(&h, 1e-10).unwrap();
        let full = hermitian_eig(&h).unwrap();
        assert_eq!(t.values.len(), 3);
        assert!(t.range_dim <= 4);
        let mut nz: Vec<f64> = full.values.iter().copied().filter(|x| x.abs() > 1e-8).collect();
        nz.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in t.values.iter().zip(&nz) {
            assert!((a - b).abs() < 1e-10 * h.frob_norm());
        }
        assert!(t.has_null_space());
        assert!(t.min_value() < 0.0);
    }

    #[test]
    fn zero_matrix() {
        let t = truncated_hermitian_eig(&Mat::<f64>::zeros(4, 4), 1e-10).unwrap();
        assert!(t.values.is_empty());
        assert_eq!(t.min_value(), 0.0);
    }

    #[test]
    fn full_rank_keeps_everything() {
        let h = Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let t = truncated_hermitian_eig(&h, 1e-10).unwrap();
        let full = real_check(&h);
        assert_eq!(t.values.len(), 3);
        for (a, b) in t.values.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!t.has_null_space());
    }

    fn real_check(h: &Mat<f64>) -> Vec<f64> {
        crate::linalg::real_sym_eig(h).unwrap().values
    }
}
