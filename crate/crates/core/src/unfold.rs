//! Square unfolding and its inverse on vectors.

use alloc::vec::Vec;

use crate::linalg::{Mat, Scalar, C64};
use crate::{CpsTensor, Error, Result};

/// `M(A)` with `M[i + j·n, k + l·n] = A[i,j,k,l]` (0-based).
pub fn square_unfold(a: &CpsTensor) -> Mat<C64> {
    a.unfolded().clone()
}

/// Column-stacking `vec(X)`.
pub fn vec_mat<T: Scalar>(x: &Mat<T>) -> Vec<T> {
    x.as_slice().to_vec()
}

/// Inverse of [`vec_mat`]: `X[i, j] = v[i + j·n]`.
pub fn fold<T: Scalar>(v: &[T], n: usize) -> Result<Mat<T>> {
    if v.len() != n * n {
        return Err(Error::LengthMismatch { n, found: v.len() });
    }
    Ok(Mat::from_col_major(n, n, v.to_vec()))
}

/// Reshuffled unfolding `M(Â)` with `Â_ijkl = A_ikjl`. Complex symmetric for
/// any CPS tensor.
pub fn reshuffled_unfold(a: &CpsTensor) -> Mat<C64> {
    let n = a.n();
    let mut m = Mat::zeros(n * n, n * n);
    for l in 0..n {
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    m[(i + j * n, k + l * n)] = a.at(i, k, j, l);
                }
            }
        }
    }
    m
}
