//! Seeded random fixtures: generic CPS tensors, orthonormal symmetric
//! matrices and low matrix-rank tensors.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::decompose::{MatrixDecomposition, MatrixTerm};
use crate::linalg::{dot_c, Mat, C64};
use crate::{CpsTensor, Error, Result};

fn gauss<R: Rng + ?Sized>(rng: &mut R, complex: bool) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
    C64::new(re, im)
}

/// Gaussian vector normalized to unit length.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, complex: bool) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gauss(rng, complex)).collect();
        let nv = crate::linalg::norm(&v);
        if nv > 1e-8 {
            return v.into_iter().map(|z| z / nv).collect();
        }
    }
}

/// Projection of a Gaussian `n²×n²` array onto the CPS subspace.
pub fn random_cps<R: Rng + ?Sized>(rng: &mut R, n: usize, complex: bool) -> CpsTensor {
    let m = Mat::from_fn(n * n, n * n, |_, _| gauss(rng, complex));
    CpsTensor::from_raw_unfolding(n, m)
}

/// `r` symmetric `n×n` matrices, orthonormal in the Frobenius inner product.
pub fn orthonormal_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize, complex: bool) -> Result<Vec<Mat<C64>>> {
    if r > n * (n + 1) / 2 {
        return Err(Error::InvalidArgument("more matrices than the symmetric dimension"));
    }
    let mut out: Vec<Mat<C64>> = Vec::with_capacity(r);
    while out.len() < r {
        let raw = Mat::from_fn(n, n, |_, _| gauss(rng, complex)).symmetric_part();
        let mut v = raw.into_vec();
        // Two Gram-Schmidt passes.
        for _ in 0..2 {
            for e in &out {
                let c = dot_c(e.as_slice(), &v);
                for (x, &y) in v.iter_mut().zip(e.as_slice()) {
                    *x -= y * c;
                }
            }
        }
        let nv = crate::linalg::norm(&v);
        if nv < 1e-6 {
            continue;
        }
        let e = Mat::from_col_major(n, n, v.into_iter().map(|z| z / nv).collect()).symmetric_part();
        out.push(e);
    }
    Ok(out)
}

/// `Σ λ_i E_i⊗Ē_i` with random orthonormal symmetric `E_i`.
pub fn random_low_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, lambdas: &[f64], complex: bool) -> Result<CpsTensor> {
    let es = orthonormal_symmetric(rng, n, lambdas.len(), complex)?;
    let terms = lambdas.iter().zip(es).map(|(&lambda, e)| MatrixTerm { lambda, e }).collect();
    MatrixDecomposition { n, terms }.assemble()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &complex in &[false, true] {
            let es = orthonormal_symmetric(&mut rng, 3, 6, complex).unwrap();
            for (a, x) in es.iter().enumerate() {
                assert!(x.symmetric_residual() == 0.0);
                assert_eq!(x.is_real(), !complex);
                for (b, y) in es.iter().enumerate() {
                    let ip = dot_c(x.as_slice(), y.as_slice());
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
            assert!(orthonormal_symmetric(&mut rng, 3, 7, complex).is_err());
        }
    }

    #[test]
    fn seeded_determinism() {
        let a = random_cps(&mut ChaCha8Rng::seed_from_u64(9), 3, true);
        let b = random_cps(&mut ChaCha8Rng::seed_from_u64(9), 3, true);
        assert_eq!(a, b);
        assert!(random_cps(&mut ChaCha8Rng::seed_from_u64(9), 3, false).is_real());
    }
}
