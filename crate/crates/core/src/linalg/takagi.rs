use alloc::vec::Vec;

use num_traits::Float;

use super::{real_sym_eig, svd, Mat, C64};
use crate::{Error, Result};

/// Takagi factorization `S = Σ σ_k·u_k·u_kᵀ` of a complex symmetric matrix.
#[derive(Clone, Debug)]
pub struct TakagiFactorization {
    /// Positive singular values, descending.
    pub sigmas: Vec<f64>,
    /// Orthonormal columns `u_k`.
    pub vectors: Mat<C64>,
}

impl TakagiFactorization {
    pub fn vector(&self, k: usize) -> &[C64] {
        self.vectors.col(k)
    }

    pub fn reconstruct(&self) -> Mat<C64> {
        let n = self.vectors.rows();
        let mut out = Mat::zeros(n, n);
        for (k, &s) in self.sigmas.iter().enumerate() {
            let u = self.vectors.col(k);
            for j in 0..n {
                let uj = u[j] * s;
                for i in 0..n {
                    out[(i, j)] += u[i] * uj;
                }
            }
        }
        out
    }
}

const CLUSTER_GAP: f64 = 1e-8;
const ZERO_SIGMA: f64 = 1e-13;

/// Takagi factorization via the SVD `S = U·Σ·Vᴴ`.
///
/// `G = Uᴴ·S·conj(U)` is symmetric and block diagonal over clusters of equal
/// singular values, each block being `σ` times a symmetric unitary matrix.
/// Such a block has commuting real and imaginary parts, so a real orthogonal
/// `Q` diagonalizes it to `diag(σ·e^{iφ})`, and `U·Q·diag(e^{iφ/2})` is the
/// Takagi basis. For distinct singular values this reduces to a phase fix.
pub fn takagi(s: &Mat<C64>) -> Result<TakagiFactorization> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch { expected: s.rows(), found: s.cols() });
    }
    let n = s.rows();
    let fro = s.frob_norm();
    if fro == 0.0 || n == 0 {
        return Ok(TakagiFactorization { sigmas: Vec::new(), vectors: Mat::zeros(n, 0) });
    }
    let resid = s.symmetric_residual();
    if resid > 1e-10 * fro {
        return Err(Error::NotSymmetric(resid / fro));
    }
    let s = s.symmetric_part();
    let dec = svd(&s)?;
    let top = dec.sigma[0];
    let r = dec.sigma.iter().filter(|&&x| x > ZERO_SIGMA * top).count();
    let ur = Mat::from_fn(n, r, |i, j| dec.u[(i, j)]);
    let g = ur.adjoint().matmul(&s).matmul(&ur.conj());

    let mut sigmas = Vec::with_capacity(r);
    let mut vectors = Mat::<C64>::zeros(n, r);
    let mut start = 0;
    while start < r {
        let mut end = start + 1;
        while end < r && dec.sigma[end - 1] - dec.sigma[end] <= CLUSTER_GAP * dec.sigma[start] {
            end += 1;
        }
        let size = end - start;
        let block = Mat::from_fn(size, size, |i, j| g[(start + i, start + j)]);
        let (q, diag) = diagonalize_symmetric_unitary(&block)?;
        for k in 0..size {
            let d = diag[k];
            let half = C64::from_polar(1.0, d.arg() / 2.0);
            let col = vectors.col_mut(start + k);
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..size {
                    acc += ur[(i, start + t)] * q[(t, k)];
                }
                col[i] = acc * half;
            }
            sigmas.push(d.norm());
        }
        start = end;
    }

    // Sort by σ, then fix the residual ±1 ambiguity of each vector.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigmas[b].total_cmp(&sigmas[a]).then(a.cmp(&b)));
    let mut out = Mat::<C64>::zeros(n, r);
    for (dst, &src) in order.iter().enumerate() {
        let col = out.col_mut(dst);
        col.copy_from_slice(vectors.col(src));
        canonical_sign(col);
    }
    Ok(TakagiFactorization { sigmas: order.iter().map(|&i| sigmas[i]).collect(), vectors: out })
}

/// Flips `u` so its first significant component has positive real part (or,
/// if purely imaginary, positive imaginary part). `uuᵀ` is unchanged.
fn canonical_sign(u: &mut [C64]) {
    let nu = super::norm(u);
    for z in u.iter() {
        if z.norm() > 1e-10 * nu {
            let neg = if Float::abs(z.re) > 1e-12 * nu { z.re < 0.0 } else { z.im < 0.0 };
            if neg {
                for w in u.iter_mut() {
                    *w = -*w;
                }
            }
            return;
        }
    }
}

/// For a symmetric (scaled) unitary block `B`, finds real orthogonal `Q` with
/// `QᵀBQ` diagonal; returns `Q` and the diagonal.
fn diagonalize_symmetric_unitary(b: &Mat<C64>) -> Result<(Mat<f64>, Vec<C64>)> {
    let k = b.rows();
    if k == 1 {
        return Ok((Mat::identity(1), alloc::vec![b[(0, 0)]]));
    }
    let bs = b.symmetric_part();
    let x = bs.map(|z| z.re);
    let y = bs.map(|z| z.im);
    let scale = bs.frob_norm();
    let mut best: Option<(f64, Mat<f64>)> = None;
    for &t in &[0.754_877_666_246_692_7, 1.324_717_957_244_746, -0.569_840_290_998_053_3] {
        let comb = x.add(&y.scaled(t));
        let q = real_sym_eig(&comb)?.vectors;
        let d = q.transpose().map(|v| C64::new(v, 0.0)).matmul(&bs).matmul(&q.to_c64());
        let mut off = 0.0;
        for j in 0..k {
            for i in 0..k {
                if i != j {
                    off += d[(i, j)].norm_sqr();
                }
            }
        }
        let off = off.sqrt();
        if off <= 1e-9 * scale {
            let diag = (0..k).map(|i| d[(i, i)]).collect();
            return Ok((q, diag));
        }
        if best.as_ref().map_or(true, |(o, _)| off < *o) {
            best = Some((off, q));
        }
    }
    let (_, q) = best.expect("at least one attempt");
    let d = q.transpose().to_c64().matmul(&bs).matmul(&q.to_c64());
    Ok((q, (0..k).map(|i| d[(i, i)]).collect()))
}
