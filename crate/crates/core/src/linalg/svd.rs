use alloc::vec::Vec;

use num_traits::Float;

use super::{dot_c, Mat, Scalar};
use crate::{Error, Result};

/// Thin singular value decomposition `A = U·diag(sigma)·Vᴴ`.
///
/// `sigma` is sorted descending. Columns of `u` belonging to zero singular
/// values are zero.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Mat<T>,
    pub sigma: Vec<f64>,
    pub v: Mat<T>,
}

/// One-sided (Hestenes) Jacobi SVD. Works on the adjoint when `rows < cols`.
pub fn svd<T: Scalar>(a: &Mat<T>) -> Result<Svd<T>> {
    if a.rows() < a.cols() {
        let s = svd(&a.adjoint())?;
        return Ok(Svd { u: s.v, sigma: s.sigma, v: s.u });
    }
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = Mat::<T>::identity(n);
    let eps = 4.0 * f64::EPSILON;
    let max_sweeps = 100 * n.max(1);
    // Columns at round-off level relative to the whole matrix are left alone.
    let floor = (f64::EPSILON * a.frob_norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.col(p).iter().map(|x| x.abs2()).sum();
                let beta: f64 = w.col(q).iter().map(|x| x.abs2()).sum();
                let gamma = dot_c(w.col(p), w.col(q));
                let g = gamma.abs();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let e = gamma.phase().conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (Float::abs(zeta) + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, e);
                rotate(&mut v, p, q, c, s, e);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure("svd"));
    }

    let mut sig: Vec<(f64, usize)> = (0..n).map(|j| (super::norm(w.col(j)), j)).collect();
    sig.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut u = Mat::<T>::zeros(m, n);
    let mut vv = Mat::<T>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &(s, src)) in sig.iter().enumerate() {
        if s > 0.0 {
            for (o, &x) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *o = x.scale(1.0 / s);
            }
        }
        vv.col_mut(dst).copy_from_slice(v.col(src));
        sigma.push(s);
    }
    Ok(Svd { u, sigma, v: vv })
}

/// Columns `(p, q) ← (c·p − s·e·q, s·p + c·e·q)`.
#[inline]
fn rotate<T: Scalar>(m: &mut Mat<T>, p: usize, q: usize, c: f64, s: f64, e: T) {
    let (cp, cq) = m.two_cols_mut(p, q);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let eb = e * *b;
        let na = a.scale(c) - eb.scale(s);
        let nb = a.scale(s) + eb.scale(c);
        *a = na;
        *b = nb;
    }
}

/// Singular values, descending.
pub fn singular_values<T: Scalar>(a: &Mat<T>) -> Result<Vec<f64>> {
    Ok(svd(a)?.sigma)
}

/// Numerical rank: number of singular values above `tol·σ_max`.
pub fn numerical_rank<T: Scalar>(a: &Mat<T>, tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > tol * top).count())
}
