use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::{lex_cmp, normalize_phase, Mat, Scalar};
use crate::{Error, Result};

/// Eigendecomposition `H = V·diag(values)·Vᴴ` of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; near-ties (within `1e-12·‖H‖_F`) are
/// ordered by the lexicographic order of their phase-normalized eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEig<T> {
    pub values: Vec<f64>,
    pub vectors: Mat<T>,
}

impl<T: Scalar> HermitianEig<T> {
    pub fn vector(&self, k: usize) -> &[T] {
        self.vectors.col(k)
    }

    /// `V·diag(values)·Vᴴ`.
    pub fn reconstruct(&self) -> Mat<T> {
        let n = self.vectors.rows();
        let mut out = Mat::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.col(k);
            for j in 0..n {
                let s = v[j].conj().scale(lam);
                for i in 0..n {
                    out[(i, j)] += v[i] * s;
                }
            }
        }
        out
    }
}

/// Hermitian eigendecomposition by Householder tridiagonalization followed by
/// implicit QL iterations.
pub fn hermitian_eig<T: Scalar>(h: &Mat<T>) -> Result<HermitianEig<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.rows(), found: h.cols() });
    }
    let n = h.rows();
    if n == 0 {
        return Ok(HermitianEig { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let scale = h.frob_norm();
    let resid = h.hermitian_residual();
    if resid > 1e-10 * scale {
        return Err(Error::NotHermitian(resid / scale));
    }
    let mut a = h.hermitian_part();
    let (mut d, mut e, mut z) = tridiagonalize(&mut a);
    tql2(&mut d, &mut e, &mut z)?;
    Ok(sort_eig(d, z, scale))
}

/// Symmetric eigendecomposition of a real matrix.
pub fn real_sym_eig(a: &Mat<f64>) -> Result<HermitianEig<f64>> {
    hermitian_eig(a)
}

/// Reduces Hermitian `a` to a real symmetric tridiagonal matrix.
///
/// Returns the diagonal, the sub-diagonal (`e[k]` couples `k` and `k+1`,
/// `e[n-1] = 0`) and the unitary `Z` with `A = Z·T·Zᴴ`.
fn tridiagonalize<T: Scalar>(a: &mut Mat<T>) -> (Vec<f64>, Vec<f64>, Mat<T>) {
    let n = a.rows();
    let mut off: Vec<T> = vec![T::zero(); n];
    let mut reflectors: Vec<Option<(Vec<T>, f64)>> = Vec::with_capacity(n);
    let mut p = vec![T::zero(); n];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<T> = a.col(k)[k + 1..].to_vec();
        let tail: f64 = x[1..].iter().map(|v| v.abs2()).sum();
        if tail == 0.0 {
            off[k] = x[0];
            reflectors.push(None);
            continue;
        }
        let xnorm = (x[0].abs2() + tail).sqrt();
        let s = x[0].phase();
        let alpha = -(s.scale(xnorm));
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t.abs2()).sum();
        let tau = 2.0 / vnorm2;
        off[k] = alpha;

        // p = tau·A22·v
        let pk = &mut p[..m];
        for t in pk.iter_mut() {
            *t = T::zero();
        }
        for (jj, &vj) in v.iter().enumerate() {
            let col = &a.col(k + 1 + jj)[k + 1..];
            for (pi, &aij) in pk.iter_mut().zip(col) {
                *pi += aij * vj;
            }
        }
        for t in pk.iter_mut() {
            *t = t.scale(tau);
        }
        // w = p − (tau/2)(vᴴp)·v
        let vhp = super::dot_c(&v, pk);
        let kk = vhp.scale(0.5 * tau);
        let w: Vec<T> = pk.iter().zip(&v).map(|(&pi, &vi)| pi - kk * vi).collect();
        // A22 ← A22 − v·wᴴ − w·vᴴ
        for jj in 0..m {
            let wj = w[jj].conj();
            let vj = v[jj].conj();
            let col = &mut a.col_mut(k + 1 + jj)[k + 1..];
            for ((c, &vi), &wi) in col.iter_mut().zip(&v).zip(&w) {
                *c -= vi * wj + wi * vj;
            }
        }
        reflectors.push(Some((v, tau)));
    }

    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re()).collect();

    // Q = H_0·H_1·…, accumulated backwards.
    let mut q = Mat::<T>::identity(n);
    for k in (0..reflectors.len()).rev() {
        if let Some((v, tau)) = &reflectors[k] {
            for j in k + 1..n {
                let col = &mut q.col_mut(j)[k + 1..];
                let s = super::dot_c(v, col).scale(*tau);
                for (c, &vi) in col.iter_mut().zip(v) {
                    *c -= vi * s;
                }
            }
        }
    }

    // Diagonal unitary scaling makes the off-diagonal real and nonnegative.
    let mut e = vec![0.0; n];
    let mut phase = T::one();
    for k in 0..n.saturating_sub(1) {
        e[k] = off[k].abs();
        phase *= off[k].phase();
        let col = q.col_mut(k + 1);
        for c in col.iter_mut() {
            *c *= phase;
        }
    }
    (d, e, q)
}

/// Implicit QL on a symmetric tridiagonal matrix, rotating the columns of `z`.
fn tql2<T: Scalar>(d: &mut [f64], e: &mut [f64], z: &mut Mat<T>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let max_iter = 100 * n.max(1);
    let mut iter = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(Float::abs(d[l]) + Float::abs(e[l]));
        let mut m = l;
        while m < n {
            if Float::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::ConvergenceFailure("hermitian_eig"));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (zi, zi1) = z.two_cols_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = a.scale(s) + hb.scale(c);
                        *a = a.scale(c) - hb.scale(s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if Float::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

pub(crate) fn sort_eig<T: Scalar>(values: Vec<f64>, mut vectors: Mat<T>, scale: f64) -> HermitianEig<T> {
    let n = values.len();
    for k in 0..vectors.cols() {
        normalize_phase(vectors.col_mut(k));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    // Near-tied runs are ordered by eigenvector.
    let tie = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end - 1]] - values[order[end]] <= tie {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&a, &b| lex_cmp(vectors.col(b), vectors.col(a)));
        }
        start = end;
    }
    let rows = vectors.rows();
    let mut sorted = Mat::zeros(rows, order.len());
    for (dst, &src) in order.iter().enumerate() {
        sorted.col_mut(dst).copy_from_slice(vectors.col(src));
    }
    HermitianEig { values: order.iter().map(|&i| values[i]).collect(), vectors: sorted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(h: &Mat<C64>, eig: &HermitianEig<C64>) {
        let scale = h.frob_norm().max(1.0);
        let n = h.rows();
        for k in 0..n {
            let v = eig.vector(k);
            let hv = h.mul_vec(v);
            let r: f64 = hv.iter().zip(v).map(|(a, b)| (*a - b.scale(eig.values[k])).norm_sqr()).sum();
            assert!(r.sqrt() <= 1e-10 * scale, "residual {}", r.sqrt());
            for l in 0..n {
                let ip = crate::linalg::dot_c(v, eig.vector(l));
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() <= 1e-10);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_and_swap() {
        let d = Mat::from_diag(&[C64::new(1.0, 0.0), C64::new(3.0, 0.0)]);
        let e = hermitian_eig(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!((e.vector(0)[0]).norm() < 1e-15 && (e.vector(0)[1] - C64::new(1.0, 0.0)).norm() < 1e-15);

        let s = Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = real_sym_eig(&s).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn known_real_spectra() {
        let e = real_sym_eig(&Mat::from_rows(&[&[2.0, 5.0], &[5.0, 2.0]])).unwrap();
        assert!((e.values[0] - 7.0).abs() < 1e-13 && (e.values[1] + 3.0).abs() < 1e-13);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vector(0)[0] - r).abs() < 1e-13 && (e.vector(0)[1] - r).abs() < 1e-13);
        assert!((e.vector(1)[0] - r).abs() < 1e-13 && (e.vector(1)[1] + r).abs() < 1e-13);

        let e = real_sym_eig(&Mat::from_rows(&[&[-2.0, 1.0], &[1.0, -3.0]])).unwrap();
        let s5 = 5f64.sqrt();
        assert!((e.values[0] - (-5.0 + s5) / 2.0).abs() < 1e-13);
        assert!((e.values[1] - (-5.0 - s5) / 2.0).abs() < 1e-13);

        let e = real_sym_eig(&Mat::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(real_sym_eig(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 2, 3, 7, 16, 20] {
            let raw = Mat::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let h = raw.hermitian_part();
            let eig = hermitian_eig(&h).unwrap();
            check(&h, &eig);
            let err = h.sub(&eig.reconstruct()).frob_norm();
            assert!(err <= 1e-9 * h.frob_norm(), "n={n} err={err}");
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Two-fold degenerate eigenvalue plus a zero block.
        let mut h = Mat::<C64>::zeros(4, 4);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(1.0, 0.0);
        h[(0, 3)] = C64::new(0.0, 1e-3);
        h[(3, 0)] = C64::new(0.0, -1e-3);
        let eig = hermitian_eig(&h).unwrap();
        check(&h, &eig);
        let again = hermitian_eig(&h).unwrap();
        assert_eq!(eig.vectors, again.vectors);
    }
}
