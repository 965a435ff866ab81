//! Dense matrix kernels: Hermitian eigendecomposition, one-sided Jacobi SVD,
//! Takagi factorization and a low-rank spectral route for large unfoldings.

mod eig;
mod range;
mod svd;
mod takagi;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, One, Zero};

pub use eig::{hermitian_eig, real_sym_eig, HermitianEig};
pub use range::{truncated_hermitian_eig, TruncatedEig};
pub use svd::{numerical_rank, singular_values, svd, Svd};
pub use takagi::{takagi, TakagiFactorization};

pub type C64 = Complex<f64>;

/// Field scalar used by the generic kernels: `f64` or `Complex<f64>`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    const IS_COMPLEX: bool;

    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs2(self) -> f64;
    fn from_re(x: f64) -> Self;
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;

    fn abs(self) -> f64 {
        self.abs2().sqrt()
    }

    fn scale(self, s: f64) -> Self {
        self * Self::from_re(s)
    }

    /// `self / |self|`, or one for zero.
    fn phase(self) -> Self {
        let a = self.abs();
        if a == 0.0 {
            Self::one()
        } else {
            self.scale(1.0 / a)
        }
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }
    #[inline]
    fn from_c64(z: C64) -> Self {
        z.re
    }
    #[inline]
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    #[inline]
    fn abs(self) -> f64 {
        Float::abs(self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for C64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    #[inline]
    fn from_c64(z: C64) -> Self {
        z
    }
    #[inline]
    fn to_c64(self) -> C64 {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        C64::new(self.re * s, self.im * s)
    }
}

/// Dense column-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds from row-major nested data. Panics on ragged input.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    /// Mutable access to two distinct columns.
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [T], &mut [T]) {
        assert!(a != b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            let (x, y) = (&mut hi[..r], &mut lo[b * r..(b + 1) * r]);
            (x, y)
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x.abs2()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        let n = self.rows.min(self.cols);
        (0..n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let oc = j * self.rows;
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == T::zero() {
                    continue;
                }
                let a = self.col(k);
                for (o, &x) in out.data[oc..oc + self.rows].iter_mut().zip(a) {
                    *o += x * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![T::zero(); self.rows];
        for (j, &b) in v.iter().enumerate() {
            if b == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * b;
            }
        }
        out
    }

    /// `selfᴴ · v`.
    pub fn adjoint_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "adjoint_mul_vec dimension mismatch");
        (0..self.cols).map(|j| dot_c(self.col(j), v)).collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `‖A − Aᴴ‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.rows;
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += (self[(i, j)] - self[(j, i)].conj()).abs2();
            }
        }
        s.sqrt()
    }

    /// `‖A − Aᵀ‖_F`.
    pub fn symmetric_residual(&self) -> f64 {
        let n = self.rows;
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += (self[(i, j)] - self[(j, i)]).abs2();
            }
        }
        s.sqrt()
    }

    /// `(A + Aᴴ)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(0.5))
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]).scale(0.5))
    }

    pub fn to_c64(&self) -> Mat<C64> {
        self.map(|x| x.to_c64())
    }
}

impl Mat<C64> {
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn re(&self) -> Mat<f64> {
        self.map(|z| z.re)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Conjugated dot product `Σ conj(a_i)·b_i`.
#[inline]
pub fn dot_c<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}

/// Unconjugated dot product `Σ a_i·b_i`.
#[inline]
pub fn dot_u<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

/// Rotates `v` so that its first component with modulus above `1e-10·‖v‖` is
/// positive real. Leaves zero vectors alone.
pub fn normalize_phase<T: Scalar>(v: &mut [T]) {
    let nv = norm(v);
    if nv == 0.0 {
        return;
    }
    if let Some(&pivot) = v.iter().find(|x| x.abs() > 1e-10 * nv) {
        let rot = pivot.phase().conj();
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Lexicographic comparison on (re, im) of each component.
pub(crate) fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re().total_cmp(&y.re()).then(x.im().total_cmp(&y.im()));
        if o != core::cmp::Ordering::Equal {
            return o;
        }
    }
    core::cmp::Ordering::Equal
}

/// Spectral norm of a real symmetric matrix.
pub fn sym_spectral_norm(a: &Mat<f64>) -> crate::Result<f64> {
    let e = real_sym_eig(a)?;
    Ok(e.values.iter().fold(0.0f64, |m, &x| m.max(Float::abs(x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_adjoint() {
        let a = Mat::from_rows(&[&[C64::new(1.0, 1.0), C64::new(2.0, 0.0)], &[C64::new(0.0, -1.0), C64::new(3.0, 0.5)]]);
        let i = Mat::<C64>::identity(2);
        assert_eq!(a.matmul(&i), a);
        let ah = a.adjoint();
        assert_eq!(ah[(0, 1)], C64::new(0.0, 1.0));
        let g = ah.matmul(&a);
        assert!(g.hermitian_residual() < 1e-14);
    }

    #[test]
    fn phase_normalization_makes_pivot_positive() {
        let mut v = [C64::new(0.0, 0.0), C64::new(0.0, -2.0), C64::new(1.0, 0.0)];
        normalize_phase(&mut v);
        assert!((v[1] - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((v[2] - C64::new(0.0, 1.0)).norm() < 1e-15);
        let mut r = [-3.0, 1.0];
        normalize_phase(&mut r);
        assert_eq!(r, [3.0, -1.0]);
    }

    #[test]
    fn two_cols_mut_both_orders() {
        let mut m = Mat::<f64>::from_fn(2, 3, |i, j| (i + 10 * j) as f64);
        let (a, b) = m.two_cols_mut(2, 0);
        assert_eq!(a, &[20.0, 21.0]);
        assert_eq!(b, &[0.0, 1.0]);
    }
}
