//! The CPS tensor type and its basic operations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::{Mat, C64};
use crate::{Error, Result};

/// 1-based index quadruple `[i, j, k, l]`.
pub type Quad = [usize; 4];

/// How [`CpsTensor::from_entries`] treats the supplied entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryMode {
    /// Entries must already be CPS-consistent; missing orbit members are
    /// filled in.
    Validate,
    /// Entries form a raw tensor which is projected onto the CPS subspace.
    Symmetrize,
}

/// Absolute per-entry tolerance of [`SymmetryMode::Validate`].
pub const VALIDATE_TOL: f64 = 1e-12;

/// Relative residual above which an assembled unfolding is rejected as not CPS.
pub const ASSEMBLE_TOL: f64 = 1e-9;

/// Fourth-order conjugate partial-symmetric tensor over `ℂⁿ`.
///
/// Stored as its square unfolding `M` with `M[i + j·n, k + l·n] = A[i,j,k,l]`
/// (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct CpsTensor {
    n: usize,
    unfolded: Mat<C64>,
    is_real: bool,
}

/// Orbit of a 0-based quadruple under the symmetry group; the flag marks
/// elements that conjugate the value.
#[inline]
pub(crate) fn orbit([i, j, k, l]: [usize; 4]) -> [([usize; 4], bool); 8] {
    [
        ([i, j, k, l], false),
        ([j, i, k, l], false),
        ([i, j, l, k], false),
        ([j, i, l, k], false),
        ([k, l, i, j], true),
        ([l, k, i, j], true),
        ([k, l, j, i], true),
        ([l, k, j, i], true),
    ]
}

/// Canonical orbit representative: `i ≤ j`, `k ≤ l`, `(i,j) ≤ (k,l)`.
#[inline]
pub(crate) fn canonical([i, j, k, l]: [usize; 4]) -> [usize; 4] {
    let p = if i <= j { (i, j) } else { (j, i) };
    let q = if k <= l { (k, l) } else { (l, k) };
    let (a, b) = if p <= q { (p, q) } else { (q, p) };
    [a.0, a.1, b.0, b.1]
}

/// Visits every canonical 0-based representative.
pub(crate) fn for_each_canonical(n: usize, mut f: impl FnMut([usize; 4])) {
    for i in 0..n {
        for j in i..n {
            for k in i..n {
                let l0 = if k == i { j } else { k };
                for l in l0..n {
                    f([i, j, k, l]);
                }
            }
        }
    }
}

#[inline]
fn cj(z: C64, conj: bool) -> C64 {
    if conj {
        z.conj()
    } else {
        z
    }
}

impl CpsTensor {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        CpsTensor { n, unfolded: Mat::zeros(n * n, n * n), is_real: true }
    }

    /// Builds a tensor from 1-based entries. Repeated quadruples overwrite.
    pub fn from_entries(n: usize, entries: &[(Quad, C64)], mode: SymmetryMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        let mut raw: BTreeMap<[usize; 4], C64> = BTreeMap::new();
        for &(q, v) in entries {
            for &x in &q {
                if x == 0 || x > n {
                    return Err(Error::IndexOutOfRange { index: x, n });
                }
            }
            raw.insert([q[0] - 1, q[1] - 1, q[2] - 1, q[3] - 1], v);
        }
        match mode {
            SymmetryMode::Symmetrize => {
                let mut m = Mat::zeros(n * n, n * n);
                for (&[i, j, k, l], &v) in &raw {
                    m[(i + j * n, k + l * n)] = v;
                }
                Ok(Self::from_raw_unfolding(n, m))
            }
            SymmetryMode::Validate => Self::validated(n, &raw),
        }
    }

    fn validated(n: usize, raw: &BTreeMap<[usize; 4], C64>) -> Result<Self> {
        // Implied representative value per orbit, plus worst disagreement.
        let mut reps: BTreeMap<[usize; 4], C64> = BTreeMap::new();
        let mut worst: Option<([usize; 4], f64)> = None;
        let mut note = |q: [usize; 4], r: f64| {
            if r > VALIDATE_TOL && worst.map_or(true, |(_, w)| r > w) {
                worst = Some((q, r));
            }
        };
        for (&q, &v) in raw {
            let rep = canonical(q);
            let conj = orbit(rep).iter().find(|(p, _)| *p == q).map(|&(_, c)| c).unwrap_or(false);
            let implied = cj(v, conj);
            // Stabilizer elements that conjugate force a real value.
            if orbit(rep).iter().any(|&(p, c)| c && p == rep) {
                note(q, implied.im.abs());
            }
            match reps.get(&rep) {
                Some(&prev) => note(q, (prev - implied).norm()),
                None => {
                    reps.insert(rep, implied);
                }
            }
        }
        if let Some((q, residual)) = worst {
            return Err(Error::SymmetryViolation { quad: [q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1], residual });
        }
        let mut m = Mat::zeros(n * n, n * n);
        for (&rep, &v) in &reps {
            let v = if orbit(rep).iter().any(|&(p, c)| c && p == rep) { C64::new(v.re, 0.0) } else { v };
            write_orbit(&mut m, n, rep, v);
        }
        Ok(Self::wrap(n, m))
    }

    /// Orthogonal projection of an arbitrary `n²×n²` unfolding onto the CPS
    /// subspace.
    pub fn from_raw_unfolding(n: usize, mut m: Mat<C64>) -> Self {
        assert_eq!(m.rows(), n * n);
        assert_eq!(m.cols(), n * n);
        project(&mut m, n);
        Self::wrap(n, m)
    }

    /// Projects `m` and rejects it if the projection moved it by more than
    /// [`ASSEMBLE_TOL`] relative to its norm.
    pub fn from_unfolding(n: usize, m: Mat<C64>) -> Result<Self> {
        if m.rows() != n * n || m.cols() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: m.rows() });
        }
        let before = m.clone();
        let t = Self::from_raw_unfolding(n, m);
        let scale = before.frob_norm();
        let (quad, resid) = worst_difference(&before, &t.unfolded, n);
        if resid > ASSEMBLE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SymmetryViolation { quad, residual: resid / scale });
        }
        Ok(t)
    }

    fn wrap(n: usize, m: Mat<C64>) -> Self {
        let is_real = m.is_real();
        CpsTensor { n, unfolded: m, is_real }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// The `n²×n²` Hermitian square unfolding.
    pub fn unfolded(&self) -> &Mat<C64> {
        &self.unfolded
    }

    /// Real part of the unfolding, for real tensors.
    pub fn unfolded_real(&self) -> Option<Mat<f64>> {
        self.is_real.then(|| self.unfolded.re())
    }

    /// Entry at a 1-based quadruple.
    pub fn entry(&self, [i, j, k, l]: Quad) -> Result<C64> {
        let n = self.n;
        for &x in &[i, j, k, l] {
            if x == 0 || x > n {
                return Err(Error::IndexOutOfRange { index: x, n });
            }
        }
        Ok(self.unfolded[(i - 1 + (j - 1) * n, k - 1 + (l - 1) * n)])
    }

    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.unfolded[(i + j * self.n, k + l * self.n)]
    }

    /// Nonzero canonical representatives, 1-based, in lexicographic order.
    pub fn canonical_entries(&self) -> Vec<(Quad, C64)> {
        let mut out = Vec::new();
        for_each_canonical(self.n, |[i, j, k, l]| {
            let v = self.at(i, j, k, l);
            if v != C64::new(0.0, 0.0) {
                out.push(([i + 1, j + 1, k + 1, l + 1], v));
            }
        });
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// `Σ A_ijkl·conj(B_ijkl)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dim(other)?;
        Ok(self
            .unfolded
            .as_slice()
            .iter()
            .zip(other.unfolded.as_slice())
            .fold(C64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b.conj()))
    }

    pub fn frob_norm(&self) -> f64 {
        self.unfolded.frob_norm()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::wrap(self.n, self.unfolded.add(&other.unfolded)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::wrap(self.n, self.unfolded.sub(&other.unfolded)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::wrap(self.n, self.unfolded.map(|z| z * s))
    }

    fn check_vec(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: len });
        }
        Ok(())
    }

    fn check_mat(&self, x: &Mat<C64>) -> Result<()> {
        if x.rows() != self.n || x.cols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: if x.rows() != self.n { x.rows() } else { x.cols() } });
        }
        Ok(())
    }

    /// Unreduced sum `Σ A_ijkl x_i x_j conj(x_k) conj(x_l)`.
    pub fn quartic_form_raw(&self, x: &[C64]) -> Result<C64> {
        self.check_vec(x.len())?;
        let n = self.n;
        let y: Vec<C64> = (0..n * n).map(|p| x[p % n] * x[p / n]).collect();
        let yc: Vec<C64> = y.iter().map(|z| z.conj()).collect();
        let my = self.unfolded.mul_vec(&yc);
        Ok(y.iter().zip(&my).fold(C64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b))
    }

    /// The real quartic conjugate form `A(x, x, x̄, x̄)`.
    pub fn quartic_form(&self, x: &[C64]) -> Result<f64> {
        Ok(self.quartic_form_raw(x)?.re)
    }

    /// `Σ A_ijkl X_ij conj(X_kl)`.
    pub fn qform_matrix(&self, x: &Mat<C64>) -> Result<f64> {
        self.check_mat(x)?;
        let v = x.as_slice();
        let vc: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        let mv = self.unfolded.mul_vec(&vc);
        Ok(v.iter().zip(&mv).fold(C64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b).re)
    }

    /// Hermitian pairing `Σ A_ijkl x_i conj(x_j) x_k conj(x_l)`, i.e.
    /// `qform_matrix(A, x·xᴴ)`.
    pub fn pairing_form(&self, x: &[C64]) -> Result<f64> {
        self.check_vec(x.len())?;
        let n = self.n;
        let xx = Mat::from_fn(n, n, |i, j| x[i] * x[j].conj());
        self.qform_matrix(&xx)
    }

    /// Mode-(3,4) contraction `(A·X)_ij = Σ_kl A_ijkl X_kl`.
    pub fn contract22(&self, x: &Mat<C64>) -> Result<Mat<C64>> {
        self.check_mat(x)?;
        let n = self.n;
        Ok(Mat::from_col_major(n, n, self.unfolded.mul_vec(x.as_slice())))
    }

    /// Basis tensor `ℰ^{ijkl}(c)` (1-based, `i ≤ j`, `k ≤ l`).
    pub fn basis(n: usize, [i, j, k, l]: Quad, c: C64) -> Result<Self> {
        for &x in &[i, j, k, l] {
            if x == 0 || x > n {
                return Err(Error::IndexOutOfRange { index: x, n });
            }
        }
        if i > j || k > l {
            return Err(Error::NonCanonicalIndices { quad: [i, j, k, l] });
        }
        if (i, j) == (k, l) && c.im != 0.0 {
            return Err(Error::SymmetryViolation { quad: [i, j, k, l], residual: c.im.abs() });
        }
        let q = [i - 1, j - 1, k - 1, l - 1];
        let mut m = Mat::zeros(n * n, n * n);
        write_orbit(&mut m, n, q, c);
        Ok(Self::wrap(n, m))
    }

    /// The canonical basis of `(n(n+1)/2)²` tensors: `ℰ^{ijij}(1)` on the
    /// diagonal pairs and `ℰ^{ijkl}(1)`, `ℰ^{ijkl}(i)` for distinct pairs.
    pub fn cps_basis(n: usize) -> Vec<Self> {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
        let mut out = Vec::with_capacity(pairs.len() * pairs.len());
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[a..] {
                let q = [i, j, k, l];
                out.push(Self::basis(n, q, C64::new(1.0, 0.0)).expect("canonical"));
                if (i, j) != (k, l) {
                    out.push(Self::basis(n, q, C64::new(0.0, 1.0)).expect("canonical"));
                }
            }
        }
        out
    }

    /// Tensor with unit diagonal `A_iiii = 1`.
    pub fn identity_diagonal(n: usize) -> Self {
        let mut m = Mat::zeros(n * n, n * n);
        for i in 0..n {
            let p = i + i * n;
            m[(p, p)] = C64::new(1.0, 0.0);
        }
        Self::wrap(n, m)
    }
}

/// Writes `v` and its conjugate partners over the orbit of `rep`.
fn write_orbit(m: &mut Mat<C64>, n: usize, rep: [usize; 4], v: C64) {
    for ([a, b, c, d], conj) in orbit(rep) {
        m[(a + b * n, c + d * n)] = cj(v, conj);
    }
}

/// Group average over every orbit, in place.
fn project(m: &mut Mat<C64>, n: usize) {
    for_each_canonical(n, |rep| {
        let mut acc = C64::new(0.0, 0.0);
        for ([a, b, c, d], conj) in orbit(rep) {
            acc += cj(m[(a + b * n, c + d * n)], conj);
        }
        write_orbit(m, n, rep, acc * 0.125);
    });
}

fn worst_difference(a: &Mat<C64>, b: &Mat<C64>, n: usize) -> (Quad, f64) {
    let mut worst = ([1, 1, 1, 1], 0.0f64);
    let mut total = 0.0;
    for q in 0..n * n {
        for p in 0..n * n {
            let d = (a[(p, q)] - b[(p, q)]).norm_sqr();
            total += d;
            if d > worst.1 {
                worst = ([p % n + 1, p / n + 1, q % n + 1, q / n + 1], d);
            }
        }
    }
    (worst.0, Float::sqrt(total))
}
