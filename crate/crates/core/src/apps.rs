//! Generators for the BEC, Cauchy and QEP applications, and the overdamping
//! certificate.

use alloc::vec::Vec;
use num_traits::Float;

use crate::decompose::matrix_decomposition;
use crate::linalg::{real_sym_eig, sym_spectral_norm, Mat, C64};
use crate::{CpsTensor, Error, Result};

/// Unfolding `u·vᵀ + v·uᵀ` of the tensor `U⊗V + V⊗U`, scaled by `s`.
fn sym_outer(u: &Mat<f64>, v: &Mat<f64>, s: f64, m: &mut Mat<C64>) {
    let (u, v) = (u.as_slice(), v.as_slice());
    for (q, (&uq, &vq)) in u.iter().zip(v).enumerate() {
        let col = m.col_mut(q);
        for (p, x) in col.iter_mut().enumerate() {
            x.re += s * (u[p] * vq + v[p] * uq);
        }
    }
}

fn tridiag(n: usize, off: f64, diag: f64) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BecSystem {
    /// `(n+1)²·[tridiag(−1,2,−1) + diag(1², …, n²)]`.
    pub b: Mat<f64>,
    /// `B⊗I + I⊗B`.
    pub a: CpsTensor,
    /// `α·ℐ + A` with `ℐ` the unit-diagonal tensor.
    pub f: CpsTensor,
}

pub fn bec_build(n: usize, alpha: f64) -> Result<BecSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument("BEC discretization needs n >= 2"));
    }
    let h2 = ((n + 1) * (n + 1)) as f64;
    let b = Mat::from_fn(n, n, |i, j| {
        let base = tridiag(n, -1.0, 2.0)[(i, j)];
        let pot = if i == j { ((i + 1) * (i + 1)) as f64 } else { 0.0 };
        h2 * (base + pot)
    });
    let id = Mat::<f64>::identity(n);
    let mut m = Mat::zeros(n * n, n * n);
    sym_outer(&b, &id, 1.0, &mut m);
    let a = CpsTensor::from_unfolding(n, m)?;
    let f = if alpha == 0.0 { a.clone() } else { a.add(&CpsTensor::identity_diagonal(n).scaled(alpha))? };
    Ok(BecSystem { b, a, f })
}

/// `C_ijkl = 1/(c_i + c_j + c_k + c_l)`.
pub fn cauchy_build(c: &[f64]) -> Result<CpsTensor> {
    let n = c.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty generating vector"));
    }
    let mut m = Mat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let s = c[i] + c[j] + c[k] + c[l];
                    if s.abs() < 1e-12 {
                        return Err(Error::SingularGeneratingVector { quad: [i + 1, j + 1, k + 1, l + 1] });
                    }
                    m[(i + j * n, k + l * n)] = C64::new(1.0 / s, 0.0);
                }
            }
        }
    }
    CpsTensor::from_unfolding(n, m)
}

/// Quadratic eigenvalue problem `(λ²M + λC + K)x = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QepSystem {
    pub m: Mat<f64>,
    pub c: Mat<f64>,
    pub k: Mat<f64>,
}

impl QepSystem {
    pub fn new(m: Mat<f64>, c: Mat<f64>, k: Mat<f64>) -> Result<Self> {
        let n = m.rows();
        for (x, name) in [(&m, "M"), (&c, "C"), (&k, "K")] {
            if x.rows() != n || x.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.rows().max(x.cols()) });
            }
            if x.symmetric_residual() != 0.0 {
                return Err(Error::AsymmetricInput(name));
            }
        }
        Ok(QepSystem { m, c, k })
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }
}

/// Damped mass-spring chain: `M = I`, `C = τ·tridiag(−1,3,−1)`,
/// `K = μ·tridiag(−1,3,−1)`.
pub fn mass_spring(n: usize, tau: f64, mu: f64) -> Result<QepSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive"));
    }
    let t = tridiag(n, -1.0, 3.0);
    QepSystem::new(Mat::identity(n), t.scaled(tau), t.scaled(mu))
}

/// `C⊗C − 2(M⊗K + K⊗M)`, whose pairing form is `(xᴴCx)² − 4(xᴴMx)(xᴴKx)`.
pub fn qep_tensor(sys: &QepSystem) -> Result<CpsTensor> {
    let n = sys.n();
    let mut m = Mat::zeros(n * n, n * n);
    sym_outer(&sys.c, &sys.c, 0.5, &mut m);
    sym_outer(&sys.m, &sys.k, -2.0, &mut m);
    CpsTensor::from_unfolding(n, m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverdampingReport {
    /// Lower bound on `Σ λ_i (xᴴE_i x)²` over unit `x`.
    pub certified_bound: f64,
    /// `λ_min(C)² − 4‖M‖₂‖K‖₂`, when the system is known.
    pub naive_bound: Option<f64>,
    pub overdamped: bool,
    /// Matrix-decomposition weights, descending.
    pub lambdas: Vec<f64>,
}

/// Termwise bound from the matrix decomposition `A = Σ λ_i E_i⊗E_i`: a
/// positive term contributes `λ_i·dist(0, [λ_min(E_i), λ_max(E_i)])²`, a
/// negative one `λ_i·‖E_i‖₂²`.
pub fn overdamping_bound(a: &CpsTensor, sys: Option<&QepSystem>) -> Result<OverdampingReport> {
    if !a.is_real() {
        return Err(Error::NotRealTensor);
    }
    let dec = matrix_decomposition(a, crate::DEFAULT_RANK_TOL)?;
    let mut bound = 0.0;
    for t in &dec.terms {
        let ev = real_sym_eig(&t.e.re())?.values;
        let (hi, lo) = (ev[0], ev[ev.len() - 1]);
        bound += if t.lambda > 0.0 {
            let d = if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                hi
            } else {
                0.0
            };
            t.lambda * d * d
        } else {
            t.lambda * Float::powi(hi.abs().max(lo.abs()), 2)
        };
    }
    let naive_bound = match sys {
        Some(s) => {
            let ev = real_sym_eig(&s.c)?.values;
            let cmin = ev[ev.len() - 1];
            Some(cmin * cmin - 4.0 * sym_spectral_norm(&s.m)? * sym_spectral_norm(&s.k)?)
        }
        None => None,
    };
    Ok(OverdampingReport { certified_bound: bound, naive_bound, overdamped: bound > 0.0, lambdas: dec.lambdas() })
}
