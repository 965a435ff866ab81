//! Low matrix-rank completion by nuclear-norm minimization with fixed-point
//! continuation.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decompose::matrix_rank;
use crate::linalg::{hermitian_eig, real_sym_eig, Mat, C64};
use crate::tensor::{for_each_canonical, orbit};
use crate::{CpsTensor, Error, Quad, Result};

/// Observed positions, closed under the CPS symmetry group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMask {
    n: usize,
    /// Indexed by unfolding position `p + q·n²`, `p = i + j·n`, `q = k + l·n`.
    member: Vec<bool>,
}

fn pos(n: usize, [i, j, k, l]: [usize; 4]) -> usize {
    (i + j * n) + (k + l * n) * n * n
}

fn zero_based(n: usize, q: Quad) -> Result<[usize; 4]> {
    let mut out = [0; 4];
    for (o, &x) in out.iter_mut().zip(&q) {
        if x == 0 || x > n {
            return Err(Error::IndexOutOfRange { index: x, n });
        }
        *o = x - 1;
    }
    Ok(out)
}

impl SampleMask {
    pub fn full(n: usize) -> Self {
        SampleMask { n, member: vec![true; n.pow(4)] }
    }

    /// Mask of the given (1-based) quads and everything in their orbits.
    pub fn from_quads_closed(n: usize, quads: &[Quad]) -> Result<Self> {
        let mut m = SampleMask { n, member: vec![false; n.pow(4)] };
        for &q in quads {
            m.insert_orbit(zero_based(n, q)?);
        }
        Ok(m)
    }

    /// Mask of exactly the given quads; fails unless they are orbit-closed.
    pub fn from_quads(n: usize, quads: &[Quad]) -> Result<Self> {
        let mut m = SampleMask { n, member: vec![false; n.pow(4)] };
        let mut zb = Vec::with_capacity(quads.len());
        for &q in quads {
            let z = zero_based(n, q)?;
            m.member[pos(n, z)] = true;
            zb.push((q, z));
        }
        for (q, z) in zb {
            if orbit(z).iter().any(|(o, _)| !m.member[pos(n, *o)]) {
                return Err(Error::MaskSymmetryViolation { quad: q });
            }
        }
        Ok(m)
    }

    fn insert_orbit(&mut self, z: [usize; 4]) {
        for (o, _) in orbit(z) {
            self.member[pos(self.n, o)] = true;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, q: Quad) -> bool {
        zero_based(self.n, q).is_ok_and(|z| self.member[pos(self.n, z)])
    }

    /// Number of observed positions out of `n⁴`.
    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.member.iter().all(|&b| b)
    }

    /// Canonical representatives of the observed orbits, 1-based.
    pub fn canonical_quads(&self) -> Vec<Quad> {
        let mut out = Vec::new();
        for_each_canonical(self.n, |z| {
            if self.member[pos(self.n, z)] {
                out.push([z[0] + 1, z[1] + 1, z[2] + 1, z[3] + 1]);
            }
        });
        out
    }

    /// `P_Ω` applied to an unfolding.
    fn apply(&self, m: &Mat<C64>) -> Mat<C64> {
        let mut out = m.clone();
        for (v, &keep) in out.as_mut_slice().iter_mut().zip(&self.member) {
            if !keep {
                *v = C64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Adds random orbits until at least `fraction·n⁴` positions are covered.
pub fn sample_mask(n: usize, fraction: f64, seed: u64) -> Result<SampleMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument("fraction must lie in (0, 1]"));
    }
    let mut reps = Vec::new();
    for_each_canonical(n, |z| reps.push(z));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reps.shuffle(&mut rng);
    let total = n.pow(4);
    let target = Float::ceil(fraction * total as f64) as usize;
    let mut m = SampleMask { n, member: vec![false; total] };
    let mut covered = 0;
    for z in reps {
        if covered >= target {
            break;
        }
        m.insert_orbit(z);
        covered = m.count();
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpcParams {
    /// Initial regularization; `None` means `0.25·σ_max(P_Ω(A))`.
    pub mu_start: Option<f64>,
    /// Final regularization; `None` means `1e-6·mu_start`.
    pub mu_final: Option<f64>,
    pub mu_decay: f64,
    pub step: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for FpcParams {
    fn default() -> Self {
        FpcParams { mu_start: None, mu_final: None, mu_decay: 0.25, step: 1.0, max_iter: 5000, rel_tol: 1e-8 }
    }
}

/// Relative change below which an intermediate `μ` is considered solved.
const INNER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct FpcResult {
    pub tensor: CpsTensor,
    pub iterations: usize,
    pub final_rank: usize,
    /// `‖P_Ω(X) − P_Ω(A)‖_F`.
    pub fit_residual: f64,
    pub converged: bool,
    /// `μ_k‖X_{k+1}‖_* + ½‖P_Ω(X_{k+1} − A)‖²` per iteration.
    pub objective: Vec<f64>,
}

fn validate(p: &FpcParams) -> Result<()> {
    let pos_or_none = |v: Option<f64>| v.map_or(true, |x| x > 0.0);
    if !(pos_or_none(p.mu_start) && pos_or_none(p.mu_final)) {
        return Err(Error::InvalidArgument("mu must be positive"));
    }
    if !(p.mu_decay > 0.0 && p.mu_decay < 1.0) {
        return Err(Error::InvalidArgument("mu_decay must lie in (0, 1)"));
    }
    if !(p.step > 0.0 && p.rel_tol > 0.0 && p.max_iter > 0) {
        return Err(Error::InvalidArgument("step, rel_tol and max_iter must be positive"));
    }
    Ok(())
}

fn spectral_radius(y: &Mat<C64>, real: bool) -> Result<f64> {
    let values = if real { real_sym_eig(&y.re())?.values } else { hermitian_eig(y)?.values };
    Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Eigenvalue soft-thresholding of a Hermitian matrix; returns the result and
/// its nuclear norm.
fn shrink(y: &Mat<C64>, tau: f64, real: bool) -> Result<(Mat<C64>, f64)> {
    let dim = y.rows();
    let (values, vectors) = if real {
        let e = real_sym_eig(&y.re())?;
        (e.values, e.vectors.to_c64())
    } else {
        let e = hermitian_eig(y)?;
        (e.values, e.vectors)
    };
    let mut out = Mat::zeros(dim, dim);
    let mut nuc = 0.0;
    for (k, &lam) in values.iter().enumerate() {
        let s = lam.signum() * (lam.abs() - tau).max(0.0);
        if s == 0.0 {
            continue;
        }
        nuc += s.abs();
        let v = vectors.col(k);
        for c in 0..dim {
            let vc = v[c].conj() * s;
            for (r, x) in out.col_mut(c).iter_mut().enumerate() {
                *x += v[r] * vc;
            }
        }
    }
    Ok((out, nuc))
}

/// Completes `P_Ω(observed)`; entries of `observed` outside the mask are
/// ignored. Stops early when the iterate change stalls at `mu_final`, and
/// returns the last iterate with `converged = false` otherwise.
pub fn fpc_complete(mask: &SampleMask, observed: &CpsTensor, params: &FpcParams) -> Result<FpcResult> {
    validate(params)?;
    let n = mask.n();
    if observed.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: observed.n() });
    }
    let b = mask.apply(observed.unfolded());
    let real = observed.is_real();
    if mask.is_full() {
        let tensor = CpsTensor::from_raw_unfolding(n, b);
        let final_rank = matrix_rank(&tensor, crate::DEFAULT_RANK_TOL)?;
        return Ok(FpcResult { tensor, iterations: 1, final_rank, fit_residual: 0.0, converged: true, objective: vec![] });
    }
    let bnorm = b.frob_norm();
    if bnorm == 0.0 {
        return Ok(FpcResult {
            tensor: CpsTensor::zeros(n),
            iterations: 0,
            final_rank: 0,
            fit_residual: 0.0,
            converged: true,
            objective: vec![],
        });
    }
    let mu0 = match params.mu_start {
        Some(m) => m,
        None => 0.25 * spectral_radius(&b, real)?,
    };
    let mu_final = params.mu_final.unwrap_or(1e-6 * mu0);
    let mut mu = mu0.max(mu_final);

    let mut x = Mat::<C64>::zeros(n * n, n * n);
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let resid = mask.apply(&x).sub(&b);
        let y = x.sub(&resid.scaled(C64::new(params.step, 0.0)));
        let (z, _) = shrink(&y, params.step * mu, real)?;
        let next = CpsTensor::from_raw_unfolding(n, z).unfolded().clone();
        let (_, nuc) = shrink(&next, 0.0, real)?;
        let fit = mask.apply(&next).sub(&b).frob_norm();
        objective.push(mu * nuc + 0.5 * fit * fit);

        let change = next.sub(&x).frob_norm() / x.frob_norm().max(1.0);
        x = next;
        if mu <= mu_final {
            if change < params.rel_tol {
                converged = true;
                break;
            }
        } else if change < INNER_TOL {
            mu = (mu * params.mu_decay).max(mu_final);
        }
    }
    let tensor = CpsTensor::from_raw_unfolding(n, x);
    let fit_residual = mask.apply(tensor.unfolded()).sub(&b).frob_norm();
    let final_rank = matrix_rank(&tensor, crate::DEFAULT_RANK_TOL)?;
    Ok(FpcResult { tensor, iterations, final_rank, fit_residual, converged, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_low_rank;

    #[test]
    fn mask_examples() {
        let m = sample_mask(2, 1.0, 0).unwrap();
        assert!(m.is_full());
        let m = sample_mask(2, 0.5, 7).unwrap();
        assert!(m.count() >= 8);
        let again = sample_mask(2, 0.5, 7).unwrap();
        assert_eq!(m, again);
        let closed = SampleMask::from_quads(2, &m.canonical_quads());
        assert!(closed.is_err() || closed.unwrap() == m);
        assert_eq!(SampleMask::from_quads_closed(2, &m.canonical_quads()).unwrap(), m);
        assert!(sample_mask(2, 0.0, 1).is_err());
    }

    #[test]
    fn mask_closure_check() {
        assert_eq!(
            SampleMask::from_quads(2, &[[1, 1, 1, 2]]).unwrap_err(),
            Error::MaskSymmetryViolation { quad: [1, 1, 1, 2] }
        );
        let m = SampleMask::from_quads_closed(2, &[[1, 1, 1, 2]]).unwrap();
        for q in [[1, 1, 1, 2], [1, 1, 2, 1], [1, 2, 1, 1], [2, 1, 1, 1]] {
            assert!(m.contains(q));
        }
        assert!(!m.contains([2, 2, 2, 2]));
    }

    #[test]
    fn full_mask_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_low_rank(&mut rng, 3, &[2.0, -1.0], true).unwrap();
        let r = fpc_complete(&SampleMask::full(3), &a, &FpcParams::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.tensor.sub(&a).unwrap().frob_norm() <= 1e-9);
    }

    #[test]
    fn recovers_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_low_rank(&mut rng, 4, &[3.0, 1.0], false).unwrap();
        let mask = sample_mask(4, 0.9, 5).unwrap();
        let r = fpc_complete(&mask, &a, &FpcParams::default()).unwrap();
        let err = r.tensor.sub(&a).unwrap().frob_norm() / a.frob_norm();
        assert!(err <= 1e-2, "relative error {err}");
        for w in r.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0));
        }
    }

    #[test]
    fn parameter_validation() {
        let a = CpsTensor::zeros(2);
        let m = SampleMask::full(2);
        let bad = FpcParams { mu_decay: 1.0, ..Default::default() };
        assert!(fpc_complete(&m, &a, &bad).is_err());
        assert!(fpc_complete(&SampleMask::full(3), &a, &FpcParams::default()).is_err());
    }
}
