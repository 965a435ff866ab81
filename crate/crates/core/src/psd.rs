//! Membership in the vector, matrix and general PSD cones.
//!
//! Matrix PSD is decided exactly from the spectrum of `M(A)`. Vector and
//! general PSD are searched: a negative value with a witness is a proof of
//! non-membership, otherwise the verdict is only [`PsdStatus::ProbablyPsd`].

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decompose::unfolding_eig;
use crate::linalg::{real_sym_eig, Mat, C64};
use crate::unfold::fold;
use crate::{CpsTensor, Error, Result};

/// Values below `-NEG_TOL·‖A‖_F` count as violations.
pub const NEG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdStatus {
    Certified,
    NotPsd,
    ProbablyPsd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Unit vector `x` with `A(x,x,x̄,x̄) < 0`.
    Vector(Vec<C64>),
    /// Unit-Frobenius matrix `X` with `⟨X, A X⟩ < 0`.
    Matrix(Mat<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdVerdict {
    pub status: PsdStatus,
    pub witness: Option<Witness>,
    /// Smallest objective value seen (exact minimum for matrix PSD).
    pub min_found: f64,
    pub starts_used: usize,
    pub seed: u64,
    /// `min_found` lies in `[-NEG_TOL·‖A‖_F, 0]`.
    pub boundary: bool,
    /// The status follows from another cone rather than from its own test.
    pub implied: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Dense angular grid for `n = 2`.
    pub grid_for_n2: bool,
    /// Relative eigenvalue tolerance of the matrix PSD test.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { starts: 64, seed: 0, max_iter: 500, grid_for_n2: true, tol: crate::DEFAULT_RANK_TOL }
    }
}

/// Verdicts for the six cones; real cones are `None` for complex tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub vector_real: Option<PsdVerdict>,
    pub vector_complex: PsdVerdict,
    pub matrix_real: Option<PsdVerdict>,
    pub matrix_complex: PsdVerdict,
    pub general_real: Option<PsdVerdict>,
    pub general_complex: PsdVerdict,
    pub consistency: bool,
}

impl PsdVerdict {
    fn searched(min_found: f64, witness: Witness, scale: f64, opts: &SearchOptions) -> Self {
        let not_psd = min_found < -NEG_TOL * scale;
        PsdVerdict {
            status: if not_psd { PsdStatus::NotPsd } else { PsdStatus::ProbablyPsd },
            witness: not_psd.then_some(witness),
            min_found,
            starts_used: opts.starts,
            seed: opts.seed,
            boundary: !not_psd && min_found <= 0.0,
            implied: false,
        }
    }

    fn certified_by_implication(from: &PsdVerdict) -> Self {
        PsdVerdict {
            status: PsdStatus::Certified,
            witness: None,
            min_found: from.min_found.max(0.0),
            starts_used: 0,
            seed: from.seed,
            boundary: false,
            implied: true,
        }
    }
}

/// Exact matrix PSD test from the smallest eigenvalue of `M(A)`. The witness
/// `X = conj(fold(v_min))` attains `⟨X, A X⟩ = λ_min`.
pub fn matrix_psd(a: &CpsTensor, tol: f64) -> Result<PsdVerdict> {
    let n = a.n();
    let (values, vectors) = unfolding_eig(a, tol)?;
    let dim = n * n;
    let full = values.len() == dim;
    let mut verdict = PsdVerdict {
        status: PsdStatus::Certified,
        witness: None,
        min_found: 0.0,
        starts_used: 0,
        seed: 0,
        boundary: false,
        implied: false,
    };
    if let Some(&last) = values.last() {
        verdict.min_found = if full { last } else { last.min(0.0) };
        if last < 0.0 {
            let x = fold(vectors.last().expect("eigenvector"), n)?.symmetric_part().conj();
            verdict.status = PsdStatus::NotPsd;
            verdict.witness = Some(Witness::Matrix(x));
        }
    }
    verdict.boundary = verdict.status == PsdStatus::Certified && verdict.min_found == 0.0;
    Ok(verdict)
}

/// Wirtinger gradient `∂/∂x̄ A(x,x,x̄,x̄) = 2·Σ_ijk A_ijkl x_i x_j x̄_k`.
pub fn grad_quartic(a: &CpsTensor, x: &[C64]) -> Result<Vec<C64>> {
    if x.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: x.len() });
    }
    Ok(quartic_value_grad(a.unfolded(), x).1)
}

/// `(A(x,x,x̄,x̄), ∂/∂x̄)` from one product `z = M·vec(x̄x̄ᵀ)`.
fn quartic_value_grad(m: &Mat<C64>, x: &[C64]) -> (f64, Vec<C64>) {
    let n = x.len();
    let yc: Vec<C64> = (0..n * n).map(|p| (x[p % n] * x[p / n]).conj()).collect();
    let z = m.mul_vec(&yc);
    let f = yc.iter().zip(&z).fold(C64::new(0.0, 0.0), |acc, (&y, &zz)| acc + y.conj() * zz).re;
    // (Mᵀy)_kl = conj(z)_kl
    let mut g = vec![C64::new(0.0, 0.0); n];
    for l in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += z[k + l * n].conj() * x[k].conj();
        }
        g[l] = acc * 2.0;
    }
    (f, g)
}

/// Scale-invariant objective on real parameters: value and gradient.
trait Objective {
    fn eval(&self, p: &[f64]) -> (f64, Vec<f64>);
    fn normalize(&self, p: &mut [f64]);
}

/// `A(x,x,x̄,x̄)/‖x‖⁴` over `x = a + i·b`, parameters `[a, b]` (or `a`).
struct SphereQuartic<'a> {
    m: &'a Mat<C64>,
    n: usize,
    complex: bool,
}

impl SphereQuartic<'_> {
    fn to_x(&self, p: &[f64]) -> Vec<C64> {
        (0..self.n).map(|i| C64::new(p[i], if self.complex { p[i + self.n] } else { 0.0 })).collect()
    }
}

impl Objective for SphereQuartic<'_> {
    fn eval(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let x = self.to_x(p);
        let (f, g) = quartic_value_grad(self.m, &x);
        let r2: f64 = p.iter().map(|v| v * v).sum();
        let r4 = r2 * r2;
        let mut grad = Vec::with_capacity(p.len());
        grad.extend(g.iter().map(|z| 2.0 * z.re));
        if self.complex {
            grad.extend(g.iter().map(|z| 2.0 * z.im));
        }
        for (gi, &pi) in grad.iter_mut().zip(p) {
            *gi = *gi / r4 - 4.0 * f * pi / (r4 * r2);
        }
        (f / r4, grad)
    }

    fn normalize(&self, p: &mut [f64]) {
        let r = Float::sqrt(p.iter().map(|v| v * v).sum::<f64>());
        p.iter_mut().for_each(|v| *v /= r);
    }
}

/// `⟨S, H S⟩/‖S‖²` with `S = L·Lᵀ`, `L` real `n×n` (column-major params).
struct GeneralForm<'a> {
    h: &'a Mat<f64>,
    n: usize,
}

impl GeneralForm<'_> {
    fn gram(&self, p: &[f64]) -> Mat<f64> {
        let l = Mat::from_col_major(self.n, self.n, p.to_vec());
        l.matmul(&l.transpose())
    }
}

impl Objective for GeneralForm<'_> {
    fn eval(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n;
        let s = self.gram(p);
        let hs = self.h.mul_vec(s.as_slice());
        let s2 = s.frob_norm_sq();
        let phi = s.as_slice().iter().zip(&hs).map(|(a, b)| a * b).sum::<f64>() / s2;
        // ∇_L = 4 (G − φ S) L / ‖S‖²
        let g = Mat::from_col_major(n, n, hs).sub(&s.scaled(phi));
        let l = Mat::from_col_major(n, n, p.to_vec());
        let grad = g.matmul(&l).scaled(4.0 / s2).into_vec();
        (phi, grad)
    }

    fn normalize(&self, p: &mut [f64]) {
        let r = Float::sqrt(self.gram(p).frob_norm());
        p.iter_mut().for_each(|v| *v /= r);
    }
}

/// Gradient descent with Armijo backtracking, renormalizing every step.
fn descend(obj: &dyn Objective, mut p: Vec<f64>, max_iter: usize, scale: f64) -> (f64, Vec<f64>) {
    obj.normalize(&mut p);
    let (mut f, mut g) = obj.eval(&p);
    let mut t = 1.0 / scale;
    for _ in 0..max_iter {
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if Float::sqrt(gn2) <= 1e-13 * scale {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut q: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            obj.normalize(&mut q);
            let (fq, gq) = obj.eval(&q);
            if fq <= f - 1e-4 * t * gn2 {
                accepted = Some((q, fq, gq));
                break;
            }
            t *= 0.5;
        }
        let Some((q, fq, gq)) = accepted else { break };
        let progress = f - fq;
        p = q;
        f = fq;
        g = gq;
        t *= 2.0;
        if progress <= 1e-16 * scale {
            break;
        }
    }
    (f, p)
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Multi-start search for the minimum of `A(x,x,x̄,x̄)` on the unit sphere.
pub fn vector_psd(a: &CpsTensor, field: Field, opts: &SearchOptions) -> Result<PsdVerdict> {
    if field == Field::Real && !a.is_real() {
        return Err(Error::NotRealTensor);
    }
    let n = a.n();
    let complex = field == Field::Complex;
    let scale = a.frob_norm();
    let mut e1 = vec![C64::new(0.0, 0.0); n];
    e1[0] = C64::new(1.0, 0.0);
    if scale == 0.0 {
        return Ok(PsdVerdict::searched(0.0, Witness::Vector(e1), 1.0, opts));
    }
    let obj = SphereQuartic { m: a.unfolded(), n, complex };
    let dim = if complex { 2 * n } else { n };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |cand: (f64, Vec<f64>)| {
        if best.as_ref().map_or(true, |(f, _)| cand.0 < *f) {
            best = Some(cand);
        }
    };

    if n == 2 && opts.grid_for_n2 {
        let start = sphere_grid(&obj, complex);
        consider(descend(&obj, start, opts.max_iter, scale));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        let p0 = gaussian(&mut rng, dim);
        consider(descend(&obj, p0, opts.max_iter, scale));
    }
    let (_, p) = best.unwrap_or((0.0, {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v
    }));
    let x = obj.to_x(&p);
    // Report the value the witness actually attains.
    let f = a.quartic_form(&x)?;
    Ok(PsdVerdict::searched(f, Witness::Vector(x), scale, opts))
}

/// Best point of a dense grid on the unit circle (real) or on
/// `(cos θ, e^{iφ} sin θ)` (complex, global phase removed).
fn sphere_grid(obj: &SphereQuartic<'_>, complex: bool) -> Vec<f64> {
    let pi = core::f64::consts::PI;
    let mut best = (f64::INFINITY, vec![1.0, 0.0, 0.0, 0.0]);
    if complex {
        let steps = 1000;
        for a in 0..=steps {
            let th = 0.5 * pi * a as f64 / steps as f64;
            let (s, c) = Float::sin_cos(th);
            for b in 0..steps {
                let ph = 2.0 * pi * b as f64 / steps as f64;
                let (sp, cp) = Float::sin_cos(ph);
                let p = vec![c, s * cp, 0.0, s * sp];
                let f = quartic_only(obj.m, &obj.to_x(&p));
                if f < best.0 {
                    best = (f, p);
                }
            }
        }
    } else {
        let steps = 10_000;
        for a in 0..steps {
            let th = pi * a as f64 / steps as f64;
            let (s, c) = Float::sin_cos(th);
            let p = vec![c, s];
            let f = quartic_only(obj.m, &obj.to_x(&p));
            if f < best.0 {
                best = (f, p);
            }
        }
    }
    best.1
}

fn quartic_only(m: &Mat<C64>, x: &[C64]) -> f64 {
    let n = x.len();
    let mut acc = C64::new(0.0, 0.0);
    for q in 0..n * n {
        let yq = (x[q % n] * x[q / n]).conj();
        if yq == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.col(q);
        let mut s = C64::new(0.0, 0.0);
        for (p, &mpq) in col.iter().enumerate() {
            s += x[p % n] * x[p / n] * mpq;
        }
        acc += s * yq;
    }
    acc.re
}

/// Multi-start search for the minimum of `⟨X, A X⟩` over unit PSD `X`.
///
/// For any CPS tensor, `⟨X, A X⟩ = ⟨Re X, A Re X⟩` on Hermitian `X`, so both
/// fields search real `X = L·Lᵀ` against `Re M(A)`.
pub fn general_psd(a: &CpsTensor, field: Field, opts: &SearchOptions) -> Result<PsdVerdict> {
    if field == Field::Real && !a.is_real() {
        return Err(Error::NotRealTensor);
    }
    let m = matrix_psd(a, opts.tol)?;
    if m.status == PsdStatus::Certified {
        return Ok(PsdVerdict { seed: opts.seed, ..PsdVerdict::certified_by_implication(&m) });
    }
    general_search(a, opts)
}

fn general_search(a: &CpsTensor, opts: &SearchOptions) -> Result<PsdVerdict> {
    let n = a.n();
    let scale = a.frob_norm();
    let h = a.unfolded().re();
    let obj = GeneralForm { h: &h, n };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |cand: (f64, Vec<f64>)| {
        if best.as_ref().map_or(true, |(f, _)| cand.0 < *f) {
            best = Some(cand);
        }
    };
    if n == 2 && opts.grid_for_n2 {
        consider(descend(&obj, psd_grid(&h), opts.max_iter, scale));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        let p0 = gaussian(&mut rng, n * n);
        consider(descend(&obj, p0, opts.max_iter, scale));
    }
    let p = match best {
        Some((_, p)) => p,
        None => Mat::<f64>::identity(n).into_vec(),
    };
    let s = obj.gram(&p);
    let s = s.scaled(1.0 / s.frob_norm());
    let x = s.to_c64();
    let f = a.qform_matrix(&x)?;
    let mut v = PsdVerdict::searched(f, Witness::Matrix(x), scale, opts);
    if v.status == PsdStatus::NotPsd && !is_psd(&s)? {
        v.status = PsdStatus::ProbablyPsd;
        v.witness = None;
    }
    Ok(v)
}

fn is_psd(s: &Mat<f64>) -> Result<bool> {
    Ok(real_sym_eig(s)?.values.iter().all(|&l| l >= -1e-12))
}

/// Factor `L` of the best grid point `S = R(θ)·diag(cos ψ, sin ψ)·R(θ)ᵀ`.
fn psd_grid(h: &Mat<f64>) -> Vec<f64> {
    let pi = core::f64::consts::PI;
    let steps = 1000;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for a in 0..steps {
        let th = pi * a as f64 / steps as f64;
        let (s, c) = Float::sin_cos(th);
        for b in 0..=steps {
            let ps = 0.5 * pi * b as f64 / steps as f64;
            let (d2, d1) = Float::sin_cos(ps);
            let x00 = d1 * c * c + d2 * s * s;
            let x11 = d1 * s * s + d2 * c * c;
            let x01 = (d1 - d2) * c * s;
            let v = [x00, x01, x01, x11];
            let hv = h.mul_vec(&v);
            let f: f64 = v.iter().zip(&hv).map(|(x, y)| x * y).sum();
            if f < best.0 {
                best = (f, th, ps);
            }
        }
    }
    let (s, c) = Float::sin_cos(best.1);
    let (d2, d1) = Float::sin_cos(best.2);
    let (r1, r2) = (d1.sqrt(), d2.sqrt());
    // L = R·diag(√d1, √d2), column-major.
    vec![c * r1, s * r1, -s * r2, c * r2]
}

/// Whether a real tensor is invariant under every index permutation.
fn fully_symmetric(a: &CpsTensor) -> bool {
    let n = a.n();
    let tol = 1e-12 * a.frob_norm().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if (a.at(i, j, k, l) - a.at(i, k, j, l)).norm() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn downgraded(from: &PsdVerdict, witness: Witness) -> PsdVerdict {
    PsdVerdict {
        status: PsdStatus::NotPsd,
        witness: Some(witness),
        min_found: from.min_found,
        starts_used: from.starts_used,
        seed: from.seed,
        boundary: false,
        implied: true,
    }
}

fn outer_xxt(x: &[C64]) -> Mat<C64> {
    let n = x.len();
    Mat::from_fn(n, n, |i, j| x[i] * x[j])
}

/// Runs every applicable test and closes the verdicts under the cone
/// implications.
pub fn cone_report(a: &CpsTensor, opts: &SearchOptions) -> Result<ConeReport> {
    let real = a.is_real();
    let mut consistency = true;
    let mut mc = matrix_psd(a, opts.tol)?;
    mc.seed = opts.seed;
    let mut vc = vector_psd(a, Field::Complex, opts)?;
    let mut vr = if real { Some(vector_psd(a, Field::Real, opts)?) } else { None };
    let mut gc = general_search(a, opts)?;

    // A vector witness x gives the matrix witness x·xᵀ of the same value.
    if let Some(v) = vr.as_ref().filter(|v| v.status == PsdStatus::NotPsd) {
        let Some(Witness::Vector(x)) = &v.witness else { unreachable!() };
        if vc.status != PsdStatus::NotPsd {
            vc = downgraded(v, Witness::Vector(x.clone()));
        }
        if gc.status != PsdStatus::NotPsd {
            gc = downgraded(v, Witness::Matrix(outer_xxt(x)));
        }
    }
    if mc.status == PsdStatus::Certified {
        for v in [&mut vc, &mut gc].into_iter().chain(vr.as_mut()) {
            match v.status {
                PsdStatus::NotPsd => consistency = false,
                _ => *v = PsdVerdict::certified_by_implication(&mc),
            }
        }
    }
    if real && fully_symmetric(a) {
        let vnot = vr.as_ref().map_or(false, |v| v.status == PsdStatus::NotPsd);
        if (gc.status == PsdStatus::NotPsd) != vnot {
            consistency = false;
        }
    }
    let (mr, gr) = if real { (Some(mc.clone()), Some(gc.clone())) } else { (None, None) };
    Ok(ConeReport {
        vector_real: vr,
        vector_complex: vc,
        matrix_real: mr,
        matrix_complex: mc,
        general_real: gr,
        general_complex: gc,
        consistency,
    })
}
