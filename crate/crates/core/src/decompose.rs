//! Decompositions and rank estimates.
//!
//! The CPS pipeline runs `matrix_decomposition → extended_pairs →
//! cps_from_pairs`; every decomposition type reassembles through
//! `assemble()`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::{
    normalize_phase, numerical_rank, real_sym_eig, singular_values, takagi, truncated_hermitian_eig, Mat, C64,
};
use crate::unfold::{fold, reshuffled_unfold};
use crate::{CpsTensor, Error, Result};

/// Directions closer than this (after normalization) are merged.
const MERGE_TOL: f64 = 1e-10;

/// Largest term count accepted by [`certify_cps_rank`].
pub const KRUSKAL_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTerm {
    pub lambda: f64,
    /// Unit-Frobenius complex symmetric matrix.
    pub e: Mat<C64>,
}

/// `A = Σ λ_i E_i⊗Ē_i` with Frobenius-orthonormal symmetric `E_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixDecomposition {
    pub n: usize,
    pub terms: Vec<MatrixTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairTerm {
    pub alpha: f64,
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

/// `A = Σ α_i (p_i²⊗q̄_i² + q_i²⊗p̄_i²)`. A term with `p = q` therefore
/// contributes `2α·p²⊗p̄²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPairDecomposition {
    pub n: usize,
    pub terms: Vec<PairTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpsTerm {
    pub lambda: f64,
    pub a: Vec<C64>,
}

/// `A = Σ λ_i a_i²⊗ā_i²`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpsDecomposition {
    pub n: usize,
    pub terms: Vec<CpsTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealAbTerm {
    pub lambda: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// `A = Σ λ_i a_i⊗a_i⊗b_i⊗b_i` with real factors.
#[derive(Clone, Debug, PartialEq)]
pub struct RealAbDecomposition {
    pub n: usize,
    pub terms: Vec<RealAbTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealQuartic {
    pub lambda: f64,
    pub b: Vec<f64>,
}

/// `A = Σ λ_i (a_i²⊗ā_i² + ā_i²⊗a_i²) + Σ λ_j b_j⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealGroupedDecomposition {
    pub n: usize,
    pub conj_pairs: Vec<CpsTerm>,
    pub real_quartics: Vec<RealQuartic>,
}

/// Outcome of the Kruskal uniqueness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KruskalCertificate {
    pub terms: usize,
    pub k_u: usize,
    /// `2·k_U ≥ r + 2`: the CPS rank is `r` and the decomposition is unique.
    pub certified: bool,
    /// `r = 1`, where the rank is trivially one although the test never fires.
    pub trivial_rank_one: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub matrix_rank: usize,
    pub cp_lower: usize,
    pub cp_upper: usize,
    pub unitary_decomposable: bool,
    pub r_max: usize,
    /// Rank of the reshuffled unfolding `M(Â)`.
    pub reshuffled_rank: usize,
    /// Whether the upper bound was refined through a shared eigenbasis.
    pub shared_eigenbasis: bool,
}

/// Best approximation `λ·X⊗X̄` in Frobenius norm.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneApprox {
    pub lambda: f64,
    pub x: Mat<C64>,
    pub residual: f64,
}

fn vec_outer(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len();
    (0..n * n).map(|p| a[p % n] * b[p / n]).collect()
}

/// `M += w·u·vᴴ`.
fn add_outer(m: &mut Mat<C64>, w: f64, u: &[C64], v: &[C64]) {
    for (j, &vj) in v.iter().enumerate() {
        let c = vj.conj() * w;
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        for (x, &ui) in m.col_mut(j).iter_mut().zip(u) {
            *x += ui * c;
        }
    }
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if len != n {
        return Err(Error::DimensionMismatch { expected: n, found: len });
    }
    Ok(())
}

fn to_c(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

impl MatrixDecomposition {
    pub fn assemble(&self) -> Result<CpsTensor> {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for t in &self.terms {
            if t.e.rows() != n || t.e.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: t.e.rows() });
            }
            add_outer(&mut m, t.lambda, t.e.as_slice(), t.e.as_slice());
        }
        CpsTensor::from_unfolding(n, m)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }
}

impl ExtendedPairDecomposition {
    pub fn assemble(&self) -> Result<CpsTensor> {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for t in &self.terms {
            check_len(n, t.p.len())?;
            check_len(n, t.q.len())?;
            let pp = vec_outer(&t.p, &t.p);
            let qq = vec_outer(&t.q, &t.q);
            add_outer(&mut m, t.alpha, &pp, &qq);
            add_outer(&mut m, t.alpha, &qq, &pp);
        }
        CpsTensor::from_unfolding(n, m)
    }
}

impl CpsDecomposition {
    pub fn assemble(&self) -> Result<CpsTensor> {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for t in &self.terms {
            check_len(n, t.a.len())?;
            let aa = vec_outer(&t.a, &t.a);
            add_outer(&mut m, t.lambda, &aa, &aa);
        }
        CpsTensor::from_unfolding(n, m)
    }
}

impl RealAbDecomposition {
    pub fn assemble(&self) -> Result<CpsTensor> {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for t in &self.terms {
            check_len(n, t.a.len())?;
            check_len(n, t.b.len())?;
            let (a, b) = (to_c(&t.a), to_c(&t.b));
            add_outer(&mut m, t.lambda, &vec_outer(&a, &a), &vec_outer(&b, &b));
        }
        CpsTensor::from_unfolding(n, m)
    }
}

impl RealGroupedDecomposition {
    pub fn assemble(&self) -> Result<CpsTensor> {
        let n = self.n;
        let mut m = Mat::zeros(n * n, n * n);
        for t in &self.conj_pairs {
            check_len(n, t.a.len())?;
            let ac: Vec<C64> = t.a.iter().map(|z| z.conj()).collect();
            let aa = vec_outer(&t.a, &t.a);
            let bb = vec_outer(&ac, &ac);
            add_outer(&mut m, t.lambda, &aa, &aa);
            add_outer(&mut m, t.lambda, &bb, &bb);
        }
        for t in &self.real_quartics {
            check_len(n, t.b.len())?;
            let b = to_c(&t.b);
            let bb = vec_outer(&b, &b);
            add_outer(&mut m, t.lambda, &bb, &bb);
        }
        CpsTensor::from_unfolding(n, m)
    }
}

/// Eigenpairs of `M(A)` above `tol·max|λ|`, as complex vectors.
pub(crate) fn unfolding_eig(a: &CpsTensor, tol: f64) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    match a.unfolded_real() {
        Some(m) => {
            let e = truncated_hermitian_eig(&m, tol)?;
            let vs = (0..e.values.len()).map(|k| to_c(e.vectors.col(k))).collect();
            Ok((e.values, vs))
        }
        None => {
            let e = truncated_hermitian_eig(a.unfolded(), tol)?;
            let vs = (0..e.values.len()).map(|k| e.vectors.col(k).to_vec()).collect();
            Ok((e.values, vs))
        }
    }
}

fn fold_symmetric(v: &[C64], n: usize) -> Result<Mat<C64>> {
    let e = fold(v, n)?;
    let resid = e.symmetric_residual();
    if resid > 1e-9 {
        return Err(Error::NotSymmetric(resid));
    }
    let e = e.symmetric_part();
    let s = e.frob_norm();
    Ok(e.map(|z| z / s))
}

/// Orthogonal matrix decomposition from the spectral decomposition of `M(A)`;
/// terms with `|λ| ≤ tol·max|λ|` are dropped, `λ` is descending.
pub fn matrix_decomposition(a: &CpsTensor, tol: f64) -> Result<MatrixDecomposition> {
    let n = a.n();
    let (values, vectors) = unfolding_eig(a, tol)?;
    let mut terms = Vec::with_capacity(values.len());
    for (lambda, v) in values.into_iter().zip(vectors) {
        terms.push(MatrixTerm { lambda, e: fold_symmetric(&v, n)? });
    }
    Ok(MatrixDecomposition { n, terms })
}

pub fn matrix_rank(a: &CpsTensor, tol: f64) -> Result<usize> {
    Ok(matrix_decomposition(a, tol)?.terms.len())
}

/// Factors `E = Σ β_k u_k u_kᵀ`: spectral for real `E`, Takagi otherwise.
fn symmetric_factors(e: &Mat<C64>, real: bool, tol: f64) -> Result<Vec<(f64, Vec<C64>)>> {
    let raw: Vec<(f64, Vec<C64>)> = if real {
        let eig = real_sym_eig(&e.re())?;
        (0..eig.values.len()).map(|k| (eig.values[k], to_c(eig.vector(k)))).collect()
    } else {
        let t = takagi(e)?;
        (0..t.sigmas.len()).map(|k| (t.sigmas[k], t.vector(k).to_vec())).collect()
    };
    let top = raw.iter().fold(0.0f64, |m, (b, _)| m.max(Float::abs(*b)));
    Ok(raw.into_iter().filter(|(b, _)| Float::abs(*b) > tol * top).collect())
}

/// Extended "rank-one" decomposition: each `E_i = Σ β_j u_j u_jᵀ` yields
/// diagonal pairs `(λβ_j²/2, u_j, u_j)` and cross pairs `(λβ_jβ_k, u_j, u_k)`.
pub fn extended_pairs(a: &CpsTensor, tol: f64) -> Result<ExtendedPairDecomposition> {
    let md = matrix_decomposition(a, tol)?;
    pairs_from_matrix(&md, a.is_real(), tol)
}

fn pairs_from_matrix(md: &MatrixDecomposition, real: bool, tol: f64) -> Result<ExtendedPairDecomposition> {
    let mut terms = Vec::new();
    for t in &md.terms {
        let f = symmetric_factors(&t.e, real, tol)?;
        for (j, (bj, uj)) in f.iter().enumerate() {
            terms.push(PairTerm { alpha: t.lambda * bj * bj / 2.0, p: uj.clone(), q: uj.clone() });
            for (bk, uk) in &f[j + 1..] {
                terms.push(PairTerm { alpha: t.lambda * bj * bk, p: uj.clone(), q: uk.clone() });
            }
        }
    }
    Ok(ExtendedPairDecomposition { n: md.n, terms })
}

/// Expands each pair into `(α/4, p±q)`, `(−α/4, p±iq)`; a diagonal pair
/// `(α, p, p)` becomes `(2α, p)`.
pub fn cps_from_pairs(pairs: &ExtendedPairDecomposition) -> CpsDecomposition {
    let mut terms = Vec::new();
    let i = C64::new(0.0, 1.0);
    for t in &pairs.terms {
        if t.p == t.q {
            terms.push(CpsTerm { lambda: 2.0 * t.alpha, a: t.p.clone() });
            continue;
        }
        let comb = |s: C64| -> Vec<C64> { t.p.iter().zip(&t.q).map(|(&p, &q)| p + s * q).collect() };
        let w = t.alpha / 4.0;
        terms.push(CpsTerm { lambda: w, a: comb(C64::new(1.0, 0.0)) });
        terms.push(CpsTerm { lambda: w, a: comb(C64::new(-1.0, 0.0)) });
        terms.push(CpsTerm { lambda: -w, a: comb(i) });
        terms.push(CpsTerm { lambda: -w, a: comb(-i) });
    }
    CpsDecomposition { n: pairs.n, terms }
}

/// Normalizes directions to unit length and canonical phase, merges equal
/// directions and drops weights below `tol·max|λ|`.
fn merge_cps(terms: Vec<CpsTerm>, tol: f64) -> Vec<CpsTerm> {
    let mut out: Vec<CpsTerm> = Vec::new();
    for t in terms {
        let nrm = crate::linalg::norm(&t.a);
        if nrm == 0.0 || t.lambda == 0.0 {
            continue;
        }
        let mut u: Vec<C64> = t.a.iter().map(|z| z / nrm).collect();
        normalize_phase(&mut u);
        let w = t.lambda * nrm.powi(4);
        match out.iter_mut().find(|o| dist(&o.a, &u) <= MERGE_TOL) {
            Some(o) => o.lambda += w,
            None => out.push(CpsTerm { lambda: w, a: u }),
        }
    }
    let top = out.iter().fold(0.0f64, |m, t| m.max(Float::abs(t.lambda)));
    out.retain(|t| Float::abs(t.lambda) > tol * top);
    out
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// CPS decomposition via the three-step pipeline, with unit-norm directions
/// and equal directions merged.
pub fn cps_decompose(a: &CpsTensor, tol: f64) -> Result<CpsDecomposition> {
    let pairs = extended_pairs(a, tol)?;
    let raw = cps_from_pairs(&pairs);
    Ok(CpsDecomposition { n: a.n(), terms: merge_cps(raw.terms, tol) })
}

/// Flips `v` so its first significant component is positive.
fn sign_normalize(v: &mut [f64]) {
    let nv = crate::linalg::norm(v);
    if let Some(&p) = v.iter().find(|x| Float::abs(**x) > 1e-10 * nv) {
        if p < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Real partially symmetric decomposition `Σ λ a⊗a⊗b⊗b` of a real tensor.
pub fn real_partial_symmetric(a: &CpsTensor, tol: f64) -> Result<RealAbDecomposition> {
    if !a.is_real() {
        return Err(Error::NotRealTensor);
    }
    let pairs = extended_pairs(a, tol)?;
    let mut out: Vec<RealAbTerm> = Vec::new();
    let mut push = |lambda: f64, p: &[C64], q: &[C64]| {
        let mut x: Vec<f64> = p.iter().map(|z| z.re).collect();
        let mut y: Vec<f64> = q.iter().map(|z| z.re).collect();
        let (nx, ny) = (crate::linalg::norm(&x), crate::linalg::norm(&y));
        if nx == 0.0 || ny == 0.0 {
            return;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        y.iter_mut().for_each(|v| *v /= ny);
        sign_normalize(&mut x);
        sign_normalize(&mut y);
        let w = lambda * nx * nx * ny * ny;
        match out.iter_mut().find(|o| dist_r(&o.a, &x) <= MERGE_TOL && dist_r(&o.b, &y) <= MERGE_TOL) {
            Some(o) => o.lambda += w,
            None => out.push(RealAbTerm { lambda: w, a: x, b: y }),
        }
    };
    for t in &pairs.terms {
        push(t.alpha, &t.p, &t.q);
        push(t.alpha, &t.q, &t.p);
    }
    let top = out.iter().fold(0.0f64, |m, t| m.max(Float::abs(t.lambda)));
    out.retain(|t| Float::abs(t.lambda) > tol * top);
    Ok(RealAbDecomposition { n: a.n(), terms: out })
}

fn dist_r(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Rotates `a` by the phase that makes `aᵀa` real and nonnegative; returns
/// the real direction if the imaginary remainder is negligible.
fn real_direction(a: &[C64]) -> Option<Vec<f64>> {
    let s = a.iter().fold(C64::new(0.0, 0.0), |acc, &z| acc + z * z);
    let rot = C64::from_polar(1.0, -s.arg() / 2.0);
    let r: Vec<C64> = a.iter().map(|&z| z * rot).collect();
    let im = r.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    if im <= 1e-9 * crate::linalg::norm(a) {
        let mut v: Vec<f64> = r.iter().map(|z| z.re).collect();
        sign_normalize(&mut v);
        Some(v)
    } else {
        None
    }
}

/// Whether the first significant imaginary part of `a` is positive.
fn positive_imag_lead(a: &[C64]) -> bool {
    let na = crate::linalg::norm(a);
    a.iter().find(|z| Float::abs(z.im) > 1e-9 * na).map_or(true, |z| z.im > 0.0)
}

/// Grouped CPS decomposition of a real tensor: conjugate pairs `(a, ā)` of
/// equal weight, and real quartics `λ·b⁴`.
pub fn real_cps_grouped(a: &CpsTensor, tol: f64) -> Result<RealGroupedDecomposition> {
    if !a.is_real() {
        return Err(Error::NotRealTensor);
    }
    let dec = cps_decompose(a, tol)?;
    let scale = dec.terms.iter().fold(0.0f64, |m, t| m.max(Float::abs(t.lambda)));
    let mut real_quartics = Vec::new();
    let mut complex: Vec<(usize, &CpsTerm)> = Vec::new();
    for (idx, t) in dec.terms.iter().enumerate() {
        match real_direction(&t.a) {
            Some(b) => real_quartics.push(RealQuartic { lambda: t.lambda, b }),
            None => complex.push((idx, t)),
        }
    }
    let mut used = vec![false; complex.len()];
    let mut conj_pairs = Vec::new();
    for x in 0..complex.len() {
        if used[x] {
            continue;
        }
        let (idx, t) = complex[x];
        let partner = (x + 1..complex.len()).find(|&y| {
            let s = complex[y].1;
            !used[y]
                && Float::abs(s.lambda - t.lambda) <= 1e-9 * scale
                && crate::linalg::dot_u(&t.a, &s.a).norm() >= 1.0 - 1e-9
        });
        let Some(y) = partner else {
            return Err(Error::UnpairedComplexTerm { index: idx });
        };
        used[x] = true;
        used[y] = true;
        let lambda = (t.lambda + complex[y].1.lambda) / 2.0;
        let rep = if positive_imag_lead(&t.a) { t.a.clone() } else { complex[y].1.a.clone() };
        conj_pairs.push(CpsTerm { lambda, a: rep });
    }
    Ok(RealGroupedDecomposition { n: a.n(), conj_pairs, real_quartics })
}

/// Kruskal rank of `{a_i}` by exhaustive subset rank tests.
pub fn kruskal_rank(vectors: &[Vec<C64>], tol: f64) -> Result<usize> {
    let r = vectors.len();
    if r > KRUSKAL_CAP {
        return Err(Error::TooManyTerms { terms: r, cap: KRUSKAL_CAP });
    }
    if r == 0 {
        return Ok(0);
    }
    let n = vectors[0].len();
    let mut k_u = 0;
    for k in 1..=r.min(n) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let m = Mat::from_fn(n, k, |i, j| vectors[idx[j]][i]);
            if numerical_rank(&m, tol)? < k || m.frob_norm() == 0.0 {
                return Ok(k_u);
            }
            if !next_combination(&mut idx, r) {
                break;
            }
        }
        k_u = k;
    }
    Ok(k_u)
}

fn next_combination(idx: &mut [usize], r: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < r - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Kruskal certificate `2k_U ≥ r + 2` for a CPS decomposition.
pub fn certify_cps_rank(dec: &CpsDecomposition) -> Result<KruskalCertificate> {
    if dec.terms.iter().any(|t| t.lambda == 0.0) {
        return Err(Error::InvalidArgument("zero weight in decomposition"));
    }
    let vs: Vec<Vec<C64>> = dec.terms.iter().map(|t| t.a.clone()).collect();
    let r = vs.len();
    let k_u = kruskal_rank(&vs, 1e-9)?;
    Ok(KruskalCertificate { terms: r, k_u, certified: r > 0 && 2 * k_u >= r + 2, trivial_rank_one: r == 1 })
}

const GENERIC_WEIGHTS: [f64; 8] = [
    1.0,
    0.754_877_666_246_692_7,
    0.569_840_290_998_053_3,
    0.430_159_709_001_946_7,
    0.324_717_957_244_746,
    0.245_122_333_753_307_3,
    0.185_037_170_770_859_4,
    0.139_680_581_275_884_8,
];

/// Number of shared eigen-directions used by commuting real `E_i`, if they
/// commute.
fn shared_directions(es: &[Mat<C64>], tol: f64) -> Result<Option<usize>> {
    if es.is_empty() || es.len() > GENERIC_WEIGHTS.len() || es.iter().any(|e| !e.is_real()) {
        return Ok(None);
    }
    let rs: Vec<Mat<f64>> = es.iter().map(|e| e.re()).collect();
    for (x, a) in rs.iter().enumerate() {
        for b in &rs[x + 1..] {
            if a.matmul(b).sub(&b.matmul(a)).frob_norm() > 1e-9 {
                return Ok(None);
            }
        }
    }
    let n = rs[0].rows();
    let mut s = Mat::<f64>::zeros(n, n);
    for (e, &w) in rs.iter().zip(&GENERIC_WEIGHTS) {
        s = s.add(&e.scaled(w));
    }
    let q = real_sym_eig(&s)?.vectors;
    let mut used = vec![false; n];
    for e in &rs {
        let d = q.transpose().matmul(e).matmul(&q);
        let mut off = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    off += d[(i, j)] * d[(i, j)];
                }
            }
        }
        if off.sqrt() > 1e-9 {
            return Ok(None);
        }
        let top = (0..n).fold(0.0f64, |m, k| m.max(Float::abs(d[(k, k)])));
        for k in 0..n {
            if Float::abs(d[(k, k)]) > tol * top {
                used[k] = true;
            }
        }
    }
    Ok(Some(used.iter().filter(|&&u| u).count()))
}

/// Rank of the reshuffled unfolding `M(Â)`, `Â_ijkl = A_ikjl`.
pub fn reshuffled_rank(a: &CpsTensor, tol: f64) -> Result<usize> {
    let m = reshuffled_unfold(a);
    if a.is_real() {
        Ok(truncated_hermitian_eig(&m.re(), tol)?.values.len())
    } else {
        let s = singular_values(&m)?;
        let top = s.first().copied().unwrap_or(0.0);
        Ok(if top == 0.0 { 0 } else { s.iter().filter(|&&x| x > tol * top).count() })
    }
}

/// CP-rank sandwich `cp_lower ≤ rank(A) ≤ cp_upper` from the matrix
/// decomposition.
pub fn cp_rank_bounds(a: &CpsTensor, tol: f64) -> Result<RankReport> {
    let md = matrix_decomposition(a, tol)?;
    let r = md.terms.len();
    let mut ranks = Vec::with_capacity(r);
    for t in &md.terms {
        ranks.push(numerical_rank(&t.e, tol)?);
    }
    let r_max = ranks.iter().copied().max().unwrap_or(0);
    let mut cp_upper = r * r_max * r_max;
    let es: Vec<Mat<C64>> = md.terms.iter().map(|t| t.e.clone()).collect();
    let shared = shared_directions(&es, tol)?;
    if let Some(d) = shared {
        cp_upper = cp_upper.min(d * d);
    }
    let reshuffled = reshuffled_rank(a, tol)?;
    Ok(RankReport {
        matrix_rank: r,
        cp_lower: r.max(reshuffled),
        cp_upper,
        unitary_decomposable: r > 0 && ranks.iter().all(|&k| k == 1),
        r_max,
        reshuffled_rank: reshuffled,
        shared_eigenbasis: shared.is_some(),
    })
}

/// Nearest `λ·X⊗X̄`: the eigenpair of `M(A)` of largest modulus (ties go to
/// the positive eigenvalue).
pub fn nearest_rank_one(a: &CpsTensor) -> Result<RankOneApprox> {
    let fro = a.frob_norm();
    if fro == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let (values, vectors) = unfolding_eig(a, crate::DEFAULT_RANK_TOL)?;
    let last = values.len() - 1;
    let tie = 1e-12 * fro;
    let k = if Float::abs(values[last]) > Float::abs(values[0]) + tie { last } else { 0 };
    let lambda = values[k];
    let x = fold_symmetric(&vectors[k], a.n())?;
    let residual = (fro * fro - lambda * lambda).max(0.0).sqrt();
    Ok(RankOneApprox { lambda, x, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cps, random_low_rank};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e(q: [usize; 4]) -> CpsTensor {
        CpsTensor::basis(2, q, c(1.0, 0.0)).unwrap()
    }

    fn rel_err(a: &CpsTensor, b: &CpsTensor) -> f64 {
        a.sub(b).unwrap().frob_norm() / a.frob_norm()
    }

    #[test]
    fn matrix_decomposition_of_e1122() {
        let md = matrix_decomposition(&e([1, 1, 2, 2]), TOL).unwrap();
        assert_eq!(md.lambdas().len(), 2);
        assert!((md.terms[0].lambda - 1.0).abs() < 1e-14 && (md.terms[1].lambda + 1.0).abs() < 1e-14);
        for t in &md.terms {
            assert!(t.e[(0, 1)].norm() < 1e-14 && t.e.is_real());
        }
        assert!(rel_err(&md.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-14);
    }

    #[test]
    fn single_rank_one_matrix_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_low_rank(&mut rng, 3, &[1.0], true).unwrap();
        let md = matrix_decomposition(&a, TOL).unwrap();
        assert_eq!(md.terms.len(), 1);
        assert!((md.terms[0].lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_rank_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_low_rank(&mut rng, 4, &[3.0, -1.0, 0.5], true).unwrap();
        assert_eq!(matrix_rank(&a, TOL).unwrap(), 3);
    }

    #[test]
    fn cps_of_basis_tensors() {
        let dec = cps_decompose(&e([1, 1, 2, 2]), TOL).unwrap();
        assert_eq!(dec.terms.len(), 4);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            (1.0, [c(h, 0.0), c(h, 0.0)]),
            (1.0, [c(h, 0.0), c(-h, 0.0)]),
            (-1.0, [c(h, 0.0), c(0.0, h)]),
            (-1.0, [c(h, 0.0), c(0.0, -h)]),
        ];
        for (lam, v) in expect {
            assert!(
                dec.terms.iter().any(|t| (t.lambda - lam).abs() < 1e-12 && dist(&t.a, &v) < 1e-12),
                "missing term {lam} {v:?}"
            );
        }
        assert!(rel_err(&dec.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-14);
        assert_eq!(cps_decompose(&e([1, 1, 1, 1]), TOL).unwrap().terms.len(), 1);
    }

    #[test]
    fn cps_from_single_pair() {
        let pairs = ExtendedPairDecomposition {
            n: 2,
            terms: vec![PairTerm { alpha: 1.0, p: vec![c(1.0, 0.0), c(0.0, 0.0)], q: vec![c(0.0, 0.0), c(1.0, 0.0)] }],
        };
        let dec = cps_from_pairs(&pairs);
        let w: Vec<f64> = dec.terms.iter().map(|t| t.lambda).collect();
        assert_eq!(w, vec![0.25, 0.25, -0.25, -0.25]);
        assert!(rel_err(&dec.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-15);
        assert!(rel_err(&pairs.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-15);
    }

    #[test]
    fn real_partial_symmetric_of_e1122() {
        let d = real_partial_symmetric(&e([1, 1, 2, 2]), TOL).unwrap();
        assert_eq!(d.terms.len(), 2);
        for t in &d.terms {
            assert!((t.lambda - 1.0).abs() < 1e-12);
            assert!(dist_r(&t.a, &t.b) > 1.0);
        }
        assert!(rel_err(&d.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-14);
        let z = random_cps(&mut ChaCha8Rng::seed_from_u64(3), 2, true);
        assert_eq!(real_partial_symmetric(&z, TOL).unwrap_err(), Error::NotRealTensor);
    }

    #[test]
    fn grouped_e1122() {
        let g = real_cps_grouped(&e([1, 1, 2, 2]), TOL).unwrap();
        assert_eq!(g.conj_pairs.len(), 1);
        assert_eq!(g.real_quartics.len(), 2);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((g.conj_pairs[0].lambda + 1.0).abs() < 1e-12);
        assert!(dist(&g.conj_pairs[0].a, &[c(h, 0.0), c(0.0, h)]) < 1e-12);
        assert!(rel_err(&g.assemble().unwrap(), &e([1, 1, 2, 2])) < 1e-14);
    }

    #[test]
    fn round_trips_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            for &complex in &[false, true] {
                let a = random_cps(&mut rng, n, complex);
                assert!(rel_err(&matrix_decomposition(&a, TOL).unwrap().assemble().unwrap(), &a) < 1e-9);
                assert!(rel_err(&extended_pairs(&a, TOL).unwrap().assemble().unwrap(), &a) < 1e-9);
                assert!(rel_err(&cps_decompose(&a, TOL).unwrap().assemble().unwrap(), &a) < 1e-9);
                if !complex {
                    assert!(rel_err(&real_partial_symmetric(&a, TOL).unwrap().assemble().unwrap(), &a) < 1e-9);
                    assert!(rel_err(&real_cps_grouped(&a, TOL).unwrap().assemble().unwrap(), &a) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn kruskal_examples() {
        let basis = |k: usize| -> Vec<C64> { (0..4).map(|i| c(if i == k { 1.0 } else { 0.0 }, 0.0)).collect() };
        let dec = CpsDecomposition { n: 4, terms: (0..4).map(|k| CpsTerm { lambda: 1.0, a: basis(k) }).collect() };
        let cert = certify_cps_rank(&dec).unwrap();
        assert_eq!((cert.k_u, cert.certified), (4, true));

        let one = CpsDecomposition { n: 4, terms: vec![CpsTerm { lambda: 2.0, a: basis(0) }] };
        let cert = certify_cps_rank(&one).unwrap();
        assert_eq!((cert.k_u, cert.certified, cert.trivial_rank_one), (1, false, true));

        let v = |x: f64, y: f64| vec![c(x, 0.0), c(y, 0.0)];
        let three = CpsDecomposition {
            n: 2,
            terms: vec![
                CpsTerm { lambda: 1.0, a: v(1.0, 0.0) },
                CpsTerm { lambda: 1.0, a: v(0.0, 1.0) },
                CpsTerm { lambda: 1.0, a: v(1.0, 1.0) },
            ],
        };
        let cert = certify_cps_rank(&three).unwrap();
        assert_eq!((cert.k_u, cert.certified), (2, false));

        let many = CpsDecomposition { n: 2, terms: vec![CpsTerm { lambda: 1.0, a: v(1.0, 0.0) }; 21] };
        assert!(matches!(certify_cps_rank(&many), Err(Error::TooManyTerms { terms: 21, cap: 20 })));
    }

    #[test]
    fn rank_bounds_rank_r_matrix() {
        // A = E⊗Ē with rank(E) = 2 has CP rank 4.
        let mut m = Mat::<C64>::zeros(3, 3);
        m[(0, 0)] = c(0.8, 0.0);
        m[(1, 1)] = c(0.6, 0.0);
        let md = MatrixDecomposition { n: 3, terms: vec![MatrixTerm { lambda: 1.0, e: m }] };
        let rep = cp_rank_bounds(&md.assemble().unwrap(), TOL).unwrap();
        assert_eq!((rep.matrix_rank, rep.r_max, rep.cp_lower, rep.cp_upper), (1, 2, 4, 4));
        assert!(!rep.unitary_decomposable);
    }

    #[test]
    fn rank_bounds_unitary() {
        let v = |x: f64, y: f64, z: f64| vec![c(x, 0.0), c(y, 0.0), c(z, 0.0)];
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let dec = CpsDecomposition {
            n: 3,
            terms: vec![CpsTerm { lambda: 2.0, a: v(s, s, 0.0) }, CpsTerm { lambda: -1.0, a: v(s, -s, 0.0) }],
        };
        let rep = cp_rank_bounds(&dec.assemble().unwrap(), TOL).unwrap();
        assert!(rep.unitary_decomposable);
        assert_eq!((rep.cp_lower, rep.cp_upper), (2, 2));
    }

    #[test]
    fn nearest_rank_one_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_low_rank(&mut rng, 3, &[3.0], false).unwrap();
        let r = nearest_rank_one(&a).unwrap();
        assert!((r.lambda - 3.0).abs() < 1e-12 && r.residual < 1e-6);
        let r = nearest_rank_one(&e([1, 1, 2, 2])).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12 && (r.residual - 1.0).abs() < 1e-12);
        assert_eq!(nearest_rank_one(&CpsTensor::zeros(2)).unwrap_err(), Error::ZeroTensor);
    }
}
