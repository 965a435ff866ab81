//! JSON file formats for tensors, decompositions, masks and PSD reports.

use std::fs;
use std::path::Path;

use cpskit_core::completion::SampleMask;
use cpskit_core::decompose::{
    CpsDecomposition, CpsTerm, ExtendedPairDecomposition, MatrixDecomposition, MatrixTerm, PairTerm,
    RealAbDecomposition, RealAbTerm, RealGroupedDecomposition, RealQuartic,
};
use cpskit_core::psd::{ConeReport, PsdStatus, PsdVerdict, Witness};
use cpskit_core::{CpsTensor, Mat, Quad, SymmetryMode, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Complex number as `[re, im]`.
pub type Cx = [f64; 2];

fn cx(z: C64) -> Cx {
    [z.re, z.im]
}

fn from_cx(v: Cx) -> C64 {
    C64::new(v[0], v[1])
}

fn cvec(v: &[C64]) -> Vec<Cx> {
    v.iter().map(|&z| cx(z)).collect()
}

fn from_cvec(v: &[Cx]) -> Vec<C64> {
    v.iter().map(|&z| from_cx(z)).collect()
}

/// Row-major nested rows.
fn cmat(m: &Mat<C64>) -> Vec<Vec<Cx>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| cx(m[(i, j)])).collect()).collect()
}

fn from_cmat(rows: &[Vec<Cx>]) -> Result<Mat<C64>, CliError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Format("matrix rows must be square".into()));
    }
    Ok(Mat::from_fn(n, n, |i, j| from_cx(rows[i][j])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorLayout {
    Sparse,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub n: usize,
    pub format: TensorLayout,
    /// Sparse: `[i,j,k,l,re,im]` rows. Dense: `n⁴` `[re,im]` pairs in
    /// lexicographic `(i,j,k,l)` order.
    pub entries: Vec<Vec<f64>>,
}

impl TensorFile {
    pub fn from_tensor(t: &CpsTensor) -> Self {
        let entries = t
            .canonical_entries()
            .into_iter()
            .filter(|(_, v)| *v != C64::new(0.0, 0.0))
            .map(|(q, v)| vec![q[0] as f64, q[1] as f64, q[2] as f64, q[3] as f64, v.re, v.im])
            .collect();
        TensorFile { n: t.n(), format: TensorLayout::Sparse, entries }
    }

    pub fn to_tensor(&self, mode: SymmetryMode) -> Result<CpsTensor, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Format("n must be positive".into()));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        match self.format {
            TensorLayout::Sparse => {
                for row in &self.entries {
                    if row.len() != 6 {
                        return Err(CliError::Format("sparse entries are [i,j,k,l,re,im]".into()));
                    }
                    let mut q: Quad = [0; 4];
                    for (d, &x) in q.iter_mut().zip(&row[..4]) {
                        if x.fract() != 0.0 || x < 1.0 {
                            return Err(CliError::Format(format!("bad index {x}")));
                        }
                        *d = x as usize;
                    }
                    entries.push((q, C64::new(row[4], row[5])));
                }
            }
            TensorLayout::Dense => {
                if self.entries.len() != n.pow(4) || self.entries.iter().any(|e| e.len() != 2) {
                    return Err(CliError::Format(format!("dense layout needs {} [re,im] pairs", n.pow(4))));
                }
                let mut it = self.entries.iter();
                for i in 1..=n {
                    for j in 1..=n {
                        for k in 1..=n {
                            for l in 1..=n {
                                let e = it.next().expect("length checked");
                                entries.push(([i, j, k, l], C64::new(e[0], e[1])));
                            }
                        }
                    }
                }
            }
        }
        Ok(CpsTensor::from_entries(n, &entries, mode)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixTermJson {
    pub lambda: f64,
    pub e: Vec<Vec<Cx>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTermJson {
    pub alpha: f64,
    pub p: Vec<Cx>,
    pub q: Vec<Cx>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpsTermJson {
    pub lambda: f64,
    pub a: Vec<Cx>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealAbTermJson {
    pub lambda: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupedTermJson {
    /// `λ(a²⊗ā² + ā²⊗a²)`.
    ConjPair { lambda: f64, a: Vec<Cx> },
    /// `λ·b⁴`.
    RealQuartic { lambda: f64, b: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DecompositionFile {
    Matrix { n: usize, terms: Vec<MatrixTermJson> },
    Pairs { n: usize, terms: Vec<PairTermJson> },
    Cps { n: usize, terms: Vec<CpsTermJson> },
    RealAb { n: usize, terms: Vec<RealAbTermJson> },
    RealGrouped { n: usize, terms: Vec<GroupedTermJson> },
}

impl From<&MatrixDecomposition> for DecompositionFile {
    fn from(d: &MatrixDecomposition) -> Self {
        let terms = d.terms.iter().map(|t| MatrixTermJson { lambda: t.lambda, e: cmat(&t.e) }).collect();
        DecompositionFile::Matrix { n: d.n, terms }
    }
}

impl From<&ExtendedPairDecomposition> for DecompositionFile {
    fn from(d: &ExtendedPairDecomposition) -> Self {
        let terms = d.terms.iter().map(|t| PairTermJson { alpha: t.alpha, p: cvec(&t.p), q: cvec(&t.q) }).collect();
        DecompositionFile::Pairs { n: d.n, terms }
    }
}

impl From<&CpsDecomposition> for DecompositionFile {
    fn from(d: &CpsDecomposition) -> Self {
        let terms = d.terms.iter().map(|t| CpsTermJson { lambda: t.lambda, a: cvec(&t.a) }).collect();
        DecompositionFile::Cps { n: d.n, terms }
    }
}

impl From<&RealAbDecomposition> for DecompositionFile {
    fn from(d: &RealAbDecomposition) -> Self {
        let terms =
            d.terms.iter().map(|t| RealAbTermJson { lambda: t.lambda, a: t.a.clone(), b: t.b.clone() }).collect();
        DecompositionFile::RealAb { n: d.n, terms }
    }
}

impl From<&RealGroupedDecomposition> for DecompositionFile {
    fn from(d: &RealGroupedDecomposition) -> Self {
        let pairs = d.conj_pairs.iter().map(|t| GroupedTermJson::ConjPair { lambda: t.lambda, a: cvec(&t.a) });
        let quartics =
            d.real_quartics.iter().map(|t| GroupedTermJson::RealQuartic { lambda: t.lambda, b: t.b.clone() });
        DecompositionFile::RealGrouped { n: d.n, terms: pairs.chain(quartics).collect() }
    }
}

impl DecompositionFile {
    pub fn n(&self) -> usize {
        match self {
            DecompositionFile::Matrix { n, .. }
            | DecompositionFile::Pairs { n, .. }
            | DecompositionFile::Cps { n, .. }
            | DecompositionFile::RealAb { n, .. }
            | DecompositionFile::RealGrouped { n, .. } => *n,
        }
    }

    pub fn term_count(&self) -> usize {
        match self {
            DecompositionFile::Matrix { terms, .. } => terms.len(),
            DecompositionFile::Pairs { terms, .. } => terms.len(),
            DecompositionFile::Cps { terms, .. } => terms.len(),
            DecompositionFile::RealAb { terms, .. } => terms.len(),
            DecompositionFile::RealGrouped { terms, .. } => terms.len(),
        }
    }

    pub fn as_cps(&self) -> Option<CpsDecomposition> {
        match self {
            DecompositionFile::Cps { n, terms } => Some(CpsDecomposition {
                n: *n,
                terms: terms.iter().map(|t| CpsTerm { lambda: t.lambda, a: from_cvec(&t.a) }).collect(),
            }),
            _ => None,
        }
    }

    pub fn assemble(&self) -> Result<CpsTensor, CliError> {
        let t = match self {
            DecompositionFile::Matrix { n, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| Ok(MatrixTerm { lambda: t.lambda, e: from_cmat(&t.e)? }))
                    .collect::<Result<_, CliError>>()?;
                MatrixDecomposition { n: *n, terms }.assemble()?
            }
            DecompositionFile::Pairs { n, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| PairTerm { alpha: t.alpha, p: from_cvec(&t.p), q: from_cvec(&t.q) })
                    .collect();
                ExtendedPairDecomposition { n: *n, terms }.assemble()?
            }
            DecompositionFile::Cps { .. } => self.as_cps().expect("cps").assemble()?,
            DecompositionFile::RealAb { n, terms } => {
                let terms =
                    terms.iter().map(|t| RealAbTerm { lambda: t.lambda, a: t.a.clone(), b: t.b.clone() }).collect();
                RealAbDecomposition { n: *n, terms }.assemble()?
            }
            DecompositionFile::RealGrouped { n, terms } => {
                let mut d = RealGroupedDecomposition { n: *n, conj_pairs: vec![], real_quartics: vec![] };
                for t in terms {
                    match t {
                        GroupedTermJson::ConjPair { lambda, a } => {
                            d.conj_pairs.push(CpsTerm { lambda: *lambda, a: from_cvec(a) })
                        }
                        GroupedTermJson::RealQuartic { lambda, b } => {
                            d.real_quartics.push(RealQuartic { lambda: *lambda, b: b.clone() })
                        }
                    }
                }
                d.assemble()?
            }
        };
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    pub n: usize,
    pub quads: Vec<Quad>,
}

impl MaskFile {
    pub fn from_mask(m: &SampleMask) -> Self {
        MaskFile { n: m.n(), quads: m.canonical_quads() }
    }

    pub fn to_mask(&self) -> Result<SampleMask, CliError> {
        Ok(SampleMask::from_quads_closed(self.n, &self.quads)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessJson {
    Vector(Vec<Cx>),
    Matrix(Vec<Vec<Cx>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub status: String,
    pub min_found: f64,
    pub witness: Option<WitnessJson>,
    pub starts: usize,
    pub seed: u64,
    pub boundary: bool,
    pub implied: bool,
}

pub fn status_name(s: PsdStatus) -> &'static str {
    match s {
        PsdStatus::Certified => "certified",
        PsdStatus::NotPsd => "not_psd",
        PsdStatus::ProbablyPsd => "probably_psd",
    }
}

impl From<&PsdVerdict> for VerdictJson {
    fn from(v: &PsdVerdict) -> Self {
        VerdictJson {
            status: status_name(v.status).into(),
            min_found: v.min_found,
            witness: v.witness.as_ref().map(|w| match w {
                Witness::Vector(x) => WitnessJson::Vector(cvec(x)),
                Witness::Matrix(x) => WitnessJson::Matrix(cmat(x)),
            }),
            starts: v.starts_used,
            seed: v.seed,
            boundary: v.boundary,
            implied: v.implied,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub vector_real: Option<VerdictJson>,
    pub vector_complex: VerdictJson,
    pub matrix_real: Option<VerdictJson>,
    pub matrix_complex: VerdictJson,
    pub general_real: Option<VerdictJson>,
    pub general_complex: VerdictJson,
    pub consistency: bool,
}

impl From<&ConeReport> for ReportJson {
    fn from(r: &ConeReport) -> Self {
        ReportJson {
            vector_real: r.vector_real.as_ref().map(Into::into),
            vector_complex: (&r.vector_complex).into(),
            matrix_real: r.matrix_real.as_ref().map(Into::into),
            matrix_complex: (&r.matrix_complex).into(),
            general_real: r.general_real.as_ref().map(Into::into),
            general_complex: (&r.general_complex).into(),
            consistency: r.consistency,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.display().to_string(), e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::Io(path.display().to_string(), e))
}

pub fn read_tensor(path: &Path, mode: SymmetryMode) -> Result<CpsTensor, CliError> {
    read_json::<TensorFile>(path)?.to_tensor(mode)
}

/// `%.10g`-style formatting.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..10).contains(&exp) {
        let s = format!("{x:.9e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        let mant = trim_zeros(mant);
        return format!("{mant}e{e}");
    }
    let decimals = (9 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn cnum(z: C64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else if z.re == 0.0 {
        format!("{}i", num(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", num(z.re), sign, num(z.im.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(num(218.78851234567), "218.7885123");
        assert_eq!(num(-16.0), "-16");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(51213.777542564), "51213.77754");
        assert_eq!(num(0.0), "0");
        assert_eq!(cnum(C64::new(1.0, -0.5)), "1-0.5i");
    }

    #[test]
    fn sparse_round_trip() {
        let t = CpsTensor::basis(2, [1, 1, 1, 2], C64::new(0.5, 0.25)).unwrap();
        let f = TensorFile::from_tensor(&t);
        assert_eq!(f.entries.len(), 1);
        let back = f.to_tensor(SymmetryMode::Validate).unwrap();
        assert_eq!(back, t);
        let text = to_json(&f);
        let again: TensorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(to_json(&again), text);
    }

    #[test]
    fn dense_layout() {
        let mut entries = vec![vec![0.0, 0.0]; 16];
        entries[0] = vec![2.0, 0.0];
        let f = TensorFile { n: 2, format: TensorLayout::Dense, entries };
        let t = f.to_tensor(SymmetryMode::Validate).unwrap();
        assert_eq!(t.entry([1, 1, 1, 1]).unwrap(), C64::new(2.0, 0.0));
        let short = TensorFile { n: 2, format: TensorLayout::Dense, entries: vec![vec![0.0, 0.0]; 3] };
        assert!(short.to_tensor(SymmetryMode::Validate).is_err());
    }
}
