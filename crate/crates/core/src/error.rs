use thiserror::Error;

use crate::tensor::Quad;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("entries violate CPS symmetry at {quad:?} (residual {residual:e})")]
    SymmetryViolation { quad: Quad, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length {found} is not a square of {n}")]
    LengthMismatch { n: usize, found: usize },

    #[error("basis indices {quad:?} are not canonical (need i <= j and k <= l)")]
    NonCanonicalIndices { quad: Quad },

    #[error("weight {0} is not real")]
    NonRealWeight(f64),

    #[error("matrix is not Hermitian (relative residual {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not symmetric (relative residual {0:e})")]
    NotSymmetric(f64),

    #[error("{0} did not converge within the iteration cap")]
    ConvergenceFailure(&'static str),

    #[error("operation requires a real tensor")]
    NotRealTensor,

    #[error("complex decomposition term {index} has no conjugate partner")]
    UnpairedComplexTerm { index: usize },

    #[error("{terms} terms exceed the subset enumeration cap of {cap}")]
    TooManyTerms { terms: usize, cap: usize },

    #[error("tensor is zero")]
    ZeroTensor,

    #[error("sample mask is not closed under CPS symmetry at {quad:?}")]
    MaskSymmetryViolation { quad: Quad },

    #[error("generating vector gives a vanishing index sum at {quad:?}")]
    SingularGeneratingVector { quad: Quad },

    #[error("input matrix {0} is not symmetric")]
    AsymmetricInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
