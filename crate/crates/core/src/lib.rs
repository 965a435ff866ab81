//! Fourth-order conjugate partial-symmetric (CPS) tensors.
//!
//! A CPS tensor `A` over `ℂⁿ` satisfies `A[i,j,k,l] = A[j,i,k,l] = A[i,j,l,k]`
//! and `A[i,j,k,l] = conj(A[k,l,i,j])`. Its square unfolding is an `n²×n²`
//! Hermitian matrix, which is the canonical storage used throughout.
//!
//! The crate is `no_std` (with `alloc`). IO, file formats and the command line
//! live in the companion `cpskit` crate.
//!
//! Quadruple indices `[i, j, k, l]` are **1-based** in every public API, to
//! match the file formats. Vector and matrix components are ordinary 0-based
//! Rust indices.

#![no_std]

extern crate alloc;

pub mod apps;
pub mod completion;
pub mod decompose;
pub mod error;
pub mod linalg;
pub mod psd;
pub mod random;
pub mod tensor;
pub mod unfold;

pub use error::{Error, Result};
pub use linalg::{Mat, Scalar, C64};
pub use tensor::{CpsTensor, Quad, SymmetryMode};

/// Default relative rank tolerance for eigenvalue and singular value cut-offs.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
