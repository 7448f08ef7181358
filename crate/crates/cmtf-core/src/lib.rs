//! Coupled matrix and tensor factorization (CMTF).
//!
//! A dataset couples one dense N-way tensor with any number of side
//! matrices, each sharing a factor matrix along one tensor mode. The
//! crate provides the dense tensor kernels, the coupled least-squares
//! objective and its exact gradient (with an optional mask for missing
//! tensor entries), an all-at-once nonlinear conjugate gradient solver
//! and an alternating least squares solver, scoring utilities (factor
//! match score, tensor completion score, paired t-test), and seeded
//! synthetic data generators for benchmark experiments.

pub mod coupled;
pub mod eval;
pub mod io;
pub mod solver;
pub mod synth;
pub mod tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CmtfError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CmtfError>;
