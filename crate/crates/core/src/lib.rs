//! Analytical roofline models for memory-bound GPU kernels.
//!
//! The crate answers one question per (kernel, machine) pair: can a matrix
//! engine (tensor cores) speed this kernel up, and by at most how much?
//!
//! * [`hardware`] describes machines and derives machine balance and the
//!   tensor-to-CUDA-core peak ratio α.
//! * [`kernels`] computes work, traffic and exact operational intensity for
//!   SCALE, GEMV, SpMV (generic and CSR) and iterative stencils.
//! * [`roofline`] evaluates attainable performance and classifies kernels.
//! * [`bounds`] holds the overlap models and the closed-form speedup ceilings.
//! * [`matrix`] counts Matrix Market files line by line into
//!   [`SparseMatrixStats`](kernels::SparseMatrixStats) and composes the
//!   per-matrix analysis.
//!
//! Everything here is pure and allocation-light; IO lives in the companion
//! `rooflens` crate.

#![no_std]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod hardware;
pub mod kernels;
pub mod matrix;
pub mod roofline;

pub use crate::bounds::{BoundKind, SpeedupBound, TimeBreakdown};
pub use crate::error::{Error, Result};
pub use crate::hardware::{ExecutionUnit, HardwareSpec, Precision};
pub use crate::kernels::{
    Intensity, KernelCharacterization, SparseMatrixStats, SparseMetadataTraffic, StencilShape,
};
pub use crate::matrix::{MatrixAnalysis, MatrixMarketCounter, MatrixMarketHeader, MtxError};
pub use crate::roofline::{Boundedness, RooflinePoint};
