//! Conic encoding of an [`LmiProgram`](crate::lmi::LmiProgram), the reference
//! solver, and solver-independent certification.
//!
//! Packing convention: a symmetric `d×d` variable owns `d(d+1)/2` scalars in
//! row-major upper-triangle order and each off-diagonal scalar drives both
//! mirrored entries with coefficient 1 (no `√2` scaling). Full matrices are
//! packed row-major, scalars occupy one slot.

mod conic;
mod ipm;
mod residual;

pub use conic::{ConicProgram, DecodeError, PsdBlock, ScalarRef, Triplet};
pub use ipm::{solve, SolveDiagnostics, SolveResult, SolveStatus, SolverOptions};
pub use residual::{residual_check, BlockResidual, FamilyResidual, ResidualReport};
