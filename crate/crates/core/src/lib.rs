//! Synthesis and verification of decentralized switched non-PDC static
//! output-feedback controllers for interconnected switched Takagi-Sugeno plants.

pub mod controller;
pub mod jacobi;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod sdp;
pub mod sim;
pub mod verify;

pub use linalg::{Mat, Vector};
pub use lmi::{assemble_program, Layout, LmiBlock, LmiProgram, SynthesisOptions, ZetaSpec};
pub use controller::{synthesize, ControllerSet, SynthError};
pub use model::{parse_system, validate, SystemSpec, ValidationReport};
pub use sdp::{SolverOptions, SolveStatus};
pub use sim::{simulate, SimConfig, Trajectory};
pub use verify::{certify, VerificationReport, VerifyConfig};
