//! Electromagnetic scattering from perfect electric conductors: an EFIE
//! method-of-moments discretization on RWG basis functions, solved with a
//! double-layer hybrid quantum-classical iteration whose inner solves run HHL
//! or VQLS on a built-in statevector simulator.

pub mod bench;
pub mod config;
pub mod error;
pub mod farfield;
pub mod hybrid;
pub mod linalg;
pub mod mesh;
pub mod mom;
pub mod pipeline;
pub mod precond;
pub mod qalgo;
pub mod qsim;
pub mod subspace;

pub use error::{Error, Result};
