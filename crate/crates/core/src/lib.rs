//! Desk-scale simulation of a dissipative transverse-field Ising chain.
//!
//! The chain carries an imaginary longitudinal field, realized on qubits
//! through an ancilla-based damping channel. This crate builds the
//! Trotterized circuits, simulates them shot by shot with post-selection
//! and injectable noise, mitigates readout errors, and cross-checks
//! everything against an exact non-Hermitian evolution and a spectral
//! oracle that locates exceptional points.
//!
//! # Bit convention
//!
//! Site 1 of the chain maps to the least-significant bit of basis-state
//! indices. Qubit `q` (0-based) is site `q + 1`; ancilla qubits follow the
//! system qubits. Every module in this crate uses this single convention.
//!
//! Core math is generic over the scalar type (see [`Real`]); `f64` is the
//! working precision and the one used by the concrete aliases below.

pub mod channel;
pub mod circuit;
pub mod hamiltonian;
mod linalg;
pub mod mitigation;
pub mod noise;
pub mod oracle;
pub mod scalar;
pub mod simulator;
pub mod sweep;

pub use scalar::{EigScalar, Real};

use thiserror::Error;

/// Complex amplitude in working precision.
pub type C64 = num_complex::Complex<f64>;
/// Complex amplitude in single precision.
pub type C32 = num_complex::Complex<f32>;

pub type HamiltonianSpec = hamiltonian::HamiltonianSpec<f64>;
pub type DenseOperator = hamiltonian::DenseOperator<f64>;
pub type ChannelParams = channel::ChannelParams<f64>;
pub type Circuit = circuit::Circuit<f64>;
pub type StateVector = simulator::StateVector<f64>;
pub type NoiseModel = noise::NoiseModel<f64>;
pub type SpectralReport = oracle::SpectralReport<f64>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (|norm - 1| = {0:e})")]
    NotNormalized(f64),
    #[error("eigensolver failed to converge (info = {0})")]
    EigNonConvergence(i32),
    #[error("singular linear system (condition estimate {0:e})")]
    SingularSystem(f64),
    #[error("bisection bracket failure: {0}")]
    BracketFailure(String),
    #[error("spectrum is not in the broken phase (max |Im| = {0:e})")]
    UnbrokenPhase(f64),
    #[error("no data after filtering")]
    NoData,
    #[error("statevector norm drifted to {0} mid-run")]
    NormFailure(f64),
    #[error("unknown gate kind: {0}")]
    UnknownGate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
