//! Numerical engine for simulating Hamiltonians driven at several frequencies,
//! `H(t) = sum_m H_m exp(-i m.omega t)` through a Floquet-Hilbert space
//! embedding, qubitization-style block-encodings and oblivious amplitude
//! amplification, together with an independent time-ordered propagator used
//! to certify every result.
//!
//! Module map:
//!
//! - [`numkernel`]: dense complex linear algebra.
//! - [`hamiltonian`]: the Fourier-component model and its energy scales.
//! - [`propagator`]: reference time-ordered propagator.
//! - [`floquet`]: torus index sets, effective Hamiltonian, extracted and
//!   extended propagators, error bounds and Lieb-Robinson checks.
//! - [`blockenc`]: block-encodings of every oracle-built operator.
//! - [`qet`]: polynomial approximation of `exp(-i tau x)` and query counts.
//! - [`amplify`]: oblivious amplitude amplification.
//! - [`pipeline`]: end-to-end simulation and resource estimation.
//! - [`models`]: ready-made Hamiltonians used in tests and the CLI.

pub mod amplify;
pub mod blockenc;
pub mod error;
pub mod floquet;
pub mod hamiltonian;
pub mod models;
pub mod numkernel;
pub mod pipeline;
pub mod propagator;
pub mod qet;

pub use error::{Error, Result};
pub use hamiltonian::{EnergyScales, FourierComponent, FourierHamiltonian, FourierIndex};
pub use numkernel::{c64, CVector, ComplexMatrix, C64};
