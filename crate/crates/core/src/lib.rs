//! Shadow subspace expansion (SSE).
//!
//! Ground-state energies and other observables are estimated by post-processing
//! classical-shadow data through a regularized generalized eigenvalue problem
//! spanned by local Pauli operators acting on a prepared state.
//!
//! The crate is organised bottom-up:
//!
//! - [`pauli`]: exact bit-packed Pauli algebra and real-weighted Pauli sums.
//! - [`sim`]: state vectors, density matrices with depolarizing gate noise,
//!   Hamiltonian builders, a small VQE driver and exact diagonalization.
//! - [`shadow`]: local-Clifford classical shadows and the estimator modes used to
//!   feed noisy expectation values into the pipeline.
//! - [`sse`]: operator filtering, matrix assembly, regularized GEVP solution,
//!   clamping, observable reconstruction and symmetry handling.
//! - [`analysis`]: shot-noise propagation bound and spectrum diagnostics.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec`].

pub mod analysis;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod pauli;
pub mod shadow;
pub mod sim;
pub mod sse;

pub use error::{Result, SseError};
pub use num_complex::Complex64;
