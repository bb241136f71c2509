//! The subspace-expansion pipeline: rank expansion operators, assemble the
//! overlap and Hamiltonian matrices, solve the regularized generalized
//! eigenvalue problem and clamp against the direct estimate.

mod assemble;
mod filter;
mod gevp;
mod observe;
mod pipeline;
mod symmetry;

pub use assemble::{assemble_matrices, SseMatrices};
pub use filter::{local_filter, min_pencil_eigenvalue, FilterResult};
pub use gevp::{
    choose_truncation, choose_truncation_first_minimum, clamp_to_direct, regularize, regularized_gevp, RegularizationConfig, SseResult, Truncation,
    TruncationRule,
};
pub use observe::reconstruct_observable;
pub use pipeline::{
    expansion_basis, run_pipeline, solve_kept, weight_histogram, PipelineConfig, PipelineOutput, SymmetryConfig,
    SymmetryMethod,
};
pub use symmetry::{symmetry_commuting_filter, symmetry_project};
