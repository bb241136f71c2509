use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::pauli::{enumerate_up_to_weight, ObservableSum, PauliString};
use crate::shadow::Estimator;
use crate::sse::{
    assemble_matrices, clamp_to_direct, local_filter, regularized_gevp, symmetry_commuting_filter, symmetry_project,
    FilterResult, RegularizationConfig, SseMatrices, SseResult,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SymmetryMethod {
    /// Keep only basis operators commuting with the symmetry; falls back to
    /// projection when commutation is mixed.
    Filter,
    /// Solve within the `target` eigenspace of the assembled symmetry matrix.
    Project,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryConfig {
    pub operator: ObservableSum,
    pub target: f64,
    pub tol: f64,
    pub method: SymmetryMethod,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub max_weight: usize,
    /// Cap on `N_G`, taking operators in enumeration order.
    pub max_operators: Option<usize>,
    /// `K`, including the identity.
    pub keep: usize,
    pub regularization: RegularizationConfig,
    pub symmetry: Option<SymmetryConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_weight: 2,
            max_operators: None,
            keep: 50,
            regularization: RegularizationConfig::default(),
            symmetry: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub basis_size: usize,
    pub filter: FilterResult,
    pub matrices: SseMatrices,
    pub result: SseResult,
    /// True when the symmetry sector was imposed by projection.
    pub projected: bool,
}

/// Candidate operators: all words up to `max_weight`, capped, then reduced
/// by the commuting filter when that symmetry method is selected. The second
/// value says whether projection is still required.
pub fn expansion_basis(n_qubits: usize, cfg: &PipelineConfig) -> Result<(Vec<PauliString>, bool)> {
    let mut basis = enumerate_up_to_weight(n_qubits, cfg.max_weight)?;
    if let Some(cap) = cfg.max_operators {
        basis.truncate(cap.max(1));
    }
    match &cfg.symmetry {
        None => Ok((basis, false)),
        Some(sym) if sym.method == SymmetryMethod::Project => Ok((basis, true)),
        Some(sym) => match symmetry_commuting_filter(&basis, &sym.operator) {
            Ok(kept) => Ok((kept, false)),
            Err(SseError::MixedSymmetryCommutation(_)) => Ok((basis, true)),
            Err(e) => Err(e),
        },
    }
}

/// Assembles on `kept`, applies the symmetry projection if requested, solves
/// and clamps.
pub fn solve_kept(
    kept: &[PauliString],
    h: &ObservableSum,
    cfg: &PipelineConfig,
    project: bool,
    est: &Estimator,
) -> Result<(SseMatrices, SseResult)> {
    let sym = if project { cfg.symmetry.as_ref() } else { None };
    let mut m = assemble_matrices(kept, h, est, sym.map(|s| &s.operator))?;
    if let Some(s) = sym {
        m = symmetry_project(&m, s.target, s.tol, cfg.regularization.eigenvalue_floor)?;
    }
    let mut r = regularized_gevp(&m, &cfg.regularization)?;
    r.e_reported = clamp_to_direct(r.e_sse, r.e_direct);
    Ok((m, r))
}

/// Enumerate, filter, assemble, solve and clamp.
///
/// `filter_est` ranks the operators when the filter should see independent
/// data; by default the assembly estimator is reused.
pub fn run_pipeline(
    h: &ObservableSum,
    cfg: &PipelineConfig,
    est: &Estimator,
    filter_est: Option<&Estimator>,
) -> Result<PipelineOutput> {
    let n = est.n_qubits();
    if h.n_qubits() != n {
        return Err(SseError::QubitMismatch { left: n, right: h.n_qubits() });
    }
    let (basis, project) = expansion_basis(n, cfg)?;
    let filter = local_filter(&basis, h, filter_est.unwrap_or(est), cfg.keep, cfg.regularization.eigenvalue_floor)?;
    let (matrices, result) = solve_kept(&filter.kept(), h, cfg, project, est)?;
    Ok(PipelineOutput { basis_size: basis.len(), filter, matrices, result, projected: project })
}

/// `Σ |w_i|²` grouped by the Pauli weight of `basis[i]`.
pub fn weight_histogram(basis: &[PauliString], weights: &[Complex64]) -> Vec<f64> {
    let max = basis.iter().map(|g| g.weight()).max().unwrap_or(0);
    let mut hist = vec![0.0; max + 1];
    for (g, w) in basis.iter().zip(weights) {
        hist[g.weight()] += w.norm_sqr();
    }
    hist
}
