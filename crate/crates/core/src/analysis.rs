//! Shot-noise propagation bound and overlap-spectrum diagnostics.

use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::linalg::{eigvalsh, CMat};
use crate::pauli::ObservableSum;
use crate::sim::operator_norm;
use crate::sse::{regularize, SseMatrices};

/// Inputs of [`shot_noise_bound`].
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBoundInput {
    pub n_snapshots: f64,
    /// Largest Hamiltonian term weight.
    pub w: usize,
    /// Largest expansion-operator weight.
    pub w_prime: usize,
    pub k: usize,
    /// `‖S⁻¹‖₂` on the regularized overlap.
    pub s_inv_frobenius: f64,
    /// Upper bound on `‖H‖_∞`.
    pub h_inf_upper: f64,
}

/// `ε_M² ≤ N_s⁻¹ 3^{2w'} K [‖H‖_∞ ‖S⁻¹‖₂⁴ + 3^w ‖S⁻¹‖₂²]`.
pub fn shot_noise_bound(b: &NoiseBoundInput) -> f64 {
    let s2 = b.s_inv_frobenius * b.s_inv_frobenius;
    let three = |e: usize| 3f64.powi(e as i32);
    three(2 * b.w_prime) * b.k as f64 * (b.h_inf_upper * s2 * s2 + three(b.w) * s2) / b.n_snapshots
}

/// Frobenius norm of the inverse of the regularized overlap:
/// `sqrt(Σ 1/λ²)` over eigenvalues above `floor`.
pub fn s_inv_frobenius(s: &CMat, floor: f64) -> Result<f64> {
    let (_, d) = regularize(s, floor)?;
    Ok(d.iter().map(|l| 1.0 / (l * l)).sum::<f64>().sqrt())
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// False for the triangle-inequality bound.
    pub exact: bool,
}

/// `Σ_k |β_k| ≥ ‖H‖_∞`.
pub fn h_norm_upper(h: &ObservableSum) -> NormEstimate {
    NormEstimate { value: h.terms().iter().map(|(c, _)| c.abs()).sum(), exact: false }
}

/// Exact `‖H‖_∞` when dense diagonalization is possible, else the bound.
pub fn h_norm(h: &ObservableSum) -> NormEstimate {
    match operator_norm(h) {
        Ok(value) => NormEstimate { value, exact: true },
        Err(_) => h_norm_upper(h),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Overlap eigenvalues, descending, negatives included.
    pub eigenvalues: Vec<f64>,
    pub floor: f64,
    pub above_floor: usize,
    pub negative: usize,
}

impl SpectrumReport {
    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

pub fn spectrum_report(s: &CMat, floor: f64) -> SpectrumReport {
    let mut eigenvalues = eigvalsh(s);
    eigenvalues.reverse();
    SpectrumReport {
        above_floor: eigenvalues.iter().filter(|&&l| l > floor).count(),
        negative: eigenvalues.iter().filter(|&&l| l < 0.0).count(),
        eigenvalues,
        floor,
    }
}

/// Summed per-entry sample variance of `M = S̃⁻¹ H̃` over repeated runs.
///
/// Every run is expressed in the reference's regularized frame
/// `T = Q D^{-1/2}` (from the reference `S` and `floor`), so
/// `S̃ = T† S_run T` and `H̃ = T† H_run T`; the frame itself does not jitter.
pub fn empirical_matrix_noise(runs: &[SseMatrices], reference: &SseMatrices, floor: f64) -> Result<f64> {
    if runs.len() < 2 {
        return Err(SseError::InvalidParameter("need at least two runs".into()));
    }
    let (q, d) = regularize(&reference.s, floor).map_err(|_| SseError::SingularReference)?;
    let mut t = q;
    for (j, dj) in d.iter().enumerate() {
        t.column_mut(j).scale_mut(1.0 / dj.sqrt());
    }
    let k = reference.dim();
    let mut ms = Vec::with_capacity(runs.len());
    for run in runs {
        if run.dim() != k {
            return Err(SseError::InvalidParameter(format!("run has dimension {}, reference {k}", run.dim())));
        }
        let s = t.adjoint() * &run.s * &t;
        let h = t.adjoint() * &run.h * &t;
        let m = s.lu().solve(&h).ok_or(SseError::SingularReference)?;
        ms.push(m);
    }
    let n = ms.len() as f64;
    let mean: CMat = ms.iter().fold(CMat::zeros(d.len(), d.len()), |acc, m| acc + m).unscale(n);
    let total: f64 = ms
        .iter()
        .map(|m| (m - &mean).iter().map(Complex64::norm_sqr).sum::<f64>())
        .sum();
    Ok(total / (n - 1.0))
}
