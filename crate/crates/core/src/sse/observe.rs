use crate::error::{Result, SseError};
use crate::linalg::quadratic_form;
use crate::pauli::ObservableSum;
use crate::shadow::Estimator;
use crate::sse::{assemble_matrices, SseMatrices, SseResult};

/// `w† O w / w† S w` on the expansion basis, with `O` and `S` estimated
/// from the same estimator.
pub fn reconstruct_observable(o: &ObservableSum, result: &SseResult, m: &SseMatrices, est: &Estimator) -> Result<f64> {
    if result.weights.len() != m.k() {
        return Err(SseError::InvalidParameter(format!(
            "{} weights for a basis of {}",
            result.weights.len(),
            m.k()
        )));
    }
    let om = assemble_matrices(&m.basis, o, est, None)?;
    let norm = quadratic_form(&om.s, &result.weights).re;
    if norm <= 1e-12 {
        return Err(SseError::ZeroNormalization(norm));
    }
    Ok(quadratic_form(&om.h, &result.weights).re / norm)
}
