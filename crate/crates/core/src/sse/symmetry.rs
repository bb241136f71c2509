use crate::error::{Result, SseError};
use crate::linalg::{eigh, hermitian_part};
use crate::pauli::{ObservableSum, PauliString};
use crate::sse::gevp::{regularize, whitening};
use crate::sse::SseMatrices;

/// Keeps the operators that commute with every term of `a`.
///
/// Operators anticommuting with every non-identity term are dropped. An
/// operator that commutes with some terms and anticommutes with others has
/// no definite commutation with `a`; that case is reported as
/// [`SseError::MixedSymmetryCommutation`] so the caller can project instead.
pub fn symmetry_commuting_filter(basis: &[PauliString], a: &ObservableSum) -> Result<Vec<PauliString>> {
    let mut kept = Vec::new();
    for g in basis {
        if g.n_qubits() != a.n_qubits() {
            return Err(SseError::QubitMismatch { left: a.n_qubits(), right: g.n_qubits() });
        }
        let mut commuting = 0;
        let mut anti = 0;
        for (_, t) in a.terms() {
            if t.commutes_unchecked(g) {
                commuting += 1;
            } else {
                anti += 1;
            }
        }
        match (commuting, anti) {
            (_, 0) => kept.push(*g),
            (0, _) => {}
            _ => return Err(SseError::MixedSymmetryCommutation(g.to_string())),
        }
    }
    Ok(kept)
}

/// Restricts the problem to the `target` eigenspace of the symmetry matrix.
///
/// `S` is regularized with the same floor rule as the energy solve, `A` is
/// whitened, and its eigenvectors with `|a - target| ≤ tol` define the
/// transformation `T = Q D^{-1/2} U`. The returned matrices are `T† S T`,
/// `T† H T`, `T† A T`, with `T` recorded so weights map back to the basis.
/// A relative slack of `1e-10 (1 + |target|)` absorbs rounding, so `tol = 0`
/// selects an exactly degenerate sector.
pub fn symmetry_project(m: &SseMatrices, target: f64, tol: f64, floor: f64) -> Result<SseMatrices> {
    let a = m
        .a
        .as_ref()
        .ok_or_else(|| SseError::InvalidParameter("symmetry matrix was not assembled".into()))?;
    if !(tol >= 0.0) {
        return Err(SseError::InvalidParameter(format!("tolerance must be non-negative, got {tol}")));
    }
    let (q, d) = regularize(&m.s, floor)?;
    let w = whitening(&q, &d);
    let eig = eigh(&hermitian_part(&(w.adjoint() * a * &w)));
    let slack = tol + 1e-10 * (1.0 + target.abs());
    let cols: Vec<usize> = (0..eig.values.len()).filter(|&i| (eig.values[i] - target).abs() <= slack).collect();
    if cols.is_empty() {
        return Err(SseError::EmptySymmetrySector);
    }
    let t = w * eig.vectors.select_columns(&cols);
    let project = |x: &crate::linalg::CMat| hermitian_part(&(t.adjoint() * x * &t));
    Ok(SseMatrices {
        basis: m.basis.clone(),
        s: project(&m.s),
        h: project(&m.h),
        a: Some(project(a)),
        transform: Some(match &m.transform {
            Some(prev) => prev * &t,
            None => t.clone(),
        }),
        e_direct: m.e_direct,
        exact: m.exact,
    })
}
