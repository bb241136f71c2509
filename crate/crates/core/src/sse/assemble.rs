use std::collections::{HashMap, HashSet};

use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::exec;
use crate::linalg::CMat;
use crate::pauli::{ObservableSum, PauliString};
use crate::shadow::Estimator;

/// Overlap and Hamiltonian matrices of an expansion basis.
#[derive(Clone, Debug)]
pub struct SseMatrices {
    pub basis: Vec<PauliString>,
    /// `S_ij = Tr(G_i G_j ρ)`.
    pub s: CMat,
    /// `H_ij = Tr(G_i H G_j ρ)`.
    pub h: CMat,
    /// Symmetry matrix `A_ij = Tr(G_i A G_j ρ)` when requested.
    pub a: Option<CMat>,
    /// Set after a symmetry projection: maps the current coordinates to
    /// coefficients on `basis`, so `s = T† S_basis T`.
    pub transform: Option<CMat>,
    /// Estimated `⟨H⟩` on the unexpanded state.
    pub e_direct: f64,
    /// True when the entries came from exact expectations.
    pub exact: bool,
}

impl SseMatrices {
    /// Wraps explicit matrices, e.g. for analysis of hand-built problems.
    pub fn from_parts(basis: Vec<PauliString>, s: CMat, h: CMat, e_direct: f64) -> Result<Self> {
        let k = basis.len();
        if s.shape() != (k, k) || h.shape() != (k, k) {
            return Err(SseError::InvalidParameter(format!(
                "matrices must be {k}×{k}, got S {:?} and H {:?}",
                s.shape(),
                h.shape()
            )));
        }
        Ok(SseMatrices { basis, s, h, a: None, transform: None, e_direct, exact: true })
    }

    /// Current problem dimension (after any projection).
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }
}

/// Hermitized matrix of `obs` on `basis`: entry `(i, j)` is
/// `Σ_k β_k φ_ijk Re v(P_ijk)` with `G_i O_k G_j = φ_ijk P_ijk`, which equals
/// `(M + M†)/2` of the raw estimates since a word always gets one value.
fn operator_matrix(basis: &[PauliString], obs: &[(f64, PauliString)], values: &HashMap<PauliString, Complex64>) -> CMat {
    let k = basis.len();
    let rows = exec::map_range(k, |i| {
        (i..k)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (beta, o) in obs {
                    let p = basis[i].sandwich_unchecked(o, &basis[j]);
                    acc += p.phase.to_complex() * (beta * values[&p.word].re);
                }
                acc
            })
            .collect::<Vec<_>>()
    });
    let mut m = CMat::zeros(k, k);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(i, i)].im = 0.0;
    }
    m
}

fn needed_words(basis: &[PauliString], obs: &[(f64, PauliString)]) -> Vec<PauliString> {
    let k = basis.len();
    let per_row = exec::map_range(k, |i| {
        let mut set = HashSet::new();
        for j in i..k {
            for (_, o) in obs {
                set.insert(basis[i].sandwich_unchecked(o, &basis[j]).word);
            }
        }
        let mut v: Vec<PauliString> = set.into_iter().collect();
        v.sort_by_key(|p| (p.x_mask(), p.z_mask()));
        v
    });
    let mut seen = HashSet::new();
    per_row.into_iter().flatten().filter(|w| seen.insert(*w)).collect()
}

/// Builds `S`, `H` and optionally the symmetry matrix `A` on `basis`.
///
/// Every distinct Pauli word is estimated once, so all entries sharing a word
/// see the same noisy value and `S`, `H`, `A` are exactly Hermitian.
pub fn assemble_matrices(
    basis: &[PauliString],
    h: &ObservableSum,
    est: &Estimator,
    symmetry: Option<&ObservableSum>,
) -> Result<SseMatrices> {
    if basis.is_empty() {
        return Err(SseError::InvalidParameter("expansion basis is empty".into()));
    }
    let n = est.n_qubits();
    for obs in std::iter::once(h).chain(symmetry) {
        if obs.n_qubits() != n {
            return Err(SseError::QubitMismatch { left: n, right: obs.n_qubits() });
        }
    }
    if let Some(g) = basis.iter().find(|g| g.n_qubits() != n) {
        return Err(SseError::QubitMismatch { left: n, right: g.n_qubits() });
    }
    let identity = [(1.0, PauliString::identity(n)?)];
    let mut words = needed_words(basis, &identity);
    words.extend(needed_words(basis, h.terms()));
    if let Some(a) = symmetry {
        words.extend(needed_words(basis, a.terms()));
    }
    words.extend(h.terms().iter().map(|(_, w)| *w));
    let values = est.word_values(&words)?;

    let e_direct = h.terms().iter().map(|(beta, w)| beta * values[w].re).sum();
    Ok(SseMatrices {
        basis: basis.to_vec(),
        s: operator_matrix(basis, &identity, &values),
        h: operator_matrix(basis, h.terms(), &values),
        a: symmetry.map(|a| operator_matrix(basis, a.terms(), &values)),
        transform: None,
        e_direct,
        exact: est.mode().is_exact(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_hermitian;
    use crate::pauli::{enumerate_up_to_weight, PhasedPauli};
    use crate::shadow::EstimatorMode;
    use crate::sim::{QuantumState, StateVector};

    fn words(ws: &[&str]) -> Vec<PauliString> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn identity_only_basis() {
        let st: QuantumState = StateVector::random(2, 1).unwrap().into();
        let h = ObservableSum::parse("0.7 XZ\n-0.2 YY").unwrap();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &st, 0).unwrap();
        let m = assemble_matrices(&words(&["II"]), &h, &est, None).unwrap();
        assert_eq!(m.s[(0, 0)], Complex64::new(1.0, 0.0));
        assert!((m.h[(0, 0)].re - st.expectation(&h).unwrap()).abs() < 1e-14);
        assert!((m.e_direct - m.h[(0, 0)].re).abs() < 1e-15);
    }

    #[test]
    fn zero_state_flip_basis() {
        let st: QuantumState = StateVector::zero(1).unwrap().into();
        let h = ObservableSum::parse("1 Z").unwrap();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &st, 0).unwrap();
        let m = assemble_matrices(&words(&["I", "X"]), &h, &est, None).unwrap();
        let c = |re| Complex64::new(re, 0.0);
        assert_eq!(m.s, CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]));
        assert_eq!(m.h, CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]));
    }

    #[test]
    fn exact_diagonal_is_one() {
        let st: QuantumState = StateVector::random(3, 6).unwrap().into();
        let h = ObservableSum::parse("1 XXI\n1 IZZ").unwrap();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &st, 0).unwrap();
        let m = assemble_matrices(&enumerate_up_to_weight(3, 2).unwrap(), &h, &est, None).unwrap();
        for i in 0..m.dim() {
            assert_eq!(m.s[(i, i)], Complex64::new(1.0, 0.0));
        }
    }

    /// Naive `(M + M†)/2` from per-entry phased estimates.
    fn naive(basis: &[PauliString], obs: &ObservableSum, est: &Estimator) -> CMat {
        let k = basis.len();
        let mut m = CMat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                for (beta, o) in obs.terms() {
                    let p: PhasedPauli = basis[i].sandwich(o, &basis[j]).unwrap();
                    m[(i, j)] += est.estimate(&p).unwrap() * *beta;
                }
            }
        }
        (&m + m.adjoint()).scale(0.5)
    }

    #[test]
    fn matches_naive_hermitization_under_noise() {
        let st: QuantumState = StateVector::random(3, 2).unwrap().into();
        let h = ObservableSum::parse("1 XYI\n-0.5 IZZ\n0.3 YIX").unwrap();
        let basis = enumerate_up_to_weight(3, 1).unwrap();
        for mode in [EstimatorMode::Exact, EstimatorMode::GaussianEps(0.05), EstimatorMode::ShadowVariance(50)] {
            let est = Estimator::new(&mode, &st, 4).unwrap();
            let m = assemble_matrices(&basis, &h, &est, Some(&h)).unwrap();
            assert!(is_hermitian(&m.s) && is_hermitian(&m.h));
            let ident = ObservableSum::single(PauliString::identity(3).unwrap());
            assert!((&m.s - naive(&basis, &ident, &est)).norm() < 1e-13);
            assert!((&m.h - naive(&basis, &h, &est)).norm() < 1e-13);
            assert!((m.a.as_ref().unwrap() - &m.h).norm() == 0.0);
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let st: QuantumState = StateVector::random(3, 2).unwrap().into();
        let h = ObservableSum::parse("1 XYI\n-0.5 IZZ").unwrap();
        let basis = enumerate_up_to_weight(3, 2).unwrap();
        let mode = EstimatorMode::GaussianEps(0.01);
        let est = Estimator::new(&mode, &st, 4).unwrap();
        let a = assemble_matrices(&basis, &h, &est, None).unwrap();
        let b = exec::sequential(|| assemble_matrices(&basis, &h, &est, None).unwrap());
        assert_eq!(a.s, b.s);
        assert_eq!(a.h, b.h);
    }
}
