use crate::error::{Result, SseError};
use crate::exec;
use crate::pauli::{ObservableSum, PauliString};
use crate::shadow::Estimator;

/// Expansion operators ranked by the energy gain of the 2-dimensional
/// expansion `{I, G}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterResult {
    identity: PauliString,
    /// Non-identity operators, `ΔE` descending; ties keep basis order.
    pub ranked: Vec<(PauliString, f64)>,
    /// Kept operator count including the identity.
    pub k_kept: usize,
}

impl FilterResult {
    /// The identity followed by the `k_kept - 1` best-ranked operators.
    pub fn kept(&self) -> Vec<PauliString> {
        std::iter::once(self.identity)
            .chain(self.ranked.iter().take(self.k_kept - 1).map(|(g, _)| *g))
            .collect()
    }

    /// Same ranking cut at a different `K` (capped at the basis size).
    pub fn with_keep(&self, keep: usize) -> Result<FilterResult> {
        if keep == 0 {
            return Err(SseError::InvalidParameter("keep count must be at least 1".into()));
        }
        Ok(FilterResult { k_kept: keep.min(self.ranked.len() + 1), ..self.clone() })
    }

    /// Basis size `N_G` the ranking was built from.
    pub fn basis_len(&self) -> usize {
        self.ranked.len() + 1
    }
}

/// Lower root of `det(H₂ - E S₂) = 0` for `S₂ = [[1, s], [s, 1]]`,
/// `H₂ = [[a, b], [b*, c]]`, or `None` when `S₂` is numerically singular.
pub fn min_pencil_eigenvalue(s: f64, a: f64, b: num_complex::Complex64, c: f64, floor: f64) -> Option<f64> {
    if s.abs() >= 1.0 - floor {
        return None;
    }
    let qa = 1.0 - s * s;
    let qb = a + c - 2.0 * s * b.re;
    let qc = a * c - b.norm_sqr();
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    Some((qb - disc.sqrt()) / (2.0 * qa))
}

/// Ranks every non-identity operator of `basis` by `ΔE = ⟨H⟩ - E_min` of
/// its `{I, G}` expansion and keeps the identity plus the best `keep - 1`.
///
/// The 2×2 matrices are Hermitized before solving: `s = Re⟨G⟩` and
/// `⟨HG⟩ → Σ_k β_k φ_k Re v(P_k)` where `H_k G = φ_k P_k`. Operators whose
/// overlap is singular within `floor` get `ΔE = 0`.
pub fn local_filter(
    basis: &[PauliString],
    h: &ObservableSum,
    est: &Estimator,
    keep: usize,
    floor: f64,
) -> Result<FilterResult> {
    if keep == 0 {
        return Err(SseError::InvalidParameter("keep count must be at least 1".into()));
    }
    let n = est.n_qubits();
    if h.n_qubits() != n {
        return Err(SseError::QubitMismatch { left: n, right: h.n_qubits() });
    }
    if let Some(g) = basis.iter().find(|g| g.n_qubits() != n) {
        return Err(SseError::QubitMismatch { left: n, right: g.n_qubits() });
    }
    let identity = PauliString::identity(n)?;
    if !basis.contains(&identity) {
        return Err(SseError::MissingIdentity);
    }
    let terms: Vec<(f64, f64)> =
        h.terms().iter().map(|(beta, w)| Ok((*beta, est.word_value(w)?.re))).collect::<Result<_>>()?;
    let energy: f64 = terms.iter().map(|(beta, v)| beta * v).sum();

    let candidates: Vec<PauliString> = basis.iter().copied().filter(|g| !g.is_identity()).collect();
    let gains = exec::map_slice(&candidates, |g| {
        let s = est.word_value(g).expect("qubit count checked").re;
        let mut b = num_complex::Complex64::new(0.0, 0.0);
        let mut c = 0.0;
        for ((beta, hk), (_, v)) in h.terms().iter().zip(&terms) {
            c += if hk.commutes_unchecked(g) { beta * v } else { -beta * v };
            let p = hk.mul_unchecked(g);
            let pv = est.word_value(&p.word).expect("qubit count checked").re;
            b += p.phase.to_complex() * (beta * pv);
        }
        match min_pencil_eigenvalue(s, energy, b, c, floor) {
            Some(e) => energy - e,
            None => 0.0,
        }
    });
    let mut ranked: Vec<(PauliString, f64)> = candidates.into_iter().zip(gains).collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1));
    let k_kept = keep.min(ranked.len() + 1);
    Ok(FilterResult { identity, ranked, k_kept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::enumerate_up_to_weight;
    use crate::shadow::EstimatorMode;
    use crate::sim::{ground_state, QuantumState, StateVector};

    fn basis(words: &[&str]) -> Vec<PauliString> {
        words.iter().map(|w| w.parse().unwrap()).collect()
    }

    fn gains(h: &str, state: QuantumState, words: &[&str]) -> FilterResult {
        let h = ObservableSum::parse(h).unwrap();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &state, 0).unwrap();
        local_filter(&basis(words), &h, &est, 10, 1e-12).unwrap()
    }

    #[test]
    fn x_hamiltonian_on_zero() {
        let f = gains("1 X", StateVector::zero(1).unwrap().into(), &["I", "X"]);
        assert!((f.ranked[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_hamiltonian_flip() {
        let f = gains("1 Z", StateVector::zero(1).unwrap().into(), &["I", "X"]);
        assert!((f.ranked[0].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_overlap_is_skipped() {
        // ⟨Z⟩ = 1 on |0⟩, so {I, Z} spans one state.
        let f = gains("1 X", StateVector::zero(1).unwrap().into(), &["I", "Z", "Y"]);
        assert_eq!(f.ranked.iter().find(|(g, _)| g.to_string() == "Z").unwrap().1, 0.0);
    }

    #[test]
    fn ground_state_gains_nothing() {
        let h = ObservableSum::parse("1 XX\n0.5 ZI\n-0.3 IZ\n0.2 YY").unwrap();
        let (_, gs) = ground_state(&h).unwrap();
        let st: QuantumState = gs.into();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &st, 0).unwrap();
        let f = local_filter(&enumerate_up_to_weight(2, 2).unwrap(), &h, &est, 16, 1e-12).unwrap();
        assert!(f.ranked.iter().all(|(_, de)| de.abs() <= 1e-9));
    }

    #[test]
    fn identity_kept_and_cap() {
        let st: QuantumState = StateVector::random(2, 3).unwrap().into();
        let h = ObservableSum::parse("1 XX\n0.5 ZI").unwrap();
        let mode = EstimatorMode::Exact;
        let est = Estimator::new(&mode, &st, 0).unwrap();
        let b = enumerate_up_to_weight(2, 1).unwrap();
        let f = local_filter(&b, &h, &est, 100, 1e-12).unwrap();
        assert_eq!(f.k_kept, 7);
        let kept = f.with_keep(3).unwrap().kept();
        assert!(kept[0].is_identity());
        assert_eq!(kept.len(), 3);
        assert!(f.ranked.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(f.ranked.iter().all(|(_, de)| *de >= -1e-9));
        assert_eq!(local_filter(&b[1..], &h, &est, 3, 1e-12), Err(SseError::MissingIdentity));
    }
}
