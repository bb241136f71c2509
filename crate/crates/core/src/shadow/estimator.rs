use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{theoretical_variance, ShadowSet};
use crate::error::{Result, SseError};
use crate::exec;
use crate::pauli::{PauliString, PhasedPauli};
use crate::sim::QuantumState;

/// How expectation values of Pauli words are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorMode {
    Exact,
    /// Exact value plus complex Gaussian noise of total standard deviation ε.
    GaussianEps(f64),
    /// Exact value plus real Gaussian noise with the shadow variance
    /// `(3^w - ⟨P⟩²) / N_s`.
    ShadowVariance(u64),
    SampledShadows(Arc<ShadowSet>),
}

impl EstimatorMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            EstimatorMode::GaussianEps(e) if !(*e > 0.0 && e.is_finite()) => {
                Err(SseError::InvalidParameter(format!("epsilon must be positive, got {e}")))
            }
            EstimatorMode::ShadowVariance(0) => Err(SseError::InvalidParameter("N_s must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, EstimatorMode::Exact)
    }

    /// Snapshot count for the shadow-based modes.
    pub fn snapshots(&self) -> Option<u64> {
        match self {
            EstimatorMode::ShadowVariance(n) => Some(*n),
            EstimatorMode::SampledShadows(s) => Some(s.len() as u64),
            _ => None,
        }
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorMode::Exact => write!(f, "exact"),
            EstimatorMode::GaussianEps(e) => write!(f, "gauss:{e}"),
            EstimatorMode::ShadowVariance(n) => write!(f, "shadowvar:{n}"),
            EstimatorMode::SampledShadows(s) => write!(f, "sampled:{}", s.len()),
        }
    }
}

/// Estimates Pauli expectations on one state under one mode.
///
/// The noisy value of a word depends only on `(noise_seed, word)`: each word
/// owns a ChaCha stream derived from its masks. Repeated words within an
/// experiment therefore see the same value, and the result is independent of
/// evaluation order and thread count. The identity is exactly 1 in every mode.
#[derive(Clone, Debug)]
pub struct Estimator<'a> {
    mode: &'a EstimatorMode,
    state: &'a QuantumState,
    noise_seed: u64,
}

fn word_stream(p: &PauliString) -> u64 {
    if p.n_qubits() <= 32 {
        p.x_mask() | p.z_mask() << 32
    } else {
        // splitmix64 finalizer over both masks
        let mut h = p.x_mask() ^ p.z_mask().rotate_left(29).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^ (h >> 31)
    }
}

impl<'a> Estimator<'a> {
    pub fn new(mode: &'a EstimatorMode, state: &'a QuantumState, noise_seed: u64) -> Result<Self> {
        mode.validate()?;
        if let EstimatorMode::SampledShadows(s) = mode {
            if s.n_qubits() != state.n_qubits() {
                return Err(SseError::QubitMismatch { left: state.n_qubits(), right: s.n_qubits() });
            }
        }
        Ok(Estimator { mode, state, noise_seed })
    }

    pub fn mode(&self) -> &EstimatorMode {
        self.mode
    }

    pub fn state(&self) -> &QuantumState {
        self.state
    }

    pub fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    fn rng(&self, p: &PauliString) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
        rng.set_stream(word_stream(p));
        rng
    }

    fn value_unchecked(&self, p: &PauliString) -> Complex64 {
        if p.is_identity() {
            return Complex64::new(1.0, 0.0);
        }
        match self.mode {
            EstimatorMode::Exact => self.state.pauli_expectation_unchecked(p),
            EstimatorMode::GaussianEps(eps) => {
                let exact = self.state.pauli_expectation_unchecked(p);
                let normal = Normal::new(0.0, eps / std::f64::consts::SQRT_2).expect("validated epsilon");
                let mut rng = self.rng(p);
                let re = normal.sample(&mut rng);
                let im = normal.sample(&mut rng);
                exact + Complex64::new(re, im)
            }
            EstimatorMode::ShadowVariance(ns) => {
                let exact = self.state.pauli_expectation_unchecked(p).re;
                let var = theoretical_variance(p.weight(), exact).max(0.0) / *ns as f64;
                let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
                Complex64::new(exact + normal.sample(&mut self.rng(p)), 0.0)
            }
            EstimatorMode::SampledShadows(set) => Complex64::new(set.estimate_word(p), 0.0),
        }
    }

    /// Estimate of a bare word, before any phase.
    pub fn word_value(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_qubits() != self.n_qubits() {
            return Err(SseError::QubitMismatch { left: self.n_qubits(), right: p.n_qubits() });
        }
        Ok(self.value_unchecked(p))
    }

    /// Estimate of `φ·P`; the phase multiplies the word estimate.
    pub fn estimate(&self, p: &PhasedPauli) -> Result<Complex64> {
        Ok(p.phase.apply(self.word_value(&p.word)?))
    }

    /// Word estimates for many words, each distinct word evaluated once.
    pub fn word_values(&self, words: &[PauliString]) -> Result<HashMap<PauliString, Complex64>> {
        let mut unique: Vec<PauliString> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for w in words {
            if w.n_qubits() != self.n_qubits() {
                return Err(SseError::QubitMismatch { left: self.n_qubits(), right: w.n_qubits() });
            }
            if seen.insert(*w) {
                unique.push(*w);
            }
        }
        let values = exec::map_slice(&unique, |w| self.value_unchecked(w));
        Ok(unique.into_iter().zip(values).collect())
    }

    pub fn batch_estimate(&self, ps: &[PhasedPauli]) -> Result<Vec<Complex64>> {
        let words: Vec<PauliString> = ps.iter().map(|p| p.word).collect();
        let values = self.word_values(&words)?;
        Ok(ps.iter().map(|p| p.phase.apply(values[&p.word])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Phase;
    use crate::sim::{Circuit, Gate, StateVector};

    fn bell() -> QuantumState {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap())
            .unwrap();
        s.into()
    }

    fn pp(s: &str) -> PhasedPauli {
        s.parse::<PauliString>().unwrap().into()
    }

    #[test]
    fn exact_bell_zz() {
        let st = bell();
        let mode = EstimatorMode::Exact;
        let e = Estimator::new(&mode, &st, 0).unwrap();
        assert!((e.estimate(&pp("ZZ")).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        let st = bell();
        assert!(Estimator::new(&EstimatorMode::GaussianEps(0.0), &st, 0).is_err());
        assert!(Estimator::new(&EstimatorMode::GaussianEps(-1.0), &st, 0).is_err());
        assert!(Estimator::new(&EstimatorMode::ShadowVariance(0), &st, 0).is_err());
    }

    #[test]
    fn batch_contract() {
        let st: QuantumState = StateVector::zero(1).unwrap().into();
        let mode = EstimatorMode::Exact;
        let e = Estimator::new(&mode, &st, 0).unwrap();
        let v = e.batch_estimate(&[pp("I"), pp("Z")]).unwrap();
        assert_eq!(v, vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);

        let st = StateVector::random(3, 4).unwrap().into();
        for mode in [EstimatorMode::Exact, EstimatorMode::GaussianEps(0.1), EstimatorMode::ShadowVariance(100)] {
            let e = Estimator::new(&mode, &st, 17).unwrap();
            let batch = [pp("XYZ"), pp("ZZI"), pp("XYZ"), PhasedPauli::new(Phase::MINUS_I, "ZZI".parse().unwrap())];
            let v = e.batch_estimate(&batch).unwrap();
            assert_eq!(v[0], v[2]);
            assert_eq!(v[3], Phase::MINUS_I.apply(v[1]));
            for (p, b) in batch.iter().zip(&v) {
                assert_eq!(e.estimate(p).unwrap(), *b);
            }
        }
    }

    #[test]
    fn identity_is_exact_in_noisy_modes() {
        let st = bell();
        for mode in [EstimatorMode::GaussianEps(0.5), EstimatorMode::ShadowVariance(1)] {
            let e = Estimator::new(&mode, &st, 3).unwrap();
            assert_eq!(e.estimate(&pp("II")).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn gaussian_noise_is_unbiased() {
        // Averaging over noise seeds; the tolerance is 5σ of the mean.
        let st = bell();
        let mode = EstimatorMode::GaussianEps(1e-3);
        let reps = 10_000;
        let mut re = 0.0;
        let mut im_sq = 0.0;
        for seed in 0..reps {
            let v = Estimator::new(&mode, &st, seed).unwrap().estimate(&pp("XX")).unwrap();
            re += v.re;
            im_sq += v.im * v.im;
        }
        assert!((re / reps as f64 - 1.0).abs() <= 5.0 * 1e-3 / 100.0);
        let im_var = im_sq / reps as f64;
        assert!((im_var / 0.5e-6 - 1.0).abs() < 0.1, "{im_var}");
    }

    #[test]
    fn shadow_variance_spread() {
        let st = bell();
        let mode = EstimatorMode::ShadowVariance(1_000_000);
        // XZ has zero expectation on the Bell state.
        let vals: Vec<f64> =
            (0..4000).map(|s| Estimator::new(&mode, &st, s).unwrap().estimate(&pp("XZ")).unwrap().re).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt();
        assert!((std / 3e-3 - 1.0).abs() < 0.1, "{std}");
    }

    #[test]
    fn sampled_mode_uses_shadow_set() {
        let st = bell();
        let set = Arc::new(ShadowSet::sample(&st, 2000, 1).unwrap());
        let mode = EstimatorMode::SampledShadows(set.clone());
        let e = Estimator::new(&mode, &st, 0).unwrap();
        let w: PauliString = "ZZ".parse().unwrap();
        assert_eq!(e.estimate(&w.into()).unwrap().re, set.estimate_word(&w));
        let other: QuantumState = StateVector::zero(3).unwrap().into();
        assert!(Estimator::new(&mode, &other, 0).is_err());
    }
}
