use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SseError};
use crate::pauli::{ObservableSum, PauliString, Phase};
use crate::sim::circuit::{Circuit, Gate};

pub const MAX_STATE_QUBITS: usize = 20;
const NORM_TOL: f64 = 1e-10;

pub(crate) type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Applies `u` to the amplitude pairs that differ in `bit`.
pub(crate) fn apply_1q(amps: &mut [Complex64], bit: usize, u: &Mat2) {
    let m = 1usize << bit;
    for i in 0..amps.len() {
        if i & m == 0 {
            let (a, b) = (amps[i], amps[i | m]);
            amps[i] = u[0][0] * a + u[0][1] * b;
            amps[i | m] = u[1][0] * a + u[1][1] * b;
        }
    }
}

pub(crate) fn apply_cnot(amps: &mut [Complex64], control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

pub(crate) fn apply_cz(amps: &mut [Complex64], a: usize, b: usize) {
    let m = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & m == m {
            *amp = -*amp;
        }
    }
}

pub(crate) fn conj2(u: &Mat2) -> Mat2 {
    [[u[0][0].conj(), u[0][1].conj()], [u[1][0].conj(), u[1][1].conj()]]
}

/// `(-1)^{popcount(z & b)}` as a bool flag: true means negative.
#[inline]
pub(crate) fn z_sign(z: u64, b: usize) -> bool {
    (z & b as u64).count_ones() & 1 == 1
}

/// Pure n-qubit state. Qubit `q` is bit `q` of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_state_qubits(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Takes amplitudes that are already normalized within 1e-10.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_state_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(SseError::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        let s = StateVector { n_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOL {
            return Err(SseError::InvalidParameter(format!("state norm² {} is not 1", s.norm_sqr())));
        }
        Ok(s)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SseError::InvalidParameter("cannot normalize a zero vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(n_qubits, amps)
    }

    /// Normalized complex-Gaussian amplitudes (Haar-distributed state).
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self> {
        check_state_qubits(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n_qubits)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::normalized(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn apply_matrix(&mut self, qubit: usize, u: &Mat2) {
        apply_1q(&mut self.amps, qubit, u);
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Cnot { control, target } => apply_cnot(&mut self.amps, control, target),
            Gate::Cz(a, b) => apply_cz(&mut self.amps, a, b),
            ref g => {
                let (q, u) = g.single_qubit_matrix().expect("single-qubit gate");
                apply_1q(&mut self.amps, q, &u);
            }
        }
        Ok(())
    }

    /// Unitary evolution gate by gate.
    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: c.n_qubits() });
        }
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() <= NORM_TOL);
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩` including the imaginary residue.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: p.n_qubits() });
        }
        Ok(self.pauli_expectation_unchecked(p))
    }

    pub(crate) fn pauli_expectation_unchecked(&self, p: &PauliString) -> Complex64 {
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let mut acc = ZERO;
        for (b, amp) in self.amps.iter().enumerate() {
            let term = self.amps[b ^ x].conj() * amp;
            if z_sign(z, b) {
                acc -= term;
            } else {
                acc += term;
            }
        }
        Phase::from_exponent(p.y_count() as i64).apply(acc)
    }

    /// `Σ_k β_k ⟨P_k⟩`, discarding the imaginary residue of each term.
    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: obs.n_qubits() });
        }
        Ok(obs.terms().iter().map(|(c, w)| c * self.pauli_expectation_unchecked(w).re).sum())
    }
}

fn check_state_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATE_QUBITS {
        return Err(SseError::QubitCount(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(s: &str) -> ObservableSum {
        ObservableSum::parse(s).unwrap()
    }

    fn bell() -> StateVector {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap())
            .unwrap();
        s
    }

    #[test]
    fn hadamard_makes_plus() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::H(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - r).abs() < 1e-15);
        assert!(s.expectation(&obs("1 Z")).unwrap().abs() < 1e-15);
        assert!((s.expectation(&obs("1 X")).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_state_correlations() {
        let s = bell();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((s.amplitudes()[3].re - r).abs() < 1e-15);
        assert!((s.expectation(&obs("1 ZZ")).unwrap() - 1.0).abs() < 1e-14);
        assert!((s.expectation(&obs("1 XX")).unwrap() - 1.0).abs() < 1e-14);
        assert!((s.expectation(&obs("1 YY")).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rz_keeps_z_eigenstate() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::Rz(0, 0.7)).unwrap();
        assert!((s.expectation(&obs("1 Z")).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn y_expectation_sign() {
        // Rx(-π/2)|0⟩ = (|0⟩ + i|1⟩)/√2, the +1 eigenstate of Y.
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&Gate::Rx(0, -std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((s.expectation(&obs("1 Y")).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_state_is_normalized_and_seeded() {
        let a = StateVector::random(4, 11).unwrap();
        let b = StateVector::random(4, 11).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        assert_ne!(a, StateVector::random(4, 12).unwrap());
    }

    #[test]
    fn out_of_range_target_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_gate(&Gate::X(2)), Err(SseError::TargetOutOfRange { .. })));
    }

    #[test]
    fn norm_check_on_construction() {
        assert!(StateVector::from_amplitudes(1, vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
    }
}
