use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::linalg::{eigvalsh, CMat};
use crate::pauli::{ObservableSum, PauliString, Phase};
use crate::sim::circuit::{Circuit, Gate};
use crate::sim::state::{apply_1q, apply_cnot, apply_cz, conj2, z_sign, Mat2, StateVector};

pub const MAX_DENSITY_QUBITS: usize = 10;

/// Depolarizing strengths: after a gate, its targets are replaced by the
/// maximally mixed state with probability `p1` (one qubit) or `p2` (two).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub const TWO_QUBIT_RATIO: f64 = 5.0;

    /// `p2 = 5 · p1`.
    pub fn new(p1: f64) -> Result<Self> {
        Self::with_p2(p1, Self::TWO_QUBIT_RATIO * p1)
    }

    pub fn with_p2(p1: f64, p2: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SseError::InvalidParameter(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        Ok(NoiseModel { p1, p2 })
    }

    pub fn noiseless() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0 }
    }

    /// Single-qubit strength (with `p2 = ratio · p1`) that gives an expected
    /// `lambda` faults per execution of `c`.
    pub fn for_fault_rate(c: &Circuit, lambda: f64, ratio: f64) -> Result<Self> {
        let (n1, n2) = c.gate_counts();
        let denom = n1 as f64 + ratio * n2 as f64;
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(SseError::InvalidParameter(format!("fault rate {lambda} must be non-negative")));
        }
        if lambda == 0.0 {
            return Ok(Self::noiseless());
        }
        if denom == 0.0 {
            return Err(SseError::InvalidParameter("circuit has no gates to fault".into()));
        }
        let p1 = lambda / denom;
        Self::with_p2(p1, ratio * p1).map_err(|_| {
            SseError::InvalidParameter(format!("fault rate {lambda} unreachable with probabilities in [0, 1]"))
        })
    }
}

/// Expected number of faults per execution: `n1 p1 + n2 p2`.
pub fn circuit_fault_rate(c: &Circuit, noise: &NoiseModel) -> f64 {
    let (n1, n2) = c.gate_counts();
    n1 as f64 * noise.p1 + n2 as f64 * noise.p2
}

/// Mixed state on at most [`MAX_DENSITY_QUBITS`] qubits.
///
/// Stored row-major, `data[r * 2^n + c] = ρ_{rc}`; in the flat index the
/// column occupies the low `n` bits and the row the high `n` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = psi.n_qubits();
        check_density_qubits(n)?;
        let a = psi.amplitudes();
        let d = a.len();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = a[r] * a[c].conj();
            }
        }
        Ok(DensityMatrix { n_qubits: n, data })
    }

    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::from_pure(&StateVector::zero(n_qubits)?)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_density_qubits(n_qubits)?;
        let d = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Ok(DensityMatrix { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> CMat {
        let d = self.dim();
        CMat::from_row_slice(d, d, &self.data)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += a[r].conj() * self.data[r * d + c] * a[c];
            }
        }
        acc.re
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Checks Hermiticity, unit trace and eigenvalues ≥ -1e-9.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let d = self.dim();
        for r in 0..d {
            for c in 0..d {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return Err(SseError::InvalidParameter("density matrix is not Hermitian".into()));
                }
            }
        }
        if (self.trace() - 1.0).norm() > tol {
            return Err(SseError::InvalidParameter(format!("trace {} is not 1", self.trace())));
        }
        if let Some(&min) = eigvalsh(&self.to_matrix()).first() {
            if min < -1e-9 {
                return Err(SseError::InvalidParameter(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }

    /// `ρ → U ρ U†` for a single-qubit `U`.
    pub(crate) fn apply_matrix(&mut self, q: usize, u: &Mat2) {
        let n = self.n_qubits;
        apply_1q(&mut self.data, q + n, u);
        apply_1q(&mut self.data, q, &conj2(u));
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let n = self.n_qubits;
        gate.validate(n)?;
        match *gate {
            Gate::Cnot { control, target } => {
                apply_cnot(&mut self.data, control + n, target + n);
                apply_cnot(&mut self.data, control, target);
            }
            Gate::Cz(a, b) => {
                apply_cz(&mut self.data, a + n, b + n);
                apply_cz(&mut self.data, a, b);
            }
            ref g => {
                let (q, u) = g.single_qubit_matrix().expect("single-qubit gate");
                self.apply_matrix(q, &u);
            }
        }
        Ok(())
    }

    /// `ρ → (1-p) ρ + p (I/2 ⊗ Tr_q ρ)`.
    pub fn depolarize_1q(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let d = self.dim();
        let m = 1usize << q;
        for r in (0..d).filter(|r| r & m == 0) {
            for c in (0..d).filter(|c| c & m == 0) {
                let i00 = r * d + c;
                let i11 = (r | m) * d + (c | m);
                let i01 = r * d + (c | m);
                let i10 = (r | m) * d + c;
                let avg = (self.data[i00] + self.data[i11]) * 0.5;
                self.data[i00] = self.data[i00] * (1.0 - p) + avg * p;
                self.data[i11] = self.data[i11] * (1.0 - p) + avg * p;
                self.data[i01] *= 1.0 - p;
                self.data[i10] *= 1.0 - p;
            }
        }
    }

    /// `ρ → (1-p) ρ + p (I/4 ⊗ Tr_{ab} ρ)`.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let d = self.dim();
        let (ma, mb) = (1usize << a, 1usize << b);
        let sub = [0, ma, mb, ma | mb];
        for r in (0..d).filter(|r| r & (ma | mb) == 0) {
            for c in (0..d).filter(|c| c & (ma | mb) == 0) {
                let trace: Complex64 = sub.iter().map(|&s| self.data[(r | s) * d + (c | s)]).sum();
                let fill = trace * (p / 4.0);
                for &s in &sub {
                    for &t in &sub {
                        let i = (r | s) * d + (c | t);
                        self.data[i] *= 1.0 - p;
                        if s == t {
                            self.data[i] += fill;
                        }
                    }
                }
            }
        }
    }

    /// Gate-by-gate evolution with depolarizing noise after every gate.
    pub fn apply_noisy_circuit(&mut self, c: &Circuit, noise: &NoiseModel) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: c.n_qubits() });
        }
        for g in c.gates() {
            self.apply_gate(g)?;
            match g.targets()[..] {
                [q] => self.depolarize_1q(q, noise.p1),
                [a, b] => self.depolarize_2q(a, b, noise.p2),
                _ => unreachable!("gates act on one or two qubits"),
            }
        }
        debug_assert!(self.validate(1e-10).is_ok());
        Ok(())
    }

    /// `Tr(P ρ)` including the imaginary residue.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: p.n_qubits() });
        }
        Ok(self.pauli_expectation_unchecked(p))
    }

    pub(crate) fn pauli_expectation_unchecked(&self, p: &PauliString) -> Complex64 {
        // P|c⟩ = i^{#Y} (-1)^{z·c} |c ⊕ x⟩, so Tr(Pρ) = Σ_c P_{c⊕x, c} ρ_{c, c⊕x}.
        let d = self.dim();
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..d {
            let v = self.data[c * d + (c ^ x)];
            if z_sign(z, c) {
                acc -= v;
            } else {
                acc += v;
            }
        }
        Phase::from_exponent(p.y_count() as i64).apply(acc)
    }

    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: obs.n_qubits() });
        }
        Ok(obs.terms().iter().map(|(c, w)| c * self.pauli_expectation_unchecked(w).re).sum())
    }
}

fn check_density_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSITY_QUBITS {
        return Err(SseError::QubitCount(n));
    }
    Ok(())
}
