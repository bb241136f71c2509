//! Exact simulation: pure and mixed states, circuits with depolarizing noise,
//! Hamiltonian builders, VQE state preparation and dense diagonalization.

pub mod circuit;
pub mod density;
pub mod hamiltonian;
pub mod state;
pub mod vqe;

use num_complex::Complex64;

pub use circuit::{Circuit, Gate, ParamCircuit};
pub use density::{circuit_fault_rate, DensityMatrix, NoiseModel};
pub use hamiltonian::{
    build_spin_ring, dense_matrix, exact_spectrum, ground_state, load_hamiltonian, operator_norm, pauli_matrix,
    sector_spectrum,
    Boundary, Onsite,
};
pub use state::StateVector;
pub use vqe::{run_vqe, VqeOptions, VqeResult};

use crate::error::Result;
use crate::pauli::{ObservableSum, PauliString};

/// State handed to the estimators.
#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits(),
            QuantumState::Mixed(d) => d.n_qubits(),
        }
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        match self {
            QuantumState::Pure(s) => s.pauli_expectation(p),
            QuantumState::Mixed(d) => d.pauli_expectation(p),
        }
    }

    pub(crate) fn pauli_expectation_unchecked(&self, p: &PauliString) -> Complex64 {
        match self {
            QuantumState::Pure(s) => s.pauli_expectation_unchecked(p),
            QuantumState::Mixed(d) => d.pauli_expectation_unchecked(p),
        }
    }

    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        match self {
            QuantumState::Pure(s) => s.expectation(obs),
            QuantumState::Mixed(d) => d.expectation(obs),
        }
    }
}

impl From<StateVector> for QuantumState {
    fn from(s: StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(d: DensityMatrix) -> Self {
        QuantumState::Mixed(d)
    }
}
