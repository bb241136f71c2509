use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SseError};
use crate::exec;
use crate::pauli::ObservableSum;
use crate::sim::circuit::ParamCircuit;
use crate::sim::state::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct VqeOptions {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions { steps: 100, learning_rate: 0.1, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    pub params: Vec<f64>,
    pub state: StateVector,
    /// Energy before the first step and after every step.
    pub energies: Vec<f64>,
}

impl VqeResult {
    pub fn energy(&self) -> f64 {
        *self.energies.last().expect("trace holds the initial energy")
    }
}

fn prepare(ansatz: &ParamCircuit, params: &[f64], shift: Option<(usize, f64)>) -> Result<StateVector> {
    let mut s = StateVector::zero(ansatz.n_qubits())?;
    s.apply_circuit(&ansatz.bind_shifted(params, shift)?)?;
    Ok(s)
}

fn energy(h: &ObservableSum, ansatz: &ParamCircuit, params: &[f64], shift: Option<(usize, f64)>) -> Result<f64> {
    prepare(ansatz, params, shift)?.expectation(h)
}

/// Parameter-shift gradient. A parameter shared by several gates gets the
/// sum of the per-gate shift terms.
pub fn gradient(h: &ObservableSum, ansatz: &ParamCircuit, params: &[f64]) -> Result<Vec<f64>> {
    let per_gate = exec::try_map_range(ansatz.gates().len(), |g| match ansatz.gates()[g].1 {
        Some(_) => {
            let plus = energy(h, ansatz, params, Some((g, FRAC_PI_2)))?;
            let minus = energy(h, ansatz, params, Some((g, -FRAC_PI_2)))?;
            Ok((plus - minus) / 2.0)
        }
        None => Ok(0.0),
    })?;
    let mut grad = vec![0.0; ansatz.n_params()];
    for ((_, p), d) in ansatz.gates().iter().zip(per_gate) {
        if let Some(p) = p {
            grad[*p] += d;
        }
    }
    Ok(grad)
}

/// Gradient descent from parameters drawn uniformly in `[-π, π]`.
///
/// A step is taken only if it lowers the energy; otherwise the learning rate
/// is halved and the parameters are kept, so the trace never increases.
pub fn run_vqe(h: &ObservableSum, ansatz: &ParamCircuit, opts: &VqeOptions) -> Result<VqeResult> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(SseError::QubitMismatch { left: h.n_qubits(), right: ansatz.n_qubits() });
    }
    if !(opts.learning_rate > 0.0 && opts.learning_rate.is_finite()) {
        return Err(SseError::InvalidParameter(format!("learning rate {} must be positive", opts.learning_rate)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut params: Vec<f64> = (0..ansatz.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
    let mut current = energy(h, ansatz, &params, None)?;
    let mut energies = vec![current];
    let mut lr = opts.learning_rate;
    for _ in 0..opts.steps {
        let g = gradient(h, ansatz, &params)?;
        let trial: Vec<f64> = params.iter().zip(&g).map(|(p, d)| p - lr * d).collect();
        let e = energy(h, ansatz, &trial, None)?;
        if e <= current {
            params = trial;
            current = e;
        } else {
            lr *= 0.5;
        }
        energies.push(current);
    }
    let state = prepare(ansatz, &params, None)?;
    Ok(VqeResult { params, state, energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::circuit::Gate;
    use crate::sim::hamiltonian::{build_spin_ring, exact_spectrum, Boundary, Onsite};

    #[test]
    fn zero_steps_returns_initial_state() {
        let h = ObservableSum::parse("1 ZI\n0.5 XX").unwrap();
        let a = ParamCircuit::hardware_efficient(2, 1).unwrap();
        let r = run_vqe(&h, &a, &VqeOptions { steps: 0, ..Default::default() }).unwrap();
        assert_eq!(r.energies.len(), 1);
        assert!((r.state.expectation(&h).unwrap() - r.energy()).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_reaches_minimum() {
        let h = ObservableSum::parse("1 Z").unwrap();
        let a = ParamCircuit::new(1, vec![(Gate::Ry(0, 0.0), Some(0))]).unwrap();
        let r = run_vqe(&h, &a, &VqeOptions { steps: 100, learning_rate: 0.2, seed: 3 }).unwrap();
        assert!((r.energy() + 1.0).abs() < 1e-3, "{}", r.energy());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let h = build_spin_ring(3, 0.5, &Onsite::Seed(2), Boundary::Periodic).unwrap();
        let a = ParamCircuit::hardware_efficient(3, 1).unwrap();
        let params: Vec<f64> = (0..a.n_params()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let g = gradient(&h, &a, &params).unwrap();
        let step = 1e-6;
        for i in 0..params.len() {
            let mut p = params.clone();
            p[i] += step;
            let up = energy(&h, &a, &p, None).unwrap();
            p[i] -= 2.0 * step;
            let down = energy(&h, &a, &p, None).unwrap();
            assert!(((up - down) / (2.0 * step) - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn ring_trace_is_monotone_and_variational() {
        let h = build_spin_ring(3, 0.1, &Onsite::Seed(5), Boundary::Periodic).unwrap();
        let a = ParamCircuit::hardware_efficient(3, 2).unwrap();
        let r = run_vqe(&h, &a, &VqeOptions { steps: 200, learning_rate: 0.1, seed: 1 }).unwrap();
        assert!(r.energies.windows(2).all(|w| w[1] <= w[0]));
        let e0 = exact_spectrum(&h, Some(1)).unwrap()[0];
        assert!(r.energy() >= e0 - 1e-12);
        let again = run_vqe(&h, &a, &VqeOptions { steps: 200, learning_rate: 0.1, seed: 1 }).unwrap();
        assert_eq!(r.params, again.params);
    }
}
