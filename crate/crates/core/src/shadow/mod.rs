//! Local-Clifford classical shadows and the estimator modes built on them.
//!
//! Each snapshot measures every qubit in a uniformly random X, Y or Z basis.
//! A weight-`w` Pauli word is estimated from one snapshot as
//! `3^w Π_{q ∈ supp} b_q` when the bases agree with the word on its support
//! and `0` otherwise; the mean over snapshots is unbiased with single-snapshot
//! variance `3^w - ⟨P⟩²`.

mod estimator;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use estimator::{Estimator, EstimatorMode};

use crate::error::{Result, SseError};
use crate::exec;
use crate::pauli::{Pauli, PauliString, PhasedPauli};
use crate::sim::state::Mat2;
use crate::sim::{DensityMatrix, QuantumState, StateVector};

/// One measurement record.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    /// Measured basis per qubit; never contains `I`.
    pub bases: PauliString,
    /// Bit `q` set means qubit `q` gave `-1`.
    pub outcomes: u64,
}

impl Snapshot {
    pub fn basis(&self, q: usize) -> Pauli {
        self.bases.letter(q)
    }

    pub fn outcome(&self, q: usize) -> i8 {
        if self.outcomes >> q & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Single-snapshot estimate of a bare Pauli word.
    #[inline]
    pub fn estimate_word(&self, p: &PauliString) -> f64 {
        let s = p.support();
        if self.bases.x_mask() & s != p.x_mask() || self.bases.z_mask() & s != p.z_mask() {
            return 0.0;
        }
        let mag = 3f64.powi(s.count_ones() as i32);
        if (self.outcomes & s).count_ones() & 1 == 1 {
            -mag
        } else {
            mag
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSet {
    n_qubits: usize,
    seed: u64,
    snapshots: Vec<Snapshot>,
}

/// `3^w - value²`.
pub fn theoretical_variance(w: usize, exact_value: f64) -> f64 {
    3f64.powi(w as i32) - exact_value * exact_value
}

fn snapshot_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_bases(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let mut b = PauliString::identity(n).expect("qubit count validated");
    for q in 0..n {
        b.set(q, Pauli::NON_IDENTITY[rng.random_range(0..3)]);
    }
    b
}

/// Per-qubit unitary that maps the `basis` eigenstates onto `|0⟩, |1⟩`.
fn rotation(basis: Pauli) -> Option<Mat2> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re, im| Complex64::new(re * r, im * r);
    match basis {
        Pauli::X => Some([[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]),
        // H · S†
        Pauli::Y => Some([[c(1.0, 0.0), c(0.0, -1.0)], [c(1.0, 0.0), c(0.0, 1.0)]]),
        Pauli::Z | Pauli::I => None,
    }
}

/// Cumulative Born distribution after rotating into `bases`.
fn cumulative_distribution(state: &QuantumState, bases: &PauliString) -> Vec<f64> {
    let probs = match state {
        QuantumState::Pure(s) => {
            let mut s: StateVector = s.clone();
            for q in 0..bases.n_qubits() {
                if let Some(u) = rotation(bases.letter(q)) {
                    s.apply_matrix(q, &u);
                }
            }
            s.probabilities()
        }
        QuantumState::Mixed(d) => {
            let mut d: DensityMatrix = d.clone();
            for q in 0..bases.n_qubits() {
                if let Some(u) = rotation(bases.letter(q)) {
                    d.apply_matrix(q, &u);
                }
            }
            d.diagonal()
        }
    };
    let mut acc = 0.0;
    probs
        .into_iter()
        .map(|p| {
            acc += p.max(0.0);
            acc
        })
        .collect()
}

fn sample_index(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Cached distributions are skipped when they would exceed this many floats.
const CACHE_LIMIT: usize = 1 << 25;

impl ShadowSet {
    /// Draws `n_snapshots` snapshots from the exact Born distribution.
    ///
    /// Snapshot `i` uses its own ChaCha stream `i` under `seed`, so the result
    /// does not depend on the number of worker threads.
    pub fn sample(state: &QuantumState, n_snapshots: usize, seed: u64) -> Result<Self> {
        if n_snapshots == 0 {
            return Err(SseError::InvalidParameter("need at least one snapshot".into()));
        }
        let n = state.n_qubits();
        let d = 1usize << n;
        let bases = exec::map_range(n_snapshots, |i| draw_bases(&mut snapshot_rng(seed, i), n));

        let mut unique: Vec<PauliString> = Vec::new();
        let mut slot: HashMap<PauliString, usize> = HashMap::new();
        for b in &bases {
            slot.entry(*b).or_insert_with(|| {
                unique.push(*b);
                unique.len() - 1
            });
        }
        let cache = if unique.len().saturating_mul(d) <= CACHE_LIMIT {
            Some(exec::map_slice(&unique, |b| cumulative_distribution(state, b)))
        } else {
            None
        };

        let snapshots = exec::map_range(n_snapshots, |i| {
            let mut rng = snapshot_rng(seed, i);
            let b = draw_bases(&mut rng, n);
            let outcomes = match &cache {
                Some(c) => sample_index(&c[slot[&b]], &mut rng),
                None => sample_index(&cumulative_distribution(state, &b), &mut rng),
            };
            Snapshot { bases: b, outcomes: outcomes as u64 }
        });
        Ok(ShadowSet { n_qubits: n, seed, snapshots })
    }

    pub fn from_snapshots(n_qubits: usize, seed: u64, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(SseError::InvalidParameter("need at least one snapshot".into()));
        }
        if let Some(s) = snapshots.iter().find(|s| s.bases.n_qubits() != n_qubits) {
            return Err(SseError::QubitMismatch { left: n_qubits, right: s.bases.n_qubits() });
        }
        Ok(ShadowSet { n_qubits, seed, snapshots })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Mean single-snapshot estimate of a bare word; exactly 1 for identity.
    pub fn estimate_word(&self, p: &PauliString) -> f64 {
        if p.is_identity() {
            return 1.0;
        }
        let sum: f64 = self.snapshots.iter().map(|s| s.estimate_word(p)).sum();
        sum / self.snapshots.len() as f64
    }

    /// Shadow estimate of a Hermitian phased word.
    pub fn estimate_pauli(&self, p: &PhasedPauli) -> Result<f64> {
        let sign = p.phase.sign().ok_or_else(|| SseError::NonHermitian(p.to_string()))?;
        if p.word.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: p.word.n_qubits() });
        }
        Ok(sign * self.estimate_word(&p.word))
    }

    /// Header `n=<n> N_s=<count> seed=<seed>`, then `<bases> <outcome bits>`
    /// per snapshot with qubit 0 leftmost.
    pub fn to_dump(&self) -> String {
        let mut out = format!("n={} N_s={} seed={}\n", self.n_qubits, self.snapshots.len(), self.seed);
        for s in &self.snapshots {
            let _ = write!(out, "{} ", s.bases);
            for q in 0..self.n_qubits {
                out.push(if s.outcome(q) < 0 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| SseError::Parse { line: line + 1, message };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty shadow dump".into()))?;
        let mut fields = HashMap::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| perr(hl, format!("malformed header field {tok:?}")))?;
            fields.insert(k, v);
        }
        let field = |k: &str| -> Result<u64> {
            fields
                .get(k)
                .ok_or_else(|| perr(hl, format!("header missing {k}")))?
                .parse()
                .map_err(|_| perr(hl, format!("header field {k} is not an integer")))
        };
        let (n, count, seed) = (field("n")? as usize, field("N_s")? as usize, field("seed")?);
        let mut snapshots = Vec::with_capacity(count);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let (Some(b), Some(o), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(perr(i, format!("expected `<bases> <outcomes>`, got {line:?}")));
            };
            let bases: PauliString = b.parse().map_err(|e: SseError| perr(i, e.to_string()))?;
            if bases.n_qubits() != n || bases.weight() != n || o.len() != n {
                return Err(perr(i, format!("snapshot must have {n} non-identity bases and {n} outcome bits")));
            }
            let mut outcomes = 0u64;
            for (q, c) in o.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => outcomes |= 1 << q,
                    _ => return Err(perr(i, format!("outcome bit {c:?} is not 0 or 1"))),
                }
            }
            snapshots.push(Snapshot { bases, outcomes });
        }
        if snapshots.len() != count {
            return Err(perr(hl, format!("header says N_s={count} but found {} snapshots", snapshots.len())));
        }
        Self::from_snapshots(n, seed, snapshots)
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_dump())
    }
}

/// Convenience wrapper over [`ShadowSet::sample`] for pure states.
pub fn sample_shadows(state: &StateVector, n_snapshots: usize, seed: u64) -> Result<ShadowSet> {
    ShadowSet::sample(&QuantumState::Pure(state.clone()), n_snapshots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Phase;
    use crate::sim::{Circuit, Gate};

    fn zero(n: usize) -> QuantumState {
        StateVector::zero(n).unwrap().into()
    }

    #[test]
    fn z_basis_on_zero_state_is_deterministic() {
        let set = ShadowSet::sample(&zero(1), 2000, 1).unwrap();
        for s in set.snapshots() {
            if s.basis(0) == Pauli::Z {
                assert_eq!(s.outcome(0), 1);
            }
        }
    }

    #[test]
    fn x_basis_on_zero_state_is_a_fair_coin() {
        let set = ShadowSet::sample(&zero(1), 30_000, 2).unwrap();
        let xs: Vec<i8> = set.snapshots().iter().filter(|s| s.basis(0) == Pauli::X).map(|s| s.outcome(0)).collect();
        let frac = xs.iter().filter(|&&o| o == 1).count() as f64 / xs.len() as f64;
        let sigma = (0.25 / xs.len() as f64).sqrt();
        assert!((frac - 0.5).abs() <= 3.0 * sigma, "{frac}");
    }

    #[test]
    fn bell_state_z_outcomes_agree() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap())
            .unwrap();
        let set = sample_shadows(&s, 3000, 3).unwrap();
        let mut seen = 0;
        for snap in set.snapshots() {
            if snap.basis(0) == Pauli::Z && snap.basis(1) == Pauli::Z {
                assert_eq!(snap.outcome(0), snap.outcome(1));
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn single_snapshot_rule() {
        let z: PauliString = "Z".parse().unwrap();
        let hit = Snapshot { bases: z, outcomes: 0 };
        assert_eq!(hit.estimate_word(&z), 3.0);
        let miss = Snapshot { bases: "X".parse().unwrap(), outcomes: 0 };
        assert_eq!(miss.estimate_word(&z), 0.0);
        let two = Snapshot { bases: "XZY".parse().unwrap(), outcomes: 0b010 };
        assert_eq!(two.estimate_word(&"XZI".parse().unwrap()), -9.0);
        assert_eq!(two.estimate_word(&"XIY".parse().unwrap()), 9.0);
    }

    #[test]
    fn identity_and_phase_handling() {
        let set = ShadowSet::sample(&zero(2), 10, 4).unwrap();
        let id = PhasedPauli::from(PauliString::identity(2).unwrap());
        assert_eq!(set.estimate_pauli(&id).unwrap(), 1.0);
        let neg = PhasedPauli::new(Phase::MINUS_ONE, PauliString::identity(2).unwrap());
        assert_eq!(set.estimate_pauli(&neg).unwrap(), -1.0);
        let bad = PhasedPauli::new(Phase::I, "ZZ".parse().unwrap());
        assert!(matches!(set.estimate_pauli(&bad), Err(SseError::NonHermitian(_))));
    }

    #[test]
    fn variance_formula() {
        assert_eq!(theoretical_variance(0, 1.0), 0.0);
        assert_eq!(theoretical_variance(1, 0.0), 3.0);
        assert_eq!(theoretical_variance(2, 0.0), 9.0);
    }

    #[test]
    fn seeded_and_thread_independent() {
        let st: QuantumState = StateVector::random(3, 8).unwrap().into();
        let a = ShadowSet::sample(&st, 500, 9).unwrap();
        let b = exec::sequential(|| ShadowSet::sample(&st, 500, 9).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, ShadowSet::sample(&st, 500, 10).unwrap());
    }

    #[test]
    fn mixed_and_pure_sampling_agree() {
        let psi = StateVector::random(2, 1).unwrap();
        let a = ShadowSet::sample(&psi.clone().into(), 300, 5).unwrap();
        let b = ShadowSet::sample(&DensityMatrix::from_pure(&psi).unwrap().into(), 300, 5).unwrap();
        // Same RNG draws against distributions equal to rounding.
        let same = a.snapshots().iter().zip(b.snapshots()).filter(|(x, y)| x == y).count();
        assert!(same >= 298);
    }

    #[test]
    fn dump_round_trip() {
        let set = ShadowSet::sample(&StateVector::random(3, 2).unwrap().into(), 20, 77).unwrap();
        let text = set.to_dump();
        assert!(text.starts_with("n=3 N_s=20 seed=77\n"));
        assert_eq!(ShadowSet::from_dump(&text).unwrap(), set);
        assert!(matches!(ShadowSet::from_dump("n=1 N_s=1 seed=0\nZ 2\n"), Err(SseError::Parse { line: 2, .. })));
        assert!(ShadowSet::from_dump("n=1 N_s=2 seed=0\nZ 0\n").is_err());
    }
}
