use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SseError};
use crate::linalg::{eigh, eigvalsh, CMat};
use crate::pauli::{ObservableSum, Pauli, PauliString, Phase};
use crate::sim::state::{z_sign, StateVector};

/// Largest qubit count for dense diagonalization (a 4096 × 4096 matrix).
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Onsite {
    Values(Vec<f64>),
    /// `c_i ~ Uniform[-1, 1]` drawn from this seed.
    Seed(u64),
}

impl Onsite {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Onsite::Values(v) if v.len() == n => Ok(v.clone()),
            Onsite::Values(v) => Err(SseError::InvalidParameter(format!(
                "expected {n} on-site energies, got {}",
                v.len()
            ))),
            Onsite::Seed(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*s);
                Ok((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
            }
        }
    }
}

/// `J Σ_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}) + Σ_i c_i Z_i`.
///
/// Terms are emitted bond by bond (XX, YY, ZZ), then the on-site Z terms.
pub fn build_spin_ring(n: usize, j: f64, onsite: &Onsite, boundary: Boundary) -> Result<ObservableSum> {
    if n < 3 {
        return Err(SseError::InvalidParameter(format!("spin ring needs at least 3 sites, got {n}")));
    }
    let c = onsite.resolve(n)?;
    let mut h = ObservableSum::new(n)?;
    let bonds = match boundary {
        Boundary::Periodic => n,
        Boundary::Open => n - 1,
    };
    for i in 0..bonds {
        let k = (i + 1) % n;
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut w = PauliString::identity(n)?;
            w.set(i, p);
            w.set(k, p);
            h.add_term(j, w)?;
        }
    }
    for (i, ci) in c.into_iter().enumerate() {
        h.add_term(ci, PauliString::single(n, i, Pauli::Z)?)?;
    }
    Ok(h)
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<ObservableSum> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SseError::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    ObservableSum::parse(&text)
}

/// Dense `2^n × 2^n` matrix of a single Pauli word.
pub fn pauli_matrix(p: &PauliString) -> CMat {
    let d = 1usize << p.n_qubits();
    let mut m = CMat::zeros(d, d);
    add_pauli(&mut m, 1.0, p);
    m
}

fn add_pauli(m: &mut CMat, coeff: f64, p: &PauliString) {
    let x = p.x_mask() as usize;
    let z = p.z_mask();
    let base = Phase::from_exponent(p.y_count() as i64).to_complex() * coeff;
    for c in 0..m.ncols() {
        m[(c ^ x, c)] += if z_sign(z, c) { -base } else { base };
    }
}

pub fn dense_matrix(h: &ObservableSum) -> Result<CMat> {
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(SseError::DimensionTooLarge { n_qubits: n, limit: MAX_DENSE_QUBITS });
    }
    let d = 1usize << n;
    let mut m = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
    for (c, w) in h.terms() {
        add_pauli(&mut m, *c, w);
    }
    Ok(m)
}

/// Ascending eigenvalues of the dense Hamiltonian, optionally only the lowest `count`.
pub fn exact_spectrum(h: &ObservableSum, count: Option<usize>) -> Result<Vec<f64>> {
    let mut v = eigvalsh(&dense_matrix(h)?);
    if let Some(c) = count {
        v.truncate(c);
    }
    Ok(v)
}

/// Lowest eigenvalue with one of its eigenvectors.
pub fn ground_state(h: &ObservableSum) -> Result<(f64, StateVector)> {
    let eig = eigh(&dense_matrix(h)?);
    let amps = eig.vectors.column(0).iter().copied().collect();
    Ok((eig.values[0], StateVector::normalized(h.n_qubits(), amps)?))
}

/// Exact `‖H‖_∞`, the largest absolute eigenvalue.
pub fn operator_norm(h: &ObservableSum) -> Result<f64> {
    let v = exact_spectrum(h, None)?;
    Ok(v.first().map_or(0.0, |a| a.abs()).max(v.last().map_or(0.0, |b| b.abs())))
}

/// Ascending spectrum of `h` restricted to the `target` eigenspace of a
/// commuting Hermitian `symmetry`.
pub fn sector_spectrum(h: &ObservableSum, symmetry: &ObservableSum, target: f64, tol: f64) -> Result<Vec<f64>> {
    if h.n_qubits() != symmetry.n_qubits() {
        return Err(SseError::QubitMismatch { left: h.n_qubits(), right: symmetry.n_qubits() });
    }
    let a = eigh(&dense_matrix(symmetry)?);
    let cols: Vec<usize> = (0..a.values.len()).filter(|&i| (a.values[i] - target).abs() <= tol).collect();
    if cols.is_empty() {
        return Err(SseError::EmptySymmetrySector);
    }
    let q = a.vectors.select_columns(&cols);
    let hs = q.adjoint() * dense_matrix(h)? * &q;
    Ok(eigvalsh(&hs))
}
