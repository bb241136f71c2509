use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, SseError};
use crate::sim::state::Mat2;

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Gate {
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz(..))
    }

    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::H(q) | Gate::X(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) => Some(t),
            _ => None,
        }
    }

    /// Same gate with its rotation angle replaced; non-rotations are unchanged.
    pub fn with_angle(&self, theta: f64) -> Gate {
        match *self {
            Gate::Rx(q, _) => Gate::Rx(q, theta),
            Gate::Ry(q, _) => Gate::Ry(q, theta),
            Gate::Rz(q, _) => Gate::Rz(q, theta),
            g => g,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let t = self.targets();
        if let Some(&bad) = t.iter().find(|&&q| q >= n_qubits) {
            return Err(SseError::TargetOutOfRange { target: bad, n_qubits });
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(SseError::RepeatedTarget(t[0]));
        }
        Ok(())
    }

    pub(crate) fn single_qubit_matrix(&self) -> Option<(usize, Mat2)> {
        let c = Complex64::new;
        let half = |t: f64| ((t / 2.0).cos(), (t / 2.0).sin());
        Some(match *self {
            Gate::Rx(q, t) => {
                let (co, si) = half(t);
                (q, [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
            }
            Gate::Ry(q, t) => {
                let (co, si) = half(t);
                (q, [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
            }
            Gate::Rz(q, t) => {
                let (co, si) = half(t);
                (q, [[c(co, -si), c(0.0, 0.0)], [c(0.0, 0.0), c(co, si)]])
            }
            Gate::H(q) => {
                let r = FRAC_1_SQRT_2;
                (q, [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]])
            }
            Gate::X(q) => (q, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
            Gate::Cnot { .. } | Gate::Cz(..) => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx(q, t) => write!(f, "RX q{q} {t}"),
            Gate::Ry(q, t) => write!(f, "RY q{q} {t}"),
            Gate::Rz(q, t) => write!(f, "RZ q{q} {t}"),
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control} q{target}"),
            Gate::Cz(a, b) => write!(f, "CZ q{a} q{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// `(single-qubit gates, two-qubit gates)`.
    pub fn gate_counts(&self) -> (usize, usize) {
        let two = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        (self.gates.len() - two, two)
    }

    /// Parses one gate per line, e.g. `RY q0 0.314` or `CNOT q0 q1`.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| SseError::Parse { line, message };
            let tok: Vec<&str> = content.split_whitespace().collect();
            let qubit = |s: &str| -> Result<usize> {
                s.strip_prefix(['q', 'Q'])
                    .unwrap_or(s)
                    .parse()
                    .map_err(|_| perr(format!("malformed qubit {s:?}")))
            };
            let angle = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| perr(format!("malformed angle {s:?}")))
            };
            let name = tok[0].to_ascii_uppercase();
            let g = match (name.as_str(), tok.len()) {
                ("RX", 3) => Gate::Rx(qubit(tok[1])?, angle(tok[2])?),
                ("RY", 3) => Gate::Ry(qubit(tok[1])?, angle(tok[2])?),
                ("RZ", 3) => Gate::Rz(qubit(tok[1])?, angle(tok[2])?),
                ("H", 2) => Gate::H(qubit(tok[1])?),
                ("X", 2) => Gate::X(qubit(tok[1])?),
                ("CNOT" | "CX", 3) => Gate::Cnot { control: qubit(tok[1])?, target: qubit(tok[2])? },
                ("CZ", 3) => Gate::Cz(qubit(tok[1])?, qubit(tok[2])?),
                _ => return Err(perr(format!("unrecognised gate line {content:?}"))),
            };
            g.validate(n_qubits).map_err(|e| perr(e.to_string()))?;
            gates.push(g);
        }
        Ok(Circuit { n_qubits, gates })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// A circuit whose rotation angles may be bound to a parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    n_qubits: usize,
    gates: Vec<(Gate, Option<usize>)>,
    n_params: usize,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, gates: Vec<(Gate, Option<usize>)>) -> Result<Self> {
        let mut n_params = 0;
        for (g, p) in &gates {
            g.validate(n_qubits)?;
            if let Some(p) = p {
                if g.angle().is_none() {
                    return Err(SseError::InvalidParameter(format!("gate {g} cannot take a parameter")));
                }
                n_params = n_params.max(p + 1);
            }
        }
        Ok(ParamCircuit { n_qubits, gates, n_params })
    }

    /// Layers of `Ry Rz` on every qubit followed by a CNOT ring, plus a final
    /// rotation layer. `2 n (layers + 1)` parameters.
    pub fn hardware_efficient(n_qubits: usize, layers: usize) -> Result<Self> {
        let mut gates = Vec::new();
        let mut p = 0;
        let mut rotations = |gates: &mut Vec<(Gate, Option<usize>)>| {
            for q in 0..n_qubits {
                gates.push((Gate::Ry(q, 0.0), Some(p)));
                gates.push((Gate::Rz(q, 0.0), Some(p + 1)));
                p += 2;
            }
        };
        for _ in 0..layers {
            rotations(&mut gates);
            match n_qubits {
                1 => {}
                2 => gates.push((Gate::Cnot { control: 0, target: 1 }, None)),
                n => {
                    for q in 0..n {
                        gates.push((Gate::Cnot { control: q, target: (q + 1) % n }, None));
                    }
                }
            }
        }
        rotations(&mut gates);
        Self::new(n_qubits, gates)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[(Gate, Option<usize>)] {
        &self.gates
    }

    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        self.bind_shifted(params, None)
    }

    /// Binds parameters, adding `shift.1` to the angle of gate index `shift.0`.
    pub(crate) fn bind_shifted(&self, params: &[f64], shift: Option<(usize, f64)>) -> Result<Circuit> {
        if params.len() != self.n_params {
            return Err(SseError::InvalidParameter(format!(
                "circuit needs {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, (g, p))| {
                let mut g = match p {
                    Some(p) => g.with_angle(params[*p]),
                    None => *g,
                };
                if let Some((j, d)) = shift {
                    if i == j {
                        g = g.with_angle(g.angle().unwrap_or(0.0) + d);
                    }
                }
                g
            })
            .collect();
        Ok(Circuit { n_qubits: self.n_qubits, gates })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_circuit_file() {
        let c = Circuit::parse(2, "# prep\nRY q0 0.314\nCNOT q0 q1\nh 1\nCZ q1 q0\n").unwrap();
        assert_eq!(c.gates().len(), 4);
        assert_eq!(c.gates()[0], Gate::Ry(0, 0.314));
        assert_eq!(c.gate_counts(), (2, 2));
        assert!(matches!(Circuit::parse(2, "RY q2 0.1"), Err(SseError::Parse { line: 1, .. })));
        assert!(matches!(Circuit::parse(2, "H q0\nCNOT q1 q1"), Err(SseError::Parse { line: 2, .. })));
        assert!(matches!(Circuit::parse(2, "FOO q0"), Err(SseError::Parse { line: 1, .. })));
    }

    #[test]
    fn hardware_efficient_layout() {
        let a = ParamCircuit::hardware_efficient(4, 2).unwrap();
        assert_eq!(a.n_params(), 2 * 4 * 3);
        let c = a.bind(&vec![0.1; a.n_params()]).unwrap();
        assert_eq!(c.gate_counts(), (24, 8));
        assert!(a.bind(&[0.0]).is_err());
    }

    #[test]
    fn two_qubit_gates_need_distinct_targets() {
        assert_eq!(Gate::Cz(1, 1).validate(3), Err(SseError::RepeatedTarget(1)));
    }
}
