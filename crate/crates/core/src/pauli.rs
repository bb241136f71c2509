//! Bit-packed n-qubit Pauli strings with exact phase tracking.
//!
//! A word stores one x bit and one z bit per qubit:
//! `I = (0,0)`, `X = (1,0)`, `Y = (1,1)`, `Z = (0,1)`.
//! Phases are exponents of `i` modulo 4, so products never drift.
//!
//! Text syntax is a string over `{I,X,Y,Z}` with the leftmost character on
//! qubit 0, e.g. `"XIZY"`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, SseError};

pub const MAX_QUBITS: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// A power of `i`: `i^k` with `k` in `0..4`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }

    /// `Some(±1.0)` for real phases.
    pub fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Exact product `self * z`.
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self.0 {
            0 => z,
            1 => Complex64::new(-z.im, z.re),
            2 => -z,
            _ => Complex64::new(z.im, -z.re),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(SseError::QubitCount(n));
    }
    Ok(())
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(PauliString { n_qubits: n_qubits as u8, x: 0, z: 0 })
    }

    /// Builds a word from raw x/z masks. Bits above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let m = mask(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(SseError::InvalidPauli {
                word: format!("x={x:#x} z={z:#x}"),
                reason: format!("bits set beyond {n_qubits} qubits"),
            });
        }
        Ok(PauliString { n_qubits: n_qubits as u8, x, z })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        check_qubits(letters.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        for (q, p) in letters.iter().enumerate() {
            let (bx, bz) = p.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Ok(PauliString { n_qubits: letters.len() as u8, x, z })
    }

    /// Single non-identity letter on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        let mut w = Self::identity(n_qubits)?;
        if qubit >= n_qubits {
            return Err(SseError::TargetOutOfRange { target: qubit, n_qubits });
        }
        w.set(qubit, p);
        Ok(w)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (bx, bz) = p.bits();
        let bit = 1u64 << q;
        self.x = (self.x & !bit) | if bx { bit } else { 0 };
        self.z = (self.z & !bit) | if bz { bit } else { 0 };
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits()).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(SseError::QubitMismatch {
                left: self.n_qubits(),
                right: other.n_qubits(),
            });
        }
        Ok(())
    }

    /// Product without the size check; callers guarantee equal qubit counts.
    pub(crate) fn mul_unchecked(&self, other: &Self) -> PhasedPauli {
        let (ax, az, bx, bz) = (self.x, self.z, other.x, other.z);
        let a_x = ax & !az;
        let a_y = ax & az;
        let a_z = !ax & az;
        let b_x = bx & !bz;
        let b_y = bx & bz;
        let b_z = !bx & bz;
        // XY = iZ, YZ = iX, ZX = iY; reversed order gives -i.
        let cyclic = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
        let anti = (a_y & b_x) | (a_z & b_y) | (a_x & b_z);
        let k = cyclic.count_ones() as i64 - anti.count_ones() as i64;
        PhasedPauli {
            phase: Phase::from_exponent(k),
            word: PauliString { n_qubits: self.n_qubits, x: ax ^ bx, z: az ^ bz },
        }
    }

    /// `self · other = φ·P` exactly.
    pub fn multiply(&self, other: &Self) -> Result<PhasedPauli> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        let sym = (self.x & other.z) ^ (self.z & other.x);
        sym.count_ones() % 2 == 0
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn sandwich_unchecked(&self, middle: &Self, right: &Self) -> PhasedPauli {
        let left = self.mul_unchecked(middle);
        let full = left.word.mul_unchecked(right);
        PhasedPauli { phase: left.phase.mul(full.phase), word: full.word }
    }

    /// `self · middle · right`, e.g. `G_i H_k G_j`.
    pub fn sandwich(&self, middle: &Self, right: &Self) -> Result<PhasedPauli> {
        self.check_same(middle)?;
        self.check_same(right)?;
        Ok(self.sandwich_unchecked(middle, right))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = SseError;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let p = Pauli::from_char(c).ok_or_else(|| SseError::InvalidPauli {
                word: s.to_string(),
                reason: format!("unexpected character {c:?}"),
            })?;
            letters.push(p);
        }
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(SseError::InvalidPauli {
                word: s.to_string(),
                reason: format!("length must be in 1..={MAX_QUBITS}"),
            });
        }
        PauliString::from_letters(&letters)
    }
}

/// A Pauli word with a unit phase in `{+1, -1, +i, -i}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub word: PauliString,
}

impl PhasedPauli {
    pub fn new(phase: Phase, word: PauliString) -> Self {
        PhasedPauli { phase, word }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn multiply(&self, other: &Self) -> Result<PhasedPauli> {
        let p = self.word.multiply(&other.word)?;
        Ok(PhasedPauli { phase: self.phase.mul(other.phase).mul(p.phase), word: p.word })
    }
}

impl From<PauliString> for PhasedPauli {
    fn from(word: PauliString) -> Self {
        PhasedPauli { phase: Phase::ONE, word }
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.phase, self.word)
    }
}

/// Closed-form `Σ_{k≤w} C(n,k) 3^k`.
pub fn count_up_to_weight(n: usize, w: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for k in 0..=w.min(n) {
        total += binom * 3u128.pow(k as u32);
        binom = binom * (n - k) as u128 / (k + 1) as u128;
    }
    total
}

/// All Pauli strings of weight at most `max_weight`, identity first.
///
/// Order: ascending weight; within a weight, the sequence of `(site, letter)`
/// pairs compared lexicographically with sites ascending and `X < Y < Z`.
pub fn enumerate_up_to_weight(n: usize, max_weight: usize) -> Result<Vec<PauliString>> {
    check_qubits(n)?;
    if max_weight > n {
        return Err(SseError::WeightTooLarge { weight: max_weight, n_qubits: n });
    }
    let mut out = Vec::with_capacity(count_up_to_weight(n, max_weight) as usize);
    out.push(PauliString::identity(n)?);
    for k in 1..=max_weight {
        let mut sites: Vec<usize> = (0..k).collect();
        loop {
            let mut digits = vec![0usize; k];
            loop {
                let mut w = PauliString { n_qubits: n as u8, x: 0, z: 0 };
                for (&s, &d) in sites.iter().zip(&digits) {
                    w.set(s, Pauli::NON_IDENTITY[d]);
                }
                out.push(w);
                if !next_letters(&mut digits) {
                    break;
                }
            }
            if !next_combination(&mut sites, n) {
                break;
            }
        }
    }
    Ok(out)
}

// Base-3 counter over letter indices, first position most significant.
fn next_letters(digits: &mut [usize]) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < 3 {
            return true;
        }
        *d = 0;
    }
    false
}

// Next k-subset of 0..n in lexicographic order.
fn next_combination(sites: &mut [usize], n: usize) -> bool {
    let k = sites.len();
    for i in (0..k).rev() {
        if sites[i] < n - k + i {
            sites[i] += 1;
            for j in i + 1..k {
                sites[j] = sites[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Real-weighted sum of Pauli words `Σ_k β_k P_k`.
///
/// Terms keep first-insertion order; repeated words are merged by adding
/// coefficients. Zero coefficients are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
    index: HashMap<PauliString, usize>,
}

impl ObservableSum {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(ObservableSum { n_qubits, terms: Vec::new(), index: HashMap::new() })
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut obs = Self::new(n_qubits)?;
        for (c, w) in terms {
            obs.add_term(c, w)?;
        }
        Ok(obs)
    }

    pub fn single(word: PauliString) -> Self {
        let mut obs = ObservableSum {
            n_qubits: word.n_qubits(),
            terms: Vec::new(),
            index: HashMap::new(),
        };
        obs.index.insert(word, 0);
        obs.terms.push((1.0, word));
        obs
    }

    pub fn add_term(&mut self, coeff: f64, word: PauliString) -> Result<()> {
        if word.n_qubits() != self.n_qubits {
            return Err(SseError::QubitMismatch { left: self.n_qubits, right: word.n_qubits() });
        }
        if !coeff.is_finite() {
            return Err(SseError::InvalidParameter(format!("non-finite coefficient {coeff}")));
        }
        match self.index.get(&word) {
            Some(&i) => self.terms[i].0 += coeff,
            None => {
                self.index.insert(word, self.terms.len());
                self.terms.push((coeff, word));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &PauliString) -> Option<f64> {
        self.index.get(word).map(|&i| self.terms[i].0)
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.weight()).max().unwrap_or(0)
    }

    /// Parses `<float> <pauli-word>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut obs: Option<ObservableSum> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let perr = |message: String| SseError::Parse { line, message };
            let mut parts = content.split_whitespace();
            let (Some(c), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(perr(format!("expected `<coefficient> <pauli-word>`, got {content:?}")));
            };
            if c.contains(['i', 'j', 'I', 'J']) && !c.eq_ignore_ascii_case("inf") {
                return Err(perr(format!("non-real coefficient {c:?}")));
            }
            let coeff: f64 = c.parse().map_err(|_| perr(format!("malformed coefficient {c:?}")))?;
            if !coeff.is_finite() {
                return Err(perr(format!("non-finite coefficient {c:?}")));
            }
            let word: PauliString = w.parse().map_err(|e: SseError| perr(e.to_string()))?;
            let obs = match &mut obs {
                Some(o) => o,
                None => obs.insert(ObservableSum::new(word.n_qubits()).map_err(|e| perr(e.to_string()))?),
            };
            if word.n_qubits() != obs.n_qubits {
                return Err(perr(format!(
                    "inconsistent qubit count: {w:?} has {} qubits, expected {}",
                    word.n_qubits(),
                    obs.n_qubits
                )));
            }
            obs.add_term(coeff, word).map_err(|e| perr(e.to_string()))?;
        }
        obs.ok_or(SseError::NoTerms)
    }
}

impl fmt::Display for ObservableSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, w) in &self.terms {
            writeln!(f, "{c:.17e} {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").multiply(&p("Y")).unwrap(), PhasedPauli::new(Phase::I, p("Z")));
        assert_eq!(p("Y").multiply(&p("X")).unwrap(), PhasedPauli::new(Phase::MINUS_I, p("Z")));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), PhasedPauli::new(Phase::I, p("Y")));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), PhasedPauli::new(Phase::I, p("X")));
        assert_eq!(p("Y").multiply(&p("Y")).unwrap(), PhasedPauli::new(Phase::ONE, p("I")));
    }

    #[test]
    fn identity_is_neutral() {
        let q = p("XYZY");
        assert_eq!(p("IIII").multiply(&q).unwrap(), PhasedPauli::from(q));
    }

    #[test]
    fn two_site_product_phases_cancel() {
        // (X⊗Z)(Z⊗X): site 0 XZ = -iY, site 1 ZX = +iY
        assert_eq!(p("XZ").multiply(&p("ZX")).unwrap(), PhasedPauli::new(Phase::ONE, p("YY")));
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(!p("XI").commutes(&p("ZZ")).unwrap());
    }

    #[test]
    fn mismatched_sizes_error() {
        assert!(matches!(
            p("X").multiply(&p("XX")),
            Err(SseError::QubitMismatch { left: 1, right: 2 })
        ));
        assert!(p("X").commutes(&p("XX")).is_err());
        assert!(p("X").sandwich(&p("X"), &p("XX")).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(p("III").weight(), 0);
        assert_eq!(p("XIZ").weight(), 2);
        assert_eq!(p(&"Y".repeat(14)).weight(), 14);
    }

    #[test]
    fn sandwich_examples() {
        assert_eq!(p("X").sandwich(&p("Z"), &p("X")).unwrap(), PhasedPauli::new(Phase::MINUS_ONE, p("Z")));
        assert_eq!(p("II").sandwich(&p("XY"), &p("II")).unwrap(), PhasedPauli::from(p("XY")));
        assert_eq!(
            p("XI").sandwich(&p("ZZ"), &p("XI")).unwrap(),
            PhasedPauli::new(Phase::MINUS_ONE, p("ZZ"))
        );
    }

    #[test]
    fn enumeration_small_cases() {
        let one: Vec<String> = enumerate_up_to_weight(1, 1).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(one, ["I", "X", "Y", "Z"]);
        assert_eq!(enumerate_up_to_weight(3, 2).unwrap().len(), 37);
        let two: Vec<String> = enumerate_up_to_weight(2, 2).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(&two[..7], ["II", "XI", "YI", "ZI", "IX", "IY", "IZ"]);
        assert_eq!(&two[7..10], ["XX", "XY", "XZ"]);
        assert_eq!(two.last().unwrap(), "ZZ");
        assert!(matches!(enumerate_up_to_weight(2, 3), Err(SseError::WeightTooLarge { .. })));
    }

    #[test]
    fn closed_form_count() {
        assert_eq!(count_up_to_weight(14, 3), 10690);
        assert_eq!(count_up_to_weight(3, 2), 37);
        assert_eq!(count_up_to_weight(4, 4), 256);
    }

    #[test]
    fn parse_display_round_trip() {
        let w = p("XIZY");
        assert_eq!(w.letter(0), Pauli::X);
        assert_eq!(w.letter(3), Pauli::Y);
        assert_eq!(w.to_string(), "XIZY");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn observable_parse_contract() {
        let h = ObservableSum::parse("0.5 XIZ\n-0.25 IIZ").unwrap();
        assert_eq!(h.n_qubits(), 3);
        assert_eq!(h.len(), 2);
        let merged = ObservableSum::parse("1.0 Z\n2.0 Z").unwrap();
        assert_eq!(merged.terms(), &[(3.0, p("Z"))]);
        assert_eq!(ObservableSum::parse("# only a comment\n\n"), Err(SseError::NoTerms));
        let commented = ObservableSum::parse("# header\n1.5 XX  # trailing\n\n").unwrap();
        assert_eq!(commented.coefficient(&p("XX")), Some(1.5));
    }

    #[test]
    fn observable_parse_errors_name_lines() {
        match ObservableSum::parse("1.0 XX\n2.0 XQ") {
            Err(SseError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match ObservableSum::parse("1.0 XX\n2.0 XXX") {
            Err(SseError::Parse { line: 2, message }) => assert!(message.contains("inconsistent")),
            other => panic!("unexpected {other:?}"),
        }
        match ObservableSum::parse("1+2i ZZ") {
            Err(SseError::Parse { line: 1, message }) => assert!(message.contains("non-real")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ObservableSum::parse("ZZ"), Err(SseError::Parse { line: 1, .. })));
    }

    #[test]
    fn phase_arithmetic() {
        assert_eq!(Phase::I.mul(Phase::I), Phase::MINUS_ONE);
        assert_eq!(Phase::I.conj(), Phase::MINUS_I);
        let z = Complex64::new(0.3, -0.7);
        for k in 0..4 {
            let ph = Phase::from_exponent(k);
            assert_eq!(ph.apply(z), ph.to_complex() * z);
        }
    }
}
