//! Symbolic algebra over N-qubit Pauli strings.
//!
//! A [`PauliString`] carries only labels; every phase lives in the complex
//! coefficient of a [`PauliTerm`] or of a [`PauliSum`] entry. Label position
//! `i` acts on qubit `i`, and qubit `i` is bit `i` of a computational basis
//! index (qubit 0 is the least significant bit).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::{check_dense_cap, CMatrix};
use crate::{Error, Result};

/// Coefficients with magnitude below this are dropped after arithmetic.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

/// Default cap on the number of distinct strings a closure may produce.
pub const DEFAULT_CLOSURE_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Single-qubit product `self * rhs = phase * result`.
    pub fn mul_with_phase(self, rhs: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
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
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' | '_' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("invalid Pauli label {other:?}"))),
        }
    }
}

/// A power of the imaginary unit, `i^k` with `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A tensor product of single-qubit Pauli labels, without phase.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Self {
        Self { labels }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            labels: vec![Pauli::I; n_qubits],
        }
    }

    /// String with `ops` placed on the given qubits and identity elsewhere.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut labels = vec![Pauli::I; n_qubits];
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            labels[q] = p;
        }
        Ok(Self { labels })
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::from_sparse(n_qubits, &[(qubit, p)])
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.labels[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.labels.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity label, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Bit mask of qubits flipped by the string (X or Y labels).
    pub fn x_mask(&self) -> usize {
        self.mask(Pauli::has_x)
    }

    /// Bit mask of qubits that pick up a sign (Z or Y labels).
    pub fn z_mask(&self) -> usize {
        self.mask(Pauli::has_z)
    }

    pub fn y_count(&self) -> u32 {
        self.labels.iter().filter(|&&p| p == Pauli::Y).count() as u32
    }

    fn mask(&self, pred: fn(Pauli) -> bool) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0usize, |m, (q, _)| m | (1 << q))
    }

    /// Action on a computational basis state: `P|k> = phase * |k'>`.
    pub fn apply_to_basis(&self, k: usize) -> (Complex64, usize) {
        let sign = if (k & self.z_mask()).count_ones() % 2 == 1 {
            Phase::MINUS_ONE
        } else {
            Phase::ONE
        };
        let phase = Phase::from_exponent(self.y_count()) * sign;
        (phase.to_complex(), k ^ self.x_mask())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a dense label string such as `"XIZ"`; the first character is qubit 0.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let labels = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>>>()?;
        Ok(Self { labels })
    }
}

/// Product of two strings: `a * b = phase * s`.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::LengthMismatch {
            left: a.n_qubits(),
            right: b.n_qubits(),
        });
    }
    let mut phase = Phase::ONE;
    let labels = a
        .labels
        .iter()
        .zip(&b.labels)
        .map(|(&x, &y)| {
            let (ph, p) = x.mul_with_phase(y);
            phase = phase * ph;
            p
        })
        .collect();
    Ok((phase, PauliString { labels }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: impl Into<Complex64>, string: PauliString) -> Self {
        Self {
            coeff: coeff.into(),
            string,
        }
    }
}

/// A canonical linear combination of Pauli strings.
///
/// Terms are kept in lexicographic label order, each string appears at most
/// once, and coefficients below [`PRUNE_TOLERANCE`] are removed.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut sum = Self::zero(n_qubits);
        for t in terms {
            sum.add_term(t.coeff, t.string)?;
        }
        Ok(sum)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<PauliTerm> {
        self.terms
            .iter()
            .map(|(s, &c)| PauliTerm::new(c, s.clone()))
            .collect()
    }

    pub fn coeff(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, coeff: impl Into<Complex64>, string: PauliString) -> Result<()> {
        let coeff = coeff.into();
        if string.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: string.n_qubits(),
            });
        }
        if !coeff.is_finite() {
            return Err(Error::NonFinite("Pauli coefficient"));
        }
        let entry = self.terms.entry(string).or_default();
        *entry += coeff;
        if entry.norm() < PRUNE_TOLERANCE {
            self.terms.retain(|_, c| c.norm() >= PRUNE_TOLERANCE);
        }
        Ok(())
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let factor = factor.into();
        let terms = self
            .terms
            .iter()
            .map(|(s, &c)| (s.clone(), c * factor))
            .filter(|(_, c)| c.norm() >= PRUNE_TOLERANCE)
            .collect();
        Self {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (s, &c) in &other.terms {
            *out.terms.entry(s.clone()).or_default() += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        self.check_size(other)?;
        let mut out = BTreeMap::<PauliString, Complex64>::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let (ph, s) = multiply(a, b)?;
                *out.entry(s).or_default() += ca * cb * ph.to_complex();
            }
        }
        let mut sum = Self {
            n_qubits: self.n_qubits,
            terms: out,
        };
        sum.prune();
        Ok(sum)
    }

    /// True when every coefficient is real to within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Dense `2^N x 2^N` matrix of the operator.
    pub fn to_matrix(&self, dense_cap: usize) -> Result<CMatrix> {
        check_dense_cap(self.n_qubits, dense_cap)?;
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (s, &c) in &self.terms {
            for col in 0..dim {
                let (ph, row) = s.apply_to_basis(col);
                m[(row, col)] += c * ph;
            }
        }
        Ok(m)
    }

    fn check_size(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOLERANCE);
    }
}

impl From<PauliTerm> for PauliSum {
    fn from(t: PauliTerm) -> Self {
        let n = t.string.n_qubits();
        let mut s = PauliSum::zero(n);
        s.add_term(t.coeff, t.string).expect("sizes agree");
        s
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (s, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i) {}", c.re, c.im, s)?;
        }
        Ok(())
    }
}

/// `[a, b] = ab - ba` in canonical form.
///
/// Only anticommuting string pairs contribute, each as `2 * ca * cb * (a*b)`.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    a.check_size(b)?;
    let mut out = BTreeMap::<PauliString, Complex64>::new();
    for (sa, &ca) in &a.terms {
        for (sb, &cb) in &b.terms {
            if sa.commutes_with(sb) {
                continue;
            }
            let (ph, s) = multiply(sa, sb)?;
            *out.entry(s).or_default() += 2.0 * ca * cb * ph.to_complex();
        }
    }
    let mut sum = PauliSum {
        n_qubits: a.n_qubits,
        terms: out,
    };
    sum.prune();
    Ok(sum)
}

/// Result of [`nested_commutator_closure`].
#[derive(Clone, Debug, PartialEq)]
pub struct Closure {
    /// Distinct strings, identity included, in canonical order.
    pub strings: BTreeSet<PauliString>,
    /// Number of commutator nestings actually evaluated.
    pub depth_reached: usize,
    /// Depth at which no deeper commutator can introduce a new string.
    pub fixed_point: Option<usize>,
}

/// Collects the strings of `h_i`, `h_d` and the nested commutators
/// `[h_i, h_d]`, `[h_i, [h_i, h_d]]`, ... up to `max_depth` nestings.
///
/// Coefficients and phases are dropped. A fixed point is declared once the
/// strings generated from `h_d` are closed under commutation with every
/// string of `h_i` (or the nested commutator vanishes); from there on no
/// depth can add a string, and iteration stops.
pub fn nested_commutator_closure(
    h_i: &PauliSum,
    h_d: &PauliSum,
    max_depth: usize,
    cap: usize,
) -> Result<Closure> {
    h_i.check_size(h_d)?;
    if max_depth == 0 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    let n = h_i.n_qubits();
    let mut strings: BTreeSet<PauliString> = BTreeSet::new();
    strings.insert(PauliString::identity(n));
    strings.extend(h_i.strings().cloned());

    let mut generated: BTreeSet<PauliString> = h_d.strings().cloned().collect();
    let mut current = h_d.clone();
    let mut fixed_point = None;
    let mut depth = 0;

    if current.is_empty() || closed_under(&generated, h_i)? {
        fixed_point = Some(0);
    }
    while fixed_point.is_none() && depth < max_depth {
        depth += 1;
        current = commutator(h_i, &current)?;
        generated.extend(current.strings().cloned());
        if generated.len() + strings.len() > cap {
            return Err(Error::ClosureCapExceeded { cap });
        }
        if current.is_empty() || closed_under(&generated, h_i)? {
            fixed_point = Some(depth);
        }
    }
    strings.extend(generated);
    if strings.len() > cap {
        return Err(Error::ClosureCapExceeded { cap });
    }
    Ok(Closure {
        strings,
        depth_reached: depth,
        fixed_point,
    })
}

fn closed_under(set: &BTreeSet<PauliString>, h: &PauliSum) -> Result<bool> {
    for g in set {
        for q in h.strings() {
            if !g.commutes_with(q) {
                let (_, p) = multiply(q, g)?;
                if !set.contains(&p) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
