//! Dense statevector simulator.
//!
//! Basis index bit `i` holds the state of qubit `i`, so qubit 0 is the least
//! significant bit. Bitstrings rendered for humans list qubit 0 first, the
//! same order as kets such as `|10>` (qubit 0 in state 1).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dense::{check_dense_cap, CMatrix};
use crate::pauli::PauliString;
use crate::{Error, Result};

/// Tolerance on `sum |amp|^2 = 1` when a normalized state is required.
pub const NORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// `exp(-i theta X / 2)`
    Rx {
        qubit: usize,
        theta: f64,
    },
    /// `exp(-i theta Z / 2)`
    Rz {
        qubit: usize,
        theta: f64,
    },
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Pauli string applied to qubits `0..pauli.n_qubits()`.
    Pauli(PauliString),
    /// Pauli string on qubits `0..pauli.n_qubits()`, controlled by `control`.
    ControlledPauli {
        control: usize,
        pauli: PauliString,
    },
    /// Any other gate with an extra control qubit.
    Controlled {
        control: usize,
        gate: Box<Gate>,
    },
}

impl Gate {
    /// Qubits the gate touches, controls included.
    pub fn operands(&self) -> Vec<usize> {
        match self {
            Gate::Rx { qubit, .. } | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Pauli(p) => p.support(),
            Gate::ControlledPauli { control, pauli } => {
                let mut ops = vec![*control];
                ops.extend(pauli.support());
                ops
            }
            Gate::Controlled { control, gate } => {
                let mut ops = vec![*control];
                ops.extend(gate.operands());
                ops
            }
        }
    }

    /// Number of qubits the gate acts on, controls included.
    pub fn arity(&self) -> usize {
        match self {
            Gate::Pauli(p) => p.weight().max(1),
            _ => self.operands().len(),
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// The 2x2 matrix of a single-qubit gate.
    pub fn matrix2(&self) -> Option<Mat2> {
        let m = match *self {
            Gate::Rx { theta, .. } => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ]
            }
            Gate::Rz { theta, .. } => [
                [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
                [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
            ],
            Gate::H(_) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::S(_) => [[ONE, ZERO], [ZERO, Complex64::new(0.0, 1.0)]],
            Gate::Sdg(_) => [[ONE, ZERO], [ZERO, Complex64::new(0.0, -1.0)]],
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            _ => return None,
        };
        Some(m)
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let ops = self.operands();
        for &q in &ops {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        let mut sorted = ops.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ops.len() {
            return Err(Error::InvalidGate(format!("repeated operand in {self}")));
        }
        match self {
            Gate::Rx { theta, .. } | Gate::Rz { theta, .. } if !theta.is_finite() => {
                Err(Error::InvalidGate(format!("non-finite angle in {self}")))
            }
            Gate::Pauli(p) | Gate::ControlledPauli { pauli: p, .. } if p.n_qubits() > n_qubits => {
                Err(Error::QubitOutOfRange {
                    qubit: p.n_qubits() - 1,
                    n_qubits,
                })
            }
            Gate::Controlled { gate, .. } => gate.validate(n_qubits),
            _ => Ok(()),
        }
    }

    /// The gate with an additional control qubit.
    pub fn controlled(&self, control: usize) -> Gate {
        match self {
            Gate::Pauli(p) => Gate::ControlledPauli {
                control,
                pauli: p.clone(),
            },
            g => Gate::Controlled {
                control,
                gate: Box::new(g.clone()),
            },
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rx { qubit, theta } => write!(f, "RX({theta}) q{qubit}"),
            Gate::Rz { qubit, theta } => write!(f, "RZ({theta}) q{qubit}"),
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::S(q) => write!(f, "S q{q}"),
            Gate::Sdg(q) => write!(f, "Sdg q{q}"),
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control}->q{target}"),
            Gate::Pauli(p) => write!(f, "P[{p}]"),
            Gate::ControlledPauli { control, pauli } => write!(f, "C(q{control})-P[{pauli}]"),
            Gate::Controlled { control, gate } => write!(f, "C(q{control})-{gate}"),
        }
    }
}

/// An ordered gate list over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "a circuit needs at least one qubit");
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends `other`, whose register must fit inside this one.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::LengthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        self.extend(other.gates.iter().cloned())
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cnot()).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 1).count()
    }

    /// Returns `U_c |s>`.
    pub fn apply(&self, s: &Statevector) -> Result<Statevector> {
        let mut out = s.clone();
        out.apply_circuit(self)?;
        Ok(out)
    }

    /// Full `2^N x 2^N` unitary, built column by column.
    pub fn unitary(&self, dense_cap: usize) -> Result<CMatrix> {
        check_dense_cap(self.n_qubits, dense_cap)?;
        let dim = 1usize << self.n_qubits;
        let mut u = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = Statevector::basis(self.n_qubits, col)?;
            s.apply_circuit(self)?;
            for (row, a) in s.amps.iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0).expect("index 0 is always valid")
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that must be finite and normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes_unnormalized(amps)?;
        s.check_normalized()?;
        Ok(s)
    }

    pub(crate) fn from_amplitudes_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                found: dim,
            });
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("statevector amplitudes"));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm_sq = self.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            Err(Error::NotNormalized { norm_sq })
        } else {
            Ok(())
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability that `qubit` is measured in `outcome`.
    pub fn marginal_probability(&self, qubit: usize, outcome: bool) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        self.check_normalized()?;
        Ok(self.marginal_unchecked(qubit, outcome))
    }

    pub(crate) fn marginal_unchecked(&self, qubit: usize, outcome: bool) -> f64 {
        let bit = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(k, _)| (k & bit != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << c.n_qubits,
                found: self.dim(),
            });
        }
        for g in &c.gates {
            self.apply_gate_masked(g, 0);
        }
        if self.amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("statevector amplitudes"));
        }
        Ok(())
    }

    /// Applies one gate to the amplitudes whose bits in `ctrl` are all set.
    fn apply_gate_masked(&mut self, gate: &Gate, ctrl: usize) {
        match gate {
            Gate::Cnot { control, target } => {
                let c = ctrl | (1 << control);
                let t = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & c == c && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::Pauli(p) => self.apply_pauli_masked(p, ctrl),
            Gate::ControlledPauli { control, pauli } => {
                self.apply_pauli_masked(pauli, ctrl | (1 << control))
            }
            Gate::Controlled { control, gate } => {
                self.apply_gate_masked(gate, ctrl | (1 << control))
            }
            single => {
                let q = single.operands()[0];
                let m = single.matrix2().expect("single-qubit gate");
                self.apply_single_masked(q, &m, ctrl);
            }
        }
    }

    fn apply_single_masked(&mut self, qubit: usize, m: &Mat2, ctrl: usize) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & ctrl != ctrl {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_pauli_masked(&mut self, p: &PauliString, ctrl: usize) {
        let x = p.x_mask();
        for k in 0..self.amps.len() {
            if k & ctrl != ctrl {
                continue;
            }
            let partner = k ^ x;
            if x == 0 {
                let (ph, _) = p.apply_to_basis(k);
                self.amps[k] *= ph;
            } else if k < partner {
                let (ph_k, _) = p.apply_to_basis(k);
                let (ph_p, _) = p.apply_to_basis(partner);
                let (ak, ap) = (self.amps[k], self.amps[partner]);
                self.amps[partner] = ph_k * ak;
                self.amps[k] = ph_p * ap;
            }
        }
    }
}

/// Renders a basis index as a bitstring, qubit 0 first.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Measurement histogram keyed by bitstring (qubit 0 first).
pub type Counts = BTreeMap<String, u64>;

/// Draws `shots` computational-basis samples from `s`.
pub fn sample_counts(s: &Statevector, shots: u64, rng_seed: u64) -> Result<Counts> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let counts = sample_index_counts(s, shots, &mut rng)?;
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(k, c)| (bitstring(k, s.n_qubits), c))
        .collect())
}

/// Multinomial sample of basis-index counts, drawn as a chain of
/// conditional binomials.
pub fn sample_index_counts<R: rand::Rng + ?Sized>(
    s: &Statevector,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    s.check_normalized()?;
    let probs = s.probabilities();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if k == probs.len() - 1 {
            counts[k] = remaining_shots;
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining_shots, q)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        counts[k] = draw;
        remaining_shots -= draw;
        remaining_mass -= p;
    }
    Ok(counts)
}

/// Fraction of shots in `counts` with `qubit` in `outcome`.
pub fn count_marginal(counts: &Counts, qubit: usize, outcome: bool) -> Result<f64> {
    let mut total = 0u64;
    let mut hits = 0u64;
    for (bits, &c) in counts {
        let b = bits.as_bytes().get(qubit).ok_or(Error::QubitOutOfRange {
            qubit,
            n_qubits: bits.len(),
        })?;
        total += c;
        if (*b == b'1') == outcome {
            hits += c;
        }
    }
    if total == 0 {
        return Err(Error::InvalidParameter("empty histogram".into()));
    }
    Ok(hits as f64 / total as f64)
}

/// Which part of `<psi|U|psi>` a Hadamard test estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Real,
    Imag,
}

/// Shot budget for an estimate; `Exact` returns the analytic value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Sampled(u64),
}

/// Builds the Hadamard-test circuit with the ancilla on qubit `n`.
///
/// `prep` acts on the `n` system qubits; the ancilla receives H, then `S^dagger`
/// for the imaginary part, controls every gate of `u`, and a final H.
pub fn hadamard_test_circuit(prep: &Circuit, u: &Circuit, part: Part) -> Result<Circuit> {
    let n = prep.n_qubits();
    if u.n_qubits() > n {
        return Err(Error::AncillaCollision);
    }
    let ancilla = n;
    let mut c = Circuit::new(n + 1);
    c.append(prep)?;
    c.push(Gate::H(ancilla))?;
    if part == Part::Imag {
        c.push(Gate::Sdg(ancilla))?;
    }
    for g in u.gates() {
        c.push(g.controlled(ancilla))?;
    }
    c.push(Gate::H(ancilla))?;
    Ok(c)
}

/// Estimates `Re <psi|U|psi>` (or `Im`) as `P(0) - P(1)` on the ancilla,
/// where `|psi> = prep |0...0>`.
pub fn hadamard_test(
    prep: &Circuit,
    u: &Circuit,
    part: Part,
    shots: Shots,
    rng_seed: u64,
) -> Result<f64> {
    let c = hadamard_test_circuit(prep, u, part)?;
    let mut s = Statevector::zero(c.n_qubits());
    s.apply_circuit(&c)?;
    let p0 = s
        .marginal_probability(prep.n_qubits(), false)?
        .clamp(0.0, 1.0);
    match shots {
        Shots::Exact => Ok(2.0 * p0 - 1.0),
        Shots::Sampled(0) => Err(Error::InvalidParameter("shots must be positive".into())),
        Shots::Sampled(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let zeros = Binomial::new(n, p0)
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng);
            Ok((2.0 * zeros as f64 - n as f64) / n as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let mut circ = Circuit::new(1);
        circ.push(Gate::H(0)).unwrap();
        let out = circ.apply(&Statevector::zero(1)).unwrap();
        assert!(close(out.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.amplitudes()[1], c(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |10>: qubit 0 = 1, i.e. basis index 1
        let mut circ = Circuit::new(2);
        circ.push(Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let out = circ.apply(&Statevector::basis(2, 1).unwrap()).unwrap();
        assert_eq!(out, Statevector::basis(2, 3).unwrap());
    }

    #[test]
    fn invalid_gates_are_rejected() {
        let mut circ = Circuit::new(2);
        assert!(matches!(
            circ.push(Gate::X(2)),
            Err(Error::QubitOutOfRange { qubit: 2, .. })
        ));
        assert!(circ
            .push(Gate::Cnot {
                control: 1,
                target: 1
            })
            .is_err());
        assert!(circ
            .push(Gate::Rx {
                qubit: 0,
                theta: f64::NAN
            })
            .is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let circ = Circuit::new(2);
        assert!(matches!(
            circ.apply(&Statevector::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Statevector::from_amplitudes(vec![ONE; 3]).is_err());
        assert!(matches!(
            Statevector::from_amplitudes(vec![ONE, ONE]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn unitary_of_trivial_circuits() {
        let u = Circuit::new(2).unitary(12).unwrap();
        assert_eq!(u, CMatrix::identity(4, 4));
        let mut x = Circuit::new(1);
        x.push(Gate::X(0)).unwrap();
        let u = x.unitary(12).unwrap();
        assert_eq!(u[(0, 1)], ONE);
        assert_eq!(u[(1, 0)], ONE);
        assert_eq!(u[(0, 0)], ZERO);
    }

    #[test]
    fn sampling_basis_state() {
        let counts = sample_counts(&Statevector::zero(1), 100, 7).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["0"], 100);
    }

    #[test]
    fn sampling_plus_state_is_binomial() {
        let mut circ = Circuit::new(1);
        circ.push(Gate::H(0)).unwrap();
        let s = circ.apply(&Statevector::zero(1)).unwrap();
        let counts = sample_counts(&s, 1024, 2024).unwrap();
        let c0 = counts.get("0").copied().unwrap_or(0);
        let c1 = counts.get("1").copied().unwrap_or(0);
        assert_eq!(c0 + c1, 1024);
        assert!((c0 as f64 - 512.0).abs() <= 5.0 * 16.0);
        assert_eq!(counts, sample_counts(&s, 1024, 2024).unwrap());
    }

    #[test]
    fn sampling_rejects_unnormalized() {
        let s = Statevector::from_amplitudes_unnormalized(vec![ONE, ONE]).unwrap();
        assert!(sample_counts(&s, 10, 0).is_err());
    }

    #[test]
    fn marginals() {
        assert_eq!(
            Statevector::zero(2).marginal_probability(0, false).unwrap(),
            1.0
        );
        let h = FRAC_1_SQRT_2;
        let bell = Statevector::from_amplitudes(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap();
        assert!((bell.marginal_probability(1, false).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            bell.marginal_probability(2, false),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn count_marginal_reads_qubit_position() {
        let counts: Counts = [("10".to_string(), 3), ("01".to_string(), 1)]
            .into_iter()
            .collect();
        assert_eq!(count_marginal(&counts, 0, true).unwrap(), 0.75);
        assert_eq!(count_marginal(&counts, 1, false).unwrap(), 0.75);
        assert!(count_marginal(&counts, 2, false).is_err());
    }

    #[test]
    fn hadamard_test_trivial_cases() {
        let prep0 = Circuit::new(1);
        let mut prep1 = Circuit::new(1);
        prep1.push(Gate::X(0)).unwrap();
        let id = Circuit::new(1);
        assert!(
            (hadamard_test(&prep0, &id, Part::Real, Shots::Exact, 0).unwrap() - 1.0).abs() < 1e-12
        );

        let mut z = Circuit::new(1);
        z.push(Gate::Pauli("Z".parse().unwrap())).unwrap();
        assert!(
            (hadamard_test(&prep0, &z, Part::Real, Shots::Exact, 0).unwrap() - 1.0).abs() < 1e-12
        );
        assert!(
            (hadamard_test(&prep1, &z, Part::Real, Shots::Exact, 0).unwrap() + 1.0).abs() < 1e-12
        );

        let mut xx = Circuit::new(2);
        xx.push(Gate::Pauli("XX".parse().unwrap())).unwrap();
        let v = hadamard_test(&Circuit::new(2), &xx, Part::Real, Shots::Exact, 0).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn hadamard_test_imaginary_part() {
        // <+|S|+> = (1 + i)/2
        let mut prep = Circuit::new(1);
        prep.push(Gate::H(0)).unwrap();
        let mut u = Circuit::new(1);
        u.push(Gate::S(0)).unwrap();
        let re = hadamard_test(&prep, &u, Part::Real, Shots::Exact, 0).unwrap();
        let im = hadamard_test(&prep, &u, Part::Imag, Shots::Exact, 0).unwrap();
        assert!((re - 0.5).abs() < 1e-12);
        assert!((im - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hadamard_test_rejects_oversized_u() {
        assert!(matches!(
            hadamard_test(
                &Circuit::new(1),
                &Circuit::new(2),
                Part::Real,
                Shots::Exact,
                0
            ),
            Err(Error::AncillaCollision)
        ));
    }

    #[test]
    fn gate_counts() {
        let mut circ = Circuit::new(2);
        circ.extend([
            Gate::H(0),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Rz {
                qubit: 1,
                theta: 0.3,
            },
        ])
        .unwrap();
        assert_eq!(circ.cnot_count(), 1);
        assert_eq!(circ.single_qubit_count(), 2);
    }

    #[test]
    fn bitstrings_list_qubit_zero_first() {
        assert_eq!(bitstring(1, 2), "10");
        assert_eq!(bitstring(2, 3), "010");
    }
}
