//! Quantum-assisted simulation.
//!
//! The state is expanded as `|phi(t)> = sum_i alpha_i(t) |psi_i>` over a fixed
//! basis `|psi_i> = P_i |psi_0>`, where the `P_i` are cumulative K-moment
//! products of the operators obtained from the nested commutators of `h_i`
//! and `h_d`. The overlaps
//!
//! ```text
//! E_ij   = <psi_i|psi_j>
//! D_I_ij = sum_k beta_k  <psi_i|U_k|psi_j>     (h_i = sum_k beta_k U_k)
//! D_D_ij = sum_k gamma_k <psi_i|V_k|psi_j>     (h_d = sum_k gamma_k V_k)
//! ```
//!
//! are estimated once with Hadamard tests. Afterwards
//! `E d(alpha)/dt = -i (D_I + mu(t) D_D) alpha` is integrated classically and
//! never touches the estimator again.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use log::debug;
use nalgebra::SVD;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{hermiticity_defect, CMatrix, CVector};
use crate::grid::TimeGrid;
use crate::model::{CouplingSchedule, HamiltonianSplit};
use crate::pauli::{
    multiply, nested_commutator_closure, PauliString, PauliSum, DEFAULT_CLOSURE_CAP,
};
use crate::statevector::{hadamard_test, Circuit, Gate, Part, Shots, Statevector};
use crate::{Error, Result};

/// Default cap on the basis size.
pub const DEFAULT_BASIS_CAP: usize = 256;

/// Default nesting limit when generating the ansatz operators.
pub const DEFAULT_CLOSURE_DEPTH: usize = 32;

/// Singular values below `RCOND * sigma_max` of `E` are treated as zero.
pub const RCOND: f64 = 1e-10;

/// Allowed `|alpha^dagger E alpha - 1|` for an initial coefficient vector.
pub const ALPHA_NORM_TOLERANCE: f64 = 1e-6;

/// Ordering used for generators: weight, then support, then labels.
fn generator_key(p: &PauliString) -> (usize, Vec<usize>, PauliString) {
    (p.weight(), p.support(), p.clone())
}

/// The phase-stripped operator set `{I} u strings(h_i) u strings of the
/// nested commutators of h_i with h_d`, in generator order.
pub fn ansatz_operators(split: &HamiltonianSplit, max_depth: usize) -> Result<Vec<PauliString>> {
    let closure =
        nested_commutator_closure(&split.h_i, &split.h_d, max_depth, DEFAULT_CLOSURE_CAP)?;
    debug!(
        "ansatz closure: {} strings, fixed point {:?}",
        closure.strings.len(),
        closure.fixed_point
    );
    let mut ops: Vec<_> = closure.strings.into_iter().collect();
    ops.sort_by_key(generator_key);
    Ok(ops)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QasBasis {
    pub generators: Vec<PauliString>,
    pub states: Vec<Statevector>,
    pub moment_order: usize,
    prep: Circuit,
}

impl QasBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Circuit preparing `|psi_0>` from `|0...0>`.
    pub fn prep(&self) -> &Circuit {
        &self.prep
    }
}

/// Cumulative `moment`-moment basis from the ansatz operators of `split`.
pub fn build_basis(
    split: &HamiltonianSplit,
    prep: &Circuit,
    moment: usize,
    reduce: bool,
) -> Result<QasBasis> {
    let ops = ansatz_operators(split, DEFAULT_CLOSURE_DEPTH)?;
    build_basis_from_operators(&ops, prep, moment, reduce, DEFAULT_BASIS_CAP)
}

/// Cumulative K-moment basis: `{I}`, `{P}`, `{P Q}`, ... up to `moment`
/// factors drawn from `operators`, phases stripped.
///
/// With `reduce`, a generator is dropped when its state equals an earlier
/// one up to a phase; for a computational-basis `|psi_0>` that means both
/// strings flip the same qubits.
pub fn build_basis_from_operators(
    operators: &[PauliString],
    prep: &Circuit,
    moment: usize,
    reduce: bool,
    cap: usize,
) -> Result<QasBasis> {
    if moment == 0 {
        return Err(Error::InvalidParameter(
            "moment order must be at least 1".into(),
        ));
    }
    let n = prep.n_qubits();
    if let Some(p) = operators.iter().find(|p| p.n_qubits() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: p.n_qubits(),
        });
    }
    let mut all: BTreeSet<PauliString> = BTreeSet::new();
    let mut level: BTreeSet<PauliString> = [PauliString::identity(n)].into_iter().collect();
    all.extend(level.iter().cloned());
    for _ in 0..moment {
        let mut next = BTreeSet::new();
        for a in &level {
            for b in operators {
                next.insert(multiply(b, a)?.1);
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    let mut candidates: Vec<_> = all.into_iter().collect();
    candidates.sort_by_key(generator_key);

    let psi0 = prep.apply(&Statevector::zero(n))?;
    let mut generators = Vec::new();
    let mut states: Vec<Statevector> = Vec::new();
    for g in candidates {
        let mut c = Circuit::new(n);
        c.push(Gate::Pauli(g.clone()))?;
        let state = c.apply(&psi0)?;
        if reduce {
            let mut duplicate = false;
            for s in &states {
                if (s.inner(&state)?.norm() - 1.0).abs() < 1e-12 {
                    duplicate = true;
                    break;
                }
            }
            if duplicate {
                continue;
            }
        }
        generators.push(g);
        states.push(state);
    }
    if states.len() > cap {
        return Err(Error::BasisTooLarge {
            size: states.len(),
            cap,
        });
    }
    Ok(QasBasis {
        generators,
        states,
        moment_order: moment,
        prep: prep.clone(),
    })
}

/// Hadamard-test estimator of `<psi_0|P|psi_0>` with an invocation counter.
#[derive(Debug)]
pub struct HadamardBackend {
    shots: Shots,
    rng: ChaCha8Rng,
    seed: u64,
    calls: Arc<AtomicUsize>,
}

impl HadamardBackend {
    /// Analytic `P(0) - P(1)` for every test.
    pub fn exact() -> Self {
        Self::new(Shots::Exact, 0)
    }

    /// `shots` samples per test; per-test seeds are drawn from `seed`.
    pub fn sampled(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be positive".into()));
        }
        Ok(Self::new(Shots::Sampled(shots), seed))
    }

    fn new(shots: Shots, seed: u64) -> Self {
        Self {
            shots,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            calls: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Shared handle on the number of Hadamard tests run so far.
    pub fn call_counter(&self) -> Arc<AtomicUsize> {
        Arc::clone(&self.calls)
    }

    pub fn invocations(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// One Hadamard test for `Re` or `Im` of `<psi_0|P|psi_0>`.
    pub fn estimate(&mut self, prep: &Circuit, p: &PauliString, part: Part) -> Result<f64> {
        let mut u = Circuit::new(prep.n_qubits());
        u.push(Gate::Pauli(p.clone()))?;
        let seed = self.rng.random::<u64>();
        self.calls.fetch_add(1, Ordering::SeqCst);
        hadamard_test(prep, &u, part, self.shots, seed)
    }

    fn expectation(&mut self, prep: &Circuit, p: &PauliString) -> Result<Complex64> {
        let re = self.estimate(prep, p, Part::Real)?;
        let im = self.estimate(prep, p, Part::Imag)?;
        Ok(Complex64::new(re, im))
    }

    /// Largest acceptable Hermiticity defect for a matrix whose entries are
    /// sums of expectation values weighted by `coeff_l1` in total.
    fn hermiticity_bound(&self, coeff_l1: f64) -> f64 {
        match self.shots {
            Shots::Exact => 1e-10,
            // each part has standard deviation <= coeff_l1 / sqrt(shots); allow
            // six standard deviations on each of the two parts of both entries
            Shots::Sampled(s) => 1e-10 + 12.0 * coeff_l1 / (s as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrices {
    pub e: CMatrix,
    pub d_i: CMatrix,
    pub d_d: CMatrix,
}

impl OverlapMatrices {
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn d_at(&self, mu: f64) -> CMatrix {
        &self.d_i + &self.d_d * Complex64::from(mu)
    }
}

/// `<psi_0| P_i T P_j |psi_0>` from one expectation of the product string.
fn matrix_element(
    backend: &mut HadamardBackend,
    prep: &Circuit,
    left: &PauliString,
    middle: &PauliString,
    right: &PauliString,
) -> Result<Complex64> {
    let (ph1, lm) = multiply(left, middle)?;
    let (ph2, product) = multiply(&lm, right)?;
    Ok((ph1 * ph2).to_complex() * backend.expectation(prep, &product)?)
}

fn weighted_element(
    backend: &mut HadamardBackend,
    prep: &Circuit,
    left: &PauliString,
    op: &PauliSum,
    right: &PauliString,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, &c) in op.iter() {
        acc += c * matrix_element(backend, prep, left, s, right)?;
    }
    Ok(acc)
}

/// Estimates `E`, `D_I` and `D_D` with Hadamard tests.
///
/// Every entry is estimated independently and checked, not symmetrized.
pub fn estimate_overlaps(
    basis: &QasBasis,
    split: &HamiltonianSplit,
    backend: &mut HadamardBackend,
) -> Result<OverlapMatrices> {
    if basis.is_empty() {
        return Err(Error::InvalidParameter("empty QAS basis".into()));
    }
    let n = basis.prep.n_qubits();
    if split.n_qubits() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: split.n_qubits(),
        });
    }
    let m = basis.len();
    let identity = PauliString::identity(n);
    let mut e = CMatrix::zeros(m, m);
    let mut d_i = CMatrix::zeros(m, m);
    let mut d_d = CMatrix::zeros(m, m);
    for (i, gi) in basis.generators.iter().enumerate() {
        for (j, gj) in basis.generators.iter().enumerate() {
            e[(i, j)] = matrix_element(backend, &basis.prep, gi, &identity, gj)?;
            d_i[(i, j)] = weighted_element(backend, &basis.prep, gi, &split.h_i, gj)?;
            d_d[(i, j)] = weighted_element(backend, &basis.prep, gi, &split.h_d, gj)?;
        }
    }
    let l1 = |op: &PauliSum| op.iter().map(|(_, c)| c.norm()).sum::<f64>();
    for (name, mat, weight) in [
        ("E", &e, 1.0),
        ("D_I", &d_i, l1(&split.h_i)),
        ("D_D", &d_d, l1(&split.h_d)),
    ] {
        let defect = hermiticity_defect(mat);
        let bound = backend.hermiticity_bound(weight);
        if defect > bound {
            return Err(Error::NonHermitian {
                matrix: name,
                defect,
                bound,
            });
        }
    }
    Ok(OverlapMatrices { e, d_i, d_d })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Explicit update `alpha(t + h) = alpha(t) + h d(alpha)/dt`.
    Euler,
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    /// Classical steps per reporting step.
    pub substeps: usize,
    /// Rescale so that `alpha^dagger E alpha = 1` at each reporting point.
    pub renormalize: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Rk4,
            substeps: 20,
            renormalize: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaTrajectory {
    pub times: Vec<f64>,
    pub alphas: Vec<CVector>,
    /// Largest `|alpha^dagger E alpha - 1|` at a reporting point before rescaling.
    pub max_norm_drift: f64,
}

/// `Re(alpha^dagger E alpha)`.
fn alpha_norm(e: &CMatrix, alpha: &CVector) -> f64 {
    (alpha.adjoint() * e * alpha)[(0, 0)].re
}

/// Integrates `E d(alpha)/dt = -i (D_I + mu(t) D_D) alpha` on the reporting
/// grid, solving for `d(alpha)/dt` with a pseudo-inverse of `E`.
///
/// `observer` receives `(step, t, alpha)` at every grid point, the initial
/// one included.
#[allow(clippy::too_many_arguments)]
pub fn propagate_alpha<F>(
    overlaps: &OverlapMatrices,
    schedule: &CouplingSchedule,
    alpha0: &CVector,
    t_start: f64,
    t_end: f64,
    report_dt: f64,
    options: &PropagationOptions,
    mut observer: F,
) -> Result<AlphaTrajectory>
where
    F: FnMut(usize, f64, &CVector) -> Result<()>,
{
    let m = overlaps.dim();
    if alpha0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: alpha0.len(),
        });
    }
    if options.substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be positive".into()));
    }
    // the real part is the quadratic form of the Hermitian part of E
    let norm0 = alpha_norm(&overlaps.e, alpha0);
    if (norm0 - 1.0).abs() > ALPHA_NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sq: norm0 });
    }
    let grid = TimeGrid::new(t_start, t_end, report_dt)?;
    let e_pinv = pseudo_inverse(&overlaps.e)?;
    let minus_i = Complex64::new(0.0, -1.0);
    let a_i = &e_pinv * &overlaps.d_i * minus_i;
    let a_d = &e_pinv * &overlaps.d_d * minus_i;
    let rhs = |mu: f64, v: &CVector| -> CVector { &a_i * v + &a_d * v * Complex64::from(mu) };

    let h = report_dt / options.substeps as f64;
    let hc = Complex64::from(h);
    let mut alpha = alpha0.clone();
    let mut times = vec![grid.time(0)];
    let mut alphas = vec![alpha.clone()];
    let mut max_norm_drift = 0.0f64;
    observer(0, grid.time(0), &alpha)?;

    for k in 0..grid.steps() {
        let t0 = grid.time(k);
        for j in 0..options.substeps {
            let t = t0 + j as f64 * h;
            alpha = match options.integrator {
                Integrator::Euler => {
                    let mu = schedule.mu_at(t)?;
                    &alpha + rhs(mu, &alpha) * hc
                }
                Integrator::Rk4 => {
                    let mu0 = schedule.mu_at(t)?;
                    let mu_half = schedule.mu_at(t + 0.5 * h)?;
                    let mu1 = schedule.mu_at(t + h)?;
                    let k1 = rhs(mu0, &alpha);
                    let k2 = rhs(mu_half, &(&alpha + &k1 * (hc * 0.5)));
                    let k3 = rhs(mu_half, &(&alpha + &k2 * (hc * 0.5)));
                    let k4 = rhs(mu1, &(&alpha + &k3 * hc));
                    &alpha
                        + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
                            * (hc / 6.0)
                }
            };
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("QAS coefficients"));
        }
        let norm = alpha_norm(&overlaps.e, &alpha);
        max_norm_drift = max_norm_drift.max((norm - 1.0).abs());
        if options.renormalize {
            if norm <= 0.0 {
                return Err(Error::NotNormalized { norm_sq: norm });
            }
            alpha /= Complex64::from(norm.sqrt());
        }
        let t = grid.time(k + 1);
        observer(k + 1, t, &alpha)?;
        times.push(t);
        alphas.push(alpha.clone());
    }
    debug!("QAS propagation finished, max norm drift {max_norm_drift:.3e}");
    Ok(AlphaTrajectory {
        times,
        alphas,
        max_norm_drift,
    })
}

/// Pseudo-inverse with singular values below `RCOND * sigma_max` dropped.
pub fn pseudo_inverse(e: &CMatrix) -> Result<CMatrix> {
    let svd = SVD::new(e.clone(), true, true);
    let sigma_max = svd.singular_values.max();
    if !(sigma_max.is_finite() && sigma_max > 0.0) {
        return Err(Error::InvalidParameter(
            "overlap matrix E is zero or non-finite".into(),
        ));
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RCOND * sigma_max)
        .count();
    if rank < e.nrows() {
        debug!("E is rank deficient: rank {rank} of {}", e.nrows());
    }
    svd.pseudo_inverse(RCOND * sigma_max)
        .map_err(|msg| Error::InvalidParameter(msg.to_string()))
}

/// Coefficients of `|psi_0>` itself: `alpha = (1, 0, ..., 0)`.
pub fn initial_alpha(basis: &QasBasis) -> CVector {
    let mut a = CVector::zeros(basis.len());
    if !a.is_empty() {
        a[0] = Complex64::from(1.0);
    }
    a
}

/// `|phi> = sum_i alpha_i |psi_i>`, unnormalized.
pub fn reconstruct(basis: &QasBasis, alpha: &CVector) -> Result<Vec<Complex64>> {
    if alpha.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: alpha.len(),
        });
    }
    let dim = basis.states.first().map_or(0, Statevector::dim);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (a, s) in alpha.iter().zip(&basis.states) {
        for (out, x) in amps.iter_mut().zip(s.amplitudes()) {
            *out += a * x;
        }
    }
    Ok(amps)
}

/// Marginal probability of `outcome` on `qubit` in the reconstructed state.
///
/// The state is rescaled to unit norm after checking that its squared norm
/// is within `norm_tolerance` of one.
pub fn survival_from_alpha(
    basis: &QasBasis,
    alpha: &CVector,
    qubit: usize,
    outcome: bool,
    norm_tolerance: f64,
) -> Result<f64> {
    let amps = reconstruct(basis, alpha)?;
    let state = Statevector::from_amplitudes_unnormalized(amps)?;
    if qubit >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit,
            n_qubits: state.n_qubits(),
        });
    }
    let norm_sq = state.norm_sqr();
    if (norm_sq - 1.0).abs() > norm_tolerance {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok((state.marginal_unchecked(qubit, outcome) / norm_sq).clamp(0.0, 1.0))
}

/// Norm tolerance for states rebuilt from sampled overlaps: each entry of
/// `E` carries up to five standard deviations `sqrt(2 / shots)`, and
/// `|alpha|_1^2 <= m |alpha|_2^2`.
pub fn sampled_norm_tolerance(shots: u64, basis_size: usize) -> f64 {
    ALPHA_NORM_TOLERANCE + basis_size as f64 * 5.0 * (2.0 / shots as f64).sqrt()
}

/// Everything a single QAS run produces.
#[derive(Clone, Debug)]
pub struct QasRun {
    pub overlaps: OverlapMatrices,
    pub trajectory: AlphaTrajectory,
    /// Hadamard tests executed before propagation began.
    pub estimation_calls: usize,
    /// Hadamard tests executed while propagating; zero by construction.
    pub propagation_calls: usize,
}

/// Estimates the overlaps once, then propagates from `|psi_0>`.
#[allow(clippy::too_many_arguments)]
pub fn run<F>(
    basis: &QasBasis,
    split: &HamiltonianSplit,
    schedule: &CouplingSchedule,
    backend: &mut HadamardBackend,
    t_start: f64,
    t_end: f64,
    report_dt: f64,
    options: &PropagationOptions,
    observer: F,
) -> Result<QasRun>
where
    F: FnMut(usize, f64, &CVector) -> Result<()>,
{
    let overlaps = estimate_overlaps(basis, split, backend)?;
    let estimation_calls = backend.invocations();
    let trajectory = propagate_alpha(
        &overlaps,
        schedule,
        &initial_alpha(basis),
        t_start,
        t_end,
        report_dt,
        options,
        observer,
    )?;
    let propagation_calls = backend.invocations() - estimation_calls;
    Ok(QasRun {
        overlaps,
        trajectory,
        estimation_calls,
        propagation_calls,
    })
}
