//! First-order product-formula circuits for `H(t) = h_i + mu(t) h_d`.
//!
//! One step from `t` to `t + dt` applies, in circuit order, every one-body
//! exponential `exp(-i dt c P)` of `h_i` (qubit by qubit, X before Z) and then
//! one block per interacting pair `(i, j)` in lexicographic order carrying
//! `exp(-i dt mu' h_d^{ij})`, where `mu'` is the coupling at the end of the
//! step. Rotation gates follow `R_P(phi) = exp(-i phi P / 2)`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::grid::{StateTrajectory, TimeGrid};
use crate::model::{CouplingSchedule, HamiltonianSplit};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::statevector::{Circuit, Gate, Statevector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One CNOT-ladder circuit per two-body Pauli string.
    BruteForce,
    /// One three-CNOT block per exchange-coupled pair.
    Cartan,
}

/// Where inside a step the coupling is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuEvaluation {
    /// `mu(t + dt)`
    #[default]
    StepEnd,
    /// `mu(t + dt / 2)`
    Midpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterPlan {
    pub variant: Variant,
    pub dt: f64,
    pub mu_eval: MuEvaluation,
}

impl TrotterPlan {
    pub fn new(variant: Variant, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self {
            variant,
            dt,
            mu_eval: MuEvaluation::StepEnd,
        })
    }

    pub fn with_mu_eval(mut self, mu_eval: MuEvaluation) -> Self {
        self.mu_eval = mu_eval;
        self
    }

    fn mu_time(&self, t: f64) -> f64 {
        match self.mu_eval {
            MuEvaluation::StepEnd => t + self.dt,
            MuEvaluation::Midpoint => t + 0.5 * self.dt,
        }
    }
}

/// Gates implementing `exp(-i angle P / 2)`.
///
/// Single-qubit X and Z map to one rotation. Longer strings rotate each
/// factor into Z (H for X, `S^dagger` then H for Y), compute the parity onto
/// the highest qubit with a CNOT ladder, apply `RZ(angle)` and undo.
pub fn pauli_exponential(p: &PauliString, angle: f64) -> Vec<Gate> {
    let support = p.support();
    match support.as_slice() {
        [] => Vec::new(),
        [q] => match p.get(*q) {
            Pauli::X => vec![Gate::Rx {
                qubit: *q,
                theta: angle,
            }],
            Pauli::Z => vec![Gate::Rz {
                qubit: *q,
                theta: angle,
            }],
            Pauli::Y => vec![
                Gate::Sdg(*q),
                Gate::Rx {
                    qubit: *q,
                    theta: angle,
                },
                Gate::S(*q),
            ],
            Pauli::I => unreachable!(),
        },
        _ => {
            let mut gates = Vec::new();
            for &q in &support {
                if p.get(q) == Pauli::Y {
                    gates.push(Gate::Sdg(q));
                }
            }
            for &q in &support {
                if p.get(q) != Pauli::Z {
                    gates.push(Gate::H(q));
                }
            }
            let ladder: Vec<Gate> = support
                .windows(2)
                .map(|w| Gate::Cnot {
                    control: w[0],
                    target: w[1],
                })
                .collect();
            gates.extend(ladder.iter().cloned());
            gates.push(Gate::Rz {
                qubit: *support.last().expect("weight >= 2"),
                theta: angle,
            });
            gates.extend(ladder.into_iter().rev());
            for &q in &support {
                if p.get(q) != Pauli::Z {
                    gates.push(Gate::H(q));
                }
            }
            for &q in &support {
                if p.get(q) == Pauli::Y {
                    gates.push(Gate::S(q));
                }
            }
            gates
        }
    }
}

/// Three-CNOT block equal to `exp(-(i/2) angle (XX + YY + ZZ))` on `(a, b)`
/// up to a global phase.
///
/// The closing single-qubit layer is `RX(-pi/2)` on `a` and `RX(pi/2)` on `b`;
/// the opposite signs do not reproduce the exchange exponential.
pub fn cartan_gates(a: usize, b: usize, angle: f64) -> Vec<Gate> {
    let cnot = Gate::Cnot {
        control: a,
        target: b,
    };
    vec![
        cnot.clone(),
        Gate::Rx {
            qubit: a,
            theta: angle,
        },
        Gate::Rz {
            qubit: b,
            theta: angle,
        },
        Gate::H(a),
        cnot.clone(),
        Gate::S(a),
        Gate::Rz {
            qubit: b,
            theta: -angle,
        },
        Gate::H(a),
        cnot,
        Gate::Rx {
            qubit: a,
            theta: -FRAC_PI_2,
        },
        Gate::Rx {
            qubit: b,
            theta: FRAC_PI_2,
        },
    ]
}

/// Two-qubit circuit for `exp(-(i/2) mu_dt (XX + YY + ZZ))`, up to a global phase.
pub fn cartan_pair_block(mu_dt: f64) -> Result<Circuit> {
    let mut c = Circuit::new(2);
    c.extend(cartan_gates(0, 1, mu_dt))?;
    Ok(c)
}

fn real_coeff(p: &PauliString, c: num_complex::Complex64) -> Result<f64> {
    if c.im.abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "term {p} has a complex coefficient; cannot exponentiate a non-Hermitian term"
        )));
    }
    Ok(c.re)
}

/// One-body terms ordered by qubit, then label.
fn ordered_terms(sum: &PauliSum) -> Result<Vec<(PauliString, f64)>> {
    let mut terms: Vec<_> = sum
        .iter()
        .map(|(s, &c)| real_coeff(s, c).map(|c| (s.clone(), c)))
        .collect::<Result<_>>()?;
    terms.sort_by(|a, b| (a.0.support(), &a.0).cmp(&(b.0.support(), &b.0)));
    Ok(terms)
}

type PairBlocks = BTreeMap<Vec<usize>, Vec<(PauliString, f64)>>;

/// Two-body terms grouped by support; groups in lexicographic support order,
/// ZZ before XX before YY inside a group.
fn pair_blocks(h_d: &PauliSum) -> Result<PairBlocks> {
    let mut blocks = PairBlocks::new();
    for (s, &c) in h_d.iter() {
        blocks
            .entry(s.support())
            .or_default()
            .push((s.clone(), real_coeff(s, c)?));
    }
    let rank = |p: &PauliString| match p.labels().iter().find(|&&l| l != Pauli::I) {
        Some(Pauli::Z) => 0,
        Some(Pauli::X) => 1,
        Some(Pauli::Y) => 2,
        _ => 3,
    };
    for terms in blocks.values_mut() {
        terms.sort_by(|a, b| (rank(&a.0), &a.0).cmp(&(rank(&b.0), &b.0)));
    }
    Ok(blocks)
}

/// Common coefficient if the block is exactly `c (XX + YY + ZZ)` on a pair.
fn exchange_coefficient(support: &[usize], terms: &[(PauliString, f64)]) -> Option<f64> {
    if support.len() != 2 || terms.len() != 3 {
        return None;
    }
    let c = terms[0].1;
    let labels_ok = terms
        .iter()
        .all(|(s, _)| s.get(support[0]) == s.get(support[1]));
    let coeffs_ok = terms
        .iter()
        .all(|(_, x)| (x - c).abs() <= 1e-14 * c.abs().max(1.0));
    (labels_ok && coeffs_ok).then_some(c)
}

/// Circuit for one step from `t` to `t + dt`.
pub fn step_circuit(
    split: &HamiltonianSplit,
    plan: &TrotterPlan,
    t: f64,
    schedule: &CouplingSchedule,
) -> Result<Circuit> {
    let mu = schedule.mu_at(plan.mu_time(t))?;
    step_circuit_with_mu(split, plan, mu)
}

/// Circuit for one step at a given coupling value.
pub fn step_circuit_with_mu(
    split: &HamiltonianSplit,
    plan: &TrotterPlan,
    mu: f64,
) -> Result<Circuit> {
    let dt = plan.dt;
    let mut circuit = Circuit::new(split.n_qubits());
    for (s, c) in ordered_terms(&split.h_i)? {
        circuit.extend(pauli_exponential(&s, 2.0 * c * dt))?;
    }
    for (support, terms) in pair_blocks(&split.h_d)? {
        match (plan.variant, exchange_coefficient(&support, &terms)) {
            (Variant::Cartan, Some(c)) => {
                circuit.extend(cartan_gates(support[0], support[1], 2.0 * c * mu * dt))?;
            }
            _ => {
                for (s, c) in terms {
                    circuit.extend(pauli_exponential(&s, 2.0 * c * mu * dt))?;
                }
            }
        }
    }
    Ok(circuit)
}

/// Output of [`evolve`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterEvolution {
    pub trajectory: StateTrajectory,
    /// Gates a from-scratch circuit up to each grid point would contain.
    pub cumulative_gates: Vec<usize>,
}

/// Runs the product formula on the grid `t_start, t_start + dt, ...`,
/// carrying the statevector forward from step to step.
///
/// `observer` sees every grid point, the initial state included, as
/// `(step index, time, state)`.
pub fn evolve<F>(
    split: &HamiltonianSplit,
    plan: &TrotterPlan,
    schedule: &CouplingSchedule,
    state0: &Statevector,
    t_start: f64,
    t_end: f64,
    mut observer: F,
) -> Result<TrotterEvolution>
where
    F: FnMut(usize, f64, &Statevector) -> Result<()>,
{
    let grid = TimeGrid::new(t_start, t_end, plan.dt)?;
    let mut state = state0.clone();
    let mut times = Vec::with_capacity(grid.steps() + 1);
    let mut states = Vec::with_capacity(grid.steps() + 1);
    let mut cumulative_gates = Vec::with_capacity(grid.steps() + 1);
    let mut total = 0usize;

    observer(0, grid.time(0), &state)?;
    times.push(grid.time(0));
    states.push(state.clone());
    cumulative_gates.push(0);
    for k in 0..grid.steps() {
        let circuit = step_circuit(split, plan, grid.time(k), schedule)?;
        state.apply_circuit(&circuit)?;
        total += circuit.len();
        let t = grid.time(k + 1);
        observer(k + 1, t, &state)?;
        times.push(t);
        states.push(state.clone());
        cumulative_gates.push(total);
    }
    Ok(TrotterEvolution {
        trajectory: StateTrajectory { times, states },
        cumulative_gates,
    })
}
