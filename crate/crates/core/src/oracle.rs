//! Classical reference propagation of `i d/dt psi = H(t) psi` with dense matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{CMatrix, CVector, DEFAULT_DENSE_CAP};
use crate::grid::{StateTrajectory, TimeGrid};
use crate::model::{CouplingSchedule, HamiltonianSplit};
use crate::statevector::Statevector;
use crate::{Error, Result};

/// Norm drift within one reporting step that aborts the integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Classic fourth-order Runge-Kutta, coupling sampled at `t, t + h/2, t + h`.
    Rk4,
    /// `exp(-i H(t + h/2) h)` per inner step.
    ExpmStep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub method: OracleMethod,
    /// Inner steps per reporting step, so `dt_inner = report_dt / substeps`.
    pub substeps: usize,
    pub dense_cap: usize,
    /// Rescale to unit norm after each reporting step.
    pub renormalize: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            method: OracleMethod::Rk4,
            substeps: 100,
            dense_cap: DEFAULT_DENSE_CAP,
            renormalize: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactTrajectory {
    pub trajectory: StateTrajectory,
    /// Largest `| ||psi|| - 1 |` seen at a reporting point before rescaling.
    pub max_norm_drift: f64,
}

/// Integrates from `t_start` to `t_end`, reporting every `report_dt`.
pub fn evolve_exact(
    split: &HamiltonianSplit,
    schedule: &CouplingSchedule,
    state0: &Statevector,
    t_start: f64,
    t_end: f64,
    report_dt: f64,
    config: &OracleConfig,
) -> Result<ExactTrajectory> {
    if config.substeps == 0 {
        return Err(Error::InvalidParameter(
            "oracle substeps must be positive".into(),
        ));
    }
    if state0.n_qubits() != split.n_qubits() {
        return Err(Error::LengthMismatch {
            left: split.n_qubits(),
            right: state0.n_qubits(),
        });
    }
    let grid = TimeGrid::new(t_start, t_end, report_dt)?;
    let (h_i, h_d) = split.dense(config.dense_cap)?;
    let h = config.substeps as f64;
    let inner = report_dt / h;

    let mut psi = CVector::from_column_slice(state0.amplitudes());
    let mut times = vec![grid.time(0)];
    let mut states = vec![state0.clone()];
    let mut max_norm_drift = 0.0f64;

    for k in 0..grid.steps() {
        let t0 = grid.time(k);
        for j in 0..config.substeps {
            let t = t0 + j as f64 * inner;
            psi = match config.method {
                OracleMethod::Rk4 => rk4_step(&h_i, &h_d, schedule, &psi, t, inner)?,
                OracleMethod::ExpmStep => {
                    let mu = schedule.mu_at(t + 0.5 * inner)?;
                    expm_propagate(&(&h_i + &h_d * Complex64::from(mu)), &psi, inner)
                }
            };
        }
        let t = grid.time(k + 1);
        let norm = psi.norm();
        let drift = (norm - 1.0).abs();
        if !drift.is_finite() || drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                drift,
                t,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        max_norm_drift = max_norm_drift.max(drift);
        if config.renormalize {
            psi /= Complex64::from(norm);
        }
        times.push(t);
        states.push(Statevector::from_amplitudes_unnormalized(
            psi.iter().copied().collect(),
        )?);
    }
    Ok(ExactTrajectory {
        trajectory: StateTrajectory { times, states },
        max_norm_drift,
    })
}

fn rk4_step(
    h_i: &CMatrix,
    h_d: &CMatrix,
    schedule: &CouplingSchedule,
    psi: &CVector,
    t: f64,
    h: f64,
) -> Result<CVector> {
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs =
        |mu: f64, v: &CVector| -> CVector { (h_i * v + h_d * v * Complex64::from(mu)) * minus_i };
    let mu0 = schedule.mu_at(t)?;
    let mu_half = schedule.mu_at(t + 0.5 * h)?;
    let mu1 = schedule.mu_at(t + h)?;
    let hc = Complex64::from(h);
    let k1 = rhs(mu0, psi);
    let k2 = rhs(mu_half, &(psi + &k1 * (hc * 0.5)));
    let k3 = rhs(mu_half, &(psi + &k2 * (hc * 0.5)));
    let k4 = rhs(mu1, &(psi + &k3 * hc));
    Ok(psi + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * (hc / 6.0))
}

/// `exp(-i H t) psi` for a fixed Hermitian `H`.
pub fn expm_propagate(h: &CMatrix, psi: &CVector, t: f64) -> CVector {
    let generator = h * Complex64::new(0.0, -t);
    generator.exp() * psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::state_distance;
    use crate::model::build_model;

    #[test]
    fn stationary_without_mixing_or_coupling() {
        let split = build_model(2, 0.0).unwrap();
        let sched = CouplingSchedule::constant(0.0).unwrap();
        let out = evolve_exact(
            &split,
            &sched,
            &Statevector::zero(2),
            0.0,
            5.0,
            0.2,
            &OracleConfig::default(),
        )
        .unwrap();
        for p in out.trajectory.marginals(0, false).unwrap() {
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_hamiltonian_matches_closed_form() {
        let split = build_model(2, 0.4).unwrap();
        let sched = CouplingSchedule::constant(1.3).unwrap();
        let cfg = OracleConfig {
            substeps: 200,
            ..OracleConfig::default()
        };
        // dt_inner = 0.2 / 200 = 1e-3
        let out = evolve_exact(&split, &sched, &Statevector::zero(2), 0.0, 2.0, 0.2, &cfg).unwrap();
        let h = split.at(1.3).to_matrix(12).unwrap();
        let exact = expm_propagate(
            &h,
            &CVector::from_column_slice(Statevector::zero(2).amplitudes()),
            2.0,
        );
        let last = out.trajectory.last().unwrap().amplitudes();
        let err = last
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "error {err}");
    }

    #[test]
    fn rk4_and_expm_agree_with_time_dependent_coupling() {
        let split = build_model(2, 0.195).unwrap();
        let sched = CouplingSchedule::supernova_profile(1.0, 200.0).unwrap();
        let rk4 = OracleConfig::default();
        let expm = OracleConfig {
            method: OracleMethod::ExpmStep,
            substeps: 400,
            ..OracleConfig::default()
        };
        let s0 = Statevector::zero(2);
        let a = evolve_exact(&split, &sched, &s0, 210.64, 212.64, 0.2, &rk4).unwrap();
        let b = evolve_exact(&split, &sched, &s0, 210.64, 212.64, 0.2, &expm).unwrap();
        let d = state_distance(
            a.trajectory.last().unwrap().amplitudes(),
            b.trajectory.last().unwrap().amplitudes(),
        );
        assert!(d < 1e-7, "distance {d}");
    }

    #[test]
    fn rejects_oversized_register() {
        let split = build_model(3, 0.1).unwrap();
        let cfg = OracleConfig {
            dense_cap: 2,
            ..OracleConfig::default()
        };
        let sched = CouplingSchedule::constant(1.0).unwrap();
        assert!(matches!(
            evolve_exact(&split, &sched, &Statevector::zero(3), 0.0, 1.0, 0.2, &cfg),
            Err(Error::RegisterTooLarge { .. })
        ));
    }

    #[test]
    fn unstable_step_aborts() {
        let split = build_model(2, 0.4).unwrap();
        let sched = CouplingSchedule::constant(50.0).unwrap();
        let cfg = OracleConfig {
            substeps: 1,
            ..OracleConfig::default()
        };
        assert!(matches!(
            evolve_exact(&split, &sched, &Statevector::zero(2), 0.0, 2.0, 0.2, &cfg),
            Err(Error::NormDrift { .. })
        ));
    }
}
