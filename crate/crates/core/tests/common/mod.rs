#![allow(dead_code)]

use cnosim::dense::{state_distance, CVector};
use cnosim::model::{build_model, CouplingSchedule};
use cnosim::oracle::{evolve_exact, expm_propagate, OracleConfig};
use cnosim::statevector::Statevector;
use cnosim::trotter::{evolve, TrotterPlan, Variant};

pub const T_START: f64 = 210.64;
pub const THETA: f64 = 0.195;

/// Time-varying coupling used by the convergence checks.
pub fn profile() -> CouplingSchedule {
    CouplingSchedule::supernova_profile(1.0, 200.0).unwrap()
}

/// Final-state distance between the product formula and the classical
/// reference on a two-neutrino system.
pub fn trotter_final_error(dt: f64, window: f64, schedule: &CouplingSchedule) -> f64 {
    let split = build_model(2, THETA).unwrap();
    let s0 = Statevector::zero(2);
    let t_end = T_START + window;
    let plan = TrotterPlan::new(Variant::BruteForce, dt).unwrap();
    let trotter = evolve(&split, &plan, schedule, &s0, T_START, t_end, |_, _, _| {
        Ok(())
    })
    .unwrap();
    let oracle = OracleConfig {
        substeps: 400,
        ..OracleConfig::default()
    };
    let exact = evolve_exact(&split, schedule, &s0, T_START, t_end, window, &oracle).unwrap();
    state_distance(
        trotter.trajectory.last().unwrap().amplitudes(),
        exact.trajectory.last().unwrap().amplitudes(),
    )
}

/// RK4 error against `exp(-i H T) psi0` for a constant two-neutrino `H`.
pub fn rk4_constant_error(substeps: usize) -> f64 {
    let split = build_model(2, 0.4).unwrap();
    let mu = 1.3;
    let sched = CouplingSchedule::constant(mu).unwrap();
    let span = 2.0;
    let cfg = OracleConfig {
        substeps,
        renormalize: false,
        ..OracleConfig::default()
    };
    let s0 = Statevector::zero(2);
    let out = evolve_exact(&split, &sched, &s0, 0.0, span, span, &cfg).unwrap();
    let h = split.at(mu).to_matrix(12).unwrap();
    let exact = expm_propagate(&h, &CVector::from_column_slice(s0.amplitudes()), span);
    out.trajectory
        .last()
        .unwrap()
        .amplitudes()
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Least-squares slope of `log(err)` against `log(step)`.
pub fn loglog_slope(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
