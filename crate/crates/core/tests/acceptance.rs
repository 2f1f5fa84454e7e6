//! Acceptance gate: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

use cnosim::dense::phase_aligned_distance;
use cnosim::experiment::{run_experiment, Algorithm, RunConfig};
use cnosim::model::build_model;
use cnosim::oracle::{evolve_exact, OracleConfig};
use cnosim::pauli::{nested_commutator_closure, PauliString};
use cnosim::qas::{self, HadamardBackend, PropagationOptions};
use cnosim::statevector::{Circuit, Statevector};
use cnosim::trotter::{cartan_pair_block, step_circuit_with_mu, TrotterPlan, Variant};
use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and wall-clock budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gate_counts() -> Outcome {
    let split = build_model(2, THETA).unwrap();
    let brute = step_circuit_with_mu(
        &split,
        &TrotterPlan::new(Variant::BruteForce, 0.2).unwrap(),
        1.0,
    )
    .unwrap();
    let block = cartan_pair_block(0.2).unwrap();
    let detail = format!(
        "brute force {} single + {} CNOT, two-body block {} CNOT + {} single",
        brute.single_qubit_count(),
        brute.cnot_count(),
        block.cnot_count(),
        block.single_qubit_count()
    );
    check(
        brute.single_qubit_count() == 19
            && brute.cnot_count() == 6
            && block.cnot_count() == 3
            && block.single_qubit_count() == 8,
        detail,
    )
}

fn cartan_equivalence() -> Outcome {
    let h_d = build_model(2, 0.0).unwrap().h_d.to_matrix(12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        // uniform on (-pi, pi]
        let angle = PI - rng.random::<f64>() * 2.0 * PI;
        let block = cartan_pair_block(angle).unwrap().unitary(12).unwrap();
        let exact = (&h_d * Complex64::new(0.0, -angle)).exp();
        worst = worst.max(phase_aligned_distance(&block, &exact));
    }
    check(
        worst < 1e-9,
        format!("max phase-aligned distance {worst:.2e} over 100 angles"),
    )
}

fn operator_closure() -> Outcome {
    let split = build_model(2, THETA).unwrap();
    let closure = nested_commutator_closure(&split.h_i, &split.h_d, 16, 1 << 16).unwrap();
    let expected: BTreeSet<PauliString> = [
        "II", "XI", "ZI", "IX", "IZ", "XX", "YY", "ZZ", "ZY", "YZ", "YX", "XY", "ZX", "XZ",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    check(
        closure.strings == expected,
        format!(
            "{} strings, fixed point at depth {:?}",
            closure.strings.len(),
            closure.fixed_point
        ),
    )
}

fn trotter_order() -> Outcome {
    let steps = [0.4, 0.2, 0.1, 0.05];
    let sched = profile();
    let errors: Vec<f64> = steps
        .iter()
        .map(|&dt| trotter_final_error(dt, 4.0, &sched))
        .collect();
    let slope = loglog_slope(&steps, &errors);
    check(
        (0.8..=1.3).contains(&slope),
        format!(
            "slope {slope:.3}, errors {:?}",
            errors
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn qas_exactness() -> Outcome {
    let split = build_model(2, THETA).unwrap();
    let sched = profile();
    let basis = qas::build_basis(&split, &Circuit::new(2), 1, true).unwrap();
    let (t0, t1, dt) = (T_START, 310.0, 0.2);
    let out = qas::run(
        &basis,
        &split,
        &sched,
        &mut HadamardBackend::exact(),
        t0,
        t1,
        dt,
        &PropagationOptions::default(),
        |_, _, _| Ok(()),
    )
    .unwrap();
    let oracle = evolve_exact(
        &split,
        &sched,
        &Statevector::zero(2),
        t0,
        t1,
        dt,
        &OracleConfig::default(),
    )
    .unwrap();
    let expected = oracle.trajectory.marginals(0, false).unwrap();
    let mut worst = 0.0f64;
    for (a, p) in out.trajectory.alphas.iter().zip(&expected) {
        let q = qas::survival_from_alpha(&basis, a, 0, false, qas::ALPHA_NORM_TOLERANCE).unwrap();
        worst = worst.max((q - p).abs());
    }
    check(
        worst < 1e-6 && expected.len() == out.trajectory.alphas.len(),
        format!(
            "{}-state basis, max deviation {worst:.2e} over {} points",
            basis.len(),
            expected.len()
        ),
    )
}

fn shot_noise() -> Outcome {
    let mut cfg = RunConfig::new(2, THETA, &profile());
    cfg.t_end = Some(310.0);
    cfg.shots = 1024;
    cfg.runs = 50;
    let rec = run_experiment(&cfg).unwrap();
    let ok = rec
        .rows
        .iter()
        .filter(|r| {
            let p = r.p_exact.unwrap();
            r.p_mad <= 3.0 * (p * (1.0 - p) / 1024.0).sqrt() + 0.01
        })
        .count();
    let fraction = ok as f64 / rec.rows.len() as f64;
    check(
        fraction >= 0.95,
        format!(
            "{ok} of {} points within bound ({:.1}%)",
            rec.rows.len(),
            100.0 * fraction
        ),
    )
}

fn four_neutrino() -> Outcome {
    let mut cfg = RunConfig::new(4, THETA, &profile());
    cfg.shots = 0;
    cfg.all_qubits = true;
    let trotter = run_experiment(&RunConfig {
        algorithm: Algorithm::Trotter,
        ..cfg.clone()
    })
    .unwrap();
    let cartan = run_experiment(&RunConfig {
        algorithm: Algorithm::Cartan,
        ..cfg.clone()
    })
    .unwrap();
    let last_t = trotter.rows.last().map(|r| r.t).unwrap_or(f64::NAN);
    let worst = trotter
        .rows
        .iter()
        .zip(&cartan.rows)
        .map(|(a, b)| (a.p_median - b.p_median).abs())
        .fold(0.0, f64::max);
    check(
        worst < 1e-8 && trotter.rows.len() == cartan.rows.len() && (last_t - 270.0).abs() < 0.2,
        format!(
            "window ends at {last_t:.2}, max trotter/cartan difference {worst:.2e} over {} rows",
            trotter.rows.len()
        ),
    )
}

fn oracle_self_check() -> Outcome {
    let subs = [20usize, 40, 80, 160];
    let errors: Vec<f64> = subs.iter().map(|&s| rk4_constant_error(s)).collect();
    let steps: Vec<f64> = subs.iter().map(|&s| 2.0 / s as f64).collect();
    let slope = loglog_slope(&steps, &errors);
    let split = build_model(2, THETA).unwrap();
    let cfg = OracleConfig {
        renormalize: false,
        ..OracleConfig::default()
    };
    let out = evolve_exact(
        &split,
        &profile(),
        &Statevector::zero(2),
        T_START,
        310.0,
        0.2,
        &cfg,
    )
    .unwrap();
    check(
        (3.7..=4.3).contains(&slope) && out.max_norm_drift < 1e-8,
        format!(
            "RK4 slope {slope:.3}, norm drift {:.2e} over [{T_START}, 310]",
            out.max_norm_drift
        ),
    )
}

fn one_shot_contract() -> Outcome {
    let split = build_model(2, THETA).unwrap();
    let basis = qas::build_basis(&split, &Circuit::new(2), 1, true).unwrap();
    let mut backend = HadamardBackend::sampled(1024, 3).unwrap();
    let counter = backend.call_counter();
    let mut during = Vec::new();
    let out = qas::run(
        &basis,
        &split,
        &profile(),
        &mut backend,
        T_START,
        230.0,
        0.2,
        &PropagationOptions::default(),
        |_, _, _| {
            during.push(counter.load(Ordering::SeqCst));
            Ok(())
        },
    )
    .unwrap();
    let m = basis.len();
    let terms = 1 + split.h_i.len() + split.h_d.len();
    let expected = m * m * terms * 2;
    let after = counter.load(Ordering::SeqCst) - out.estimation_calls;
    check(
        out.estimation_calls == expected
            && after == 0
            && out.propagation_calls == 0
            && during.iter().all(|&c| c == expected),
        format!(
            "{} Hadamard tests before propagation (expected {expected}), {after} after",
            out.estimation_calls
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("gate-count fidelity", gate_counts, Duration::from_secs(1)),
        (
            "two-qubit block equivalence",
            cartan_equivalence,
            Duration::from_secs(1),
        ),
        (
            "operator-set closure",
            operator_closure,
            Duration::from_secs(1),
        ),
        (
            "Trotter error order",
            trotter_order,
            Duration::from_secs(10),
        ),
        (
            "QAS exactness on spanning basis",
            qas_exactness,
            Duration::from_secs(30),
        ),
        (
            "shot-noise statistics",
            shot_noise,
            Duration::from_secs(300),
        ),
        ("four-neutrino run", four_neutrino, Duration::from_secs(600)),
        (
            "oracle self-check",
            oracle_self_check,
            Duration::from_secs(10),
        ),
        (
            "one-shot contract",
            one_shot_contract,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => (
                "FAIL",
                format!("{d}; over the {:.0} s budget", budget.as_secs_f64()),
            ),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} {}. {name}: {detail} [{:.2} s]",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
