use std::sync::atomic::Ordering;

use cnosim::dense::{hermiticity_defect, CMatrix, CVector};
use cnosim::model::{build_model, flavor_prep_circuit, CouplingSchedule, Flavor};
use cnosim::oracle::{evolve_exact, OracleConfig};
use cnosim::qas::{
    build_basis, estimate_overlaps, initial_alpha, propagate_alpha, run, survival_from_alpha,
    HadamardBackend, PropagationOptions,
};
use cnosim::statevector::{Circuit, Statevector};
use num_complex::Complex64;
use proptest::prelude::*;

fn reduced_two_neutrino() -> (cnosim::model::HamiltonianSplit, cnosim::qas::QasBasis) {
    let split = build_model(2, 0.195).unwrap();
    let basis = build_basis(&split, &Circuit::new(2), 1, true).unwrap();
    (split, basis)
}

#[test]
fn sampled_overlaps_converge_to_exact() {
    let (split, basis) = reduced_two_neutrino();
    let exact = estimate_overlaps(&basis, &split, &mut HadamardBackend::exact()).unwrap();
    let sampled = estimate_overlaps(
        &basis,
        &split,
        &mut HadamardBackend::sampled(1_000_000, 5).unwrap(),
    )
    .unwrap();
    for (a, b) in [
        (&exact.e, &sampled.e),
        (&exact.d_i, &sampled.d_i),
        (&exact.d_d, &sampled.d_d),
    ] {
        assert!(cnosim::dense::max_abs_diff(a, b) < 5e-3);
    }
}

#[test]
fn exact_overlaps_are_hermitian_and_psd() {
    for n in [2, 3] {
        let split = build_model(n, 0.4).unwrap();
        let basis = build_basis(&split, &Circuit::new(n), 1, true).unwrap();
        let ov = estimate_overlaps(&basis, &split, &mut HadamardBackend::exact()).unwrap();
        for m in [&ov.e, &ov.d_i, &ov.d_d] {
            assert!(hermiticity_defect(m) < 1e-10);
        }
        let eig = ov.e.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
    }
}

#[test]
fn overlaps_match_dense_matrix_elements() {
    let split = build_model(3, 0.3).unwrap();
    let mut prep =
        flavor_prep_circuit(3, &[Flavor::Electron, Flavor::X, Flavor::Electron]).unwrap();
    prep.push(cnosim::statevector::Gate::H(2)).unwrap();
    let basis = build_basis(&split, &prep, 1, true).unwrap();
    let ov = estimate_overlaps(&basis, &split, &mut HadamardBackend::exact()).unwrap();
    let (hi, hd) = split.dense(12).unwrap();
    let vecs: Vec<CVector> = basis
        .states
        .iter()
        .map(|s| CVector::from_column_slice(s.amplitudes()))
        .collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let e = (vecs[i].adjoint() * &vecs[j])[(0, 0)];
            let di = (vecs[i].adjoint() * &hi * &vecs[j])[(0, 0)];
            let dd = (vecs[i].adjoint() * &hd * &vecs[j])[(0, 0)];
            assert!((ov.e[(i, j)] - e).norm() < 1e-12);
            assert!((ov.d_i[(i, j)] - di).norm() < 1e-12);
            assert!((ov.d_d[(i, j)] - dd).norm() < 1e-12);
        }
    }
}

#[test]
fn spanning_basis_reproduces_constant_coupling_oracle() {
    let (split, basis) = reduced_two_neutrino();
    let sched = CouplingSchedule::constant(1.0).unwrap();
    let (t0, t1, dt) = (210.64, 240.0, 0.2);
    let out = run(
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
    for (a, p) in out.trajectory.alphas.iter().zip(expected) {
        let q = survival_from_alpha(&basis, a, 0, false, 1e-6).unwrap();
        assert!((q - p).abs() < 1e-6);
    }
}

#[test]
fn norm_drift_without_renormalization() {
    let (split, basis) = reduced_two_neutrino();
    let ov = estimate_overlaps(&basis, &split, &mut HadamardBackend::exact()).unwrap();
    let opts = PropagationOptions {
        substeps: 200,
        renormalize: false,
        ..PropagationOptions::default()
    };
    // dt_classical = 0.2 / 200 = 1e-3 over 100 time units
    let out = propagate_alpha(
        &ov,
        &CouplingSchedule::supernova_profile(1.0, 200.0).unwrap(),
        &initial_alpha(&basis),
        210.64,
        310.64,
        0.2,
        &opts,
        |_, _, _| Ok(()),
    )
    .unwrap();
    assert!(out.max_norm_drift < 1e-4, "drift {}", out.max_norm_drift);
}

#[test]
fn estimation_happens_once_before_propagation() {
    let (split, basis) = reduced_two_neutrino();
    let mut backend = HadamardBackend::sampled(256, 1).unwrap();
    let counter = backend.call_counter();
    let mut seen = Vec::new();
    let out = run(
        &basis,
        &split,
        &CouplingSchedule::constant(0.5).unwrap(),
        &mut backend,
        0.0,
        2.0,
        0.2,
        &PropagationOptions::default(),
        |_, _, _| {
            seen.push(counter.load(Ordering::SeqCst));
            Ok(())
        },
    )
    .unwrap();
    assert_eq!(out.estimation_calls, 16 * 8 * 2);
    assert_eq!(out.propagation_calls, 0);
    assert!(seen.iter().all(|&c| c == out.estimation_calls));
    assert_eq!(seen.len(), 11);
}

#[test]
fn four_neutrino_reduced_basis_size() {
    let split = build_model(4, 0.195).unwrap();
    let basis = build_basis(&split, &Circuit::new(4), 1, true).unwrap();
    // one state per distinct set of flipped qubits among the closure strings
    let masks: std::collections::BTreeSet<usize> =
        basis.generators.iter().map(|g| g.x_mask()).collect();
    assert_eq!(masks.len(), basis.len());
    assert!(
        basis.len() < 16,
        "K = 1 does not span the 16-dimensional space"
    );
    assert_eq!(basis.len(), 11);
}

fn random_alpha(raw: Vec<(f64, f64)>) -> CVector {
    let v = CVector::from_iterator(
        raw.len(),
        raw.into_iter().map(|(re, im)| Complex64::new(re, im)),
    );
    let n = v.norm();
    v / Complex64::from(n)
}

proptest! {
    #[test]
    fn survival_matches_direct_assembly(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
        prop_assume!(raw.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let (_, basis) = reduced_two_neutrino();
        let alpha = random_alpha(raw);
        // generators I, X0, X1, X0X1 send |00> to basis indices 0, 1, 2, 3
        let mut dense = CMatrix::zeros(4, 1);
        for (k, a) in alpha.iter().enumerate() {
            dense[(k, 0)] += a;
        }
        let p = dense[(0, 0)].norm_sqr() + dense[(2, 0)].norm_sqr();
        let q = survival_from_alpha(&basis, &alpha, 0, false, 1e-9).unwrap();
        prop_assert!((p - q).abs() < 1e-12);
    }
}
