mod common;

use fqet_core::hamiltonian::{FourierComponent, FourierHamiltonian};
use fqet_core::models::{cosine_drive, quasiperiodic_drive};
use fqet_core::numkernel::{basis_vector, expm_hermitian, operator_norm, phase_aligned_distance, ComplexMatrix};
use fqet_core::pipeline::*;
use fqet_core::propagator::propagate;
use fqet_core::Error;
use rand::Rng;
use std::f64::consts::PI;

fn request(h: FourierHamiltonian, t: f64, eps: f64, mode: Mode) -> SimulationRequest {
    let d = h.dim();
    SimulationRequest { hamiltonian: h, t, eps, initial_state: basis_vector(d, 0), mode }
}

#[test]
fn static_hamiltonian_end_to_end() {
    let h0 = &ComplexMatrix::pauli_x().scale_real(0.4) + &ComplexMatrix::pauli_z().scale_real(0.9);
    let h = FourierHamiltonian::new(vec![1.0], vec![FourierComponent::new(vec![0], h0.clone())]).unwrap();
    let psi = common::random_state(&mut common::rng(1), 2);
    let req = SimulationRequest { hamiltonian: h, t: 2.0, eps: 1e-6, initial_state: psi.clone(), mode: Mode::Exact };
    let report = simulate_order1(&req).unwrap();
    let want = expm_hermitian(&h0, 2.0).unwrap().mul_vec(&psi);
    assert!(phase_aligned_distance(&report.output_vector(), &want) <= 1e-5);
    assert!(report.all_pass(), "{:?}", report.bound_checks);
}

#[test]
fn cosine_drive_half_period() {
    let report = simulate_order1(&request(cosine_drive(1.0, 1.0, 1.0), PI, 1e-5, Mode::Exact)).unwrap();
    assert!(report.fidelity_error <= 1e-4);
    assert!(report.all_pass());
    assert_eq!(report.segments, 1);
}

#[test]
fn polynomial_mode_small_instance() {
    let h = cosine_drive(0.5, 0.3, 0.5);
    let report = simulate_order1(&request(h, 0.4, 1e-4, Mode::Poly)).unwrap();
    assert_eq!(report.segment_details[0].route, "polynomial");
    assert!(report.segment_details[0].extended_dim <= POLY_MAX_DIM);
    assert!(report.all_pass(), "{:?}", report.bound_checks);
}

#[test]
fn polynomial_mode_refuses_large_instance() {
    let r = simulate_order1(&request(cosine_drive(1.0, 1.0, 1.0), PI, 1e-5, Mode::Poly));
    assert!(matches!(r, Err(Error::Size(_))));
}

#[test]
fn long_times_are_routed_to_splitting() {
    let h = cosine_drive(1.0, 1.0, 1.0);
    let r = simulate_order1(&request(h, 9.0 * PI, 1e-3, Mode::Exact));
    assert!(matches!(r, Err(Error::Routing(_))));
}

#[test]
fn invalid_requests() {
    let h = cosine_drive(1.0, 1.0, 1.0);
    assert!(matches!(simulate_order1(&request(h.clone(), -1.0, 1e-3, Mode::Exact)), Err(Error::Validation(_))));
    assert!(matches!(simulate_order1(&request(h.clone(), 1.0, 0.0, Mode::Exact)), Err(Error::Validation(_))));
    let mut req = request(h, 1.0, 1e-3, Mode::Exact);
    req.initial_state *= fqet_core::c64(2.0, 0.0);
    assert!(matches!(simulate_order1(&req), Err(Error::Validation(_))));
}

#[test]
fn single_segment_split_equals_order1() {
    let h = cosine_drive(1.0, 0.7, 1.0);
    let req = request(h, 0.8, 1e-4, Mode::Exact);
    let a = simulate_order1(&req).unwrap();
    let b = simulate_split(&req).unwrap();
    assert_eq!(b.segments, 1);
    assert_eq!(a.output_state, b.output_state);
}

#[test]
fn shifted_hamiltonian_identity() {
    let h = quasiperiodic_drive();
    let (r, t) = (5, 3.7);
    assert_eq!(shifted_hamiltonian(&h, 0, r, t).unwrap().components(), h.components());
    let mut rng = common::rng(3);
    for s in 1..r {
        let hs = shifted_hamiltonian(&h, s, r, t).unwrap();
        for (a, b) in hs.components().iter().zip(h.components()) {
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.index, b.index);
        }
        for _ in 0..20 {
            let tp: f64 = rng.random_range(-5.0..5.0);
            let lhs = hs.evaluate_at(tp);
            let rhs = h.evaluate_at(s as f64 * t / r as f64 + tp);
            assert!((&lhs - &rhs).max_abs() <= 1e-14);
        }
    }
    assert!(shifted_hamiltonian(&h, r, r, t).is_err());
}

#[test]
fn oracle_segments_compose() {
    let h = cosine_drive(1.0, 1.0, 1.0);
    let t = 6.3;
    let r = segment_count(&h, t);
    assert_eq!(r, 7);
    let full = propagate(&h, 0.0, t, 1e-11).unwrap().unitary;
    let mut prod = ComplexMatrix::identity(2);
    for s in 0..r {
        let hs = shifted_hamiltonian(&h, s, r, t).unwrap();
        prod = &propagate(&hs, 0.0, t / r as f64, 1e-11).unwrap().unitary * &prod;
    }
    assert!(operator_norm(&(&prod - &full)) <= 1e-9);
}

#[test]
fn query_tally_matches_definition() {
    let h = cosine_drive(1.0, 1.0, 1.0);
    let report = simulate_order1(&request(h.clone(), 1.0, 1e-3, Mode::Exact)).unwrap();
    let ql = report.amplification.q * report.cutoff;
    let per = extended_unitary_queries(&h, ql, 1.0, 1e-3);
    assert_eq!(report.queries, per * 3);
    assert_eq!(measured_query_count(&report), 3 * per.total());
    assert_eq!(report.resources.measured_query_count, Some(measured_query_count(&report)));
}

#[test]
fn doubling_time_less_than_doubles_queries() {
    // Near-linear only while alpha dominates 2qL omega, whose L grows with t:
    // at alpha / omega ~ 50 the ratio is about 2.3-2.7.
    let h = cosine_drive(2000.0, 0.1, 1.0);
    let count = |t: f64| {
        let ql = 2 * fqet_core::floquet::cutoff_l(&h, t, 1e-4).unwrap();
        extended_unitary_queries(&h, ql, t, 1e-4).total() * 3
    };
    for &t in &[1.0, 2.0, 4.0] {
        assert!(h.alpha() * t >= 5.0);
        assert!((count(2.0 * t) as f64) < 2.2 * count(t) as f64);
    }
}

#[test]
fn resource_rows_order() {
    for &(alpha_t, eps) in &[(10.0, 1e-3), (30.0, 1e-6), (100.0, 1e-9), (10.0, 1e-12)] {
        let x = ResourceInputs { alpha_t, gamma_t: 0.5 * alpha_t, omega_t: 2.0, eps, n_a: 2 };
        let q = estimate_from_inputs(&x, Algorithm::Qubitization).unwrap();
        let o1 = estimate_from_inputs(&x, Algorithm::ThisWorkO1).unwrap();
        let dy = estimate_from_inputs(&x, Algorithm::Dyson).unwrap();
        assert!(o1.query_count <= dy.query_count);
        assert!(o1.ancilla_qubits >= q.ancilla_qubits);
        assert!(o1.ancilla_qubits <= dy.ancilla_qubits);
        assert!(o1.model_estimate && dy.model_estimate);
    }
}

#[test]
fn resource_inputs_from_model() {
    let h = quasiperiodic_drive();
    let x = ResourceInputs::from_hamiltonian(&h, 2.0, 1e-3);
    assert_eq!(x.n_a, 1);
    assert!((x.omega_t - 2.0 * h.omega_total()).abs() < 1e-12);
    let e = estimate_resources(&h, 2.0, 1e-3, Algorithm::ThisWorkOmega1).unwrap();
    assert!(e.query_count >= 1);
    assert!(estimate_resources(&h, 0.0, 1e-3, Algorithm::Dyson).is_err());
}
