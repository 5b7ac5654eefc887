//! Oblivious amplitude amplification of the extended unitary.
//!
//! With `R(phi) = exp(i phi (2|0><0|_f - I)) (x) I`, the amplified operator is
//! `e^{i phi0} {U R(phi1) U^dagger R(phi2)}^D U`. The reflection acts on the
//! torus register only.

use std::f64::consts::PI;

use serde::Serialize;

use crate::floquet::{ExtendedAction, FloquetKind, FloquetOperator, TorusIndexSet};
use crate::numkernel::{phase_aligned_distance, CVector, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplificationPlan {
    /// Iteration count `D`.
    pub iterations: usize,
    pub phi1: f64,
    pub phi2: f64,
    pub phi0: f64,
    /// Design success probability.
    pub p_design: f64,
    pub p: usize,
    pub q: usize,
}

impl AmplificationPlan {
    /// Applications of `U` or `U^dagger`: `2D + 1`.
    pub fn unitary_uses(&self) -> u64 {
        2 * self.iterations as u64 + 1
    }
}

/// `D = ceil(pi / (4 arcsin sqrt(P)) - 1/2)`.
pub fn iterations_for(p_success: f64) -> usize {
    (PI / (4.0 * p_success.sqrt().asin()) - 0.5).ceil().max(0.0) as usize
}

/// `arcsin(sin(pi / (4D + 2)) / sqrt(P))`, the phase that rotates an initial
/// amplitude `sqrt(P)` exactly onto the target after `D` iterations.
pub fn phase_for(p_success: f64, iterations: usize) -> f64 {
    ((PI / (4.0 * iterations as f64 + 2.0)).sin() / p_success.sqrt()).clamp(-1.0, 1.0).asin()
}

/// Plan for an arbitrary `p < q` at design probability `(p/q)^n`.
pub fn plan_for(n: usize, p: usize, q: usize) -> AmplificationPlan {
    let p_design = (p as f64 / q as f64).powi(n as i32);
    let iterations = iterations_for(p_design);
    let phi = phase_for(p_design, iterations);
    AmplificationPlan { iterations, phi1: phi, phi2: phi, phi0: 0.0, p_design, p, q }
}

/// `p = n`, `q = n + 1`, `P = (n/(n+1))^n`.
pub fn plan_amplification(n: usize) -> AmplificationPlan {
    assert!(n >= 1, "at least one frequency");
    plan_for(n, n, n + 1)
}

fn reflection_phases(torus: &TorusIndexSet, phi: f64) -> (usize, C64, C64) {
    (torus.origin_index(), C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi))
}

/// In-place `R(phi)` on an extended vector.
pub fn apply_reflection(torus: &TorusIndexSet, system_dim: usize, phi: f64, v: &mut CVector) {
    let (origin, inside, outside) = reflection_phases(torus, phi);
    for k in 0..torus.len() {
        let ph = if k == origin { inside } else { outside };
        for j in 0..system_dim {
            v[k * system_dim + j] *= ph;
        }
    }
}

/// Dense `R(phi)`.
pub fn reflection_matrix(torus: &TorusIndexSet, system_dim: usize, phi: f64) -> ComplexMatrix {
    let (origin, inside, outside) = reflection_phases(torus, phi);
    let diag: Vec<C64> = (0..torus.len())
        .flat_map(|k| std::iter::repeat_n(if k == origin { inside } else { outside }, system_dim))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Dense amplified operator.
pub fn amplified_unitary(u_ext: &FloquetOperator, plan: &AmplificationPlan) -> FloquetOperator {
    let r1 = reflection_matrix(&u_ext.torus, u_ext.system_dim, plan.phi1);
    let r2 = reflection_matrix(&u_ext.torus, u_ext.system_dim, plan.phi2);
    let u = &u_ext.matrix;
    let iterate = &(&(u * &r1) * &u.adjoint()) * &r2;
    let mut out = u.clone();
    for _ in 0..plan.iterations {
        out = &iterate * &out;
    }
    FloquetOperator {
        torus: u_ext.torus,
        system_dim: u_ext.system_dim,
        matrix: out.scale(C64::from_polar(1.0, plan.phi0)),
        kind: FloquetKind::ExtendedUnitary,
    }
}

/// Result of running the amplification on one input state.
#[derive(Clone, Debug)]
pub struct AmplifiedState {
    /// Full extended state after the amplified operator.
    pub extended: CVector,
    /// `U`/`U^dagger` applications, `2D + 1`.
    pub unitary_uses: u64,
    /// `|| <0|U|0> psi ||^2` before amplification, read off the first application.
    pub initial_success_probability: f64,
}

/// `e^{i phi0} {U R(phi1) U^dagger R(phi2)}^D U |0>_f psi`.
pub fn amplified_state(u: &dyn ExtendedAction, plan: &AmplificationPlan, psi: &CVector) -> AmplifiedState {
    let torus = *u.torus();
    let d = u.system_dim();
    let mut uses = 1;
    let mut v = u.apply(&u.embed(psi));
    let initial = u.project(&v).norm_squared();
    for _ in 0..plan.iterations {
        apply_reflection(&torus, d, plan.phi2, &mut v);
        v = u.apply_adjoint(&v);
        apply_reflection(&torus, d, plan.phi1, &mut v);
        v = u.apply(&v);
        uses += 2;
    }
    AmplifiedState {
        extended: v * C64::from_polar(1.0, plan.phi0),
        unitary_uses: uses,
        initial_success_probability: initial,
    }
}

/// `[(p/q)^n (1 - 3 eps), (p/q)^n (1 + 3 eps)]`.
pub fn success_window(n: usize, p: usize, q: usize, eps: f64) -> (f64, f64) {
    let base = (p as f64 / q as f64).powi(n as i32);
    (base * (1.0 - 3.0 * eps), base * (1.0 + 3.0 * eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuccessProbability {
    pub probability: f64,
    pub window: Option<(f64, f64)>,
}

impl SuccessProbability {
    pub fn in_window(&self) -> Option<bool> {
        self.window.map(|(lo, hi)| self.probability >= lo && self.probability <= hi)
    }
}

/// `|| <0|U|0> psi ||^2`, with the window for `(n, p, q, eps)` when given.
pub fn success_probability(
    u_ext: &dyn ExtendedAction,
    psi: &CVector,
    window: Option<(usize, usize, usize, f64)>,
) -> SuccessProbability {
    let out = u_ext.project(&u_ext.apply(&u_ext.embed(psi)));
    SuccessProbability {
        probability: out.norm_squared(),
        window: window.map(|(n, p, q, eps)| success_window(n, p, q, eps)),
    }
}

/// `min_theta || <0|U_amp|0> psi - e^{i theta} U psi ||`.
pub fn amplified_fidelity(u_amp: &dyn ExtendedAction, psi: &CVector, u_oracle: &ComplexMatrix) -> f64 {
    let out = u_amp.project(&u_amp.apply(&u_amp.embed(psi)));
    phase_aligned_distance(&out, &u_oracle.mul_vec(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn plan_n1() {
        let plan = plan_amplification(1);
        assert_eq!(plan.iterations, 1);
        assert!((plan.phi1 - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(plan.unitary_uses(), 3);
    }

    #[test]
    fn plan_n2() {
        let plan = plan_amplification(2);
        assert!((plan.p_design - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(plan.iterations, 1);
        let raw = PI / (4.0 * (2.0f64 / 3.0).asin()) - 0.5;
        assert!((raw - 0.576).abs() < 1e-3);
    }

    #[test]
    fn iterations_at_inverse_e() {
        let x = (1.0 / std::f64::consts::E).sqrt().asin();
        assert!((x - 0.6515).abs() < 2e-4);
        assert_eq!(iterations_for((-1.0f64).exp()), 1);
    }

    #[test]
    fn window_half() {
        let (lo, hi) = success_window(1, 1, 2, 0.0);
        assert_eq!((lo, hi), (0.5, 0.5));
    }
}
