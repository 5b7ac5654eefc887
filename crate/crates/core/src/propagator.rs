//! Reference time-ordered propagator `U(t2; t1) = T exp(-i int_{t1}^{t2} H(s) ds)`.
//!
//! Fourth-order commutator-free Magnus stepper (two exponentials per step,
//! each exactly unitary) with step-doubling error control. This is the
//! independent oracle against which the extended-space constructions are
//! checked, so it shares nothing with them beyond `evaluate_at`.

use crate::error::{Error, Result};
use crate::hamiltonian::FourierHamiltonian;
use crate::numkernel::{expm_hermitian, ComplexMatrix};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-4;
pub const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct PropagatorResult {
    pub unitary: ComplexMatrix,
    /// Sum of the per-step error estimates.
    pub estimated_error: f64,
    /// Accepted steps.
    pub steps_taken: usize,
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6

/// One CF4 step from `t` to `t + dt`.
fn cf4_step(h: &FourierHamiltonian, t: f64, dt: f64) -> Result<ComplexMatrix> {
    let (a1, a2) = (0.25 - SQRT3_6, 0.25 + SQRT3_6);
    let h1 = h.evaluate_at(t + (0.5 - SQRT3_6) * dt);
    let h2 = h.evaluate_at(t + (0.5 + SQRT3_6) * dt);
    let first = &h1.scale_real(a2) + &h2.scale_real(a1);
    let second = &h1.scale_real(a1) + &h2.scale_real(a2);
    let u_first = expm_hermitian(&first, dt)?;
    let u_second = expm_hermitian(&second, dt)?;
    Ok(&u_second * &u_first)
}

/// Propagator from `t1` to `t2 >= t1` with total estimated error at most `tol`.
pub fn propagate(h: &FourierHamiltonian, t1: f64, t2: f64, tol: f64) -> Result<PropagatorResult> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::Domain(format!("tolerance {tol:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")));
    }
    if !(t1.is_finite() && t2.is_finite()) || t2 < t1 {
        return Err(Error::Domain(format!("need finite t2 >= t1, got t1 = {t1}, t2 = {t2}")));
    }
    let d = h.dim();
    let span = t2 - t1;
    let mut u = ComplexMatrix::identity(d);
    if span == 0.0 {
        return Ok(PropagatorResult { unitary: u, estimated_error: 0.0, steps_taken: 0 });
    }

    // Initial step from the fastest time scale in the problem.
    let scale = h.alpha() + h.omega_total() * h.m_max().max(1.0);
    let mut dt = (0.1 / scale.max(1e-300)).min(span);
    let mut t = t1;
    let mut estimated_error = 0.0;
    let mut steps = 0usize;
    let mut attempts = 0usize;

    while t < t2 {
        attempts += 1;
        if attempts > MAX_STEPS {
            return Err(Error::Convergence(format!("exceeded {MAX_STEPS} step attempts at t = {t} (tol = {tol:e})")));
        }
        let remaining = t2 - t;
        let last = dt >= remaining;
        let step = if last { remaining } else { dt };

        let coarse = cf4_step(h, t, step)?;
        let half = 0.5 * step;
        let fine = &cf4_step(h, t + half, half)? * &cf4_step(h, t, half)?;
        // Fourth order: the fine result's local error is about |coarse - fine| / 15.
        let err = (&coarse - &fine).frobenius_norm() / 15.0;
        let target = 0.5 * tol * step / span;

        if err <= target || step <= span * 1e-14 {
            u = &fine * &u;
            estimated_error += err;
            steps += 1;
            t = if last { t2 } else { t + step };
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (target / err).powf(0.2)).clamp(0.2, 4.0) };
        dt = step * factor;
    }

    Ok(PropagatorResult { unitary: u, estimated_error, steps_taken: steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::FourierComponent;
    use crate::models;
    use crate::numkernel::operator_norm;

    #[test]
    fn static_matches_exponential() {
        let h0 = ComplexMatrix::pauli_x().scale_real(0.7);
        let h = FourierHamiltonian::new(vec![1.0], vec![FourierComponent::new(vec![0], h0.clone())]).unwrap();
        let r = propagate(&h, 0.3, 2.8, 1e-11).unwrap();
        let exact = expm_hermitian(&h0, 2.5).unwrap();
        assert!(operator_norm(&(&r.unitary - &exact)) < 1e-11);
    }

    #[test]
    fn zero_span_is_identity() {
        let h = models::cosine_drive(1.0, 1.0, 1.0);
        let r = propagate(&h, 1.0, 1.0, 1e-10).unwrap();
        assert_eq!(r.unitary, ComplexMatrix::identity(2));
        assert_eq!(r.steps_taken, 0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let h = models::cosine_drive(1.0, 1.0, 1.0);
        assert!(matches!(propagate(&h, 0.0, 1.0, 1e-3), Err(Error::Domain(_))));
        assert!(matches!(propagate(&h, 0.0, 1.0, 1e-14), Err(Error::Domain(_))));
        assert!(matches!(propagate(&h, 1.0, 0.0, 1e-10), Err(Error::Domain(_))));
    }
}
