//! Ready-made single-qubit drives.
//!
//! All of these have `H_0 = (delta / 2) Z` and pair-symmetric drive terms, so
//! construction cannot fail for finite positive frequencies.

use crate::hamiltonian::{FourierComponent, FourierHamiltonian};
use crate::numkernel::{c64, ComplexMatrix};

fn static_term(delta: f64) -> ComplexMatrix {
    ComplexMatrix::pauli_z().scale_real(delta / 2.0)
}

fn build(omega: Vec<f64>, components: Vec<FourierComponent>) -> FourierHamiltonian {
    FourierHamiltonian::new(omega, components).expect("model Hamiltonians are pair-symmetric")
}

/// `H(t) = (delta/2) Z + amp cos(omega t) X`.
pub fn cosine_drive(delta: f64, amp: f64, omega: f64) -> FourierHamiltonian {
    let x = ComplexMatrix::pauli_x().scale_real(amp / 2.0);
    build(
        vec![omega],
        vec![
            FourierComponent::new(vec![0], static_term(delta)),
            FourierComponent::new(vec![1], x.clone()),
            FourierComponent::new(vec![-1], x),
        ],
    )
}

/// `H(t) = (delta/2) Z + (amp/2)(cos(omega t) X + sin(omega t) Y)`.
pub fn circular_drive(delta: f64, amp: f64, omega: f64) -> FourierHamiltonian {
    let half = amp / 2.0;
    let zero = c64(0.0, 0.0);
    let raise = ComplexMatrix::from_row_slice(2, 2, &[zero, c64(half, 0.0), zero, zero]);
    build(
        vec![omega],
        vec![
            FourierComponent::new(vec![0], static_term(delta)),
            FourierComponent::new(vec![1], raise.clone()),
            FourierComponent::new(vec![-1], raise.adjoint()),
        ],
    )
}

/// `H(t) = (delta/2) Z + a1 cos(w1 t) X + a2 cos(w2 t) Y`.
pub fn two_tone_drive(delta: f64, a1: f64, a2: f64, w1: f64, w2: f64) -> FourierHamiltonian {
    let x = ComplexMatrix::pauli_x().scale_real(a1 / 2.0);
    let y = ComplexMatrix::pauli_y().scale_real(a2 / 2.0);
    build(
        vec![w1, w2],
        vec![
            FourierComponent::new(vec![0, 0], static_term(delta)),
            FourierComponent::new(vec![1, 0], x.clone()),
            FourierComponent::new(vec![-1, 0], x),
            FourierComponent::new(vec![0, 1], y.clone()),
            FourierComponent::new(vec![0, -1], y),
        ],
    )
}

/// Golden ratio, the frequency ratio of [`quasiperiodic_drive`].
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Two-tone drive at incommensurate frequencies `(1, golden ratio)` with
/// unit amplitudes and splitting.
pub fn quasiperiodic_drive() -> FourierHamiltonian {
    two_tone_drive(1.0, 1.0, 1.0, 1.0, GOLDEN_RATIO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::operator_norm;

    #[test]
    fn circular_matches_direct_form() {
        let (delta, amp, w) = (0.7, 1.1, 1.9);
        let h = circular_drive(delta, amp, w);
        for &t in &[0.0, 0.3, 2.2] {
            let direct = &(&ComplexMatrix::pauli_z().scale_real(delta / 2.0)
                + &ComplexMatrix::pauli_x().scale_real(amp / 2.0 * (w * t).cos()))
                + &ComplexMatrix::pauli_y().scale_real(amp / 2.0 * (w * t).sin());
            assert!(operator_norm(&(&h.evaluate_at(t) - &direct)) < 1e-14);
        }
    }

    #[test]
    fn two_tone_matches_direct_form() {
        let h = quasiperiodic_drive();
        for &t in &[0.0f64, 0.9, 4.1] {
            let direct = &(&ComplexMatrix::pauli_z().scale_real(0.5) + &ComplexMatrix::pauli_x().scale_real(t.cos()))
                + &ComplexMatrix::pauli_y().scale_real((GOLDEN_RATIO * t).cos());
            assert!(operator_norm(&(&h.evaluate_at(t) - &direct)) < 1e-14);
        }
    }
}
