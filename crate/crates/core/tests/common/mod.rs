#![allow(dead_code)]

use fqet_core::hamiltonian::{FourierComponent, FourierHamiltonian};
use fqet_core::numkernel::{c64, CVector, ComplexMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let a = random_matrix(rng, d);
    (&a + &a.adjoint()).scale_real(0.5)
}

pub fn random_state(rng: &mut impl Rng, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / c64(n, 0.0)
}

/// Random pair-symmetric Hamiltonian on `n` frequencies whose indices are drawn
/// from `{-1, 0, 1}^n`, scaled so that every `||H_m|| <= scale`.
pub fn random_hamiltonian(rng: &mut impl Rng, n: usize, d: usize, pairs: usize, scale: f64) -> FourierHamiltonian {
    let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut comps = vec![FourierComponent::new(vec![0; n], shrink(random_hermitian(rng, d), scale))];
    let mut used = vec![vec![0i64; n]];
    while comps.len() < 1 + 2 * pairs {
        let m: Vec<i64> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        if used.contains(&m) || used.contains(&neg) {
            if used.len() >= 3usize.pow(n as u32) {
                break;
            }
            continue;
        }
        let h = shrink(random_matrix(rng, d), scale);
        comps.push(FourierComponent::new(neg.clone(), h.adjoint()));
        comps.push(FourierComponent::new(m.clone(), h));
        used.push(m);
        used.push(neg);
    }
    FourierHamiltonian::new(omega, comps).expect("valid random Hamiltonian")
}

fn shrink(h: ComplexMatrix, scale: f64) -> ComplexMatrix {
    let norm = h.operator_norm();
    if norm > 0.0 {
        h.scale_real(scale / norm)
    } else {
        h
    }
}
