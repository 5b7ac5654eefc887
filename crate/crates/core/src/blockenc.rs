//! Block-encodings of every oracle-built operator.
//!
//! Registers are ordered ancillas first (outermost), then the torus index
//! register, then the system; every ancilla's reference state is basis
//! state 0, so `<0|U|0>` is the top-left `system_dim` block.
//!
//! The Fourier-component oracles `O_m` are modeled by exact cosine-sine
//! dilations of `H_m / alpha_m`; everything else is assembled from them
//! with prepare/select circuits.

use std::ops::{Add, Mul};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::TorusIndexSet;
use crate::hamiltonian::{FourierComponent, FourierHamiltonian};
use crate::numkernel::{c64, check_dense_dim, cs_dilation, kron, operator_norm, ComplexMatrix};

/// Oracle calls made by a construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryTally {
    /// Uses of the Fourier-component oracles `O_m`.
    pub o_m: u64,
    pub g_coef: u64,
    pub g_freq: u64,
}

impl QueryTally {
    pub fn total(&self) -> u64 {
        self.o_m + self.g_coef + self.g_freq
    }
}

impl Add for QueryTally {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { o_m: self.o_m + rhs.o_m, g_coef: self.g_coef + rhs.g_coef, g_freq: self.g_freq + rhs.g_freq }
    }
}

impl Mul<u64> for QueryTally {
    type Output = Self;
    fn mul(self, k: u64) -> Self {
        Self { o_m: self.o_m * k, g_coef: self.g_coef * k, g_freq: self.g_freq * k }
    }
}

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub unitary: ComplexMatrix,
    pub ancilla_dim: usize,
    pub system_dim: usize,
    /// Normalization `alpha`: the corner equals `target / alpha`.
    pub alpha: f64,
    /// Always 0.
    pub reference_index: usize,
    pub queries: QueryTally,
}

impl BlockEncoding {
    /// `<0|_a U |0>_a`.
    pub fn corner(&self) -> ComplexMatrix {
        self.unitary.block(0, 0, self.system_dim, self.system_dim)
    }
}

/// Prepare state `sum_j sqrt(w_j / w) |j>`, zero-padded to a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct PrepareState {
    pub amplitudes: Vec<f64>,
}

impl PrepareState {
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Contract("prepare state needs at least one weight".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Contract(format!("prepare weights must be positive, got {w}")));
        }
        let total: f64 = weights.iter().sum();
        let mut amplitudes: Vec<f64> = weights.iter().map(|w| (w / total).sqrt()).collect();
        amplitudes.resize(weights.len().next_power_of_two(), 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Real orthogonal `G` with `G|0> = |prep>`, a Householder reflection.
    pub fn unitary(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut w = self.amplitudes.iter().map(|a| -a).collect::<Vec<f64>>();
        w[0] += 1.0;
        let wn: f64 = w.iter().map(|x| x * x).sum();
        if wn < 1e-30 {
            return ComplexMatrix::identity(n);
        }
        ComplexMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            c64(id - 2.0 * w[i] * w[j] / wn, 0.0)
        })
    }
}

/// `(G^dagger (x) I) (sum_j |j><j| (x) B_j) (G (x) I)`, padding with identities.
fn prepare_select(prep: &PrepareState, branches: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let inner = branches[0].rows();
    let k = prep.dim();
    check_dense_dim(k * inner, "prepare-select")?;
    let mut select = ComplexMatrix::zeros(k * inner, k * inner);
    for j in 0..k {
        let b = branches.get(j).cloned().unwrap_or_else(|| ComplexMatrix::identity(inner));
        select.set_block(j * inner, j * inner, &b);
    }
    let g = kron(&prep.unitary(), &ComplexMatrix::identity(inner))?;
    Ok(&(&g.adjoint() * &select) * &g)
}

/// Linear combination of unitaries `sum_j w_j U_j / sum_j w_j`.
pub fn lcu_encode(terms: &[(f64, ComplexMatrix)]) -> Result<BlockEncoding> {
    if terms.is_empty() {
        return Err(Error::Contract("LCU needs at least one term".into()));
    }
    let d = terms[0].1.rows();
    for (w, u) in terms {
        if u.rows() != d || u.cols() != d {
            return Err(Error::Contract("LCU terms must share one square dimension".into()));
        }
        if !(w.is_finite() && *w > 0.0) {
            return Err(Error::Contract(format!("LCU weight {w} is not positive")));
        }
        let res = u.unitarity_residual();
        if res > 1e-10 {
            return Err(Error::Contract(format!("LCU term is not unitary (residual {res:.3e})")));
        }
    }
    let weights: Vec<f64> = terms.iter().map(|(w, _)| *w).collect();
    let prep = PrepareState::from_weights(&weights)?;
    let branches: Vec<ComplexMatrix> = terms.iter().map(|(_, u)| u.clone()).collect();
    Ok(BlockEncoding {
        unitary: prepare_select(&prep, &branches)?,
        ancilla_dim: prep.dim(),
        system_dim: d,
        alpha: weights.iter().sum(),
        reference_index: 0,
        queries: QueryTally::default(),
    })
}

/// `O_m`: dilation of `H_m / alpha_m` with one ancilla qubit.
pub fn encode_fourier_component(c: &FourierComponent) -> Result<BlockEncoding> {
    let norm = operator_norm(&c.matrix);
    if c.weight.is_nan() || c.weight <= 0.0 || c.weight < norm * (1.0 - 1e-12) {
        return Err(Error::Contract(format!("alpha_m = {} is below ||H_m|| = {norm} for m = {:?}", c.weight, c.index)));
    }
    let contraction = c.matrix.scale_real(1.0 / c.weight);
    Ok(BlockEncoding {
        unitary: cs_dilation(&contraction)?,
        ancilla_dim: 2,
        system_dim: c.matrix.rows(),
        alpha: c.weight,
        reference_index: 0,
        queries: QueryTally { o_m: 1, g_coef: 0, g_freq: 0 },
    })
}

/// `anc (x) mid (x) sys` from an operator `o` on `anc (x) sys`, with `mid`
/// inserted between the two factors.
fn interleave(o: &ComplexMatrix, anc: usize, sys: usize, mid: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = mid.rows();
    let dim = anc * m * sys;
    check_dense_dim(dim, "interleaved operator")?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for a in 0..anc {
        for b in 0..anc {
            let blk = o.block(a * sys, b * sys, sys, sys);
            if blk.max_abs() == 0.0 {
                continue;
            }
            for k in 0..m {
                for kk in 0..m {
                    let s = mid.get(k, kk);
                    if s.norm() == 0.0 {
                        continue;
                    }
                    out.set_block((a * m + k) * sys, (b * m + kk) * sys, &blk.scale(s));
                }
            }
        }
    }
    Ok(out)
}

/// `O_LP`: prepare-select over directions of `O_LP^i`, whose corners are
/// `diag(l_i / 2L)` on the torus register. Corner: `H_LP^L / (2 L omega_total)`.
pub fn encode_linear_potential(cutoff: usize, omega: &[f64]) -> Result<BlockEncoding> {
    let torus = TorusIndexSet::new(omega.len(), cutoff)?;
    let tl = torus.len();
    let mut branches = Vec::with_capacity(omega.len());
    for i in 0..omega.len() {
        let diag: Vec<f64> = torus.points().map(|l| l[i] as f64 / (2.0 * cutoff as f64)).collect();
        branches.push(cs_dilation(&ComplexMatrix::from_real_diagonal(&diag))?);
    }
    let prep = frequency_prepare(omega)?;
    Ok(BlockEncoding {
        unitary: prepare_select(&prep, &branches)?,
        ancilla_dim: prep.dim() * 2,
        system_dim: tl,
        alpha: 2.0 * cutoff as f64 * omega.iter().sum::<f64>(),
        reference_index: 0,
        queries: QueryTally { o_m: 0, g_coef: 0, g_freq: 2 },
    })
}

/// `G_freq`: amplitudes `sqrt(omega_i / omega_total)`.
pub fn frequency_prepare(omega: &[f64]) -> Result<PrepareState> {
    PrepareState::from_weights(omega)
}

/// `G_coef`: amplitudes `sqrt(alpha_m / alpha)` in component order.
pub fn coefficient_prepare(h: &FourierHamiltonian) -> Result<PrepareState> {
    let w: Vec<f64> = h.components().iter().map(|c| c.weight).collect();
    PrepareState::from_weights(&w)
}

/// `O_Add`: `G_coef^dagger (sum_m |m><m| (x) Add_m (x) O_m) G_coef`, corner
/// `sum_m Add_m^L (x) H_m / alpha`.
pub fn encode_add_term(h: &FourierHamiltonian, cutoff: usize) -> Result<BlockEncoding> {
    let torus = TorusIndexSet::new(h.n(), cutoff)?;
    let d = h.dim();
    let mut branches = Vec::with_capacity(h.components().len());
    for c in h.components() {
        let om = encode_fourier_component(c)?;
        let add = crate::floquet::build_add(&c.index.0, cutoff, h.n())?;
        branches.push(interleave(&om.unitary, 2, d, &add)?);
    }
    let prep = coefficient_prepare(h)?;
    Ok(BlockEncoding {
        unitary: prepare_select(&prep, &branches)?,
        ancilla_dim: prep.dim() * 2,
        system_dim: torus.len() * d,
        alpha: h.alpha(),
        reference_index: 0,
        queries: QueryTally { o_m: h.components().len() as u64, g_coef: 2, g_freq: 0 },
    })
}

/// Mixing angle `theta_L = arccos(sqrt(alpha / (alpha + 2 L omega)))`.
pub fn mixing_angle(alpha: f64, cutoff: usize, omega_total: f64) -> f64 {
    (alpha / (alpha + 2.0 * cutoff as f64 * omega_total)).sqrt().acos()
}

/// `O^L = R^dagger (|0><0|_e (x) O_Add - |1><1|_e (x) O_LP) R` with
/// `R = exp(-i theta_L Y)`; corner `H^L / (alpha + 2 L omega_total)`.
///
/// The adjoint on the left is what makes the linear potential enter with a
/// minus sign; with `R` on both sides the corner would carry `+H_LP^L`.
pub fn encode_effective(h: &FourierHamiltonian, cutoff: usize) -> Result<BlockEncoding> {
    let add = encode_add_term(h, cutoff)?;
    let lp = encode_linear_potential(cutoff, h.omega())?;
    let d = h.dim();
    let rest = add.system_dim;
    let lp_full = kron(&lp.unitary, &ComplexMatrix::identity(d))?;

    // Common ancilla space (add ancillas) (x) (lp ancillas).
    let add_part = interleave(&add.unitary, add.ancilla_dim, rest, &ComplexMatrix::identity(lp.ancilla_dim))?;
    let lp_part = kron(&ComplexMatrix::identity(add.ancilla_dim), &lp_full)?;
    let inner = add_part.rows();
    check_dense_dim(2 * inner, "O^L")?;

    let mut v = ComplexMatrix::zeros(2 * inner, 2 * inner);
    v.set_block(0, 0, &add_part);
    v.set_block(inner, inner, &(-&lp_part));

    let theta = mixing_angle(h.alpha(), cutoff, h.omega_total());
    let (s, c) = theta.sin_cos();
    let r_e = ComplexMatrix::from_row_slice(2, 2, &[c64(c, 0.0), c64(-s, 0.0), c64(s, 0.0), c64(c, 0.0)]);
    let r = kron(&r_e, &ComplexMatrix::identity(inner))?;
    let unitary = &(&r.adjoint() * &v) * &r;
    Ok(BlockEncoding {
        unitary,
        ancilla_dim: 2 * add.ancilla_dim * lp.ancilla_dim,
        system_dim: rest,
        alpha: h.alpha() + 2.0 * cutoff as f64 * h.omega_total(),
        reference_index: 0,
        queries: add.queries + lp.queries,
    })
}

/// Outcome of [`verify_encoding`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EncodingCheck {
    /// `||<0|U|0> - target / alpha||`.
    pub corner_distance: f64,
    /// Frobenius norm of `U^dagger U - I`.
    pub unitarity_residual: f64,
}

impl EncodingCheck {
    pub fn passes(&self, corner_tol: f64, unitarity_tol: f64) -> bool {
        self.corner_distance <= corner_tol && self.unitarity_residual <= unitarity_tol
    }
}

pub fn verify_encoding(b: &BlockEncoding, target: &ComplexMatrix) -> Result<EncodingCheck> {
    if target.rows() != b.system_dim || target.cols() != b.system_dim {
        return Err(Error::Contract(format!(
            "target is {}x{}, encoding system dimension is {}",
            target.rows(),
            target.cols(),
            b.system_dim
        )));
    }
    let diff = &b.corner() - &target.scale_real(1.0 / b.alpha);
    Ok(EncodingCheck { corner_distance: operator_norm(&diff), unitarity_residual: b.unitary.unitarity_residual() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcu_single_term() {
        let b = lcu_encode(&[(1.0, ComplexMatrix::pauli_x())]).unwrap();
        assert_eq!(b.ancilla_dim, 1);
        assert!(verify_encoding(&b, &ComplexMatrix::pauli_x()).unwrap().corner_distance < 1e-15);
    }

    #[test]
    fn lcu_uniform_pair() {
        let b = lcu_encode(&[(0.5, ComplexMatrix::pauli_x()), (0.5, ComplexMatrix::pauli_z())]).unwrap();
        let target = &ComplexMatrix::pauli_x().scale_real(0.5) + &ComplexMatrix::pauli_z().scale_real(0.5);
        let chk = verify_encoding(&b, &target).unwrap();
        assert!((b.alpha - 1.0).abs() < 1e-15);
        assert!(chk.passes(1e-12, 1e-12), "{chk:?}");
    }

    #[test]
    fn lcu_rejects_non_unitary() {
        let err = lcu_encode(&[(1.0, ComplexMatrix::pauli_x().scale_real(2.0))]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn mixing_angle_balanced() {
        assert!((mixing_angle(4.0, 2, 1.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn frequency_prepare_amplitudes() {
        let p = frequency_prepare(&[1.0, 3.0]).unwrap();
        assert!((p.amplitudes[0] - 0.5).abs() < 1e-15);
        assert!((p.amplitudes[1] - 0.75f64.sqrt()).abs() < 1e-15);
        let g = p.unitary();
        assert!((g.get(1, 0).re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(g.unitarity_residual() < 1e-14);
    }

    #[test]
    fn linear_potential_single_direction() {
        let b = encode_linear_potential(1, &[1.0]).unwrap();
        let c = b.corner();
        assert!(c.get(0, 0).norm() < 1e-15);
        assert!((c.get(1, 1) - c64(0.5, 0.0)).norm() < 1e-15);
    }
}
