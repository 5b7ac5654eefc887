//! Polynomial approximation of `exp(-i tau x)` on `[-1, 1]`: Bessel values,
//! Jacobi-Anger coefficients, degree selection and Chebyshev application to
//! matrices and vectors.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{
    c64, cs_dilation, matpoly_chebyshev, operator_norm, CVector, ComplexMatrix, LinearOperator, C64,
};

/// Largest `|tau|` for which coefficients are produced.
pub const MAX_TAU: f64 = 50.0;

/// Largest `|tau|` handled by one Chebyshev chunk in [`chebyshev_evolve`].
const CHUNK_TAU: f64 = 32.0;

/// Bessel values `J_0(x), ..., J_kmax(x)` by Miller's downward recurrence,
/// normalized through `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // Start well above both kmax and the turning point k ~ x.
    let top = kmax.max(ax as usize);
    let mut start = top + 20 + (40.0 * (top as f64 + 1.0)).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0f64; // J_{k+1}
    let mut cur = 1e-300f64; // J_k
    let mut norm = 0.0f64;
    let mut tmp = vec![0.0; start + 1];
    tmp[start] = cur;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        tmp[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in tmp[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
    }
    norm += tmp[0];
    for (k, slot) in out.iter_mut().enumerate() {
        let v = tmp[k] / norm;
        *slot = if x < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}

/// Raw right-hand side `e kappa + 4 ln(1/eta) / ln(e + ln(1/eta)/kappa)`.
pub fn lambert_formula(kappa: f64, eta: f64) -> f64 {
    let ell = (1.0 / eta).ln();
    if kappa == 0.0 {
        return 0.0;
    }
    E * kappa + 4.0 * ell / (E + ell / kappa).ln()
}

/// Smallest integer meeting the Lambert-W sufficient condition, at least 1.
///
/// The result is checked against `(kappa/x)^x <= eta` by direct evaluation;
/// should rounding ever break that, the degree is raised until it holds.
pub fn lambert_degree(kappa: f64, eta: f64) -> usize {
    assert!(kappa >= 0.0 && kappa.is_finite(), "kappa must be finite and non-negative");
    assert!(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
    if kappa == 0.0 {
        return 1;
    }
    let mut q = (lambert_formula(kappa, eta).ceil() as usize).max(1);
    while !lambert_holds(kappa, eta, q) {
        q += 1;
    }
    q
}

/// `(kappa / q)^q <= eta`, evaluated in log space.
pub fn lambert_holds(kappa: f64, eta: f64, q: usize) -> bool {
    if kappa == 0.0 {
        return true;
    }
    let qf = q as f64;
    qf * (kappa / qf).ln() <= eta.ln() + 1e-12
}

/// Degree needed to implement `exp(-iHt)` with error `eps` when `alpha t` is given.
pub fn query_complexity_qubitization(alpha_t: f64, eps: f64) -> usize {
    lambert_degree(alpha_t, eps)
}

/// `(tau/Q)^Q`, zero at `tau = 0`.
pub fn epsilon_q(tau: f64, q: usize) -> f64 {
    if tau == 0.0 {
        0.0
    } else {
        (tau.abs() / q as f64).powi(q as i32)
    }
}

/// Chebyshev coefficients of the degree-`q` truncation of
/// `exp(-i tau x) = J_0(tau) + 2 sum_k (-i)^k J_k(tau) T_k(x)`.
pub fn jacobi_anger_coeffs(tau: f64, q: usize) -> Result<Vec<C64>> {
    if !tau.is_finite() || tau.abs() > MAX_TAU {
        return Err(Error::Domain(format!("|tau| = {} outside the validated range [0, {MAX_TAU}]", tau.abs())));
    }
    if q == 0 {
        return Err(Error::Domain("polynomial degree must be at least 1".into()));
    }
    Ok(jacobi_anger_unchecked(tau, q))
}

fn jacobi_anger_unchecked(tau: f64, q: usize) -> Vec<C64> {
    let j = bessel_j_sequence(tau, q);
    let minus_i_pow = [c64(1.0, 0.0), c64(0.0, -1.0), c64(-1.0, 0.0), c64(0.0, 1.0)];
    j.iter().enumerate().map(|(k, &jk)| if k == 0 { c64(jk, 0.0) } else { minus_i_pow[k % 4] * (2.0 * jk) }).collect()
}

/// Degree, coefficients and guaranteed error for one evolution.
#[derive(Clone, Debug, Serialize)]
pub struct QetPlan {
    pub degree: usize,
    pub tau: f64,
    pub eps: f64,
    #[serde(skip)]
    pub coefficients: Vec<C64>,
    pub guaranteed_eps: f64,
}

impl QetPlan {
    /// Plan for `exp(-i tau x)` at target error `eps`, degree from [`lambert_degree`].
    pub fn new(tau: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
        }
        let degree = query_complexity_qubitization(tau.abs(), eps);
        let coefficients = jacobi_anger_coeffs(tau, degree)?;
        Ok(Self { degree, tau, eps, coefficients, guaranteed_eps: epsilon_q(tau, degree) })
    }

    /// `f_Q(x)` at a scalar.
    pub fn eval(&self, x: f64) -> C64 {
        chebyshev_scalar(&self.coefficients, x)
    }
}

/// `sum_k c_k T_k(x)` by Clenshaw's recurrence.
pub fn chebyshev_scalar(coeffs: &[C64], x: f64) -> C64 {
    let mut b1 = c64(0.0, 0.0);
    let mut b2 = c64(0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or_default() + b1 * x - b2
}

/// `f_Q(h)` for a normalized Hermitian `h` (`||h|| <= 1`).
pub fn apply_poly_evolution(h_normalized: &ComplexMatrix, tau: f64, q: usize) -> Result<ComplexMatrix> {
    let coeffs = jacobi_anger_coeffs(tau, q)?;
    matpoly_chebyshev(h_normalized, &coeffs)
}

/// Unitary of twice the dimension whose top-left block is `c / max(1, ||c||)`.
pub fn dilate_to_unitary(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !c.is_finite() {
        return Err(Error::Contract("dilation input has non-finite entries".into()));
    }
    let norm = operator_norm(c);
    let scaled = if norm > 1.0 { c.scale_real(1.0 / norm) } else { c.clone() };
    cs_dilation(&scaled)
}

/// `sum_k c_k T_k(A / scale) v` with the vector three-term recurrence.
pub fn chebyshev_apply_vector(op: &dyn LinearOperator, scale: f64, coeffs: &[C64], v: &CVector) -> CVector {
    let mut acc = v * coeffs[0];
    if coeffs.len() == 1 {
        return acc;
    }
    let inv = 1.0 / scale;
    let mut prev = v.clone();
    let mut cur = op.apply(v) * c64(inv, 0.0);
    acc += &cur * coeffs[1];
    for &c in &coeffs[2..] {
        let next = op.apply(&cur) * c64(2.0 * inv, 0.0) - &prev;
        acc += &next * c;
        prev = cur;
        cur = next;
    }
    acc
}

/// Degree past which the Jacobi-Anger tail at `tau` is below double precision.
fn converged_degree(tau: f64) -> usize {
    let a = tau.abs();
    let kmax = (1.5 * a) as usize + 60;
    let j = bessel_j_sequence(a, kmax);
    let mut q = kmax;
    while q > 1 && j[q].abs() < 1e-18 && (q as f64) > a {
        q -= 1;
    }
    q + 1
}

/// `exp(-i A t) v` for Hermitian `A` with spectrum inside `[-bound, bound]`,
/// to double precision, by chunked Chebyshev expansion.
pub fn chebyshev_evolve(op: &dyn LinearOperator, bound: f64, t: f64, v: &CVector) -> CVector {
    let tau = bound * t;
    if tau == 0.0 {
        return v.clone();
    }
    let chunks = (tau.abs() / CHUNK_TAU).ceil().max(1.0) as usize;
    let tau_c = tau / chunks as f64;
    let coeffs = jacobi_anger_unchecked(tau_c, converged_degree(tau_c));
    let mut x = v.clone();
    for _ in 0..chunks {
        x = chebyshev_apply_vector(op, bound, &coeffs, &x);
    }
    x
}
