//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are stored densely; element `(i, j)` is row `i`, column `j` and
//! constructors taking flat slices read them in row-major order. Tensor
//! products follow the convention that the left factor is the slow index,
//! so ancilla registers written first in a product are the outermost.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;

/// Upper bound for any dimension produced by [`kron`] and for matrix-free
/// extended spaces.
pub const MAX_EXTENDED_DIM: usize = 1 << 20;

/// Default cap on densely materialized extended operators.
pub const DEFAULT_DENSE_DIM_CAP: usize = 4096;

/// Cap on dense extended operators, overridable through `FQET_MAX_DIM`.
pub fn dense_dim_cap() -> usize {
    std::env::var("FQET_MAX_DIM")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_DENSE_DIM_CAP)
}

pub(crate) fn check_dense_dim(dim: usize, what: &str) -> Result<()> {
    let cap = dense_dim_cap();
    if dim > cap {
        return Err(Error::Size(format!(
            "{what} has dimension {dim}, above the dense cap {cap} (set FQET_MAX_DIM to raise it)"
        )));
    }
    Ok(())
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Anything that can act on a state vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &CVector) -> CVector;
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {}", self.rows(), self.cols(), self.0)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c64(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn pauli_x() -> Self {
        Self::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
    }

    pub fn pauli_y() -> Self {
        Self::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    /// Entries in row-major order.
    pub fn row_major_entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Sub-block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &ComplexMatrix) {
        self.0.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A^dagger`; an upper bound on the operator-norm residual.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.0 - self.0.adjoint()).norm()
    }

    /// Frobenius norm of `U^dagger U - I`.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        (self.0.adjoint() * &self.0 - DMatrix::<C64>::identity(n, n)).norm()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        operator_norm(self)
    }

    /// Eigendecomposition of a Hermitian matrix.
    pub fn eigh(&self) -> Result<HermitianEig> {
        HermitianEig::new(self)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &CVector) -> CVector {
        self.mul_vec(x)
    }
}

/// Spectral decomposition `h = V diag(lambda) V^dagger` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Contract(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        let tol = 1e-12 * h.max_abs().max(1.0);
        let residual = (&h.0 - h.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (max |A - A^dagger| entry = {residual:.3e})"
            )));
        }
        let sym = (&h.0 + h.0.adjoint()) * c64(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let n = h.rows();
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self { eigenvalues, eigenvectors: ComplexMatrix(eigenvectors) })
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors.0;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| c64(x, 0.0))
    }

    /// `exp(-i scale h)`.
    pub fn exp_i(&self, scale: f64) -> ComplexMatrix {
        self.apply_fn(|x| C64::from_polar(1.0, -scale * x))
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_EXTENDED_DIM && c <= MAX_EXTENDED_DIM => Ok(ComplexMatrix(a.0.kronecker(&b.0))),
        _ => Err(Error::Size(format!(
            "kron of {}x{} and {}x{} exceeds the maximum dimension {MAX_EXTENDED_DIM}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ))),
    }
}

/// `exp(-i scale h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    Ok(h.eigh()?.exp_i(scale))
}

pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    a.0.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `sum_k coeffs[k] T_k(h)` by the Chebyshev three-term recurrence.
pub fn matpoly_chebyshev(h: &ComplexMatrix, coeffs: &[C64]) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::Contract("Chebyshev polynomial of a non-square matrix".into()));
    }
    let norm = operator_norm(h);
    if norm > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("Chebyshev evaluation needs operator norm <= 1, got {norm:.6e}")));
    }
    let n = h.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    if coeffs.is_empty() {
        return Ok(acc);
    }
    let mut prev = ComplexMatrix::identity(n);
    acc.0 += &prev.0 * coeffs[0];
    if coeffs.len() == 1 {
        return Ok(acc);
    }
    let mut cur = h.clone();
    acc.0 += &cur.0 * coeffs[1];
    for &c in &coeffs[2..] {
        let next = ComplexMatrix(&h.0 * &cur.0 * c64(2.0, 0.0) - &prev.0);
        acc.0 += &next.0 * c;
        prev = cur;
        cur = next;
    }
    Ok(acc)
}

/// Cosine-sine unitary dilation of a contraction `a`:
///
/// ```text
/// [ a                 (I - a a^dagger)^1/2 ]
/// [ (I - a^dagger a)^1/2   -a^dagger       ]
/// ```
///
/// Built from the SVD `a = W S V^dagger` so that off-diagonal identities hold
/// structurally. Singular values above one (up to `1 + 1e-9`) are clipped.
pub fn cs_dilation(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Contract("dilation needs a square contraction".into()));
    }
    let n = a.rows();
    let svd = a.0.clone().svd(true, true);
    let w = svd.u.ok_or_else(|| Error::Convergence("SVD did not return U".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Convergence("SVD did not return V^T".into()))?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("dilation of a non-contraction (norm {smax:.6e})")));
    }
    let v = vt.adjoint();
    // Snap singular values within rounding of 1, else sqrt(1 - s^2) turns a
    // 1e-16 SVD error into a 1e-8 off-diagonal block.
    let s: Vec<f64> = svd.singular_values.iter().map(|&x| if x > 1.0 - 4.0 * f64::EPSILON { 1.0 } else { x }).collect();
    let c: Vec<f64> = s.iter().map(|&x| (1.0 - x * x).max(0.0).sqrt()).collect();
    let diag = |vals: &[f64]| DMatrix::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|&x| c64(x, 0.0))));
    let sd = diag(&s);
    let cd = diag(&c);
    let top_left = &a.0;
    let top_right = &w * &cd * w.adjoint();
    let bottom_left = &v * &cd * v.adjoint();
    let bottom_right = -(&v * &sd * w.adjoint());
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(top_left);
    out.view_mut((0, n), (n, n)).copy_from(&top_right);
    out.view_mut((n, 0), (n, n)).copy_from(&bottom_left);
    out.view_mut((n, n), (n, n)).copy_from(&bottom_right);
    Ok(ComplexMatrix(out))
}

/// Basis vector `e_k` of dimension `n`.
pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = c64(1.0, 0.0);
    v
}

/// `min over theta of |a - e^{i theta} b|`.
pub fn phase_aligned_distance(a: &CVector, b: &CVector) -> f64 {
    // Align first and subtract; the norm-expansion form loses half the digits.
    let overlap = b.dotc(a);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c64(1.0, 0.0) };
    (a - b * phase).norm()
}

/// Operator-norm distance after removing the best global phase, `min_theta |a - e^{i theta} b|`.
pub fn phase_aligned_operator_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let tr = (b.0.adjoint() * &a.0).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { c64(1.0, 0.0) };
    operator_norm(&(a - &b.scale(phase)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));

        let xi = kron(&ComplexMatrix::pauli_x(), &i2).unwrap();
        assert_eq!(xi.get(0, 2), c64(1.0, 0.0));
        assert_eq!(xi.get(2, 0), c64(1.0, 0.0));
        assert_eq!(xi.get(0, 0), c64(0.0, 0.0));

        let d = kron(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0]), &ComplexMatrix::from_real_diagonal(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(d, ComplexMatrix::from_real_diagonal(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_rejects_oversized_products() {
        // Shape-only check; the zero-column inputs keep allocation trivial.
        let a = ComplexMatrix::zeros(1 << 11, 1);
        let b = ComplexMatrix::zeros(1 << 10, 1);
        assert!(matches!(kron(&a, &b), Err(Error::Size(_))));
    }

    #[test]
    fn expm_examples() {
        let z = ComplexMatrix::pauli_z();
        let u = expm_hermitian(&z, PI / 2.0).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c64(0.0, -1.0), c64(0.0, 1.0)]);
        assert!(close(&u, &expected, 1e-14));

        let h = ComplexMatrix::from_row_slice(2, 2, &[c64(0.3, 0.), c64(0.1, 0.2), c64(0.1, -0.2), c64(-1.0, 0.)]);
        assert!(close(&expm_hermitian(&h, 0.0).unwrap(), &ComplexMatrix::identity(2), 1e-14));

        let x = ComplexMatrix::pauli_x();
        let minus_i = ComplexMatrix::identity(2).scale_real(-1.0);
        assert!(close(&expm_hermitian(&x, PI).unwrap(), &minus_i, 1e-14));
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        assert!(matches!(expm_hermitian(&a, 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::pauli_x()) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&ComplexMatrix::from_real_diagonal(&[1.0, -3.0])) - 3.0).abs() < 1e-14);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn chebyshev_examples() {
        let z = ComplexMatrix::pauli_z();
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        assert_eq!(matpoly_chebyshev(&z, &[one]).unwrap(), ComplexMatrix::identity(2));
        assert_eq!(matpoly_chebyshev(&z, &[zero, one]).unwrap(), z);
        let t2 = matpoly_chebyshev(&z, &[zero, zero, one]).unwrap();
        assert!(close(&t2, &ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn chebyshev_domain_error() {
        let h = ComplexMatrix::pauli_z().scale_real(2.0);
        assert!(matches!(matpoly_chebyshev(&h, &[c64(1.0, 0.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn dilation_examples() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let u = cs_dilation(&half).unwrap();
        assert!(u.unitarity_residual() < 1e-14);
        assert!(close(&u.block(0, 0, 2, 2), &half, 1e-15));
        let s = 3f64.sqrt() / 2.0;
        assert!(close(&u.block(0, 2, 2, 2), &ComplexMatrix::identity(2).scale_real(s), 1e-14));

        let x = ComplexMatrix::pauli_x();
        let ux = cs_dilation(&x).unwrap();
        assert!(close(&ux.block(0, 0, 2, 2), &x, 1e-14));
        assert!(ux.block(0, 2, 2, 2).max_abs() < 1e-7);
        assert!(ux.unitarity_residual() < 1e-12);

        let zero = ComplexMatrix::zeros(2, 2);
        let u0 = cs_dilation(&zero).unwrap();
        assert!(close(&u0.block(0, 2, 2, 2), &ComplexMatrix::identity(2), 1e-15));
        assert!(close(&u0.block(2, 0, 2, 2), &ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn eigenvalues_sorted_and_reconstruct() {
        let h = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c64(2.0, 0.),
                c64(0.5, 0.5),
                c64(0.0, 0.1),
                c64(0.5, -0.5),
                c64(-1.0, 0.),
                c64(0.2, 0.),
                c64(0.0, -0.1),
                c64(0.2, 0.),
                c64(0.3, 0.),
            ],
        );
        let eig = h.eigh().unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(close(&eig.reconstruct(), &h, 1e-12));
        assert!(eig.eigenvectors.unitarity_residual() < 1e-12);
    }
}
