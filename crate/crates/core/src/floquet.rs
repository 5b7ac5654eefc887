//! Floquet-Hilbert space: the torus index register `[L]^n = {-L+1, ..., L}^n`
//! tensored with the system, the effective Hamiltonian
//! `H^L = sum_m Add_m^L (x) H_m - H_LP^L`, the propagators extracted from it,
//! the extended unitary, and the bounds that tie them to `U(t)`.
//!
//! Extended vectors are laid out torus-major: entry `k * d + j` is torus point
//! `k` (in [`TorusIndexSet`] order) and system basis state `j`.
//!
//! Two evolution routes exist. Dense operators ([`FloquetOperator`]) are
//! exponentiated by eigendecomposition and capped by
//! [`dense_dim_cap`](crate::numkernel::dense_dim_cap). The matrix-free route
//! ([`EffectiveOperator`], [`MatrixFreeExtendedUnitary`]) applies `H^L` as a
//! sparse operator and evolves vectors with a Chebyshev expansion, which is
//! what makes two-frequency instances tractable.

use std::f64::consts::{E, PI};

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::hamiltonian::{FourierHamiltonian, FourierIndex};
use crate::numkernel::{
    c64, check_dense_dim, operator_norm, CVector, ComplexMatrix, HermitianEig, LinearOperator, C64, MAX_EXTENDED_DIM,
};
use crate::qet::{chebyshev_apply_vector, chebyshev_evolve, QetPlan};

/// Extended dimensions up to this size use the dense route when
/// [`Route::Auto`] is requested.
pub const AUTO_DENSE_LIMIT: usize = 1024;

/// The index set `[L]^n`, enumerated lexicographically with the first
/// coordinate slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusIndexSet {
    n: usize,
    cutoff: usize,
}

impl TorusIndexSet {
    pub fn new(n: usize, cutoff: usize) -> Result<Self> {
        if n == 0 || cutoff == 0 {
            return Err(Error::Domain(format!("torus needs n >= 1 and L >= 1, got n = {n}, L = {cutoff}")));
        }
        let side = 2 * cutoff;
        let mut len: usize = 1;
        for _ in 0..n {
            len = len
                .checked_mul(side)
                .filter(|&v| v <= MAX_EXTENDED_DIM)
                .ok_or_else(|| Error::Size(format!("[{cutoff}]^{n} exceeds {MAX_EXTENDED_DIM} points")))?;
        }
        Ok(Self { n, cutoff })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `(2L)^n`.
    pub fn len(&self) -> usize {
        (2 * self.cutoff).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, l: &[i64]) -> bool {
        let big = self.cutoff as i64;
        l.len() == self.n && l.iter().all(|&v| v > -big && v <= big)
    }

    pub fn index_of(&self, l: &[i64]) -> Option<usize> {
        if !self.contains(l) {
            return None;
        }
        let side = 2 * self.cutoff;
        let big = self.cutoff as i64;
        Some(l.iter().fold(0, |acc, &v| acc * side + (v + big - 1) as usize))
    }

    pub fn point(&self, mut index: usize) -> Vec<i64> {
        let side = 2 * self.cutoff;
        let big = self.cutoff as i64;
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = (index % side) as i64 - big + 1;
            index /= side;
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Index of the origin `0`.
    pub fn origin_index(&self) -> usize {
        self.index_of(&vec![0; self.n]).expect("origin lies in every torus")
    }

    /// Per-coordinate `l_i (+) m_i`, wrapped modulo `2L` into `{-L+1, ..., L}`.
    pub fn wrap_add(&self, l: &[i64], m: &[i64]) -> Vec<i64> {
        let side = 2 * self.cutoff as i64;
        let shift = self.cutoff as i64 - 1;
        l.iter().zip(m).map(|(&a, &b)| (a + b + shift).rem_euclid(side) - shift).collect()
    }

    /// `k -> index(point(k) (+) m)`.
    pub fn shift_map(&self, m: &[i64]) -> Vec<usize> {
        (0..self.len())
            .map(|k| self.index_of(&self.wrap_add(&self.point(k), m)).expect("wrapped point lies in the torus"))
            .collect()
    }

    /// Indices of the points of `[inner]^n`, which is a subset of this torus
    /// when `inner <= L`.
    pub fn sub_torus_indices(&self, inner: usize) -> Vec<usize> {
        let big = inner as i64;
        (0..self.len()).filter(|&k| self.point(k).iter().all(|&v| v > -big && v <= big)).collect()
    }
}

/// Which operator a [`FloquetOperator`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FloquetKind {
    Effective,
    LinearPotential,
    Addition,
    ExtendedUnitary,
}

/// A dense operator on `[L]^n (x) system`.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    pub torus: TorusIndexSet,
    pub system_dim: usize,
    pub matrix: ComplexMatrix,
    pub kind: FloquetKind,
}

impl FloquetOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `<l| A |l'>` as a `d x d` block.
    pub fn block(&self, l: &[i64], l_prime: &[i64]) -> Option<ComplexMatrix> {
        let d = self.system_dim;
        let r = self.torus.index_of(l)?;
        let c = self.torus.index_of(l_prime)?;
        Some(self.matrix.block(r * d, c * d, d, d))
    }

    /// `<0|_f A |0>_f`.
    pub fn corner(&self) -> ComplexMatrix {
        let d = self.system_dim;
        let o = self.torus.origin_index();
        self.matrix.block(o * d, o * d, d, d)
    }
}

/// Permutation `Add_m^L = sum_l |l (+) m><l|` on the torus register alone.
pub fn build_add(m: &[i64], cutoff: usize, n: usize) -> Result<ComplexMatrix> {
    if m.len() != n {
        return Err(Error::Domain(format!("shift {m:?} has length {}, expected {n}", m.len())));
    }
    let torus = TorusIndexSet::new(n, cutoff)?;
    check_dense_dim(torus.len(), "Add_m")?;
    let mut out = ComplexMatrix::zeros(torus.len(), torus.len());
    for (k, target) in torus.shift_map(m).into_iter().enumerate() {
        out.set(target, k, c64(1.0, 0.0));
    }
    Ok(out)
}

/// `l . omega` for every torus point.
fn linear_potential_diagonal(torus: &TorusIndexSet, omega: &[f64]) -> Vec<f64> {
    torus.points().map(|l| FourierIndex(l).dot(omega)).collect()
}

/// `H_LP^L = sum_l (l . omega) |l><l| (x) I_d`.
pub fn build_hlp(cutoff: usize, omega: &[f64], system_dim: usize) -> Result<FloquetOperator> {
    let torus = TorusIndexSet::new(omega.len(), cutoff)?;
    let dim = torus.len() * system_dim;
    check_dense_dim(dim, "H_LP^L")?;
    let diag: Vec<f64> =
        linear_potential_diagonal(&torus, omega).into_iter().flat_map(|v| std::iter::repeat_n(v, system_dim)).collect();
    Ok(FloquetOperator {
        torus,
        system_dim,
        matrix: ComplexMatrix::from_real_diagonal(&diag),
        kind: FloquetKind::LinearPotential,
    })
}

fn check_cutoff(h: &FourierHamiltonian, cutoff: usize) -> Result<()> {
    if (cutoff as f64) < h.m_max() + 1.0 - 1e-12 {
        return Err(Error::Size(format!("cutoff L = {cutoff} is below m_max + 1 = {}", h.m_max() + 1.0)));
    }
    Ok(())
}

/// `Add_m^L (x) H_m` for a single component.
pub fn build_addition_term(h: &FourierHamiltonian, m: &FourierIndex, cutoff: usize) -> Result<FloquetOperator> {
    let comp = h.component(m).ok_or_else(|| Error::Domain(format!("no Fourier component with index {m:?}")))?;
    let torus = TorusIndexSet::new(h.n(), cutoff)?;
    let d = h.dim();
    check_dense_dim(torus.len() * d, "Add_m^L (x) H_m")?;
    let mut out = ComplexMatrix::zeros(torus.len() * d, torus.len() * d);
    for (k, target) in torus.shift_map(&m.0).into_iter().enumerate() {
        out.set_block(target * d, k * d, &comp.matrix);
    }
    Ok(FloquetOperator { torus, system_dim: d, matrix: out, kind: FloquetKind::Addition })
}

/// Dense effective Hamiltonian `H^L`.
pub fn build_heff(h: &FourierHamiltonian, cutoff: usize) -> Result<FloquetOperator> {
    check_cutoff(h, cutoff)?;
    let torus = TorusIndexSet::new(h.n(), cutoff)?;
    let d = h.dim();
    let dim = torus.len() * d;
    check_dense_dim(dim, "H^L")?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for comp in h.components() {
        for (k, target) in torus.shift_map(&comp.index.0).into_iter().enumerate() {
            let existing = out.block(target * d, k * d, d, d);
            out.set_block(target * d, k * d, &(&existing + &comp.matrix));
        }
    }
    for (k, v) in linear_potential_diagonal(&torus, h.omega()).into_iter().enumerate() {
        for j in 0..d {
            let idx = k * d + j;
            out.set(idx, idx, out.get(idx, idx) - c64(v, 0.0));
        }
    }
    Ok(FloquetOperator { torus, system_dim: d, matrix: out, kind: FloquetKind::Effective })
}

/// Sparse action of `H^L`.
#[derive(Clone, Debug)]
pub struct EffectiveOperator {
    torus: TorusIndexSet,
    d: usize,
    /// Per component: source block of every target block, and `H_m` row-major.
    hops: Vec<(Vec<usize>, Vec<C64>)>,
    potential: Vec<f64>,
    spectral_bound: f64,
}

impl EffectiveOperator {
    pub fn new(h: &FourierHamiltonian, cutoff: usize) -> Result<Self> {
        check_cutoff(h, cutoff)?;
        let torus = TorusIndexSet::new(h.n(), cutoff)?;
        let d = h.dim();
        if torus.len().saturating_mul(d) > MAX_EXTENDED_DIM {
            return Err(Error::Size(format!("extended dimension {} x {d} exceeds {MAX_EXTENDED_DIM}", torus.len())));
        }
        let hops = h
            .components()
            .iter()
            .map(|c| (torus.shift_map(&c.index.negated().0), c.matrix.row_major_entries()))
            .collect();
        let potential = linear_potential_diagonal(&torus, h.omega());
        let hop_norm: f64 = h.components().iter().map(|c| operator_norm(&c.matrix)).sum();
        let lp_norm = potential.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        // Slightly inflated so that rounding never pushes the spectrum outside.
        let spectral_bound = (hop_norm + lp_norm) * (1.0 + 1e-12) + 1e-300;
        Ok(Self { torus, d, hops, potential, spectral_bound })
    }

    pub fn torus(&self) -> &TorusIndexSet {
        &self.torus
    }

    pub fn system_dim(&self) -> usize {
        self.d
    }

    /// Upper bound on `||H^L||`.
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    /// `exp(-i H^L t) v`.
    pub fn evolve(&self, v: &CVector, t: f64) -> CVector {
        chebyshev_evolve(self, self.spectral_bound, t, v)
    }
}

impl LinearOperator for EffectiveOperator {
    fn dim(&self) -> usize {
        self.torus.len() * self.d
    }

    fn apply(&self, x: &CVector) -> CVector {
        // Gather form: y_k = -(k.omega) x_k + sum_m H_m x_{k - m}.
        let d = self.d;
        let xs = x.as_slice();
        let mut y = CVector::zeros(x.len());
        let ys = y.as_mut_slice();
        for (k, &v) in self.potential.iter().enumerate() {
            let out = &mut ys[k * d..(k + 1) * d];
            for (j, o) in out.iter_mut().enumerate() {
                *o = -xs[k * d + j] * v;
            }
            for (src, hm) in &self.hops {
                let xin = &xs[src[k] * d..(src[k] + 1) * d];
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &hm[i * d..(i + 1) * d];
                    let mut acc = C64::new(0.0, 0.0);
                    for (a, b) in row.iter().zip(xin) {
                        acc += a * b;
                    }
                    *o += acc;
                }
            }
        }
        y
    }
}

/// Evolution route selection for extracted propagators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Dense,
    MatrixFree,
    /// Dense up to [`AUTO_DENSE_LIMIT`], matrix-free above.
    Auto,
}

fn phase_sum_blocks(torus: &TorusIndexSet, omega: &[f64], t: f64, d: usize, column: &CVector) -> Vec<C64> {
    // sum_l exp(-i l.omega t) <l| column, one d-vector
    let mut out = vec![C64::new(0.0, 0.0); d];
    for (k, l) in torus.points().enumerate() {
        let phase = C64::from_polar(1.0, -FourierIndex(l).dot(omega) * t);
        for (j, o) in out.iter_mut().enumerate() {
            *o += phase * column[k * d + j];
        }
    }
    out
}

/// `exp(-i H^L t)` computed densely once; every extracted propagator and
/// transition block is read off from it.
#[derive(Clone, Debug)]
pub struct DenseEvolution {
    torus: TorusIndexSet,
    d: usize,
    omega: Vec<f64>,
    t: f64,
    exp: ComplexMatrix,
}

impl DenseEvolution {
    pub fn new(h: &FourierHamiltonian, cutoff: usize, t: f64) -> Result<Self> {
        let heff = build_heff(h, cutoff)?;
        let exp = HermitianEig::new(&heff.matrix)?.exp_i(t);
        Ok(Self { torus: heff.torus, d: h.dim(), omega: h.omega().to_vec(), t, exp })
    }

    pub fn torus(&self) -> &TorusIndexSet {
        &self.torus
    }

    pub fn exp_matrix(&self) -> &ComplexMatrix {
        &self.exp
    }

    /// `<l| exp(-i H^L t) |l'>`.
    pub fn transition_block(&self, l: &[i64], l_prime: &[i64]) -> Option<ComplexMatrix> {
        let r = self.torus.index_of(l)?;
        let c = self.torus.index_of(l_prime)?;
        Some(self.exp.block(r * self.d, c * self.d, self.d, self.d))
    }

    /// `U_{l'}(t) = sum_l exp(-i l.omega t) <l| exp(-i H^L t) |l'>`.
    pub fn extracted(&self, l_prime: &[i64]) -> Result<ComplexMatrix> {
        let c = self
            .torus
            .index_of(l_prime)
            .ok_or_else(|| Error::Domain(format!("{l_prime:?} is not a point of the torus")))?;
        let d = self.d;
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let col: CVector = self.exp.inner().column(c * d + j).into_owned();
            for (i, v) in phase_sum_blocks(&self.torus, &self.omega, self.t, d, &col).into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}

/// `U_{l'}^{qL}(t)` by the matrix-free route.
fn extracted_matrix_free(h: &FourierHamiltonian, l_prime: &[i64], ql: usize, t: f64) -> Result<ComplexMatrix> {
    let op = EffectiveOperator::new(h, ql)?;
    let c = op
        .torus()
        .index_of(l_prime)
        .ok_or_else(|| Error::Domain(format!("{l_prime:?} is not a point of [{ql}]^{}", h.n())))?;
    let d = h.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let mut v = CVector::zeros(op.dim());
        v[c * d + j] = c64(1.0, 0.0);
        let ev = op.evolve(&v, t);
        for (i, x) in phase_sum_blocks(op.torus(), h.omega(), t, d, &ev).into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// `U_{l'}^{qL}(t)` through the requested route.
pub fn extracted_propagator_via(
    h: &FourierHamiltonian,
    l_prime: &[i64],
    ql: usize,
    t: f64,
    route: Route,
) -> Result<ComplexMatrix> {
    let dim = TorusIndexSet::new(h.n(), ql)?.len() * h.dim();
    let dense = match route {
        Route::Dense => true,
        Route::MatrixFree => false,
        Route::Auto => dim <= AUTO_DENSE_LIMIT.min(crate::numkernel::dense_dim_cap()),
    };
    if dense {
        DenseEvolution::new(h, ql, t)?.extracted(l_prime)
    } else {
        extracted_matrix_free(h, l_prime, ql, t)
    }
}

/// `U_{l'}^{qL}(t)`, approximating `U(t)` for `l'` well inside the torus.
pub fn extracted_propagator(h: &FourierHamiltonian, l_prime: &[i64], ql: usize, t: f64) -> Result<ComplexMatrix> {
    extracted_propagator_via(h, l_prime, ql, t, Route::Auto)
}

/// Householder reflection on the torus register exchanging `|0>` with the
/// uniform superposition over `[pL]^n` inside `[qL]^n`.
///
/// It is Hermitian and an involution, so it serves as both `W` and `W^dagger`.
#[derive(Clone, Debug)]
pub struct UniformPrep {
    origin: usize,
    support: Vec<usize>,
    amp: f64,
    w_norm_sq: f64,
}

impl UniformPrep {
    pub fn new(outer: &TorusIndexSet, inner_cutoff: usize) -> Self {
        let support = outer.sub_torus_indices(inner_cutoff);
        let amp = 1.0 / (support.len() as f64).sqrt();
        let origin = outer.origin_index();
        // w = e_0 - u, |w|^2 = 2 - 2 amp.
        Self { origin, support, amp, w_norm_sq: 2.0 - 2.0 * amp }
    }

    fn w_entry(&self, k: usize, in_support: bool) -> f64 {
        let e = if k == self.origin { 1.0 } else { 0.0 };
        let u = if in_support { self.amp } else { 0.0 };
        e - u
    }

    /// In-place `v <- (W (x) I_d) v` on an extended vector.
    pub fn apply(&self, v: &mut CVector, d: usize) {
        if self.w_norm_sq <= 0.0 {
            return; // inner torus is a single point: W = I
        }
        for j in 0..d {
            let mut proj = v[self.origin * d + j];
            for &k in &self.support {
                proj -= v[k * d + j] * self.amp;
            }
            let coef = proj * (2.0 / self.w_norm_sq);
            v[self.origin * d + j] -= coef;
            for &k in &self.support {
                v[k * d + j] += coef * self.amp;
            }
        }
    }

    /// Dense `W` on the torus register.
    pub fn matrix(&self, torus_len: usize) -> ComplexMatrix {
        let mut w = vec![0.0; torus_len];
        for (k, slot) in w.iter_mut().enumerate() {
            *slot = self.w_entry(k, false);
        }
        for &k in &self.support {
            w[k] = self.w_entry(k, true);
        }
        let mut out = ComplexMatrix::identity(torus_len);
        if self.w_norm_sq <= 0.0 {
            return out;
        }
        for i in 0..torus_len {
            for j in 0..torus_len {
                if w[i] != 0.0 && w[j] != 0.0 {
                    out.set(i, j, out.get(i, j) - c64(2.0 * w[i] * w[j] / self.w_norm_sq, 0.0));
                }
            }
        }
        out
    }
}

fn check_pq(p: usize, q: usize) -> Result<()> {
    if p == 0 || p >= q {
        return Err(Error::Contract(format!("extended unitary needs 0 < p < q, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// Dense `U_{p,q}^L(t) = (W^{qL})^dagger exp(-i H_LP^{qL} t) exp(-i H^{qL} t) W^{pL}` on `[qL]^n (x) system`.
pub fn extended_unitary(h: &FourierHamiltonian, p: usize, q: usize, cutoff: usize, t: f64) -> Result<FloquetOperator> {
    check_pq(p, q)?;
    let ql = q * cutoff;
    let heff = build_heff(h, ql)?;
    let torus = heff.torus;
    let d = h.dim();
    let evol = HermitianEig::new(&heff.matrix)?.exp_i(t);
    let lp_phase: Vec<C64> = linear_potential_diagonal(&torus, h.omega())
        .into_iter()
        .flat_map(|v| std::iter::repeat_n(C64::from_polar(1.0, -v * t), d))
        .collect();
    let lp = ComplexMatrix::from_diagonal(&lp_phase);

    // W^{qL} maps |0> to the uniform state over the full [qL]^n.
    let wp =
        crate::numkernel::kron(&UniformPrep::new(&torus, p * cutoff).matrix(torus.len()), &ComplexMatrix::identity(d))?;
    let wq = crate::numkernel::kron(&UniformPrep::new(&torus, ql).matrix(torus.len()), &ComplexMatrix::identity(d))?;
    let u = &(&(&wq.adjoint() * &lp) * &evol) * &wp;
    Ok(FloquetOperator { torus, system_dim: d, matrix: u, kind: FloquetKind::ExtendedUnitary })
}

/// Anything that applies an extended unitary and its adjoint to state vectors.
pub trait ExtendedAction {
    fn torus(&self) -> &TorusIndexSet;
    fn system_dim(&self) -> usize;
    fn apply(&self, v: &CVector) -> CVector;
    fn apply_adjoint(&self, v: &CVector) -> CVector;

    fn dim(&self) -> usize {
        self.torus().len() * self.system_dim()
    }

    /// `|0>_f (x) psi`.
    fn embed(&self, psi: &CVector) -> CVector {
        let d = self.system_dim();
        let o = self.torus().origin_index();
        let mut v = CVector::zeros(self.dim());
        for j in 0..d {
            v[o * d + j] = psi[j];
        }
        v
    }

    /// `(<0|_f (x) I) v`.
    fn project(&self, v: &CVector) -> CVector {
        let d = self.system_dim();
        let o = self.torus().origin_index();
        CVector::from_iterator(d, (0..d).map(|j| v[o * d + j]))
    }

    /// `<0|_f A |0>_f` column by column.
    fn corner(&self) -> ComplexMatrix {
        let d = self.system_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = CVector::zeros(d);
            e[j] = c64(1.0, 0.0);
            let col = self.project(&self.apply(&self.embed(&e)));
            for i in 0..d {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}

impl ExtendedAction for FloquetOperator {
    fn torus(&self) -> &TorusIndexSet {
        &self.torus
    }

    fn system_dim(&self) -> usize {
        self.system_dim
    }

    fn apply(&self, v: &CVector) -> CVector {
        self.matrix.mul_vec(v)
    }

    fn apply_adjoint(&self, v: &CVector) -> CVector {
        self.matrix.inner().ad_mul(v)
    }
}

/// Matrix-free `U_{p,q}^L(t)`.
#[derive(Clone, Debug)]
pub struct MatrixFreeExtendedUnitary {
    op: EffectiveOperator,
    lp_phase: Vec<C64>,
    wp: UniformPrep,
    wq: UniformPrep,
    t: f64,
}

impl MatrixFreeExtendedUnitary {
    pub fn new(h: &FourierHamiltonian, p: usize, q: usize, cutoff: usize, t: f64) -> Result<Self> {
        check_pq(p, q)?;
        let op = EffectiveOperator::new(h, q * cutoff)?;
        let torus = *op.torus();
        let lp_phase =
            linear_potential_diagonal(&torus, h.omega()).into_iter().map(|v| C64::from_polar(1.0, -v * t)).collect();
        let wp = UniformPrep::new(&torus, p * cutoff);
        let wq = UniformPrep::new(&torus, q * cutoff);
        Ok(Self { op, lp_phase, wp, wq, t })
    }

    pub fn effective(&self) -> &EffectiveOperator {
        &self.op
    }

    fn lp(&self, v: &mut CVector, conj: bool) {
        let d = self.op.system_dim();
        for (k, ph) in self.lp_phase.iter().enumerate() {
            let ph = if conj { ph.conj() } else { *ph };
            for j in 0..d {
                v[k * d + j] *= ph;
            }
        }
    }
}

impl ExtendedAction for MatrixFreeExtendedUnitary {
    fn torus(&self) -> &TorusIndexSet {
        self.op.torus()
    }

    fn system_dim(&self) -> usize {
        self.op.system_dim()
    }

    fn apply(&self, v: &CVector) -> CVector {
        let d = self.system_dim();
        let mut x = v.clone();
        self.wp.apply(&mut x, d);
        let mut x = self.op.evolve(&x, self.t);
        self.lp(&mut x, false);
        self.wq.apply(&mut x, d);
        x
    }

    fn apply_adjoint(&self, v: &CVector) -> CVector {
        let d = self.system_dim();
        let mut x = v.clone();
        self.wq.apply(&mut x, d);
        self.lp(&mut x, true);
        let mut x = self.op.evolve(&x, -self.t);
        self.wp.apply(&mut x, d);
        x
    }
}

/// `U_{p,q}^L(t)` with both exponentials replaced by their Jacobi-Anger
/// polynomials: `f_Q(H^{qL} / (alpha + 2 qL omega))` and
/// `f_Q(H_LP^{qL} / (2 qL omega))`. Only approximately unitary.
#[derive(Clone, Debug)]
pub struct PolynomialExtendedUnitary {
    op: EffectiveOperator,
    eff_plan: QetPlan,
    eff_scale: f64,
    lp_values: Vec<C64>,
    wp: UniformPrep,
    wq: UniformPrep,
}

impl PolynomialExtendedUnitary {
    pub fn new(h: &FourierHamiltonian, p: usize, q: usize, cutoff: usize, t: f64, eps: f64) -> Result<Self> {
        check_pq(p, q)?;
        let ql = q * cutoff;
        let op = EffectiveOperator::new(h, ql)?;
        let torus = *op.torus();
        let lp_scale = 2.0 * ql as f64 * h.omega_total();
        let eff_scale = h.alpha() + lp_scale;
        let eff_plan = QetPlan::new(eff_scale * t, eps)?;
        let lp_plan = QetPlan::new(lp_scale * t, eps)?;
        let lp_values =
            linear_potential_diagonal(&torus, h.omega()).into_iter().map(|v| lp_plan.eval(v / lp_scale)).collect();
        let wp = UniformPrep::new(&torus, p * cutoff);
        let wq = UniformPrep::new(&torus, ql);
        Ok(Self { op, eff_plan, eff_scale, lp_values, wp, wq })
    }

    pub fn effective_degree(&self) -> usize {
        self.eff_plan.degree
    }

    fn lp(&self, v: &mut CVector, conj: bool) {
        let d = self.op.system_dim();
        for (k, f) in self.lp_values.iter().enumerate() {
            let f = if conj { f.conj() } else { *f };
            for j in 0..d {
                v[k * d + j] *= f;
            }
        }
    }
}

impl ExtendedAction for PolynomialExtendedUnitary {
    fn torus(&self) -> &TorusIndexSet {
        self.op.torus()
    }

    fn system_dim(&self) -> usize {
        self.op.system_dim()
    }

    fn apply(&self, v: &CVector) -> CVector {
        let d = self.system_dim();
        let mut x = v.clone();
        self.wp.apply(&mut x, d);
        let mut x = chebyshev_apply_vector(&self.op, self.eff_scale, &self.eff_plan.coefficients, &x);
        self.lp(&mut x, false);
        self.wq.apply(&mut x, d);
        x
    }

    fn apply_adjoint(&self, v: &CVector) -> CVector {
        // f(A)^dagger = sum_k conj(c_k) T_k(A) for Hermitian A.
        let d = self.system_dim();
        let mut x = v.clone();
        self.wq.apply(&mut x, d);
        self.lp(&mut x, true);
        let conj: Vec<C64> = self.eff_plan.coefficients.iter().map(|c| c.conj()).collect();
        let mut x = chebyshev_apply_vector(&self.op, self.eff_scale, &conj, &x);
        self.wp.apply(&mut x, d);
        x
    }
}

/// Extended unitary through the dense or matrix-free route.
pub enum ExtendedUnitary {
    Dense(FloquetOperator),
    MatrixFree(MatrixFreeExtendedUnitary),
}

impl ExtendedUnitary {
    pub fn build(h: &FourierHamiltonian, p: usize, q: usize, cutoff: usize, t: f64, route: Route) -> Result<Self> {
        check_pq(p, q)?;
        let dim = TorusIndexSet::new(h.n(), q * cutoff)?.len() * h.dim();
        let dense = match route {
            Route::Dense => true,
            Route::MatrixFree => false,
            Route::Auto => dim <= AUTO_DENSE_LIMIT.min(crate::numkernel::dense_dim_cap()),
        };
        Ok(if dense {
            Self::Dense(extended_unitary(h, p, q, cutoff, t)?)
        } else {
            Self::MatrixFree(MatrixFreeExtendedUnitary::new(h, p, q, cutoff, t)?)
        })
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Self::Dense(_))
    }
}

impl ExtendedAction for ExtendedUnitary {
    fn torus(&self) -> &TorusIndexSet {
        match self {
            Self::Dense(u) => u.torus(),
            Self::MatrixFree(u) => u.torus(),
        }
    }

    fn system_dim(&self) -> usize {
        match self {
            Self::Dense(u) => ExtendedAction::system_dim(u),
            Self::MatrixFree(u) => u.system_dim(),
        }
    }

    fn apply(&self, v: &CVector) -> CVector {
        match self {
            Self::Dense(u) => ExtendedAction::apply(u, v),
            Self::MatrixFree(u) => u.apply(v),
        }
    }

    fn apply_adjoint(&self, v: &CVector) -> CVector {
        match self {
            Self::Dense(u) => u.apply_adjoint(v),
            Self::MatrixFree(u) => u.apply_adjoint(v),
        }
    }
}

/// Corner of the extended unitary assembled from extracted propagators:
/// `(2pL)^{-n/2} (2qL)^{-n/2} sum_{l' in [pL]^n} U_{l'}^{qL}(t)`.
pub fn corner_from_extracted(evolution: &DenseEvolution, p: usize, cutoff: usize) -> Result<ComplexMatrix> {
    let torus = *evolution.torus();
    let inner = TorusIndexSet::new(torus.n(), p * cutoff)?;
    let mut acc = ComplexMatrix::zeros(evolution.d, evolution.d);
    for l in inner.points() {
        acc = &acc + &evolution.extracted(&l)?;
    }
    let norm = ((inner.len() * torus.len()) as f64).sqrt();
    Ok(acc.scale_real(1.0 / norm))
}

/// Inputs of the Floquet-Hilbert error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem1Params {
    pub n: usize,
    pub m_max: f64,
    pub gamma: f64,
    pub t: f64,
    pub alpha_bar0: f64,
    pub cutoff: usize,
}

impl Theorem1Params {
    pub fn for_hamiltonian(h: &FourierHamiltonian, t: f64, cutoff: usize) -> Self {
        let s = h.energy_scales();
        Self { n: h.n(), m_max: h.m_max(), gamma: s.gamma, t, alpha_bar0: s.alpha_bar0, cutoff }
    }

    /// Smallest `L` meeting `L >= e^2 m_max gamma t + m_max`.
    pub fn minimal_cutoff(m_max: f64, gamma: f64, t: f64) -> usize {
        ((E * E * m_max * gamma * t + m_max) * (1.0 - 1e-14)).ceil().max(1.0) as usize
    }

    pub fn hypothesis_holds(&self) -> bool {
        let need = E * E * self.m_max * self.gamma * self.t + self.m_max;
        self.cutoff as f64 >= need * (1.0 - 1e-14)
    }
}

/// `C_{n,m} = 4 (2 sqrt(pi) m)^n Gamma(n)/Gamma(n/2) e^{sqrt(n)/m}`.
pub fn theorem1_constant(n: usize, m_max: f64) -> f64 {
    let nf = n as f64;
    4.0 * (2.0 * PI.sqrt() * m_max).powi(n as i32) * gamma(nf) / gamma(nf / 2.0) * (nf.sqrt() / m_max).exp()
}

/// `C alpha_bar0 t (e^2 m gamma t / (L - m))^{L/m - 1}`.
pub fn theorem1_rhs(p: &Theorem1Params) -> Result<f64> {
    if p.m_max == 0.0 || p.alpha_bar0 == 0.0 {
        return Ok(0.0); // no time dependence: extraction is exact
    }
    if !p.hypothesis_holds() {
        return Err(Error::Domain(format!(
            "L = {} violates L >= e^2 m_max gamma t + m_max = {:.6}",
            p.cutoff,
            E * E * p.m_max * p.gamma * p.t + p.m_max
        )));
    }
    let l = p.cutoff as f64;
    let base = E * E * p.m_max * p.gamma * p.t / (l - p.m_max);
    let expo = l / p.m_max - 1.0;
    let decay = if base == 0.0 { 0.0 } else { base.powf(expo) };
    Ok(theorem1_constant(p.n, p.m_max) * p.alpha_bar0 * p.t * decay)
}

/// Explicit cutoff guaranteeing `||U(t) - U_{l'}^{qL}(t)|| <= eps`.
pub fn cutoff_l(h: &FourierHamiltonian, t: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let m = h.m_max();
    if m == 0.0 {
        return Ok(1);
    }
    let s = h.energy_scales();
    Ok(cutoff_from_scales(h.n(), m, s.gamma, s.alpha_bar0, t, eps))
}

/// The cutoff formula on raw scalars.
pub fn cutoff_from_scales(n: usize, m_max: f64, gamma: f64, alpha_bar0: f64, t: f64, eps: f64) -> usize {
    let floor = (m_max + 1.0 - 1e-12).ceil() as usize;
    if m_max == 0.0 {
        return 1;
    }
    let log_arg = (theorem1_constant(n, m_max) * alpha_bar0 * t / eps).max(E);
    let ell = log_arg.ln();
    let kappa = E * E * gamma * t;
    let frac = if kappa > 0.0 { 4.0 * ell / (E + ell / kappa).ln() } else { 0.0 };
    let inner = (E * kappa + frac + 1.0).ceil();
    let l = (m_max * inner - 1e-12).ceil() as usize;
    l.max(floor).max(Theorem1Params::minimal_cutoff(m_max, gamma, t))
}

/// `d^L(l, l') = || min(|l_i - l'_i|, 2L - |l_i - l'_i|) ||_2`.
pub fn torus_distance(l: &[i64], l_prime: &[i64], cutoff: usize) -> f64 {
    let side = 2 * cutoff as i64;
    l.iter()
        .zip(l_prime)
        .map(|(&a, &b)| {
            let diff = (a - b).abs();
            let v = diff.min(side - diff) as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// One eligible pair in a transition-amplitude check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionEntry {
    pub l: Vec<i64>,
    pub l_prime: Vec<i64>,
    pub distance: f64,
    pub amplitude: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiebRobinsonReport {
    pub cutoff: usize,
    pub t: f64,
    pub gamma: f64,
    pub m_max: f64,
    /// Absolute slack added to every bound to absorb rounding in `exp(-i H^L t)`.
    pub tolerance: f64,
    pub eligible_pairs: usize,
    pub max_ratio: f64,
    pub violations: Vec<TransitionEntry>,
}

/// Absolute rounding slack of the transition-amplitude comparison.
pub const LIEB_ROBINSON_SLACK: f64 = 1e-12;

/// `(e m gamma t / d)^{d / m}`.
pub fn lieb_robinson_bound(distance: f64, m_max: f64, gamma: f64, t: f64) -> f64 {
    if distance == 0.0 {
        return 1.0;
    }
    if m_max == 0.0 {
        return 0.0;
    }
    (E * m_max * gamma * t / distance).powf(distance / m_max)
}

/// Checks every pair with `d^L(l, l') >= 2 m_max gamma t` (and `d > 0`).
pub fn lieb_robinson_check(h: &FourierHamiltonian, cutoff: usize, t: f64) -> Result<LiebRobinsonReport> {
    let evolution = DenseEvolution::new(h, cutoff, t)?;
    let torus = *evolution.torus();
    let gamma = h.gamma();
    let m_max = h.m_max();
    let threshold = 2.0 * m_max * gamma * t;
    let points: Vec<Vec<i64>> = torus.points().collect();
    let mut eligible = 0usize;
    let mut max_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    for l in &points {
        for lp in &points {
            let dist = torus_distance(l, lp, cutoff);
            if dist == 0.0 || dist < threshold {
                continue;
            }
            eligible += 1;
            let block = evolution.transition_block(l, lp).expect("points come from the torus");
            let amplitude = operator_norm(&block);
            let bound = lieb_robinson_bound(dist, m_max, gamma, t);
            if bound > 0.0 {
                max_ratio = max_ratio.max(amplitude / bound);
            }
            if amplitude > bound + LIEB_ROBINSON_SLACK {
                violations.push(TransitionEntry {
                    l: l.clone(),
                    l_prime: lp.clone(),
                    distance: dist,
                    amplitude,
                    bound,
                });
            }
        }
    }
    Ok(LiebRobinsonReport {
        cutoff,
        t,
        gamma,
        m_max,
        tolerance: LIEB_ROBINSON_SLACK,
        eligible_pairs: eligible,
        max_ratio,
        violations,
    })
}

/// Hopping part `H_I = sum_{m != 0} Add_m^L (x) H_m`.
pub fn build_hopping(h: &FourierHamiltonian, cutoff: usize) -> Result<ComplexMatrix> {
    let torus = TorusIndexSet::new(h.n(), cutoff)?;
    let d = h.dim();
    let dim = torus.len() * d;
    check_dense_dim(dim, "H_I")?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for comp in h.components().iter().filter(|c| !c.index.is_zero()) {
        for (k, target) in torus.shift_map(&comp.index.0).into_iter().enumerate() {
            let existing = out.block(target * d, k * d, d, d);
            out.set_block(target * d, k * d, &(&existing + &comp.matrix));
        }
    }
    Ok(out)
}

/// Spectrum of `H_I` against the union over `x in (pi/L) Z^n` of the spectra
/// of `Hbar(x) - H_0`. Returns the largest absolute mismatch between the two
/// sorted eigenvalue lists.
pub fn hopping_spectrum_mismatch(h: &FourierHamiltonian, cutoff: usize) -> Result<f64> {
    let hop = build_hopping(h, cutoff)?;
    let direct = HermitianEig::new(&hop)?.eigenvalues;
    let torus = TorusIndexSet::new(h.n(), cutoff)?;
    let h0 = h
        .component(&FourierIndex::zero(h.n()))
        .map(|c| c.matrix.clone())
        .unwrap_or_else(|| ComplexMatrix::zeros(h.dim(), h.dim()));
    let side = 2 * cutoff;
    let mut predicted = Vec::with_capacity(direct.len());
    for k in 0..torus.len() {
        let mut rem = k;
        let mut x = vec![0.0; h.n()];
        for xi in x.iter_mut().rev() {
            *xi = PI * (rem % side) as f64 / cutoff as f64;
            rem /= side;
        }
        let block = &h.evaluate_torus(&x) - &h0;
        predicted.extend(HermitianEig::new(&block)?.eigenvalues);
    }
    predicted.sort_by(f64::total_cmp);
    Ok(direct.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}
