//! Multi-periodic Hamiltonians `H(t) = sum_m H_m exp(-i m.omega t)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{c64, operator_norm, ComplexMatrix, C64};

/// Grid resolution per torus dimension used by [`FourierHamiltonian::energy_scales`].
pub const DEFAULT_GAMMA_GRID: usize = 64;

/// Relative tolerance of the Hermiticity pairing `H_{-m} = H_m^dagger`.
const PAIRING_TOL: f64 = 1e-12;

/// Integer Fourier index `m` in `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FourierIndex(pub Vec<i64>);

impl FourierIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.unsigned_abs() as f64).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum()
    }
}

impl fmt::Debug for FourierIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for FourierIndex {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// One Fourier component `H_m` together with its block-encoding weight `alpha_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierComponent {
    pub index: FourierIndex,
    pub matrix: ComplexMatrix,
    pub weight: f64,
}

impl FourierComponent {
    /// Component whose weight defaults to `||H_m||`.
    pub fn new(index: impl Into<FourierIndex>, matrix: ComplexMatrix) -> Self {
        let weight = operator_norm(&matrix);
        Self { index: index.into(), matrix, weight }
    }

    pub fn with_weight(index: impl Into<FourierIndex>, matrix: ComplexMatrix, weight: f64) -> Self {
        Self { index: index.into(), matrix, weight }
    }
}

/// Aggregate energy scales of a [`FourierHamiltonian`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyScales {
    /// `sum_m alpha_m`.
    pub alpha: f64,
    /// `alpha - alpha_0`.
    pub alpha_bar0: f64,
    /// Certified upper bound on `sup_x ||Hbar(x) - H_0||`.
    pub gamma: f64,
    /// `sum_i omega_i`.
    pub omega_total: f64,
    /// `2 pi / omega_total`.
    pub period: f64,
}

#[derive(Clone, Debug)]
pub struct FourierHamiltonian {
    omega: Vec<f64>,
    components: Vec<FourierComponent>,
    dim: usize,
    m_max: f64,
    gamma: OnceLock<f64>,
}

impl FourierHamiltonian {
    /// Validates and stores a component set.
    ///
    /// Requirements: every `omega_i > 0`; indices distinct and of length
    /// `n = omega.len()`; all matrices square of one dimension with finite
    /// entries; `alpha_m >= ||H_m||` and `alpha_m > 0`; and for every `m`
    /// the partner `-m` is present with `H_{-m} = H_m^dagger`.
    pub fn new(omega: Vec<f64>, components: Vec<FourierComponent>) -> Result<Self> {
        let n = omega.len();
        if n == 0 {
            return Err(Error::Validation("at least one drive frequency is required".into()));
        }
        if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Validation(format!("frequencies must be positive and finite, got {w}")));
        }
        if components.is_empty() {
            return Err(Error::Validation("at least one Fourier component is required".into()));
        }
        let dim = components[0].matrix.rows();
        if dim == 0 {
            return Err(Error::Validation("system dimension must be at least 1".into()));
        }
        let mut by_index: BTreeMap<FourierIndex, FourierComponent> = BTreeMap::new();
        for c in components {
            if c.index.dim() != n {
                return Err(Error::Validation(format!(
                    "index {:?} has length {}, expected {n}",
                    c.index,
                    c.index.dim()
                )));
            }
            if c.matrix.rows() != dim || c.matrix.cols() != dim {
                return Err(Error::Validation(format!(
                    "component {:?} is {}x{}, expected {dim}x{dim}",
                    c.index,
                    c.matrix.rows(),
                    c.matrix.cols()
                )));
            }
            if !c.matrix.is_finite() {
                return Err(Error::Validation(format!("component {:?} has non-finite entries", c.index)));
            }
            let norm = operator_norm(&c.matrix);
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::Validation(format!(
                    "component {:?} needs a positive weight alpha_m (got {}); zero components must be given an explicit alpha",
                    c.index, c.weight
                )));
            }
            if c.weight < norm * (1.0 - 1e-12) {
                return Err(Error::Validation(format!(
                    "component {:?} has alpha_m = {} below its norm {norm}",
                    c.index, c.weight
                )));
            }
            if by_index.contains_key(&c.index) {
                return Err(Error::Validation(format!("duplicate Fourier index {:?}", c.index)));
            }
            by_index.insert(c.index.clone(), c);
        }
        for (m, c) in &by_index {
            let partner = by_index.get(&m.negated()).ok_or_else(|| {
                Error::Validation(format!(
                    "component {m:?} has no partner {:?}; H(t) must satisfy H_(-m) = H_m^dagger",
                    m.negated()
                ))
            })?;
            let scale = c.matrix.max_abs().max(1.0);
            let mismatch = (&partner.matrix - &c.matrix.adjoint()).max_abs();
            if mismatch > PAIRING_TOL * scale {
                return Err(Error::Validation(format!(
                    "pairing violated at m = {m:?}: |H_(-m) - H_m^dagger| = {mismatch:.3e}"
                )));
            }
        }
        let m_max = by_index.keys().map(FourierIndex::l2_norm).fold(0.0, f64::max);
        Ok(Self { omega, components: by_index.into_values().collect(), dim, m_max, gamma: OnceLock::new() })
    }

    /// Number of drive frequencies `n`.
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_total(&self) -> f64 {
        self.omega.iter().sum()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_total()
    }

    /// System dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max_m |m|_2`.
    pub fn m_max(&self) -> f64 {
        self.m_max
    }

    /// Components sorted by index.
    pub fn components(&self) -> &[FourierComponent] {
        &self.components
    }

    pub fn component(&self, m: &FourierIndex) -> Option<&FourierComponent> {
        self.components.iter().find(|c| &c.index == m)
    }

    /// `alpha = sum_m alpha_m`.
    pub fn alpha(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// `alpha_0`, zero when `m = 0` is absent.
    pub fn alpha_zero(&self) -> f64 {
        self.components.iter().filter(|c| c.index.is_zero()).map(|c| c.weight).sum()
    }

    /// `H(t)`.
    pub fn evaluate_at(&self, t: f64) -> ComplexMatrix {
        let x: Vec<f64> = self.omega.iter().map(|w| w * t).collect();
        self.evaluate_torus(&x)
    }

    /// `Hbar(x) = sum_m H_m exp(-i m.x)`, so that `H(t) = Hbar(omega t)`.
    pub fn evaluate_torus(&self, x: &[f64]) -> ComplexMatrix {
        self.torus_sum(x, true)
    }

    fn torus_sum(&self, x: &[f64], include_static: bool) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for c in &self.components {
            if !include_static && c.index.is_zero() {
                continue;
            }
            let phase = C64::from_polar(1.0, -c.index.dot(x));
            acc = &acc + &c.matrix.scale(phase);
        }
        acc
    }

    /// Certified upper bound on `gamma = sup_x ||Hbar(x) - H_0||`.
    ///
    /// The supremum is sampled on a uniform grid of `grid_points` nodes per
    /// torus dimension. Every point of the torus lies within `pi / grid_points`
    /// of a node in each coordinate, and `||d Hbar / d x_i|| <= sum_m |m_i| ||H_m||`,
    /// so adding `(pi / grid_points) sum_{m != 0} |m|_1 ||H_m||` to the grid maximum
    /// bounds the true supremum. The result is additionally capped by the
    /// triangle-inequality bound `sum_{m != 0} ||H_m||`.
    pub fn gamma_bound(&self, grid_points: usize) -> Result<f64> {
        Ok(self.gamma_grid_estimate(grid_points)?.certified)
    }

    /// Grid maximum and the certified bound derived from it.
    pub fn gamma_grid_estimate(&self, grid_points: usize) -> Result<GammaEstimate> {
        if grid_points < 16 {
            return Err(Error::Domain(format!("gamma grid needs at least 16 points per dimension, got {grid_points}")));
        }
        let n = self.n();
        let dynamic: Vec<&FourierComponent> = self.components.iter().filter(|c| !c.index.is_zero()).collect();
        if dynamic.is_empty() {
            return Ok(GammaEstimate { grid_max: 0.0, correction: 0.0, certified: 0.0 });
        }
        let norms: Vec<f64> = dynamic.iter().map(|c| operator_norm(&c.matrix)).collect();
        let triangle: f64 = norms.iter().sum();
        let lipschitz: f64 = dynamic.iter().zip(&norms).map(|(c, nm)| c.index.l1_norm() * nm).sum();
        let correction = PI / grid_points as f64 * lipschitz;

        let total = grid_points.checked_pow(n as u32).ok_or_else(|| Error::Size("gamma grid too large".into()))?;
        let step = 2.0 * PI / grid_points as f64;
        let mut x = vec![0.0; n];
        let mut grid_max: f64 = 0.0;
        for k in 0..total {
            let mut rem = k;
            for xi in x.iter_mut().rev() {
                *xi = (rem % grid_points) as f64 * step;
                rem /= grid_points;
            }
            let h = self.torus_sum(&x, false);
            grid_max = grid_max.max(hermitian_norm(&h));
        }
        let certified = (grid_max + correction).min(triangle).max(grid_max);
        Ok(GammaEstimate { grid_max, correction, certified })
    }

    /// `gamma` at the default grid, computed once per Hamiltonian.
    pub fn gamma(&self) -> f64 {
        *self.gamma.get_or_init(|| {
            self.gamma_bound(DEFAULT_GAMMA_GRID).expect("default gamma grid satisfies the minimum resolution")
        })
    }

    pub fn energy_scales(&self) -> EnergyScales {
        let alpha = self.alpha();
        EnergyScales {
            alpha,
            alpha_bar0: alpha - self.alpha_zero(),
            gamma: self.gamma(),
            omega_total: self.omega_total(),
            period: self.period(),
        }
    }

    /// Same omega and weights, matrices replaced by `f(index, H_m)`.
    ///
    /// The caller guarantees that `f` multiplies each `H_m` by a unit-modulus
    /// phase `exp(-i m.theta)`, which preserves both the pairing and `gamma`
    /// (a translation on the torus); the certified `gamma` is carried over.
    pub(crate) fn map_phases(&self, phase: impl Fn(&FourierIndex) -> C64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| FourierComponent {
                index: c.index.clone(),
                matrix: c.matrix.scale(phase(&c.index)),
                weight: c.weight,
            })
            .collect();
        let gamma = OnceLock::new();
        if let Some(&g) = self.gamma.get() {
            let _ = gamma.set(g);
        }
        Self { omega: self.omega.clone(), components, dim: self.dim, m_max: self.m_max, gamma }
    }
}

/// Result of the gamma grid search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaEstimate {
    pub grid_max: f64,
    pub correction: f64,
    pub certified: f64,
}

/// Operator norm of a Hermitian matrix as its largest |eigenvalue|.
fn hermitian_norm(h: &ComplexMatrix) -> f64 {
    let sym = (h.inner() + h.inner().adjoint()) * c64(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
