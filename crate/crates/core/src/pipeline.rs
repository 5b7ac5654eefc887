//! End-to-end simulation and resource estimation.
//!
//! A run embeds `psi` at the torus origin, applies the amplified extended
//! unitary on `[(n+1)L]^n (x) system` with the explicit cutoff `L`, and reads
//! the state back from the origin block. Long times are split into
//! `r = ceil(omega_total t)` segments, each driven by a phase-shifted copy of
//! the Hamiltonian. Every run is certified against the reference propagator.

use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amplify::{amplified_state, plan_amplification, success_window, AmplificationPlan};
use crate::blockenc::QueryTally;
use crate::error::{Error, Result};
use crate::floquet::{
    cutoff_l, theorem1_rhs, ExtendedAction, ExtendedUnitary, PolynomialExtendedUnitary, Route, Theorem1Params,
    TorusIndexSet,
};
use crate::hamiltonian::FourierHamiltonian;
use crate::numkernel::{phase_aligned_distance, CVector, C64};
use crate::propagator::propagate;
use crate::qet::lambert_degree;

/// Largest `omega_total t` accepted by [`simulate_order1`] (four periods).
pub const ORDER1_MAX_PHASE: f64 = 8.0 * PI;

/// Tolerance of the reference propagator used for certification.
pub const ORACLE_TOL: f64 = 1e-11;

/// Largest extended dimension run in polynomial mode.
pub const POLY_MAX_DIM: usize = 512;

/// Slack factor on `eps` for end-to-end fidelity checks.
pub const FIDELITY_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact exponentials of the extended operators.
    Exact,
    /// Jacobi-Anger polynomials of the block-encoded operators.
    Poly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Poly => "poly",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimulationRequest {
    pub hamiltonian: FourierHamiltonian,
    pub t: f64,
    pub eps: f64,
    pub initial_state: CVector,
    pub mode: Mode,
}

/// A measured quantity against the bound it must respect.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound, pass: measured <= bound }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentSummary {
    pub index: usize,
    pub cutoff: usize,
    pub extended_dim: usize,
    pub route: String,
    /// Pre-amplification `|| <0|U|0> psi ||^2` (input state normalized).
    pub success_probability: f64,
    pub queries: QueryTally,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub mode: Mode,
    pub t: f64,
    pub eps: f64,
    pub segments: usize,
    pub cutoff: usize,
    pub amplification: AmplificationPlan,
    /// Final system state as `[re, im]` pairs.
    pub output_state: Vec<[f64; 2]>,
    /// Phase-aligned distance to the reference state.
    pub fidelity_error: f64,
    /// Pre-amplification success probability of the first segment.
    pub measured_success_probability: f64,
    /// Squared norm of the final origin-block state.
    pub post_selection_probability: f64,
    pub bound_checks: Vec<BoundCheck>,
    pub queries: QueryTally,
    pub resources: ResourceEstimate,
    pub segment_details: Vec<SegmentSummary>,
}

impl SimulationReport {
    pub fn all_pass(&self) -> bool {
        self.bound_checks.iter().all(|c| c.pass)
    }

    pub fn output_vector(&self) -> CVector {
        CVector::from_iterator(self.output_state.len(), self.output_state.iter().map(|[re, im]| C64::new(*re, *im)))
    }
}

/// Oracle calls of one extended unitary `U_{p,q}^L` on `[qL]^n` at time `dt`:
/// the polynomial for `exp(-i H^{qL} dt)` queries `O^{qL}` (each use costs
/// `|M|` `O_m`, 2 `G_coef`, 2 `G_freq`) and the one for `exp(-i H_LP^{qL} dt)`
/// queries `O_LP^{qL}` (2 `G_freq` each).
pub fn extended_unitary_queries(h: &FourierHamiltonian, ql: usize, dt: f64, eps: f64) -> QueryTally {
    let lp_scale = 2.0 * ql as f64 * h.omega_total();
    let q_eff = lambert_degree((h.alpha() + lp_scale) * dt, eps) as u64;
    let q_lp = lambert_degree(lp_scale * dt, eps) as u64;
    let per_eff = QueryTally { o_m: h.components().len() as u64, g_coef: 2, g_freq: 2 };
    let per_lp = QueryTally { o_m: 0, g_coef: 0, g_freq: 2 };
    per_eff * q_eff + per_lp * q_lp
}

fn validate(req: &SimulationRequest) -> Result<()> {
    if !(req.t > 0.0 && req.t.is_finite()) {
        return Err(Error::Validation(format!("t must be positive, got {}", req.t)));
    }
    if !(req.eps > 0.0 && req.eps <= 1.0) {
        return Err(Error::Validation(format!("eps must lie in (0, 1], got {}", req.eps)));
    }
    if req.initial_state.len() != req.hamiltonian.dim() {
        return Err(Error::Validation(format!(
            "initial state has length {}, system dimension is {}",
            req.initial_state.len(),
            req.hamiltonian.dim()
        )));
    }
    let norm = req.initial_state.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("initial state must be normalized, |psi| = {norm}")));
    }
    Ok(())
}

/// `H_s`: components `H_m exp(-i m.omega s t / r)`, so `H_s(t') = H(s t / r + t')`.
pub fn shifted_hamiltonian(h: &FourierHamiltonian, s: usize, r: usize, t: f64) -> Result<FourierHamiltonian> {
    if s >= r {
        return Err(Error::Domain(format!("segment index {s} must be below the segment count {r}")));
    }
    if s == 0 {
        return Ok(h.clone());
    }
    let offset = s as f64 * t / r as f64;
    let omega = h.omega().to_vec();
    Ok(h.map_phases(|m| C64::from_polar(1.0, -m.dot(&omega) * offset)))
}

struct SegmentOutcome {
    state: CVector,
    summary: SegmentSummary,
    cutoff_check: BoundCheck,
    window_check: BoundCheck,
}

fn run_segment(
    h: &FourierHamiltonian,
    index: usize,
    dt: f64,
    eps: f64,
    psi: &CVector,
    mode: Mode,
) -> Result<SegmentOutcome> {
    let n = h.n();
    let plan = plan_amplification(n);
    let cutoff = cutoff_l(h, dt, eps)?;
    let ql = plan.q * cutoff;
    let dim = TorusIndexSet::new(n, ql)?.len() * h.dim();

    let (action, route): (Box<dyn ExtendedAction>, &str) = match mode {
        Mode::Exact => {
            let u = ExtendedUnitary::build(h, plan.p, plan.q, cutoff, dt, Route::Auto)?;
            let route = if u.is_dense() { "dense" } else { "matrix-free" };
            (Box::new(u), route)
        }
        Mode::Poly => {
            if dim > POLY_MAX_DIM {
                return Err(Error::Size(format!(
                    "polynomial mode is limited to extended dimension {POLY_MAX_DIM}, this segment needs {dim}"
                )));
            }
            let u = PolynomialExtendedUnitary::new(h, plan.p, plan.q, cutoff, dt, eps)?;
            (Box::new(u), "polynomial")
        }
    };

    let norm_sq = psi.norm_squared();
    let run = amplified_state(action.as_ref(), &plan, psi);
    let state = action.project(&run.extended);
    let success = run.initial_success_probability / norm_sq;
    let queries = extended_unitary_queries(h, ql, dt, eps) * run.unitary_uses;

    let params = Theorem1Params::for_hamiltonian(h, dt, cutoff);
    let rhs = theorem1_rhs(&params)?;
    let (lo, hi) = success_window(n, plan.p, plan.q, eps);
    let design = plan.p_design;
    Ok(SegmentOutcome {
        state,
        summary: SegmentSummary {
            index,
            cutoff,
            extended_dim: dim,
            route: route.to_string(),
            success_probability: success,
            queries,
        },
        cutoff_check: BoundCheck::new(format!("segment[{index}].extraction_error_bound"), rhs, eps),
        window_check: BoundCheck {
            name: format!("segment[{index}].success_probability_window"),
            measured: (success - design).abs(),
            bound: (hi - lo) / 2.0,
            pass: success >= lo && success <= hi,
        },
    })
}

fn simulate_segments(req: &SimulationRequest, r: usize) -> Result<SimulationReport> {
    let h = &req.hamiltonian;
    let dt = req.t / r as f64;
    let eps_s = req.eps / r as f64;
    let mut state = req.initial_state.clone();
    let mut checks = Vec::new();
    let mut details = Vec::with_capacity(r);
    let mut queries = QueryTally::default();
    for s in 0..r {
        let hs = shifted_hamiltonian(h, s, r, req.t)?;
        let out = run_segment(&hs, s, dt, eps_s, &state, req.mode)?;
        state = out.state;
        queries = queries + out.summary.queries;
        if s == 0 {
            checks.push(out.cutoff_check);
        }
        checks.push(out.window_check);
        details.push(out.summary);
    }

    let oracle = propagate(h, 0.0, req.t, ORACLE_TOL)?;
    let reference = oracle.unitary.mul_vec(&req.initial_state);
    let fidelity_error = phase_aligned_distance(&state, &reference);
    checks.insert(0, BoundCheck::new("fidelity_error", fidelity_error, FIDELITY_FACTOR * req.eps));

    let algorithm = if r == 1 { Algorithm::ThisWorkO1 } else { Algorithm::ThisWorkOmega1 };
    let mut resources = estimate_resources(h, req.t, req.eps, algorithm)?;
    resources.measured_query_count = Some(queries.total());

    Ok(SimulationReport {
        mode: req.mode,
        t: req.t,
        eps: req.eps,
        segments: r,
        cutoff: details[0].cutoff,
        amplification: plan_amplification(h.n()),
        output_state: state.iter().map(|z| [z.re, z.im]).collect(),
        fidelity_error,
        measured_success_probability: details[0].success_probability,
        post_selection_probability: state.norm_squared(),
        bound_checks: checks,
        queries,
        resources,
        segment_details: details,
    })
}

/// Single-shot simulation for `omega_total t <= 8 pi`.
pub fn simulate_order1(req: &SimulationRequest) -> Result<SimulationReport> {
    validate(req)?;
    let phase = req.hamiltonian.omega_total() * req.t;
    if phase > ORDER1_MAX_PHASE * (1.0 + 1e-12) {
        return Err(Error::Routing(format!(
            "omega_total t = {phase:.4} exceeds 8 pi; use the time-splitting simulation"
        )));
    }
    simulate_segments(req, 1)
}

/// `r = ceil(omega_total t)`, at least 1.
pub fn segment_count(h: &FourierHamiltonian, t: f64) -> usize {
    ((h.omega_total() * t).ceil() as usize).max(1)
}

/// Time-split simulation with `r = ceil(omega_total t)` segments of error `eps / r`.
pub fn simulate_split(req: &SimulationRequest) -> Result<SimulationReport> {
    validate(req)?;
    simulate_segments(req, segment_count(&req.hamiltonian, req.t))
}

/// Exact oracle-call tally of a run.
pub fn measured_query_count(report: &SimulationReport) -> u64 {
    report.queries.total()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "this-work-O1")]
    ThisWorkO1,
    #[serde(rename = "this-work-Omega1")]
    ThisWorkOmega1,
    #[serde(rename = "qubitization")]
    Qubitization,
    #[serde(rename = "dyson")]
    Dyson,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Qubitization, Algorithm::ThisWorkO1, Algorithm::ThisWorkOmega1, Algorithm::Dyson];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ThisWorkO1 => "this-work-O1",
            Algorithm::ThisWorkOmega1 => "this-work-Omega1",
            Algorithm::Qubitization => "qubitization",
            Algorithm::Dyson => "dyson",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dimensionless inputs of the resource formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceInputs {
    pub alpha_t: f64,
    pub gamma_t: f64,
    pub omega_t: f64,
    pub eps: f64,
    /// System qubits `n_a`.
    pub n_a: u64,
}

impl ResourceInputs {
    pub fn from_hamiltonian(h: &FourierHamiltonian, t: f64, eps: f64) -> Self {
        let s = h.energy_scales();
        let n_a = (h.dim() as f64).log2().ceil().max(0.0) as u64;
        Self { alpha_t: s.alpha * t, gamma_t: s.gamma * t, omega_t: s.omega_total * t, eps, n_a }
    }
}

/// Model estimate of one comparison row: implied constants set to 1, natural
/// logarithms, counts rounded up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceEstimate {
    pub algorithm: Algorithm,
    pub ancilla_qubits: u64,
    pub query_count: u64,
    pub additional_gates_per_query: u64,
    /// Always true: these are formula evaluations, not compiled circuits.
    pub model_estimate: bool,
    /// Oracle calls tallied in an actual run, when one was made.
    pub measured_query_count: Option<u64>,
}

fn pos_ln(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// `ell / ln(e + ell / kappa)`, the sub-logarithmic correction, zero when `ell = 0`.
fn sublog(ell: f64, kappa: f64) -> f64 {
    if ell <= 0.0 {
        0.0
    } else if kappa <= 0.0 {
        ell
    } else {
        ell / (E + ell / kappa).ln()
    }
}

pub fn estimate_from_inputs(x: &ResourceInputs, algorithm: Algorithm) -> Result<ResourceEstimate> {
    if !(x.eps > 0.0 && x.eps <= 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1], got {}", x.eps)));
    }
    if [x.alpha_t, x.gamma_t, x.omega_t].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("alpha t, gamma t and omega t must be finite and non-negative".into()));
    }
    let ell = (1.0 / x.eps).ln();
    let (anc_extra, queries, gates_extra) = match algorithm {
        Algorithm::Qubitization => (1.0, lambert_degree(x.alpha_t, x.eps) as f64, 0.0),
        Algorithm::ThisWorkO1 => {
            let logs = pos_ln(x.gamma_t) + pos_ln(ell);
            let o = sublog(ell, x.alpha_t);
            (1.0 + logs, x.alpha_t + sublog(ell, x.alpha_t + o), logs)
        }
        Algorithm::ThisWorkOmega1 => {
            let ell_w = pos_ln(x.omega_t / x.eps).max(1.0);
            let ratio = if x.omega_t > 0.0 { x.alpha_t / x.omega_t } else { 0.0 };
            let g_ratio = if x.omega_t > 0.0 { x.gamma_t / x.omega_t } else { 0.0 };
            let logs = pos_ln(g_ratio) + pos_ln(ell_w);
            let o = sublog(ell_w, ratio);
            (1.0 + logs, x.alpha_t + x.omega_t * sublog(ell_w, ratio + o), logs)
        }
        Algorithm::Dyson => {
            let arg = (x.alpha_t / x.eps).max(E);
            let q = x.alpha_t * arg.ln() / arg.ln().ln().max(1.0);
            let cross = if x.alpha_t > 0.0 { x.gamma_t * x.omega_t / x.alpha_t } else { 0.0 };
            let logs = pos_ln((cross + x.alpha_t) / x.eps);
            (1.0 + logs, q, logs)
        }
    };
    Ok(ResourceEstimate {
        algorithm,
        ancilla_qubits: x.n_a + anc_extra.ceil() as u64,
        query_count: (queries.ceil() as u64).max(1),
        additional_gates_per_query: (x.n_a + gates_extra.ceil() as u64).max(1),
        model_estimate: true,
        measured_query_count: None,
    })
}

pub fn estimate_resources(h: &FourierHamiltonian, t: f64, eps: f64, algorithm: Algorithm) -> Result<ResourceEstimate> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    estimate_from_inputs(&ResourceInputs::from_hamiltonian(h, t, eps), algorithm)
}
