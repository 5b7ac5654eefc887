//! Front end for `fqet-core`: reads Hamiltonian spec files, runs the
//! simulation pipeline and its verification suites, and writes JSON reports
//! or CSV tables.
//!
//! Exit codes: 0 when every bound check passes, 1 when any check fails,
//! 2 for unusable input (missing file, malformed JSON, invalid model).

pub mod error;
pub mod spec;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fqet_core::pipeline::{
    estimate_from_inputs, measured_query_count, simulate_order1, simulate_split, Algorithm, BoundCheck, Mode,
    ResourceEstimate, ResourceInputs, SimulationReport, SimulationRequest, ORDER1_MAX_PHASE,
};
use fqet_core::{c64, CVector, FourierHamiltonian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use error::{CliError, Result};
pub use spec::{parse_spec, ComponentSpec, HamiltonianSpecFile};

#[derive(Debug, Parser)]
#[command(name = "fqet", version, about = "Floquet-Hilbert space simulation of driven Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline once and report the output state and bound checks.
    Simulate(RunArgs),
    /// Run the error-bound, light-cone, block-encoding and end-to-end suites.
    Verify(RunArgs),
    /// Print the resource comparison table as CSV.
    Estimate(EstimateArgs),
    /// Sweep time and accuracy; print query counts and wall time as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Poly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Poly => Mode::Poly,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "t", default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Seed for the random initial state.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Take alpha t, gamma t, omega t and the system size from a spec file.
    #[arg(long, requires = "t")]
    pub spec: Option<PathBuf>,
    #[arg(long = "t", allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, required_unless_present = "spec")]
    pub alpha_t: Option<f64>,
    /// Defaults to alpha t.
    #[arg(long)]
    pub gamma_t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub omega_t: f64,
    /// System qubits.
    #[arg(long, default_value_t = 1)]
    pub n_a: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    /// Also run the simulation and fill in the measured query count.
    #[arg(long, requires = "spec")]
    pub measure: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "t", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0], allow_negative_numbers = true)]
    pub t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-5], allow_negative_numbers = true)]
    pub eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a finished command produced.
#[derive(Debug)]
pub struct Outcome {
    pub all_pass: bool,
    pub body: String,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

/// Model constants echoed in every report.
#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianSummary {
    pub n: usize,
    pub d: usize,
    pub omega: Vec<f64>,
    pub components: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub m_max: f64,
}

impl HamiltonianSummary {
    pub fn of(h: &FourierHamiltonian) -> Self {
        Self {
            n: h.n(),
            d: h.dim(),
            omega: h.omega().to_vec(),
            components: h.components().len(),
            alpha: h.alpha(),
            gamma: h.gamma(),
            m_max: h.m_max(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulateOutput<'a> {
    command: &'static str,
    hamiltonian: HamiltonianSummary,
    seed: u64,
    all_pass: bool,
    report: &'a SimulationReport,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub hamiltonian: HamiltonianSummary,
    pub t: f64,
    pub eps: f64,
    pub mode: Mode,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
    pub checks: Vec<BoundCheck>,
}

/// Normalized state with entries uniform in the unit square, fixed by `seed`.
pub fn random_state(d: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = CVector::from_fn(d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

fn check_run_inputs(t: f64, eps: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(CliError::Invalid(format!("--t must be positive, got {t}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(CliError::Invalid(format!("--eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// One pipeline run, single segment when the evolution spans few enough periods.
pub fn simulate(h: &FourierHamiltonian, t: f64, eps: f64, mode: Mode, seed: u64) -> Result<SimulationReport> {
    let req = SimulationRequest { hamiltonian: h.clone(), t, eps, initial_state: random_state(h.dim(), seed), mode };
    let report = if h.omega_total() * t <= ORDER1_MAX_PHASE { simulate_order1(&req)? } else { simulate_split(&req)? };
    Ok(report)
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn run_simulate(a: &RunArgs) -> Result<Outcome> {
    check_run_inputs(a.t, a.eps)?;
    let h = parse_spec(&a.spec)?;
    let report = simulate(&h, a.t, a.eps, a.mode.into(), a.seed)?;
    let all_pass = report.all_pass();
    let body = json(&SimulateOutput {
        command: "simulate",
        hamiltonian: HamiltonianSummary::of(&h),
        seed: a.seed,
        all_pass,
        report: &report,
    });
    Ok(Outcome { all_pass, body })
}

fn run_verify(a: &RunArgs) -> Result<Outcome> {
    check_run_inputs(a.t, a.eps)?;
    let h = parse_spec(&a.spec)?;
    let checks = verify::suite(&h, a.t, a.eps, a.mode.into(), a.seed)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let report = VerifyReport {
        command: "verify",
        hamiltonian: HamiltonianSummary::of(&h),
        t: a.t,
        eps: a.eps,
        mode: a.mode.into(),
        seed: a.seed,
        passed,
        failed: checks.len() - passed,
        all_pass: passed == checks.len(),
        checks,
    };
    Ok(Outcome { all_pass: report.all_pass, body: json(&report) })
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    algorithm: Algorithm,
    ancilla_qubits: u64,
    query_count: u64,
    additional_gates_per_query: u64,
    model_estimate: bool,
    measured_query_count: Option<u64>,
    alpha_t: f64,
    gamma_t: f64,
    omega_t: f64,
    eps: f64,
}

fn run_estimate(a: &EstimateArgs) -> Result<Outcome> {
    if !(a.eps > 0.0 && a.eps <= 1.0) {
        return Err(CliError::Invalid(format!("--eps must lie in (0, 1], got {}", a.eps)));
    }
    let (inputs, measured) = match &a.spec {
        Some(path) => {
            let t = a.t.expect("clap enforces --t with --spec");
            check_run_inputs(t, a.eps)?;
            let h = parse_spec(path)?;
            let measured = if a.measure {
                let report = simulate(&h, t, a.eps, Mode::Exact, a.seed)?;
                Some((report.resources.algorithm, measured_query_count(&report)))
            } else {
                None
            };
            (ResourceInputs::from_hamiltonian(&h, t, a.eps), measured)
        }
        None => {
            let alpha_t = a.alpha_t.expect("clap enforces --alpha-t without --spec");
            let x = ResourceInputs {
                alpha_t,
                gamma_t: a.gamma_t.unwrap_or(alpha_t),
                omega_t: a.omega_t,
                eps: a.eps,
                n_a: a.n_a,
            };
            (x, None)
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for alg in Algorithm::ALL {
        let ResourceEstimate {
            algorithm, ancilla_qubits, query_count, additional_gates_per_query, model_estimate, ..
        } = estimate_from_inputs(&inputs, alg)?;
        w.serialize(EstimateRow {
            algorithm,
            ancilla_qubits,
            query_count,
            additional_gates_per_query,
            model_estimate,
            measured_query_count: measured.and_then(|(which, q)| (which == alg).then_some(q)),
            alpha_t: inputs.alpha_t,
            gamma_t: inputs.gamma_t,
            omega_t: inputs.omega_t,
            eps: inputs.eps,
        })?;
    }
    Ok(Outcome { all_pass: true, body: csv_body(w)? })
}

#[derive(Debug, Serialize)]
struct BenchRow {
    t: f64,
    eps: f64,
    mode: Mode,
    segments: usize,
    cutoff: usize,
    extended_dim: usize,
    route: String,
    queries_o_m: u64,
    queries_g_coef: u64,
    queries_g_freq: u64,
    queries_total: u64,
    fidelity_error: f64,
    all_pass: bool,
    wall_time_s: f64,
}

fn run_bench(a: &BenchArgs) -> Result<Outcome> {
    let h = parse_spec(&a.spec)?;
    for &t in &a.t {
        for &eps in &a.eps {
            check_run_inputs(t, eps)?;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut all_pass = true;
    for &t in &a.t {
        for &eps in &a.eps {
            let start = Instant::now();
            let r = simulate(&h, t, eps, a.mode.into(), a.seed)?;
            let wall = start.elapsed().as_secs_f64();
            all_pass &= r.all_pass();
            let first = &r.segment_details[0];
            w.serialize(BenchRow {
                t,
                eps,
                mode: r.mode,
                segments: r.segments,
                cutoff: r.cutoff,
                extended_dim: first.extended_dim,
                route: first.route.clone(),
                queries_o_m: r.queries.o_m,
                queries_g_coef: r.queries.g_coef,
                queries_g_freq: r.queries.g_freq,
                queries_total: measured_query_count(&r),
                fidelity_error: r.fidelity_error,
                all_pass: r.all_pass(),
                wall_time_s: wall,
            })?;
        }
    }
    Ok(Outcome { all_pass, body: csv_body(w)? })
}

fn csv_body(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Simulate(a) | Command::Verify(a) => a.out.as_deref(),
        Command::Estimate(a) => a.out.as_deref(),
        Command::Bench(a) => a.out.as_deref(),
    }
}

/// Runs a command without touching the filesystem for output.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Bench(a) => run_bench(a),
    }
}

/// Runs a command, writes its output to `--out` or stdout, and returns the
/// process exit code. Nothing is written when the command fails.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fqet: {e}");
            return e.exit_code();
        }
    };
    let written = match out_path(&cli.command) {
        Some(path) => std::fs::write(path, &outcome.body),
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("fqet: cannot write output: {e}");
        return 2;
    }
    outcome.exit_code()
}
