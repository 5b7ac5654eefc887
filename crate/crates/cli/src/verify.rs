use fqet_core::blockenc::{
    encode_add_term, encode_effective, encode_fourier_component, encode_linear_potential, verify_encoding,
    BlockEncoding,
};
use fqet_core::floquet::{
    build_add, build_heff, build_hlp, cutoff_l, extracted_propagator_via, lieb_robinson_check, theorem1_rhs,
    ExtendedAction, ExtendedUnitary, Route, Theorem1Params,
};
use fqet_core::numkernel::{kron, operator_norm, ComplexMatrix};
use fqet_core::pipeline::{BoundCheck, Mode, ORACLE_TOL};
use fqet_core::propagator::propagate;
use fqet_core::qet::{chebyshev_scalar, jacobi_anger_coeffs, query_complexity_qubitization};
use fqet_core::{FourierHamiltonian, C64};

use crate::error::Result;

const CORNER_TOL: f64 = 1e-11;
const UNITARITY_TOL: f64 = 1e-10;
/// The full effective encoding is assembled densely; larger ones are skipped.
const EFFECTIVE_DENSE_LIMIT: usize = 1024;
const LIGHT_CONE_CUTOFF: usize = 6;
const INFORMATIVE_BOUND: f64 = 1e-2;

pub(crate) fn suite(h: &FourierHamiltonian, t: f64, eps: f64, mode: Mode, seed: u64) -> Result<Vec<BoundCheck>> {
    let mut checks = Vec::new();
    let n = h.n();
    let (p, q) = (n, n + 1);

    let cutoff = cutoff_l(h, t, eps)?;
    let rhs = theorem1_rhs(&Theorem1Params::for_hamiltonian(h, t, cutoff))?;
    checks.push(BoundCheck::new(format!("extraction bound at L={cutoff}"), rhs, eps));

    // At the working cutoff the bound sits far below double precision, so the
    // extraction is checked at the first cutoff where the bound becomes
    // informative. The oracle's own error budget is added to the bound.
    let oracle = propagate(h, 0.0, t, ORACLE_TOL)?.unitary;
    let mut small = Theorem1Params::minimal_cutoff(h.m_max(), h.gamma(), t).max(1);
    let mut small_rhs = theorem1_rhs(&Theorem1Params::for_hamiltonian(h, t, small))?;
    while small_rhs > INFORMATIVE_BOUND && small < cutoff {
        small += 1;
        small_rhs = theorem1_rhs(&Theorem1Params::for_hamiltonian(h, t, small))?;
    }
    for l in [vec![0; n], vec![(p * small) as i64; n]] {
        let u = extracted_propagator_via(h, &l, q * small, t, Route::Auto)?;
        checks.push(BoundCheck::new(
            format!("extraction error at L={small}, l'={l:?}"),
            operator_norm(&(&oracle - &u)),
            small_rhs + 10.0 * ORACLE_TOL,
        ));
    }

    let ext = ExtendedUnitary::build(h, p, q, cutoff, t, Route::Auto)?;
    let corner = ext.corner();
    let scale = (p as f64 / q as f64).powf(n as f64 / 2.0);
    checks.push(BoundCheck::new(
        "corner block distance",
        operator_norm(&(&corner - &oracle.scale_real(scale))),
        scale * eps,
    ));
    let psi = crate::random_state(h.dim(), seed);
    let prob = corner.mul_vec(&psi).norm_squared();
    let design = scale * scale;
    checks.push(BoundCheck::new("success probability deviation", (prob - design).abs(), 3.0 * eps * design));

    let gamma = h.gamma();
    let t_lc = if gamma > 0.0 { t.min(0.5 / gamma) } else { t };
    let lc = lieb_robinson_check(h, LIGHT_CONE_CUTOFF, t_lc)?;
    checks.push(BoundCheck::new(
        format!("light-cone amplitude ratio ({} pairs)", lc.eligible_pairs),
        lc.max_ratio,
        1.0,
    ));

    encoding_checks(h, &mut checks)?;

    let tau = h.alpha() * t;
    let degree = query_complexity_qubitization(tau, eps);
    let coeffs = jacobi_anger_coeffs(tau, degree)?;
    let poly_err = (0..=10_000)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 10_000.0;
            (chebyshev_scalar(&coeffs, x) - C64::from_polar(1.0, -tau * x)).norm()
        })
        .fold(0.0, f64::max);
    checks.push(BoundCheck::new(format!("polynomial error at degree {degree}"), poly_err, eps));

    let report = crate::simulate(h, t, eps, mode, seed)?;
    checks.extend(report.bound_checks.into_iter().map(|c| BoundCheck { name: format!("simulate: {}", c.name), ..c }));
    Ok(checks)
}

fn push_encoding(checks: &mut Vec<BoundCheck>, label: &str, b: &BlockEncoding, target: &ComplexMatrix) -> Result<()> {
    let c = verify_encoding(b, target)?;
    checks.push(BoundCheck::new(format!("{label} corner"), c.corner_distance, CORNER_TOL));
    checks.push(BoundCheck::new(format!("{label} unitarity"), c.unitarity_residual, UNITARITY_TOL));
    Ok(())
}

fn encoding_checks(h: &FourierHamiltonian, checks: &mut Vec<BoundCheck>) -> Result<()> {
    for c in h.components() {
        push_encoding(checks, &format!("O_m encoding m={:?}", c.index.0), &encode_fourier_component(c)?, &c.matrix)?;
    }
    let n = h.n();
    let cutoff = ((h.m_max() + 1.0).ceil() as usize).max(1);
    let lp = encode_linear_potential(cutoff, h.omega())?;
    push_encoding(checks, "linear potential encoding", &lp, &build_hlp(cutoff, h.omega(), 1)?.matrix)?;

    let add = encode_add_term(h, cutoff)?;
    let mut add_target = ComplexMatrix::zeros(add.system_dim, add.system_dim);
    for c in h.components() {
        add_target = &add_target + &kron(&build_add(&c.index.0, cutoff, n)?, &c.matrix)?;
    }
    push_encoding(checks, "addition encoding", &add, &add_target)?;

    if 2 * add.ancilla_dim * lp.ancilla_dim * add.system_dim <= EFFECTIVE_DENSE_LIMIT {
        push_encoding(checks, "effective encoding", &encode_effective(h, cutoff)?, &build_heff(h, cutoff)?.matrix)?;
    }
    Ok(())
}
