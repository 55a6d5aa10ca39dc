//! End-to-end library pipeline: assemble, solve, round, verify.

use num_bigint::BigInt;
use rsos_core::poly::{ill_posed, motzkin, parse_polynomial, terms_up_to, Exponent, TermSet};
use rsos_core::rationalize::{blend_and_round, CertBody, Provenance, RoundPolicy};
use rsos_core::sdp::{
    assemble_polynomial_instance, assemble_rational_instance, RationalAssembly, SdpInstance,
};
use rsos_core::solver::{
    solve_with_escalation, strictly_feasible_point, SolveStatus, SolverParams,
};
use rsos_core::verify::{spot_check_linear_form, verify_certificate};
use rsos_core::{Certificate, Rat};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn unit_term_set(n: usize) -> TermSet {
    TermSet::from_exponents(n, [Exponent::zeros(n)]).unwrap()
}

fn certify(inst: &SdpInstance, params: &SolverParams) -> Option<Certificate> {
    let outcome = solve_with_escalation(inst, params, 6).unwrap();
    if outcome.status != SolveStatus::CertificateCandidateFound {
        return None;
    }
    let strict = strictly_feasible_point(inst).unwrap();
    let provenance = Provenance::new(params.precision_digits, params.big_m.clone(), 0);
    let cert = blend_and_round(
        (&outcome.y, &outcome.s),
        (&strict.0, &strict.1),
        inst,
        &RoundPolicy::standard(),
        &provenance,
    )
    .unwrap();
    Some(cert)
}

#[test]
fn motzkin_end_to_end() {
    let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
    let params = SolverParams::for_instance(&inst);
    let cert = certify(&inst, &params).expect("Motzkin is not an SOS");
    let report = verify_certificate(&cert).unwrap();
    assert!(report.accepted, "{}", report.summary);
    // every accepted certificate survives seeded spot checks
    let spots = spot_check_linear_form(&cert, 100, 1).unwrap();
    assert!(spots.passed(), "violations: {:?}", spots.violations);
}

#[test]
fn ill_posed_mild_end_to_end() {
    let f = ill_posed(&rat(1, 1000));
    let inst = assemble_polynomial_instance(&f, &unit_term_set(2), true).unwrap();
    let params = SolverParams::for_instance(&inst);
    let cert = certify(&inst, &params).expect("perturbed square is not an SOS");
    assert!(verify_certificate(&cert).unwrap().accepted);
}

#[test]
fn sos_inputs_yield_no_certificate() {
    for f in [
        parse_polynomial("x1^2 + x2^2", 2).unwrap(),
        parse_polynomial("x1^2 - 2*x1*x2 + x2^2", 2).unwrap(),
    ] {
        let inst = assemble_polynomial_instance(&f, &unit_term_set(2), true).unwrap();
        let params = SolverParams::for_instance(&inst);
        assert!(certify(&inst, &params).is_none(), "f = {f}");
    }
}

#[test]
fn rational_motzkin_over_x1sq_plus_one() {
    let f = motzkin();
    let g = parse_polynomial("x1^2 + 1", 2).unwrap();
    let t = terms_up_to(2, 1);
    let inst = match assemble_rational_instance(&f, &g, &t).unwrap() {
        RationalAssembly::Instance(inst) => inst,
        RationalAssembly::Obstruction(o) => panic!("unexpected obstruction {o}"),
    };
    let params = SolverParams::for_instance(&inst);
    let cert = certify(&inst, &params).expect("Motzkin/(x1^2+1) is not in RSOS_deg<=2");
    let report = verify_certificate(&cert).unwrap();
    assert!(report.accepted, "{}", report.summary);
    let spots = spot_check_linear_form(&cert, 100, 2).unwrap();
    assert!(spots.passed(), "violations: {:?}", spots.violations);
}

/// Certificates for the dense instance restrict to certificates for the
/// sparse instance: the sparse product monomials are a subset of the dense
/// ones, the sparse moment matrix is a principal submatrix of the dense one,
/// and the f-localizing block is identical.
#[test]
fn dense_certificate_restricts_to_sparse() {
    let f = motzkin();
    let t = unit_term_set(2);
    let dense = assemble_polynomial_instance(&f, &t, false).unwrap();
    let sparse = assemble_polynomial_instance(&f, &t, true).unwrap();

    // a genuine verified certificate for the dense instance
    let params = SolverParams::for_instance(&dense);
    let cert = certify(&dense, &params).expect("dense Motzkin instance certifies");
    let CertBody::Farkas { y_hat: y_dense } = &cert.body else {
        panic!("expected a moment certificate")
    };

    // restriction to the sparse index set
    let mut y_sparse = rsos_core::MomentVector::new(2);
    for e in sparse.constraint_monomials.iter() {
        assert!(
            dense.constraint_monomials.position(e).is_some(),
            "sparse monomial {e} missing from the dense index"
        );
        y_sparse.insert(e.clone(), y_dense.get(e).unwrap().clone());
    }
    let sparse_report = rsos_core::verify::check_body_against_instance(
        &CertBody::Farkas { y_hat: y_sparse },
        &sparse,
    )
    .unwrap();
    assert!(sparse_report.accepted, "{}", sparse_report.summary);
}
