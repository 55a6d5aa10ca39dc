//! Exact rational verification of certificates.
//!
//! A Farkas certificate is accepted iff, rebuilding both matrices from the
//! fingerprint with exact arithmetic, the moment (or `g`-localizing) block is
//! positive semidefinite and the `f`-localizing block is negative definite.
//! A support-obstruction certificate is accepted iff its witness monomial is
//! genuinely achievable on the `f` side and not on the `g` side.
//!
//! The verifier re-derives the numerator basis from the fingerprint
//! (including the Newton-polytope reduction), so a tampered basis in the
//! certificate cannot smuggle a false accept.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::mat::{ldlt_psd_pivoted, ldlt_unpivoted, PsdResult, PsdWitness, SymMat};
use crate::poly::Polynomial;
use crate::rationalize::{CertBody, Certificate};
use crate::sdp::{
    assemble_polynomial_instance, assemble_rational_instance, rational_support_sets,
    AssembleError, MissingMoment, RationalAssembly, SdpInstance,
};
use crate::Rat;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("matrix is not symmetric")]
    AsymmetricMatrix,
    #[error("certificate fingerprint does not match the rebuilt instance: {0}")]
    FingerprintMismatch(String),
    #[error(transparent)]
    MissingMoment(#[from] MissingMoment),
    #[error("could not rebuild the instance: {0}")]
    Rebuild(#[from] AssembleError),
    #[error("spot checks need a moment certificate, not a support obstruction")]
    NoMomentsToCheck,
}

/// Why a definiteness check rejected.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockWitness {
    /// A pivot came out negative during the PSD factorization.
    NegativePivot { index: usize, value: Rat },
    /// A zero pivot whose Schur-complement row was not zero (PSD check).
    ZeroPivotRow { index: usize, row: Vec<Rat> },
    /// A pivot that was not strictly positive (ND check, applied to `-M`).
    NonPositivePivot { index: usize, value: Rat },
}

impl fmt::Display for BlockWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockWitness::NegativePivot { index, value } => {
                write!(f, "negative pivot {value} at index {index}")
            }
            BlockWitness::ZeroPivotRow { index, .. } => {
                write!(f, "zero pivot with a nonzero remaining row at index {index}")
            }
            BlockWitness::NonPositivePivot { index, value } => {
                write!(f, "pivot {value} at index {index} is not strictly positive")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockCheck {
    pub passed: bool,
    pub dim: usize,
    pub witness: Option<BlockWitness>,
}

/// Exact positive-semidefiniteness decision with a rejection witness.
pub fn psd_check_exact(m: &SymMat<Rat>) -> Result<BlockCheck, VerifyError> {
    if !m.is_symmetric() {
        return Err(VerifyError::AsymmetricMatrix);
    }
    match ldlt_psd_pivoted(m) {
        PsdResult::Psd { factors } => {
            debug_assert_eq!(factors.recompose(), m.clone());
            Ok(BlockCheck {
                passed: true,
                dim: m.dim(),
                witness: None,
            })
        }
        PsdResult::NotPsd { witness } => {
            let witness = match witness {
                PsdWitness::NegativePivot { index, value } => {
                    BlockWitness::NegativePivot { index, value }
                }
                PsdWitness::ZeroPivotRow { index, row } => {
                    BlockWitness::ZeroPivotRow { index, row }
                }
            };
            Ok(BlockCheck {
                passed: false,
                dim: m.dim(),
                witness: Some(witness),
            })
        }
    }
}

/// Exact strict negative-definiteness decision: LDL^T of `-M` without
/// pivoting must complete with every pivot positive.
pub fn nd_check_exact(m: &SymMat<Rat>) -> Result<BlockCheck, VerifyError> {
    if !m.is_symmetric() {
        return Err(VerifyError::AsymmetricMatrix);
    }
    match ldlt_unpivoted(&m.neg()) {
        Ok(factors) => {
            debug_assert_eq!(factors.recompose(), m.neg());
            Ok(BlockCheck {
                passed: true,
                dim: m.dim(),
                witness: None,
            })
        }
        Err(failure) => Ok(BlockCheck {
            passed: false,
            dim: m.dim(),
            witness: Some(BlockWitness::NonPositivePivot {
                index: failure.index,
                value: failure.value,
            }),
        }),
    }
}

/// Outcome of the rational-function support condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportCheck {
    /// `Gamma_1` covers `Gamma_2` (needed for a rational Farkas certificate).
    Covered,
    /// The obstruction witness is confirmed to lie in `Gamma_2 \ Gamma_1`.
    ObstructionConfirmed,
    /// The claimed witness does not obstruct.
    ObstructionRefuted { in_gamma2: bool, in_gamma1: bool },
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub accepted: bool,
    pub psd_block: Option<BlockCheck>,
    pub nd_block: Option<BlockCheck>,
    pub support_check: Option<SupportCheck>,
    pub summary: String,
}

/// Verify a certificate from scratch: rebuild the instance named by its
/// fingerprint (recomputing the numerator basis), then run the exact block
/// checks or the support recomputation.
pub fn verify_certificate(cert: &Certificate) -> Result<VerificationReport, VerifyError> {
    let fp = &cert.fingerprint;
    match &cert.body {
        CertBody::Farkas { .. } => {
            let inst = match &fp.g {
                None => assemble_polynomial_instance(&fp.f, &fp.denominator_terms, fp.sparse_basis)?,
                Some(g) => match assemble_rational_instance(&fp.f, g, &fp.denominator_terms)? {
                    RationalAssembly::Instance(inst) => inst,
                    RationalAssembly::Obstruction(o) => {
                        return Err(VerifyError::FingerprintMismatch(format!(
                            "the instance has a support obstruction ({}) and admits no moment certificate",
                            o.witness
                        )))
                    }
                },
            };
            let rebuilt: Vec<_> = inst.numerator_basis.iter().cloned().collect();
            if rebuilt != fp.numerator_basis {
                return Err(VerifyError::FingerprintMismatch(
                    "numerator basis does not match the recomputed one".into(),
                ));
            }
            if fp.order != "grlex" {
                return Err(VerifyError::FingerprintMismatch(format!(
                    "unsupported monomial order tag {:?}",
                    fp.order
                )));
            }
            check_body_against_instance(&cert.body, &inst)
        }
        CertBody::SupportObstruction { witness } => {
            let Some(g) = &fp.g else {
                return Err(VerifyError::FingerprintMismatch(
                    "support obstructions only exist for rational-function inputs".into(),
                ));
            };
            let (gamma1, gamma2) = rational_support_sets(&fp.f, g, &fp.denominator_terms)?;
            let in_gamma2 = gamma2.contains(witness);
            let in_gamma1 = gamma1.contains(witness);
            let confirmed = in_gamma2 && !in_gamma1;
            let support_check = if confirmed {
                SupportCheck::ObstructionConfirmed
            } else {
                SupportCheck::ObstructionRefuted {
                    in_gamma2,
                    in_gamma1,
                }
            };
            let summary = if confirmed {
                format!(
                    "accepted: monomial {witness} is achievable by f * T^2 but not by g * (basis)^2"
                )
            } else {
                format!(
                    "rejected: claimed witness {witness} (in Gamma_2: {in_gamma2}, in Gamma_1: {in_gamma1})"
                )
            };
            Ok(VerificationReport {
                accepted: confirmed,
                psd_block: None,
                nd_block: None,
                support_check: Some(support_check),
                summary,
            })
        }
    }
}

/// The exact block checks against an already-assembled instance. Shared by
/// [`verify_certificate`] and the rounding loop (which verifies every
/// candidate before it may be returned).
pub fn check_body_against_instance(
    body: &CertBody,
    inst: &SdpInstance,
) -> Result<VerificationReport, VerifyError> {
    let CertBody::Farkas { y_hat } = body else {
        return Err(VerifyError::FingerprintMismatch(
            "support obstructions are verified from the fingerprint, not an instance".into(),
        ));
    };
    let moment_block = inst.numerator_block(y_hat)?;
    let f_block = inst.f_localizing_block(y_hat)?;
    let psd = psd_check_exact(&moment_block)?;
    let nd = nd_check_exact(&f_block)?;
    let support_check = inst.g.as_ref().map(|_| SupportCheck::Covered);
    let accepted = psd.passed && nd.passed;
    let summary = if accepted {
        let side = if inst.g.is_some() {
            "g-localizing"
        } else {
            "moment"
        };
        format!(
            "accepted: {side} block ({}x{}) is PSD and the f-localizing block ({}x{}) is negative definite",
            psd.dim, psd.dim, nd.dim, nd.dim
        )
    } else {
        let mut parts = Vec::new();
        if !psd.passed {
            parts.push(format!(
                "PSD block failed: {}",
                psd.witness.as_ref().expect("witness on failure")
            ));
        }
        if !nd.passed {
            parts.push(format!(
                "ND block failed: {}",
                nd.witness.as_ref().expect("witness on failure")
            ));
        }
        format!("rejected: {}", parts.join("; "))
    };
    Ok(VerificationReport {
        accepted,
        psd_block: Some(psd),
        nd_block: Some(nd),
        support_check,
        summary,
    })
}

#[derive(Clone, Debug)]
pub struct SpotCheckReport {
    pub trials: u32,
    pub violations: Vec<String>,
}

impl SpotCheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Redundant confidence checks through the linear-form view: for random
/// `v` supported on `T` the form `L(f v^2)` must be strictly negative, and
/// for random `u` supported on the numerator basis `L(u^2)` (or `L(g u^2)`)
/// must be nonnegative. The caller is expected to have verified the
/// certificate already; violations here would indicate an internal
/// inconsistency and are reported rather than asserted.
pub fn spot_check_linear_form(
    cert: &Certificate,
    trials: u32,
    seed: u64,
) -> Result<SpotCheckReport, VerifyError> {
    let CertBody::Farkas { y_hat } = &cert.body else {
        return Err(VerifyError::NoMomentsToCheck);
    };
    let fp = &cert.fingerprint;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut violations = Vec::new();

    let den_terms: Vec<_> = fp.denominator_terms.iter().cloned().collect();
    let num_terms: Vec<_> = fp.numerator_basis.clone();

    for trial in 0..trials {
        let v = random_poly_on(&mut rng, fp.n, &den_terms);
        let fv2 = fp.f.mul(&v.mul(&v));
        let lv = y_hat.linear_form(&fv2)?;
        if !lv.is_negative() {
            violations.push(format!(
                "trial {trial}: L(f*v^2) = {lv} is not negative for v = {v}"
            ));
        }
        let u = random_poly_on(&mut rng, fp.n, &num_terms);
        let u2 = u.mul(&u);
        let qu2 = match &fp.g {
            None => u2,
            Some(g) => g.mul(&u2),
        };
        let lu = y_hat.linear_form(&qu2)?;
        if lu.is_negative() {
            let label = if fp.g.is_some() { "L(g*u^2)" } else { "L(u^2)" };
            violations.push(format!("trial {trial}: {label} = {lu} is negative for u = {u}"));
        }
    }
    Ok(SpotCheckReport { trials, violations })
}

/// Nonzero random polynomial supported on the given monomials, with
/// coefficients p/q, p in -9..=9, q in 1..=9.
fn random_poly_on(
    rng: &mut StdRng,
    n: usize,
    support: &[crate::poly::Exponent],
) -> Polynomial {
    loop {
        let mut p = Polynomial::zero(n);
        for e in support {
            let num = rng.gen_range(-9i64..=9);
            let den = rng.gen_range(1i64..=9);
            p.add_term(
                e.clone(),
                Rat::new(num.into(), den.into()),
            );
        }
        if !p.is_zero() {
            return p;
        }
    }
}
