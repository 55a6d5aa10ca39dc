//! Conversion of the numeric dual point into an exact rational certificate.
//!
//! Two routes, tried in order:
//!
//! 1. *Direct rounding*: when the solver ran at high precision its iterate is
//!    already a sharp approximation of a certificate, so simply rounding each
//!    entry to a bounded-denominator rational often verifies as-is.
//! 2. *Blend and round*: move the iterate a rational step `t` toward the
//!    strictly feasible Gaussian point (which restores a definiteness
//!    margin), choosing the largest `t in {1/2^k}` that keeps the blended
//!    objective below half the solver's, then round within a radius smaller
//!    than half that margin.
//!
//! Exact verification is the acceptance test of every rounding attempt:
//! nothing unverified ever leaves this module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{Exponent, Polynomial, TermSet};
use crate::sdp::{MomentVector, SdpInstance};
use crate::verify::{check_body_against_instance, VerifyError};
use crate::Rat;

/// Everything needed to rebuild the SDP instance a certificate refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub n: usize,
    pub e: u32,
    pub f: Polynomial,
    pub g: Option<Polynomial>,
    pub denominator_terms: TermSet,
    /// Whether the numerator basis is the Newton-polytope reduction (`true`)
    /// or all terms of degree `<= d`.
    pub sparse_basis: bool,
    /// The numerator basis monomials, stored for inspection; verification
    /// recomputes and cross-checks them.
    pub numerator_basis: Vec<Exponent>,
    /// Monomial order tag; always "grlex".
    pub order: String,
}

impl Fingerprint {
    pub fn of_instance(inst: &SdpInstance) -> Self {
        Fingerprint {
            n: inst.n,
            e: inst.e,
            f: inst.f.clone(),
            g: inst.g.clone(),
            denominator_terms: inst.denominator_terms.clone(),
            sparse_basis: inst.sparse_basis,
            numerator_basis: inst.numerator_basis.iter().cloned().collect(),
            order: "grlex".to_string(),
        }
    }

    /// Fingerprint for a support-obstruction certificate of `f/g`; the
    /// numerator basis is the dense one the instance would have used.
    pub fn for_rational_obstruction(f: &Polynomial, g: &Polynomial, t: &TermSet) -> Self {
        let e = t.max_degree().unwrap_or(0);
        let d = crate::sdp::rational_numerator_degree(f, g, e);
        Fingerprint {
            n: f.n(),
            e,
            f: f.clone(),
            g: Some(g.clone()),
            denominator_terms: t.clone(),
            sparse_basis: false,
            numerator_basis: crate::poly::terms_up_to(f.n(), d).iter().cloned().collect(),
            order: "grlex".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertBody {
    /// A Farkas moment vector: moment block PSD, f-localizing block ND.
    Farkas { y_hat: MomentVector },
    /// A monomial in `Gamma_2 \ Gamma_1` (rational-function case only).
    SupportObstruction { witness: Exponent },
}

/// Where the certificate came from; carried only for reproducibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub solver_digits: u32,
    pub big_m: Rat,
    pub seed: u64,
    pub blend_t: Rat,
    pub denominator_bound: BigUint,
    pub created_unix: Option<u64>,
}

impl Provenance {
    pub fn new(solver_digits: u32, big_m: Rat, seed: u64) -> Self {
        Provenance {
            solver_digits,
            big_m,
            seed,
            blend_t: Rat::zero(),
            denominator_bound: BigUint::zero(),
            created_unix: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub fingerprint: Fingerprint,
    pub body: CertBody,
    pub provenance: Provenance,
}

/// Best rational approximation with bounded denominator, by continued
/// fractions: the closest rational to `v` among all with denominator at most
/// `max_denominator` (the final candidate is the last convergent or its best
/// semiconvergent; the two are compared exactly).
pub fn rationalize_value(v: &Rat, max_denominator: &BigUint) -> Rat {
    let bound = BigInt::from(max_denominator.clone()).max(BigInt::one());
    if *v.denom() <= bound {
        return v.clone();
    }
    let mut p = v.numer().clone();
    let mut q = v.denom().clone();
    // Convergents h/k; (h_prev/k_prev) is one step behind.
    let mut h_prev = BigInt::one();
    let mut k_prev = BigInt::zero();
    let a0 = p.div_floor(&q);
    let mut h_cur = a0.clone();
    let mut k_cur = BigInt::one();
    let rem = &p - &a0 * &q;
    p = q;
    q = rem;

    let mut truncated = false;
    while !q.is_zero() {
        let a = p.div_floor(&q);
        let k_next = &a * &k_cur + &k_prev;
        if k_next > bound {
            truncated = true;
            break;
        }
        let h_next = &a * &h_cur + &h_prev;
        let rem = &p - &a * &q;
        p = q;
        q = rem;
        h_prev = std::mem::replace(&mut h_cur, h_next);
        k_prev = std::mem::replace(&mut k_cur, k_next);
    }

    let convergent = Rat::new(h_cur.clone(), k_cur.clone());
    if !truncated {
        // The continued fraction terminated within the bound; exact value.
        return convergent;
    }
    // Semiconvergent with the largest admissible partial step.
    let t = (&bound - &k_prev).div_floor(&k_cur);
    if t.is_positive() {
        let semi = Rat::new(&h_prev + &t * &h_cur, &k_prev + &t * &k_cur);
        let err_semi = (v - &semi).abs();
        let err_conv = (v - &convergent).abs();
        if err_semi < err_conv {
            return semi;
        }
    }
    convergent
}

#[derive(Clone, Debug, Default)]
pub struct RoundPolicy {
    /// Denominator bounds to escalate through; defaults to
    /// `10^3, 10^6, ..., 10^24`.
    pub denominator_bounds: Vec<BigUint>,
    /// How far to halve the blend parameter before giving up (`t = 1/2^k`).
    pub max_blend_halvings: u32,
}

impl RoundPolicy {
    pub fn standard() -> Self {
        let bounds = (1..=8u32).map(|k| BigUint::from(10u32).pow(3 * k)).collect();
        RoundPolicy {
            denominator_bounds: bounds,
            max_blend_halvings: 16,
        }
    }
}

#[derive(Debug, Error)]
pub enum RoundError {
    #[error("the numeric objective is not negative; nothing to round")]
    NotNegative,
    #[error("rounding failed at every denominator bound; tightest failure: {tightest_failure}")]
    AllRoundingFailed { tightest_failure: String },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Blend toward the strictly feasible point and round to an exact rational
/// certificate, using exact verification as the accept/reject oracle for
/// every attempt. Direct rounding (no blend) is attempted first at each
/// denominator bound.
pub fn blend_and_round(
    numeric: (&MomentVector, &Rat),
    strict: (&MomentVector, &Rat),
    instance: &SdpInstance,
    policy: &RoundPolicy,
    provenance: &Provenance,
) -> Result<Certificate, RoundError> {
    let (y_num, s_num) = numeric;
    let (y_strict, s_strict) = strict;
    if !s_num.is_negative() {
        return Err(RoundError::NotNegative);
    }
    let policy_bounds = if policy.denominator_bounds.is_empty() {
        RoundPolicy::standard().denominator_bounds
    } else {
        policy.denominator_bounds.clone()
    };
    let fingerprint = Fingerprint::of_instance(instance);
    let mut tightest_failure = String::from("no attempt was made");

    // Direct rounding of the raw iterate.
    for bound in &policy_bounds {
        let y_hat = round_vector(y_num, instance, bound);
        let body = CertBody::Farkas { y_hat };
        let report = check_body_against_instance(&body, instance)?;
        if report.accepted {
            let mut prov = provenance.clone();
            prov.blend_t = Rat::zero();
            prov.denominator_bound = bound.clone();
            return Ok(Certificate {
                fingerprint,
                body,
                provenance: prov,
            });
        }
        tightest_failure = format!("direct rounding at bound {bound}: {}", report.summary);
    }

    // Blend: largest t = 1/2^k with blended objective below s/2 and exact
    // strict feasibility of the blended matrices.
    let mut blended: Option<(MomentVector, Rat, Rat)> = None;
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    for k in 1..=policy.max_blend_halvings {
        let t = Rat::new(BigInt::one(), BigInt::from(2).pow(k));
        let s_bar = (Rat::one() - t.clone()) * s_num + t.clone() * s_strict;
        if s_bar >= s_num * &half {
            continue; // t too large: lost more than half the negativity
        }
        let mut y_bar = MomentVector::new(instance.n);
        for e in instance.constraint_monomials.iter() {
            let a = y_num.get(e).map_err(VerifyError::from)?;
            let b = y_strict.get(e).map_err(VerifyError::from)?;
            y_bar.insert(e.clone(), (Rat::one() - t.clone()) * a + t.clone() * b);
        }
        if blended_point_strictly_feasible(&y_bar, &s_bar, instance)? {
            blended = Some((y_bar, s_bar, t));
            break;
        }
    }

    if let Some((y_bar, s_bar, t)) = blended {
        debug_assert!(s_bar.is_negative());
        // Rounding radius below half the blended margin.
        let epsilon = s_bar.abs() * Rat::new(BigInt::one(), BigInt::from(4));
        for bound in &policy_bounds {
            let y_hat = round_vector(&y_bar, instance, bound);
            let mut max_err = Rat::zero();
            for e in instance.constraint_monomials.iter() {
                let err = (y_hat.get(e).map_err(VerifyError::from)?
                    - y_bar.get(e).map_err(VerifyError::from)?)
                .abs();
                if err > max_err {
                    max_err = err;
                }
            }
            if max_err >= epsilon {
                tightest_failure =
                    format!("blend t={t}: rounding at bound {bound} exceeds the radius |s|/4");
                continue;
            }
            let body = CertBody::Farkas { y_hat };
            let report = check_body_against_instance(&body, instance)?;
            if report.accepted {
                let mut prov = provenance.clone();
                prov.blend_t = t;
                prov.denominator_bound = bound.clone();
                return Ok(Certificate {
                    fingerprint,
                    body,
                    provenance: prov,
                });
            }
            tightest_failure = format!("blend t={t}, bound {bound}: {}", report.summary);
        }
    }

    Err(RoundError::AllRoundingFailed { tightest_failure })
}

fn round_vector(y: &MomentVector, instance: &SdpInstance, bound: &BigUint) -> MomentVector {
    let mut out = MomentVector::new(instance.n);
    for e in instance.constraint_monomials.iter() {
        if let Ok(v) = y.get(e) {
            out.insert(e.clone(), rationalize_value(v, bound));
        }
    }
    out
}

fn blended_point_strictly_feasible(
    y: &MomentVector,
    s: &Rat,
    instance: &SdpInstance,
) -> Result<bool, VerifyError> {
    use crate::mat::ldlt_unpivoted;
    let b1 = instance.numerator_block(y)?;
    if ldlt_unpivoted(&b1).is_err() {
        return Ok(false);
    }
    let negf = instance.f.neg();
    let mut b2 = crate::sdp::localizing_matrix(&negf, y, &instance.denominator_basis)?;
    for i in 0..b2.dim() {
        let v = b2.get(i, i).clone() + s.clone();
        b2.set_sym(i, i, v);
    }
    Ok(ldlt_unpivoted(&b2).is_ok())
}
