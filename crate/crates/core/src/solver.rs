//! High-precision numerical solution of the Big-M modified dual SDP.
//!
//! The dual problem is: minimize `s` subject to
//! `M(y, s) = diag(B1(y), B2(y, s)) >= 0` and `Tr M(y, s) <= BigM`, where
//! `B1` is the moment (or `g`-localizing) block and `B2` the
//! `(-f)`-localizing block shifted by `s I`. The trace bound enters as a
//! third 1x1 slack block, so the whole feasible set is one linear matrix
//! inequality in the `m + 1` variables `x = (y, s)`.
//!
//! The method is a feasible-start potential-reduction/path-following scheme
//! on the log-det barrier of that LMI: damped Newton steps on
//! `t * s - log det F(x)` with the barrier parameter `t` increased once the
//! Newton decrement certifies centering, and step lengths held strictly
//! inside the cone by a fraction-to-boundary factor of 0.98. Every iterate is
//! strictly feasible by construction, so feasibility residuals are zero
//! throughout; the only stopping questions are whether the objective gets
//! below the caller's negativity margin (a certificate candidate) or provably
//! cannot (inconclusive under this BigM).
//!
//! Arithmetic is the configurable-precision float [`Mpf`]. On stalled
//! progress the working precision is raised in place (exactly — raising
//! precision never rounds), up to three times, before giving up.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::float::{bits_for_digits, Mpf};
use crate::mat::{ldlt_unpivoted, SymMat};
use crate::poly::Exponent;
use crate::scalar::Scalar;
use crate::sdp::{localizing_matrix, MissingMoment, MomentVector, SdpInstance};
use crate::Rat;

#[derive(Clone, Debug)]
pub struct SolverParams {
    /// Trace bound of the Big-M modification; must be positive.
    pub big_m: Rat,
    /// Working significand digits (decimal); at least 16.
    pub precision_digits: u32,
    pub max_iterations: u32,
    /// Stop successfully as soon as the objective drops below `-delta`.
    pub negativity_margin: Rat,
    /// Bound the reported residual must satisfy on success. The method is
    /// feasible by construction, so the residual is identically zero; the
    /// parameter is kept as part of the outcome contract.
    pub feasibility_tolerance: Rat,
}

impl SolverParams {
    /// Defaults scaled to the instance: `BigM = 10^6 * (1 + max |f
    /// coefficient|)`, 30 working digits, `delta = 10^-3`.
    pub fn for_instance(inst: &SdpInstance) -> Self {
        let big_m = Rat::from_integer(BigInt::from(1_000_000))
            * (Rat::one() + inst.f.max_abs_coeff());
        SolverParams {
            big_m,
            precision_digits: 30,
            max_iterations: 600,
            negativity_margin: Rat::new(BigInt::one(), BigInt::from(1000)),
            feasibility_tolerance: Rat::new(BigInt::one(), BigInt::from(1_000_000_000)),
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !self.big_m.is_positive() {
            return Err(SolveError::InvalidParams("big_m must be positive".into()));
        }
        if self.precision_digits < 16 {
            return Err(SolveError::InvalidParams(
                "precision_digits must be at least 16".into(),
            ));
        }
        if !self.negativity_margin.is_positive() {
            return Err(SolveError::InvalidParams(
                "negativity_margin must be positive".into(),
            ));
        }
        if !self.feasibility_tolerance.is_positive() {
            return Err(SolveError::InvalidParams(
                "feasibility_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// The dual objective went below `-delta` at a strictly feasible point.
    CertificateCandidateFound,
    /// Converged with the objective still above `-delta` under this BigM.
    /// This is *not* a proof that `f` has a representation.
    NoCertificateFound,
    /// Progress stalled even after raising the working precision.
    PrecisionExhausted,
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: u32,
    pub objective: f64,
    pub residual: f64,
    pub step_length: f64,
    /// Whether this step decreased the objective (as opposed to a pure
    /// centering move).
    pub descent: bool,
    pub digits: u32,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={:<4} s={:+.9e} residual={:.1e} step={:.4} digits={}{}",
            self.iteration,
            self.objective,
            self.residual,
            self.step_length,
            self.digits,
            if self.descent { "" } else { " (centering)" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Dual vector at termination, as the exact rational image of the float
    /// iterate (floats are dyadic rationals).
    pub y: MomentVector,
    pub s: Rat,
    pub iterations: Vec<IterationRecord>,
    pub digits_used: u32,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("iteration limit of {limit} reached (objective {objective:.3e})")]
    IterationLimit { limit: u32, objective: f64 },
    #[error(
        "Newton system solve failed at full precision (condition estimate {condition_estimate:.3e})"
    )]
    LinearSolveFailure { condition_estimate: f64 },
    #[error("could not confirm strict feasibility of the starting point: {0}")]
    NotStrictlyFeasible(String),
    #[error("instance is missing a moment entry: {0}")]
    Moment(#[from] MissingMoment),
}

/// Moment of the standard product Gaussian: `E[x^(2k)] = (2k-1)!!`, odd
/// moments vanish.
fn gaussian_moment(e: &Exponent) -> Rat {
    let mut acc = BigInt::one();
    for &k in e.entries() {
        if k % 2 == 1 {
            return Rat::zero();
        }
        let mut j = 1u32;
        while j < k {
            acc *= BigInt::from(j);
            j += 2;
        }
    }
    Rat::from_integer(acc)
}

/// A strictly feasible point of the dual: Gaussian moments for `y` and a
/// shift `s` exceeding the Gershgorin bound on the smallest eigenvalue of
/// the `(-f)`-localizing block. Both conditions are confirmed by exact
/// rational factorizations, which subsumes the numeric check at working
/// precision.
pub fn strictly_feasible_point(inst: &SdpInstance) -> Result<(MomentVector, Rat), SolveError> {
    let mut y = MomentVector::new(inst.n);
    for e in inst.constraint_monomials.iter() {
        y.insert(e.clone(), gaussian_moment(e));
    }
    let b1 = inst.numerator_block(&y)?;
    if ldlt_unpivoted(&b1).is_err() {
        return Err(SolveError::NotStrictlyFeasible(
            "the moment block of the Gaussian point is not positive definite \
             (in the rational case this indicates g is not PSD or is zero)"
                .into(),
        ));
    }
    let neg_f = inst.f.neg();
    let b2 = localizing_matrix(&neg_f, &y, &inst.denominator_basis)?;
    // s > -lambda_min(B2); Gershgorin gives lambda_min >= min_i (a_ii -
    // sum_{j != i} |a_ij|) exactly.
    let mut s_tilde = Rat::one();
    for i in 0..b2.dim() {
        let mut off = Rat::zero();
        for j in 0..b2.dim() {
            if j != i {
                off += b2.get(i, j).abs();
            }
        }
        let candidate = Rat::one() - (b2.get(i, i).clone() - off);
        if candidate > s_tilde {
            s_tilde = candidate;
        }
    }
    let mut shifted = b2.clone();
    for i in 0..shifted.dim() {
        let v = shifted.get(i, i).clone() + s_tilde.clone();
        shifted.set_sym(i, i, v);
    }
    if ldlt_unpivoted(&shifted).is_err() {
        return Err(SolveError::NotStrictlyFeasible(
            "localizing block plus Gershgorin shift failed the exact positivity check".into(),
        ));
    }
    Ok((y, s_tilde))
}

// ---------------------------------------------------------------------------
// Float-side instance data
// ---------------------------------------------------------------------------

/// One dual coordinate's constraint matrix, split by block. `raw` entries are
/// upper-triangle `(i, j, v)`; `weighted` entries carry `v` doubled on
/// off-diagonal positions so that `Tr(S A) = sum w * S[i][j]`.
struct FloatCons {
    g_raw: Vec<(usize, usize, Mpf)>,
    h_raw: Vec<(usize, usize, Mpf)>,
    g_weighted: Vec<(usize, usize, Mpf)>,
    h_weighted: Vec<(usize, usize, Mpf)>,
    trace: Mpf,
}

struct FloatInstance {
    k1: usize,
    k2: usize,
    /// Constraints for y_0 .. y_{m-1} and, last, for s.
    cons: Vec<FloatCons>,
    big_m: Mpf,
    bits: usize,
}

impl FloatInstance {
    fn build(inst: &SdpInstance, big_m: &Rat, bits: usize) -> Self {
        let two = Mpf::from_i64(2, bits);
        let mut cons: Vec<FloatCons> = Vec::with_capacity(inst.m() + 1);
        for idx in 0..inst.m() {
            let mut fc = FloatCons {
                g_raw: Vec::new(),
                h_raw: Vec::new(),
                g_weighted: Vec::new(),
                h_weighted: Vec::new(),
                trace: Mpf::zero(),
            };
            for (i, j, v) in &inst.g_mats[idx].entries {
                let fv = Mpf::from_rat(v, bits);
                if i == j {
                    fc.trace += &fv;
                    fc.g_weighted.push((*i, *j, fv.clone()));
                } else {
                    fc.g_weighted.push((*i, *j, &fv * &two));
                }
                fc.g_raw.push((*i, *j, fv));
            }
            for (i, j, v) in &inst.h_mats[idx].entries {
                let fv = Mpf::from_rat(v, bits);
                if i == j {
                    fc.trace += &fv;
                    fc.h_weighted.push((*i, *j, fv.clone()));
                } else {
                    fc.h_weighted.push((*i, *j, &fv * &two));
                }
                fc.h_raw.push((*i, *j, fv));
            }
            cons.push(fc);
        }
        // The s coordinate: identity on the denominator block.
        let one = Mpf::from_i64(1, bits);
        let mut s_cons = FloatCons {
            g_raw: Vec::new(),
            h_raw: Vec::new(),
            g_weighted: Vec::new(),
            h_weighted: Vec::new(),
            trace: Mpf::from_i64(inst.k2() as i64, bits),
        };
        for i in 0..inst.k2() {
            s_cons.h_raw.push((i, i, one.clone()));
            s_cons.h_weighted.push((i, i, one.clone()));
        }
        cons.push(s_cons);
        FloatInstance {
            k1: inst.k1(),
            k2: inst.k2(),
            cons,
            big_m: Mpf::from_rat(big_m, bits),
            bits,
        }
    }

    fn nvars(&self) -> usize {
        self.cons.len()
    }

    /// Barrier degree of the full LMI (matrix blocks plus trace slack).
    fn nu(&self) -> usize {
        self.k1 + self.k2 + 1
    }

    fn blocks(&self, x: &[Mpf]) -> (SymMat<Mpf>, SymMat<Mpf>, Mpf) {
        let mut b1 = SymMat::zeros(self.k1);
        let mut b2 = SymMat::zeros(self.k2);
        let mut used = Mpf::zero();
        for (xi, fc) in x.iter().zip(&self.cons) {
            if xi.is_zero() {
                continue;
            }
            for (i, j, v) in &fc.g_raw {
                b1.accumulate_sym(*i, *j, &(v * xi));
            }
            for (i, j, v) in &fc.h_raw {
                b2.accumulate_sym(*i, *j, &(v * xi));
            }
            used += &(&fc.trace * xi);
        }
        let b3 = &self.big_m - &used;
        (b1, b2, b3)
    }
}

fn trace_dot(s: &SymMat<Mpf>, weighted: &[(usize, usize, Mpf)]) -> Mpf {
    let mut acc = Mpf::zero();
    for (i, j, w) in weighted {
        acc += &(w * s.get(*i, *j));
    }
    acc
}

/// `Tr(S A S B)` from weighted upper-triangle entry lists:
/// `1/2 * sum_{(a,b) in A} sum_{(c,d) in B} w_A w_B (S[b][c] S[a][d] +
/// S[b][d] S[a][c])`.
fn pair_term(
    s: &SymMat<Mpf>,
    a_entries: &[(usize, usize, Mpf)],
    b_entries: &[(usize, usize, Mpf)],
    half: &Mpf,
) -> Mpf {
    let mut acc = Mpf::zero();
    for (a, b, wa) in a_entries {
        for (c, d, wb) in b_entries {
            let mut term = s.get(*b, *c) * s.get(*a, *d);
            term += &(s.get(*b, *d) * s.get(*a, *c));
            term *= wa;
            term *= wb;
            acc += &term;
        }
    }
    acc * half.clone()
}

enum IpmExit {
    Found,
    Converged,
    Stall { hard_linear: bool, condition: f64 },
}

struct IpmState {
    x: Vec<Mpf>,
    t: Mpf,
    iter: u32,
}

/// Solve the Big-M dual for this instance. See the module docs for the
/// method; outcomes:
///
/// * `CertificateCandidateFound`: the returned `(y, s)` is strictly feasible
///   with `s < -negativity_margin` — ready for rounding.
/// * `NoCertificateFound`: converged with `s >= -negativity_margin`;
///   inconclusive (the margin or BigM may simply have been too tight).
/// * `PrecisionExhausted`: stalled after all precision escalations.
pub fn solve_big_m(inst: &SdpInstance, params: &SolverParams) -> Result<SolveOutcome, SolveError> {
    params.validate()?;
    let (y0, s0) = strictly_feasible_point(inst)?;

    // Exact trace of the starting point; scale it into the BigM ball if
    // needed (the constraint map is linear, so scaling preserves strict
    // feasibility).
    let mut trace0 = s0.clone() * Rat::from_integer(BigInt::from(inst.k2() as i64));
    let b1 = inst.numerator_block(&y0)?;
    let negf = inst.f.neg();
    let b2 = localizing_matrix(&negf, &y0, &inst.denominator_basis)?;
    for i in 0..b1.dim() {
        trace0 += b1.get(i, i);
    }
    for i in 0..b2.dim() {
        trace0 += b2.get(i, i);
    }
    let scale = if trace0 >= params.big_m {
        params.big_m.clone() / (Rat::from_integer(BigInt::from(2)) * trace0)
    } else {
        Rat::one()
    };

    let mut digits = params.precision_digits;
    let mut escalations = 0u32;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut carried: Option<(Vec<Rat>, Rat)> = None; // (x, t) across escalations

    loop {
        let bits = bits_for_digits(digits);
        let fi = FloatInstance::build(inst, &params.big_m, bits);
        let mut state = match &carried {
            Some((x, t)) => IpmState {
                x: x.iter().map(|v| Mpf::from_rat(v, bits)).collect(),
                t: Mpf::from_rat(t, bits),
                iter: records.len() as u32,
            },
            None => {
                let mut x: Vec<Mpf> = inst
                    .constraint_monomials
                    .iter()
                    .map(|e| {
                        let v = y0.get(e).expect("assigned above").clone() * scale.clone();
                        Mpf::from_rat(&v, bits)
                    })
                    .collect();
                let s_init = s0.clone() * scale.clone();
                x.push(Mpf::from_rat(&s_init, bits));
                let t0 = Rat::one() / (Rat::one() + s_init.abs());
                IpmState {
                    x,
                    t: Mpf::from_rat(&t0, bits),
                    iter: 0,
                }
            }
        };

        let exit = run_ipm(&fi, &mut state, params, digits, &mut records)?;
        let finish = |status: SolveStatus, state: &IpmState, records: &[IterationRecord]| {
            let mut y = MomentVector::new(inst.n);
            for (i, e) in inst.constraint_monomials.iter().enumerate() {
                y.insert(e.clone(), state.x[i].to_rat());
            }
            let s = state.x[inst.m()].to_rat();
            Ok(SolveOutcome {
                status,
                y,
                s,
                iterations: records.to_vec(),
                digits_used: digits,
            })
        };
        match exit {
            IpmExit::Found => {
                return finish(SolveStatus::CertificateCandidateFound, &state, &records)
            }
            IpmExit::Converged => return finish(SolveStatus::NoCertificateFound, &state, &records),
            IpmExit::Stall {
                hard_linear,
                condition,
            } => {
                if escalations < 3 {
                    escalations += 1;
                    digits += digits / 2;
                    carried = Some((state.x.iter().map(Mpf::to_rat).collect(), state.t.to_rat()));
                    continue;
                }
                if hard_linear {
                    return Err(SolveError::LinearSolveFailure {
                        condition_estimate: condition,
                    });
                }
                return finish(SolveStatus::PrecisionExhausted, &state, &records);
            }
        }
    }
}

fn run_ipm(
    fi: &FloatInstance,
    state: &mut IpmState,
    params: &SolverParams,
    digits: u32,
    records: &mut Vec<IterationRecord>,
) -> Result<IpmExit, SolveError> {
    let bits = fi.bits;
    let nvars = fi.nvars();
    let s_index = nvars - 1;
    let half = Mpf::from_rat(&Rat::new(BigInt::one(), BigInt::from(2)), bits);
    let quarter_sq = Mpf::from_rat(&Rat::new(BigInt::one(), BigInt::from(16)), bits);
    let boundary_frac = Mpf::from_rat(&Rat::new(BigInt::from(98), BigInt::from(100)), bits);
    let delta = Mpf::from_rat(&params.negativity_margin, bits);
    // Declare convergence once the duality gap nu/t is below both delta/10
    // and a precision-scaled floor. The floor matters when the optimum is a
    // tiny negative number (ill-posed inputs): stopping at delta/10 alone
    // would hide its sign behind the gap.
    let gap_floor = Rat::new(BigInt::one(), BigInt::from(10).pow(digits / 3));
    let gap_target = Mpf::from_rat(
        &(params.negativity_margin.clone() / Rat::from_integer(BigInt::from(10)))
            .min(gap_floor),
        bits,
    );
    let theta = Mpf::from_i64(8, bits);
    let nu = Mpf::from_i64(fi.nu() as i64, bits);
    let alpha_floor = Mpf::from_rat(&Rat::new(BigInt::one(), BigInt::from(2).pow(45)), bits);
    let one = Mpf::from_i64(1, bits);
    // Relative ridge added to a singular Newton system, per unit of trace.
    let ridge_unit = Mpf::from_rat(
        &Rat::new(
            BigInt::one(),
            BigInt::from(2).pow((bits / 3).max(20) as u32) * BigInt::from(nvars as i64),
        ),
        bits,
    );

    let feasible = |x: &[Mpf]| -> bool {
        let (b1, b2, b3) = fi.blocks(x);
        b3.is_pos() && ldlt_unpivoted(&b1).is_ok() && ldlt_unpivoted(&b2).is_ok()
    };

    let mut best_s = state.x[s_index].clone();
    let mut last_progress_iter = state.iter;

    loop {
        if state.iter >= params.max_iterations {
            return Err(SolveError::IterationLimit {
                limit: params.max_iterations,
                objective: state.x[s_index].to_f64(),
            });
        }

        let (b1, b2, b3) = fi.blocks(&state.x);
        if !b3.is_pos() {
            return Ok(IpmExit::Stall {
                hard_linear: false,
                condition: f64::NAN,
            });
        }
        let (f1, f2) = match (ldlt_unpivoted(&b1), ldlt_unpivoted(&b2)) {
            (Ok(f1), Ok(f2)) => (f1, f2),
            _ => {
                return Ok(IpmExit::Stall {
                    hard_linear: false,
                    condition: f64::NAN,
                })
            }
        };
        let s1 = f1.inverse();
        let s2 = f2.inverse();
        let s3 = &one / &b3;

        // Gradient of t*s - log det F(x).
        let mut grad: Vec<Mpf> = Vec::with_capacity(nvars);
        for (i, fc) in fi.cons.iter().enumerate() {
            let mut gi = -trace_dot(&s1, &fc.g_weighted);
            gi -= &trace_dot(&s2, &fc.h_weighted);
            gi += &(&s3 * &fc.trace);
            if i == s_index {
                gi += &state.t;
            }
            grad.push(gi);
        }

        // Hessian: Tr(S1 Gi S1 Gj) + Tr(S2 Hi S2 Hj) + s3^2 tr_i tr_j.
        let s3_sq = &s3 * &s3;
        let mut hess = SymMat::zeros(nvars);
        for i in 0..nvars {
            for j in i..nvars {
                let mut hij = pair_term(&s1, &fi.cons[i].g_weighted, &fi.cons[j].g_weighted, &half);
                hij += &pair_term(&s2, &fi.cons[i].h_weighted, &fi.cons[j].h_weighted, &half);
                let mut t3 = &fi.cons[i].trace * &fi.cons[j].trace;
                t3 *= &s3_sq;
                hij += &t3;
                hess.set_sym(i, j, hij);
            }
        }

        // Dependent constraint matrices (possible in the rational case, where
        // different monomials can induce the same matrix directions) make the
        // Hessian singular; the null directions change neither the matrices
        // nor the objective, so a proximal ridge picks a well-defined step.
        let hf = match ldlt_unpivoted(&hess) {
            Ok(hf) => hf,
            Err(_) => {
                let mut ridge = hess.trace();
                ridge *= &ridge_unit;
                let mut attempt = None;
                for _ in 0..10 {
                    for i in 0..nvars {
                        let v = hess.get(i, i) + &ridge;
                        hess.set_sym(i, i, v);
                    }
                    if let Ok(hf) = ldlt_unpivoted(&hess) {
                        attempt = Some(hf);
                        break;
                    }
                    ridge *= &Mpf::from_i64(256, bits);
                }
                match attempt {
                    Some(hf) => hf,
                    None => {
                        return Ok(IpmExit::Stall {
                            hard_linear: true,
                            condition: condition_estimate(&hess),
                        });
                    }
                }
            }
        };
        let rhs: Vec<Mpf> = grad.iter().map(|g| -g.clone()).collect();
        let delta_x = hf.solve(&rhs);

        // Newton decrement^2 = -grad . delta
        let mut lambda_sq = Mpf::zero();
        for (g, d) in grad.iter().zip(&delta_x) {
            lambda_sq -= &(g * d);
        }
        if lambda_sq.is_neg() {
            return Ok(IpmExit::Stall {
                hard_linear: false,
                condition: condition_estimate(&hess),
            });
        }

        let centered = lambda_sq <= quarter_sq;

        // Damped Newton step, shortened further if it would leave the cone.
        let mut alpha = if centered {
            one.clone()
        } else {
            let lambda = lambda_sq.sqrt();
            &one / &(&one + &lambda)
        };
        let trial = |alpha: &Mpf, x: &[Mpf]| -> Vec<Mpf> {
            x.iter()
                .zip(&delta_x)
                .map(|(xi, di)| xi + &(di * alpha))
                .collect()
        };
        let mut candidate = trial(&alpha, &state.x);
        let mut backtracked = false;
        while !feasible(&candidate) {
            backtracked = true;
            alpha *= &half;
            if alpha < alpha_floor {
                return Ok(IpmExit::Stall {
                    hard_linear: false,
                    condition: f64::NAN,
                });
            }
            candidate = trial(&alpha, &state.x);
        }
        if backtracked {
            // Fraction-to-boundary: stay strictly inside the cone.
            alpha *= &boundary_frac;
            candidate = trial(&alpha, &state.x);
            if !feasible(&candidate) {
                return Ok(IpmExit::Stall {
                    hard_linear: false,
                    condition: f64::NAN,
                });
            }
        }

        let prev_s = state.x[s_index].clone();
        state.x = candidate;
        state.iter += 1;
        let s_now = state.x[s_index].clone();
        let descent = s_now < prev_s;
        records.push(IterationRecord {
            iteration: state.iter,
            objective: s_now.to_f64(),
            residual: 0.0,
            step_length: alpha.to_f64(),
            descent,
            digits,
        });

        if s_now < -delta.clone() {
            return Ok(IpmExit::Found);
        }
        if s_now < best_s {
            best_s = s_now.clone();
            last_progress_iter = state.iter;
        }

        if centered {
            let gap = &nu / &state.t;
            if gap < gap_target {
                return Ok(IpmExit::Converged);
            }
            state.t *= &theta;
            last_progress_iter = state.iter;
        }

        if state.iter - last_progress_iter > 60 {
            return Ok(IpmExit::Stall {
                hard_linear: false,
                condition: f64::NAN,
            });
        }
    }
}

fn condition_estimate(h: &SymMat<Mpf>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..h.dim() {
        let v = h.get(i, i).to_f64().abs();
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Driver with the escalation policies: on an inconclusive outcome whose
/// converged objective is still strictly negative, first retry with the
/// margin tightened to half that objective (the requested margin was too
/// coarse for the problem's scale), then double BigM up to `max_doublings`
/// times. Escalation stops early when the converged objective is
/// nonnegative — growing the trace bound only rescales the feasible set, so
/// it cannot create a negative objective in that case.
pub fn solve_with_escalation(
    inst: &SdpInstance,
    params: &SolverParams,
    max_doublings: u32,
) -> Result<SolveOutcome, SolveError> {
    let mut outcome = solve_big_m(inst, params)?;
    if outcome.status != SolveStatus::NoCertificateFound {
        return Ok(outcome);
    }

    // Converged objectives are resolved down to the gap floor of the run;
    // anything within a decade of it is indistinguishable from zero.
    let noise_floor = Rat::new(
        BigInt::one(),
        BigInt::from(10).pow((outcome.digits_used / 3).saturating_sub(1)),
    );
    if outcome.s < -noise_floor.clone() {
        let mut tighter = params.clone();
        tighter.negativity_margin = outcome.s.abs() / Rat::from_integer(BigInt::from(2));
        let retry = solve_big_m(inst, &tighter)?;
        if retry.status == SolveStatus::CertificateCandidateFound {
            return Ok(retry);
        }
        outcome = retry;
    }

    let mut doubled = params.clone();
    for _ in 0..max_doublings {
        if outcome.status != SolveStatus::NoCertificateFound || outcome.s >= -noise_floor.clone() {
            break;
        }
        doubled.big_m = doubled.big_m.clone() * Rat::from_integer(BigInt::from(2));
        outcome = solve_big_m(inst, &doubled)?;
    }
    Ok(outcome)
}
