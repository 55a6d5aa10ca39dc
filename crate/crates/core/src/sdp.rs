//! Assembly of the block SDP whose infeasibility certifies that `f` (or
//! `f/g`) has no sum-of-squares fraction with denominator support in `T`.
//!
//! The primal asks for `W1, W2 >= 0` with
//! `m_B^T W1 m_B = f * m_T^T W2 m_T` (numerator basis `B`, denominator term
//! vector `m_T`) plus the normalization `Tr(W2) = 1` that rules out the zero
//! solution. Matching coefficients of every achievable product monomial
//! `alpha` gives one linear constraint `G[alpha] . W1 + H[alpha] . W2 = 0`.
//! The dual variable `y` lives on those product monomials; its moment matrix
//! (over `B`) and the `(-f)`-localizing matrix (over `T`) are exactly
//! `sum_alpha y_alpha G[alpha]` and `sum_alpha y_alpha H[alpha]`.
//!
//! In the rational-function case `g` multiplies the numerator side, and the
//! achievable-support inclusion `Gamma_1 ⊇ Gamma_2` must hold first — a
//! violating monomial is already a complete non-membership certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::mat::SymMat;
use crate::newton::{restricted_basis, NewtonError};
use crate::poly::{terms_up_to, Exponent, Polynomial, TermSet};
use crate::Rat;

/// Graded-lex sorted list of exponents with positional lookup; the row and
/// column labels of one matrix block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialIndex {
    exps: Vec<Exponent>,
    pos: BTreeMap<Exponent, usize>,
}

impl MonomialIndex {
    pub fn from_set(set: &TermSet) -> Self {
        let exps: Vec<Exponent> = set.iter().cloned().collect();
        let pos = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        MonomialIndex { exps, pos }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, i: usize) -> &Exponent {
        &self.exps[i]
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.pos.get(e).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Exponent> {
        self.exps.iter()
    }
}

/// Sparse symmetric matrix stored as upper-triangle entries `(i <= j, value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMat {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Rat)>,
}

impl SparseSymMat {
    pub fn new(dim: usize) -> Self {
        SparseSymMat {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: Rat) {
        debug_assert!(i <= j && j < self.dim);
        if !v.is_zero() {
            self.entries.push((i, j, v));
        }
    }

    /// Frobenius inner product with a dense symmetric matrix.
    pub fn dot(&self, w: &SymMat<Rat>) -> Rat {
        let mut acc = Rat::zero();
        for (i, j, v) in &self.entries {
            let term = v * w.get(*i, *j);
            if i == j {
                acc += term;
            } else {
                acc += &term + &term;
            }
        }
        acc
    }

    pub fn to_dense(&self) -> SymMat<Rat> {
        let mut m = SymMat::zeros(self.dim);
        for (i, j, v) in &self.entries {
            m.accumulate_sym(*i, *j, v);
        }
        m
    }
}

/// Moment vector: sparse map from exponents to exact rationals. A missing
/// entry means "not assigned" and reading it is an error, never an implicit
/// zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentVector {
    n: usize,
    entries: BTreeMap<Exponent, Rat>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("moment entry for {monomial} is not assigned")]
pub struct MissingMoment {
    pub monomial: Exponent,
}

impl MomentVector {
    pub fn new(n: usize) -> Self {
        MomentVector {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, e: Exponent, v: Rat) {
        assert_eq!(e.len(), self.n, "exponent length mismatch");
        self.entries.insert(e, v);
    }

    pub fn get(&self, e: &Exponent) -> Result<&Rat, MissingMoment> {
        self.entries.get(e).ok_or_else(|| MissingMoment {
            monomial: e.clone(),
        })
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.entries.contains_key(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &Rat)> {
        self.entries.iter()
    }

    /// The linear form `L_y(p) = sum_alpha y_alpha p_alpha`; every monomial
    /// of `p` must have an assigned moment.
    pub fn linear_form(&self, p: &Polynomial) -> Result<Rat, MissingMoment> {
        let mut acc = Rat::zero();
        for (e, c) in p.iter() {
            acc += self.get(e)? * c;
        }
        Ok(acc)
    }
}

/// Witness that the rational-function support condition fails: a product
/// monomial achievable on the `f` side but not on the `g` side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportObstruction {
    pub witness: Exponent,
}

impl fmt::Display for SupportObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "support obstruction: monomial {} is achievable by f * (denominator squares) but not by the numerator side",
            self.witness
        )
    }
}

/// Either a full SDP instance or an immediate support obstruction.
#[derive(Clone, Debug)]
pub enum RationalAssembly {
    Instance(SdpInstance),
    Obstruction(SupportObstruction),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssembleError {
    #[error("the zero polynomial cannot be certified")]
    ZeroPolynomial,
    #[error("the denominator polynomial g must be nonzero")]
    ZeroDenominatorPolynomial,
    #[error("the denominator term set must be nonempty")]
    EmptyTermSet,
    #[error("variable count mismatch: f has {f}, other input has {other}")]
    VariableMismatch { f: usize, other: usize },
    #[error("newton reduction failed: {0}")]
    Newton(#[from] NewtonError),
}

/// The assembled block SDP. Constraint matrices are indexed by
/// `constraint_monomials`; the numerator block has side `k1 = |numerator
/// basis|`, the denominator block side `k2 = |T|`, and the trace
/// normalization row is the identity on the denominator block.
#[derive(Clone, Debug)]
pub struct SdpInstance {
    pub n: usize,
    pub e: u32,
    pub f: Polynomial,
    pub g: Option<Polynomial>,
    pub denominator_terms: TermSet,
    pub sparse_basis: bool,
    pub numerator_basis: MonomialIndex,
    pub denominator_basis: MonomialIndex,
    pub constraint_monomials: MonomialIndex,
    /// Per constraint monomial: numerator-block matrix `G[alpha]`.
    pub g_mats: Vec<SparseSymMat>,
    /// Per constraint monomial: denominator-block matrix `H[alpha]`.
    pub h_mats: Vec<SparseSymMat>,
    /// Identity on the denominator block; pairs with the primal right-hand
    /// side 1 (the `Tr(W2) = 1` normalization).
    pub trace_row: SparseSymMat,
}

impl SdpInstance {
    pub fn k1(&self) -> usize {
        self.numerator_basis.len()
    }

    pub fn k2(&self) -> usize {
        self.denominator_basis.len()
    }

    /// Number of constraint monomials (the dual dimension minus one).
    pub fn m(&self) -> usize {
        self.constraint_monomials.len()
    }

    /// Moment matrix of the numerator block for a dual vector `y`:
    /// `sum_alpha y_alpha G[alpha]`.
    pub fn numerator_block(&self, y: &MomentVector) -> Result<SymMat<Rat>, MissingMoment> {
        match &self.g {
            None => moment_matrix(y, &self.numerator_basis),
            Some(g) => localizing_matrix(g, y, &self.numerator_basis),
        }
    }

    /// `f`-localizing matrix of the denominator block for a dual vector `y`.
    pub fn f_localizing_block(&self, y: &MomentVector) -> Result<SymMat<Rat>, MissingMoment> {
        localizing_matrix(&self.f, y, &self.denominator_basis)
    }
}

/// Assemble the polynomial-case instance. `use_sparsity` selects the
/// Newton-polytope numerator basis instead of all terms of degree `<= d`.
pub fn assemble_polynomial_instance(
    f: &Polynomial,
    t: &TermSet,
    use_sparsity: bool,
) -> Result<SdpInstance, AssembleError> {
    if f.is_zero() {
        return Err(AssembleError::ZeroPolynomial);
    }
    if t.is_empty() {
        return Err(AssembleError::EmptyTermSet);
    }
    if f.n() != t.n() {
        return Err(AssembleError::VariableMismatch {
            f: f.n(),
            other: t.n(),
        });
    }
    let n = f.n();
    let e = t.max_degree().unwrap_or(0);
    let d = e + (f.degree() as u32).div_ceil(2);
    let basis_set = if use_sparsity {
        restricted_basis(f, t)?
    } else {
        terms_up_to(n, d)
    };
    Ok(assemble_from_parts(f, None, t, basis_set, use_sparsity, e))
}

/// Assemble the rational-function case `f/g`. That `g` is positive
/// semidefinite is the caller's responsibility and is not checked. When the
/// achievable support of `f * (T squares)` is not covered by the `g` side the
/// result is a [`SupportObstruction`], which by itself certifies
/// non-membership.
pub fn assemble_rational_instance(
    f: &Polynomial,
    g: &Polynomial,
    t: &TermSet,
) -> Result<RationalAssembly, AssembleError> {
    if f.is_zero() {
        return Err(AssembleError::ZeroPolynomial);
    }
    if g.is_zero() {
        return Err(AssembleError::ZeroDenominatorPolynomial);
    }
    if f.n() != g.n() {
        return Err(AssembleError::VariableMismatch {
            f: f.n(),
            other: g.n(),
        });
    }
    if t.is_empty() {
        return Err(AssembleError::EmptyTermSet);
    }
    if f.n() != t.n() {
        return Err(AssembleError::VariableMismatch {
            f: f.n(),
            other: t.n(),
        });
    }
    let n = f.n();
    let e = t.max_degree().unwrap_or(0);
    let d = rational_numerator_degree(f, g, e);
    let basis_set = terms_up_to(n, d);
    let (gamma1, gamma2) = rational_support_sets(f, g, t)?;
    if let Some(witness) = gamma2.difference(&gamma1).next() {
        return Ok(RationalAssembly::Obstruction(SupportObstruction {
            witness: witness.clone(),
        }));
    }
    Ok(RationalAssembly::Instance(assemble_from_parts(
        f,
        Some(g),
        t,
        basis_set,
        false,
        e,
    )))
}

/// Numerator degree bound for the rational case:
/// `d = e + ceil((deg f - deg g) / 2)`, clamped at zero when `g` has the
/// larger degree.
pub fn rational_numerator_degree(f: &Polynomial, g: &Polynomial, e: u32) -> u32 {
    let diff = f.degree() - g.degree();
    e + if diff > 0 { (diff as u32).div_ceil(2) } else { 0 }
}

/// The two achievable product-monomial supports of the rational case:
/// `Gamma_1` from `g * (dense numerator basis)^2` and `Gamma_2` from
/// `f * T^2`. Membership of a monomial in `Gamma_2 \ Gamma_1` certifies
/// non-membership on its own.
pub fn rational_support_sets(
    f: &Polynomial,
    g: &Polynomial,
    t: &TermSet,
) -> Result<(BTreeSet<Exponent>, BTreeSet<Exponent>), AssembleError> {
    if f.is_zero() {
        return Err(AssembleError::ZeroPolynomial);
    }
    if g.is_zero() {
        return Err(AssembleError::ZeroDenominatorPolynomial);
    }
    if t.is_empty() {
        return Err(AssembleError::EmptyTermSet);
    }
    let n = f.n();
    let e = t.max_degree().unwrap_or(0);
    let d = rational_numerator_degree(f, g, e);
    let basis_set = terms_up_to(n, d);
    let basis: Vec<&Exponent> = basis_set.iter().collect();
    let mut gamma1 = BTreeSet::new();
    for (gamma, _) in g.iter() {
        for (ai, a) in basis.iter().enumerate() {
            for b in basis.iter().take(ai + 1) {
                gamma1.insert(gamma.add(a).add(b));
            }
        }
    }
    let mut gamma2 = BTreeSet::new();
    for (beta, _) in f.iter() {
        for (ci, c) in t.iter().enumerate() {
            for dd in t.iter().take(ci + 1) {
                gamma2.insert(beta.add(c).add(dd));
            }
        }
    }
    Ok((gamma1, gamma2))
}

fn assemble_from_parts(
    f: &Polynomial,
    g: Option<&Polynomial>,
    t: &TermSet,
    basis_set: TermSet,
    sparse_basis: bool,
    e: u32,
) -> SdpInstance {
    let n = f.n();
    let numerator_basis = MonomialIndex::from_set(&basis_set);
    let denominator_basis = MonomialIndex::from_set(t);
    let k1 = numerator_basis.len();
    let k2 = denominator_basis.len();

    // Constraint monomials: union of both achievable product supports.
    let mut monomials = BTreeSet::new();
    let one = Polynomial::one(n);
    let g_poly = g.unwrap_or(&one);
    for (gamma, _) in g_poly.iter() {
        for a in 0..k1 {
            for b in a..k1 {
                monomials.insert(
                    gamma
                        .add(numerator_basis.exponent(a))
                        .add(numerator_basis.exponent(b)),
                );
            }
        }
    }
    for (beta, _) in f.iter() {
        for c in 0..k2 {
            for dd in c..k2 {
                monomials.insert(
                    beta.add(denominator_basis.exponent(c))
                        .add(denominator_basis.exponent(dd)),
                );
            }
        }
    }
    let constraint_monomials =
        MonomialIndex::from_set(&TermSet::from_exponents(n, monomials).expect("consistent n"));
    let m = constraint_monomials.len();

    let mut g_mats = vec![SparseSymMat::new(k1); m];
    let mut h_mats = vec![SparseSymMat::new(k2); m];

    // G[alpha] from expanding g * m_B^T W1 m_B (g = 1 in the polynomial
    // case): entry (a, b) receives the coefficient g_gamma with
    // gamma + mu_a + mu_b = alpha.
    for (gamma, coeff) in g_poly.iter() {
        for a in 0..k1 {
            for b in a..k1 {
                let alpha = gamma
                    .add(numerator_basis.exponent(a))
                    .add(numerator_basis.exponent(b));
                let idx = constraint_monomials
                    .position(&alpha)
                    .expect("constraint monomial present");
                g_mats[idx].push(a, b, coeff.clone());
            }
        }
    }
    // H[alpha] from expanding (-f) * m_T^T W2 m_T.
    for (beta, coeff) in f.iter() {
        for c in 0..k2 {
            for dd in c..k2 {
                let alpha = beta
                    .add(denominator_basis.exponent(c))
                    .add(denominator_basis.exponent(dd));
                let idx = constraint_monomials
                    .position(&alpha)
                    .expect("constraint monomial present");
                h_mats[idx].push(c, dd, -coeff.clone());
            }
        }
    }

    let mut trace_row = SparseSymMat::new(k2);
    for i in 0..k2 {
        trace_row.push(i, i, Rat::from_integer(1.into()));
    }

    SdpInstance {
        n,
        e,
        f: f.clone(),
        g: g.cloned(),
        denominator_terms: t.clone(),
        sparse_basis,
        numerator_basis,
        denominator_basis,
        constraint_monomials,
        g_mats,
        h_mats,
        trace_row,
    }
}

/// Moment matrix: entry `(i, j) = y_{mu_i + mu_j}`.
pub fn moment_matrix(
    y: &MomentVector,
    basis: &MonomialIndex,
) -> Result<SymMat<Rat>, MissingMoment> {
    let k = basis.len();
    let mut out = SymMat::zeros(k);
    for i in 0..k {
        for j in i..k {
            let e = basis.exponent(i).add(basis.exponent(j));
            out.set_sym(i, j, y.get(&e)?.clone());
        }
    }
    Ok(out)
}

/// Localizing matrix of the multiplier `q`:
/// entry `(i, j) = sum_gamma q_gamma y_{gamma + mu_i + mu_j}`.
pub fn localizing_matrix(
    q: &Polynomial,
    y: &MomentVector,
    basis: &MonomialIndex,
) -> Result<SymMat<Rat>, MissingMoment> {
    let k = basis.len();
    let mut out = SymMat::zeros(k);
    for i in 0..k {
        for j in i..k {
            let shift = basis.exponent(i).add(basis.exponent(j));
            let mut acc = Rat::zero();
            for (gamma, c) in q.iter() {
                acc += y.get(&gamma.add(&shift))? * c;
            }
            out.set_sym(i, j, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{motzkin, parse_polynomial};
    use num_bigint::BigInt;
    use num_integer::binomial;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn unit_term_set(n: usize) -> TermSet {
        TermSet::from_exponents(n, [Exponent::zeros(n)]).unwrap()
    }

    #[test]
    fn motzkin_sparse_dimensions() {
        let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
        assert_eq!(inst.k1(), 4);
        assert_eq!(inst.k2(), 1);
        assert_eq!(inst.m(), 10);
    }

    #[test]
    fn univariate_dense_dimensions() {
        let f = parse_polynomial("x1^2", 1).unwrap();
        let inst = assemble_polynomial_instance(&f, &unit_term_set(1), false).unwrap();
        // d = 1: blocks C(2,1) = 2 and C(1,0) = 1, total k = 3
        assert_eq!(inst.k1(), 2);
        assert_eq!(inst.k2(), 1);
        assert_eq!(inst.k1() + inst.k2(), 3);
    }

    #[test]
    fn dense_constraint_count_is_binomial() {
        for (f_text, n, e) in [("x1^2 + x2^2", 2usize, 0u32), ("x1^4*x2^2 + 1", 2, 1)] {
            let f = parse_polynomial(f_text, n).unwrap();
            let t = terms_up_to(n, e);
            let inst = assemble_polynomial_instance(&f, &t, false).unwrap();
            let d = e + (f.degree() as u32).div_ceil(2);
            let expect: usize = binomial(BigInt::from(n as u32 + 2 * d), BigInt::from(2 * d))
                .try_into()
                .unwrap();
            assert_eq!(inst.m(), expect);
        }
    }

    #[test]
    fn assembly_rejects_degenerate_inputs() {
        assert!(matches!(
            assemble_polynomial_instance(&Polynomial::zero(2), &unit_term_set(2), true),
            Err(AssembleError::ZeroPolynomial)
        ));
        assert!(matches!(
            assemble_polynomial_instance(&motzkin(), &TermSet::empty(2), true),
            Err(AssembleError::EmptyTermSet)
        ));
        let g = Polynomial::zero(2);
        assert!(matches!(
            assemble_rational_instance(&motzkin(), &g, &unit_term_set(2)),
            Err(AssembleError::ZeroDenominatorPolynomial)
        ));
    }

    #[test]
    fn rational_obstruction_witness() {
        // f = x1, g = x2^2, T = {1}: Gamma_2 = {x1}, Gamma_1 = {x2^2}.
        let f = parse_polynomial("x1", 2).unwrap();
        let g = parse_polynomial("x2^2", 2).unwrap();
        match assemble_rational_instance(&f, &g, &unit_term_set(2)).unwrap() {
            RationalAssembly::Obstruction(o) => {
                assert_eq!(o.witness, Exponent::new(vec![1, 0]));
            }
            RationalAssembly::Instance(_) => panic!("expected obstruction"),
        }
    }

    #[test]
    fn rational_with_unit_denominator_matches_polynomial_dense() {
        let f = motzkin();
        let t = terms_up_to(2, 1);
        let g = Polynomial::one(2);
        let rational = match assemble_rational_instance(&f, &g, &t).unwrap() {
            RationalAssembly::Instance(i) => i,
            _ => panic!("no obstruction expected"),
        };
        let dense = assemble_polynomial_instance(&f, &t, false).unwrap();
        assert_eq!(rational.numerator_basis, dense.numerator_basis);
        assert_eq!(rational.constraint_monomials, dense.constraint_monomials);
        assert_eq!(rational.g_mats, dense.g_mats);
        assert_eq!(rational.h_mats, dense.h_mats);
    }

    #[test]
    fn motzkin_rational_case_has_no_obstruction() {
        let f = motzkin();
        let g = parse_polynomial("x1^2 + 1", 2).unwrap();
        let t = terms_up_to(2, 1);
        assert!(matches!(
            assemble_rational_instance(&f, &g, &t).unwrap(),
            RationalAssembly::Instance(_)
        ));
    }

    #[test]
    fn moment_matrix_examples() {
        // n=1, basis {1, x}, y = (1, 0, 1) -> identity
        let basis = MonomialIndex::from_set(&terms_up_to(1, 1));
        let mut y = MomentVector::new(1);
        y.insert(Exponent::new(vec![0]), rat(1, 1));
        y.insert(Exponent::new(vec![1]), rat(0, 1));
        y.insert(Exponent::new(vec![2]), rat(1, 1));
        let m = moment_matrix(&y, &basis).unwrap();
        assert_eq!(m.get(0, 0), &rat(1, 1));
        assert_eq!(m.get(0, 1), &rat(0, 1));
        assert_eq!(m.get(1, 1), &rat(1, 1));

        // singleton basis {1}
        let basis1 = MonomialIndex::from_set(&unit_term_set(1));
        let m1 = moment_matrix(&y, &basis1).unwrap();
        assert_eq!(m1.dim(), 1);
        assert_eq!(m1.get(0, 0), &rat(1, 1));

        // missing entry is an error
        let y_short = MomentVector::new(1);
        assert!(moment_matrix(&y_short, &basis).is_err());
    }

    fn paper_motzkin_moments() -> MomentVector {
        // Only y_{2,2} = 300 is nonzero over the sparse product monomials.
        let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
        let mut y = MomentVector::new(2);
        for e in inst.constraint_monomials.iter() {
            let v = if e == &Exponent::new(vec![2, 2]) {
                rat(300, 1)
            } else {
                rat(0, 1)
            };
            y.insert(e.clone(), v);
        }
        y
    }

    #[test]
    fn motzkin_paper_moment_matrix_has_single_entry() {
        let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
        let y = paper_motzkin_moments();
        let m = moment_matrix(&y, &inst.numerator_basis).unwrap();
        let xy = inst
            .numerator_basis
            .position(&Exponent::new(vec![1, 1]))
            .unwrap();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                let want = if i == xy && j == xy {
                    rat(300, 1)
                } else {
                    rat(0, 1)
                };
                assert_eq!(m.get(i, j), &want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn localizing_matrix_examples() {
        let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
        let y = paper_motzkin_moments();
        // q = 1 reduces to the moment matrix
        let q1 = Polynomial::one(2);
        assert_eq!(
            localizing_matrix(&q1, &y, &inst.denominator_basis).unwrap(),
            moment_matrix(&y, &inst.denominator_basis).unwrap()
        );
        // q = f over basis {1}: L(f) = -3 * 300 = -900
        let lf = localizing_matrix(&motzkin(), &y, &inst.denominator_basis).unwrap();
        assert_eq!(lf.get(0, 0), &rat(-900, 1));
        // q = 0 gives the zero matrix
        let q0 = Polynomial::zero(2);
        let lz = localizing_matrix(&q0, &y, &inst.numerator_basis).unwrap();
        for i in 0..lz.dim() {
            for j in 0..lz.dim() {
                assert!(lz.get(i, j).is_zero());
            }
        }
    }

    fn random_poly(rng: &mut StdRng, n: usize, max_deg: u32, terms: usize) -> Polynomial {
        let mut p = Polynomial::zero(n);
        for _ in 0..terms {
            let mut left = max_deg;
            let e: Vec<u32> = (0..n)
                .map(|_| {
                    let v = rng.gen_range(0..=left.min(2));
                    left -= v;
                    v
                })
                .collect();
            p.add_term(
                Exponent::new(e),
                rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)),
            );
        }
        p
    }

    fn random_sym(rng: &mut StdRng, dim: usize) -> SymMat<Rat> {
        SymMat::from_fn(dim, |_, _| rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
    }

    /// The defining identity of the assembly: for any symmetric (W1, W2),
    /// g * m_B^T W1 m_B - f * m_T^T W2 m_T
    ///   = sum_alpha (G[alpha].W1 + H[alpha].W2) X^alpha, exactly.
    fn check_assembly_identity(inst: &SdpInstance, w1: &SymMat<Rat>, w2: &SymMat<Rat>) {
        let n = inst.n;
        let one = Polynomial::one(n);
        let g = inst.g.as_ref().unwrap_or(&one);
        let mut lhs = Polynomial::zero(n);
        for a in 0..inst.k1() {
            for b in 0..inst.k1() {
                let e = inst
                    .numerator_basis
                    .exponent(a)
                    .add(inst.numerator_basis.exponent(b));
                lhs.add_term(e, w1.get(a, b).clone());
            }
        }
        lhs = lhs.mul(g);
        let mut den_side = Polynomial::zero(n);
        for c in 0..inst.k2() {
            for dd in 0..inst.k2() {
                let e = inst
                    .denominator_basis
                    .exponent(c)
                    .add(inst.denominator_basis.exponent(dd));
                den_side.add_term(e, w2.get(c, dd).clone());
            }
        }
        lhs = lhs.sub(&inst.f.mul(&den_side));

        let mut rhs = Polynomial::zero(n);
        for (idx, alpha) in inst.constraint_monomials.iter().enumerate() {
            let coeff = inst.g_mats[idx].dot(w1) + inst.h_mats[idx].dot(w2);
            rhs.add_term(alpha.clone(), coeff);
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn assembly_identity_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut done = 0;
        while done < 20 {
            let n = rng.gen_range(1..=3);
            let nterms = rng.gen_range(1..=4);
            let f = random_poly(&mut rng, n, 4, nterms);
            if f.is_zero() {
                continue;
            }
            let e = rng.gen_range(0..=1);
            let t = terms_up_to(n, e);
            let sparse = rng.gen_bool(0.5);
            let inst = assemble_polynomial_instance(&f, &t, sparse).unwrap();
            let w1 = random_sym(&mut rng, inst.k1());
            let w2 = random_sym(&mut rng, inst.k2());
            check_assembly_identity(&inst, &w1, &w2);
            done += 1;
        }
        // rational case too
        let f = motzkin();
        let g = parse_polynomial("x1^2 + 1", 2).unwrap();
        let t = terms_up_to(2, 1);
        let inst = match assemble_rational_instance(&f, &g, &t).unwrap() {
            RationalAssembly::Instance(i) => i,
            _ => unreachable!(),
        };
        let w1 = random_sym(&mut rng, inst.k1());
        let w2 = random_sym(&mut rng, inst.k2());
        check_assembly_identity(&inst, &w1, &w2);
    }

    /// Dual pairing: sum_alpha y_alpha G[alpha] is the moment matrix (or the
    /// g-localizing matrix), and sum_alpha y_alpha H[alpha] is the
    /// (-f)-localizing matrix.
    #[test]
    fn dual_consistency_on_random_vectors() {
        let mut rng = StdRng::seed_from_u64(11);
        let cases: Vec<SdpInstance> = vec![
            assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap(),
            assemble_polynomial_instance(
                &parse_polynomial("x1^2 + x2^2", 2).unwrap(),
                &unit_term_set(2),
                false,
            )
            .unwrap(),
            match assemble_rational_instance(
                &motzkin(),
                &parse_polynomial("x1^2 + 1", 2).unwrap(),
                &terms_up_to(2, 1),
            )
            .unwrap()
            {
                RationalAssembly::Instance(i) => i,
                _ => unreachable!(),
            },
        ];
        for inst in &cases {
            let mut y = MomentVector::new(inst.n);
            for e in inst.constraint_monomials.iter() {
                y.insert(e.clone(), rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)));
            }
            let mut gsum = SymMat::zeros(inst.k1());
            let mut hsum = SymMat::zeros(inst.k2());
            for (idx, alpha) in inst.constraint_monomials.iter().enumerate() {
                let w = y.get(alpha).unwrap().clone();
                for (i, j, v) in &inst.g_mats[idx].entries {
                    gsum.accumulate_sym(*i, *j, &(v * &w));
                }
                for (i, j, v) in &inst.h_mats[idx].entries {
                    hsum.accumulate_sym(*i, *j, &(v * &w));
                }
            }
            assert_eq!(gsum, inst.numerator_block(&y).unwrap());
            let neg_f = inst.f.neg();
            assert_eq!(
                hsum,
                localizing_matrix(&neg_f, &y, &inst.denominator_basis).unwrap()
            );
        }
    }

    #[test]
    fn constraint_matrices_stay_in_their_blocks() {
        let inst = assemble_polynomial_instance(&motzkin(), &unit_term_set(2), true).unwrap();
        for gm in &inst.g_mats {
            assert_eq!(gm.dim, inst.k1());
        }
        for hm in &inst.h_mats {
            assert_eq!(hm.dim, inst.k2());
        }
        assert_eq!(inst.trace_row.dim, inst.k2());
    }
}
