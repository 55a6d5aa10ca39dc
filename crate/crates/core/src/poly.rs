//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Exponent vectors are ordered graded-lexicographically (total degree first,
//! then lexicographic on the entries); that order fixes every matrix index
//! and every serialization downstream, so it is implemented once here as the
//! `Ord` of [`Exponent`] and never re-derived.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::Rat;

/// Exponent vector of a monomial in `n` variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// `x_i` as an exponent vector (`i` is 0-based here).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Exponent(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        assert_eq!(self.len(), other.len(), "exponent length mismatch");
        Exponent(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn doubled(&self) -> Exponent {
        Exponent(self.0.iter().map(|a| 2 * a).collect())
    }

    pub fn is_all_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.total_degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A finite set of exponent vectors, all of the same length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermSet {
    n: usize,
    members: BTreeSet<Exponent>,
}

impl TermSet {
    pub fn empty(n: usize) -> Self {
        TermSet {
            n,
            members: BTreeSet::new(),
        }
    }

    pub fn from_exponents(
        n: usize,
        exps: impl IntoIterator<Item = Exponent>,
    ) -> Result<Self, PolyError> {
        let mut members = BTreeSet::new();
        for e in exps {
            if e.len() != n {
                return Err(PolyError::LengthMismatch {
                    expected: n,
                    got: e.len(),
                });
            }
            members.insert(e);
        }
        Ok(TermSet { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.members.contains(e)
    }

    pub fn insert(&mut self, e: Exponent) {
        assert_eq!(e.len(), self.n, "exponent length mismatch");
        self.members.insert(e);
    }

    /// Iterate in graded-lex order.
    pub fn iter(&self) -> impl Iterator<Item = &Exponent> {
        self.members.iter()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.members.iter().map(|e| e.total_degree()).max()
    }
}

/// All exponent vectors in `n` variables of total degree at most `e`;
/// cardinality `C(n + e, e)`.
pub fn terms_up_to(n: usize, e: u32) -> TermSet {
    assert!(n >= 1, "need at least one variable");
    let mut members = BTreeSet::new();
    let mut current = vec![0u32; n];
    fill_terms(&mut members, &mut current, 0, e);
    TermSet { n, members }
}

fn fill_terms(out: &mut BTreeSet<Exponent>, current: &mut Vec<u32>, idx: usize, remaining: u32) {
    if idx == current.len() {
        out.insert(Exponent::new(current.clone()));
        return;
    }
    for v in 0..=remaining {
        current[idx] = v;
        fill_terms(out, current, idx + 1, remaining - v);
    }
    current[idx] = 0;
}

/// Sparse polynomial: map from exponent vectors to nonzero rational
/// coefficients. Canonical by construction — no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, Rat>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("exponent length {got} does not match variable count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("family parameters out of range: need n >= 3 and 0 <= k <= n-1, got n={n}, k={k}")]
    FamilyRange { n: usize, k: usize },
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(Exponent::zeros(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        Polynomial::constant(n, Rat::one())
    }

    /// `x_i` with `i` 0-based.
    pub fn variable(n: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(Exponent::unit(n, i), Rat::one());
        p
    }

    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (Exponent, Rat)>,
    ) -> Result<Self, PolyError> {
        let mut p = Polynomial::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(PolyError::LengthMismatch {
                    expected: n,
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; the zero polynomial reports the -1 sentinel.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.total_degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn coeff(&self, e: &Exponent) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Iterate terms in graded-lex order.
    pub fn iter(&self) -> impl Iterator<Item = (&Exponent, &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, e: Exponent, c: Rat) {
        assert_eq!(e.len(), self.n, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn support(&self) -> TermSet {
        TermSet {
            n: self.n,
            members: self.terms.keys().cloned().collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero(self.n);
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut k: u32) -> Polynomial {
        let mut result = Polynomial::one(self.n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.n, "point dimension mismatch");
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e.entries()) {
                if k > 0 {
                    term *= x.pow(k as i32);
                }
            }
            acc += term;
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> Rat {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Self) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Self) -> Polynomial {
        Polynomial::sub(self, rhs)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Self) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Syntax error with the byte offset at which it was detected.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a digit"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse as integer"))
    }

    fn small_integer(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let v = self.integer()?;
        u32::try_from(&v).map_err(|_| ParseError {
            position: start,
            message: format!("integer {v} is too large here"),
        })
    }
}

/// Parse the textual polynomial grammar: terms joined by `+`/`-`; a term is
/// an optional rational coefficient (`p` or `p/q`) and `*`-separated factors
/// `x<idx>` or `x<idx>^<exp>`. Whitespace is insignificant.
pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial, ParseError> {
    let mut sc = Scanner::new(text);
    let mut poly = Polynomial::zero(n);
    sc.skip_ws();
    if sc.peek().is_none() {
        return Err(sc.err("empty polynomial"));
    }
    let mut sign = match sc.peek() {
        Some(b'-') => {
            sc.bump();
            -1
        }
        Some(b'+') => {
            sc.bump();
            1
        }
        _ => 1,
    };
    loop {
        sc.skip_ws();
        let (exp, coeff) = parse_term(&mut sc, n)?;
        let signed = if sign < 0 { -coeff } else { coeff };
        poly.add_term(exp, signed);
        sc.skip_ws();
        match sc.peek() {
            None => break,
            Some(b'+') => {
                sc.bump();
                sign = 1;
            }
            Some(b'-') => {
                sc.bump();
                sign = -1;
            }
            Some(c) => return Err(sc.err(format!("expected '+' or '-', found {:?}", c as char))),
        }
    }
    Ok(poly)
}

fn parse_term(sc: &mut Scanner, n: usize) -> Result<(Exponent, Rat), ParseError> {
    let mut coeff = Rat::one();
    let mut exp = vec![0u32; n];
    let mut saw_anything = false;

    if matches!(sc.peek(), Some(b) if b.is_ascii_digit()) {
        let numer = sc.integer()?;
        let denom = if sc.peek() == Some(b'/') {
            sc.bump();
            sc.skip_ws();
            let dstart = sc.pos;
            let d = sc.integer()?;
            if d.is_zero() {
                return Err(ParseError {
                    position: dstart,
                    message: "zero denominator in coefficient".into(),
                });
            }
            d
        } else {
            BigInt::one()
        };
        coeff = Rat::new(numer, denom);
        saw_anything = true;
        sc.skip_ws();
        if sc.peek() == Some(b'*') {
            sc.bump();
            sc.skip_ws();
            parse_factors(sc, n, &mut exp)?;
        } else if sc.peek() == Some(b'x') {
            parse_factors(sc, n, &mut exp)?;
        }
    } else if sc.peek() == Some(b'x') {
        parse_factors(sc, n, &mut exp)?;
        saw_anything = true;
    }

    if !saw_anything {
        return Err(sc.err("expected a coefficient or a variable"));
    }
    Ok((Exponent::new(exp), coeff))
}

fn parse_factors(sc: &mut Scanner, n: usize, exp: &mut [u32]) -> Result<(), ParseError> {
    loop {
        if sc.peek() != Some(b'x') {
            return Err(sc.err("expected a variable factor like x1"));
        }
        sc.bump();
        let istart = sc.pos;
        let idx = sc.small_integer()? as usize;
        if idx == 0 || idx > n {
            return Err(ParseError {
                position: istart,
                message: format!("variable index x{idx} out of range 1..={n}"),
            });
        }
        let mut e = 1u32;
        if sc.peek() == Some(b'^') {
            sc.bump();
            e = sc.small_integer()?;
        }
        exp[idx - 1] += e;
        sc.skip_ws();
        if sc.peek() == Some(b'*') {
            let save = sc.pos;
            sc.bump();
            sc.skip_ws();
            if sc.peek() == Some(b'x') {
                continue;
            }
            sc.pos = save;
            return Ok(());
        }
        return Ok(());
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // leading (largest) term first
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if e.total_degree() == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{e}")?;
            } else {
                write!(f, "{mag}*{e}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Example families
// ---------------------------------------------------------------------------

/// The Motzkin polynomial `x1^4 x2^2 + x1^2 x2^4 + 1 - 3 x1^2 x2^2` (n = 2).
pub fn motzkin() -> Polynomial {
    Polynomial::from_terms(
        2,
        [
            (Exponent::new(vec![4, 2]), Rat::one()),
            (Exponent::new(vec![2, 4]), Rat::one()),
            (Exponent::new(vec![0, 0]), Rat::one()),
            (Exponent::new(vec![2, 2]), -Rat::from_integer(BigInt::from(3))),
        ],
    )
    .expect("static terms")
}

/// Power sum `M_{n,r} = x1^r + ... + xn^r`.
pub fn power_sum(n: usize, r: u32) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = r;
        p.add_term(Exponent::new(e), Rat::one());
    }
    p
}

/// Even symmetric sextic `f_{n,k}`: for k >= 1 this is
/// `(k^2+k) M_{n,6} - (2k+1) M_{n,2} M_{n,4} + M_{n,2}^3`, and
/// `f_{n,0} = -n M_{n,6} + (n+1) M_{n,2} M_{n,4} - M_{n,2}^3`.
pub fn ess_polynomial(n: usize, k: usize) -> Result<Polynomial, PolyError> {
    if n < 3 || k > n - 1 {
        return Err(PolyError::FamilyRange { n, k });
    }
    let m2 = power_sum(n, 2);
    let m4 = power_sum(n, 4);
    let m6 = power_sum(n, 6);
    let m2m4 = m2.mul(&m4);
    let m2cubed = m2.pow(3);
    let int = |v: i64| Rat::from_integer(BigInt::from(v));
    let poly = if k == 0 {
        m6.scale(&int(-(n as i64)))
            .add(&m2m4.scale(&int(n as i64 + 1)))
            .sub(&m2cubed)
    } else {
        let k = k as i64;
        m6.scale(&int(k * k + k))
            .sub(&m2m4.scale(&int(2 * k + 1)))
            .add(&m2cubed)
    };
    Ok(poly)
}

/// The ill-posed family `(1 - eps^2) x1^2 + x2^2 - 2 x1 x2` (n = 2).
pub fn ill_posed(eps: &Rat) -> Polynomial {
    let one_minus = Rat::one() - eps * eps;
    Polynomial::from_terms(
        2,
        [
            (Exponent::new(vec![2, 0]), one_minus),
            (Exponent::new(vec![0, 2]), Rat::one()),
            (
                Exponent::new(vec![1, 1]),
                -Rat::from_integer(BigInt::from(2)),
            ),
        ],
    )
    .expect("static terms")
}
