//! Arbitrary-precision binary floating point for the solver.
//!
//! [`Mpf`] wraps `dashu_float::FBig` with half-even rounding in radix 2. The
//! precision (in bits) travels with each value; arithmetic results carry the
//! larger operand precision, so seeding every input of a solve at the working
//! precision keeps the whole computation there. Conversions to and from
//! [`Rat`] are exact: an `Mpf` is always the dyadic rational
//! `significand * 2^exponent`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, Sign as DashuSign};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};

use crate::scalar::Scalar;
use crate::Rat;

type Inner = FBig<HalfEven, 2>;

/// Number of mantissa bits that hold at least `digits` decimal digits,
/// plus a few guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    // log2(10) = 3.3219...
    (digits as usize * 3322).div_ceil(1000) + 8
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mpf(Inner);

impl Mpf {
    /// Round an exact rational to `bits` significand bits.
    pub fn from_rat(value: &Rat, bits: usize) -> Self {
        let num = Inner::from(bigint_to_ibig(value.numer()))
            .with_precision(bits)
            .value();
        let den = Inner::from(bigint_to_ibig(value.denom()))
            .with_precision(bits)
            .value();
        Mpf(num / den)
    }

    pub fn from_i64(value: i64, bits: usize) -> Self {
        Mpf(Inner::from(value).with_precision(bits).value())
    }

    /// Exact value of this float as a rational (`significand * 2^exponent`).
    pub fn to_rat(&self) -> Rat {
        let repr = self.0.repr();
        let signif = ibig_to_bigint(repr.significand());
        let exp = repr.exponent();
        let two = BigInt::from(2);
        if exp >= 0 {
            Rat::from_integer(signif * two.pow(exp as u32))
        } else {
            Rat::new(signif, two.pow((-exp) as u32))
        }
    }

    /// Re-round to a (typically higher) precision. Raising the precision is
    /// exact; lowering rounds half-even.
    pub fn with_bits(&self, bits: usize) -> Self {
        Mpf(self.0.clone().with_precision(bits).value())
    }

    pub fn precision_bits(&self) -> usize {
        self.0.precision()
    }

    pub fn sqrt(&self) -> Self {
        use dashu_float::ops::SquareRoot;
        Mpf(self.0.sqrt())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
}

fn bigint_to_ibig(v: &BigInt) -> IBig {
    let (sign, bytes) = v.to_bytes_le();
    let mag = dashu_int::UBig::from_le_bytes(&bytes);
    match sign {
        Sign::Minus => IBig::from_parts(DashuSign::Negative, mag),
        _ => IBig::from_parts(DashuSign::Positive, mag),
    }
}

fn ibig_to_bigint(v: &IBig) -> BigInt {
    let (sign, mag) = v.as_sign_words();
    let mut bytes = Vec::with_capacity(mag.len() * 8);
    for w in mag {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    let sign = match sign {
        DashuSign::Negative => Sign::Minus,
        DashuSign::Positive => {
            if mag.is_empty() {
                Sign::NoSign
            } else {
                Sign::Plus
            }
        }
    };
    BigInt::from_bytes_le(sign, &bytes)
}

impl fmt::Debug for Mpf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mpf({:e})", self.to_f64())
    }
}

impl fmt::Display for Mpf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Mpf {
            type Output = Mpf;
            fn $method(self, rhs: Mpf) -> Mpf {
                Mpf($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Mpf> for &Mpf {
            type Output = Mpf;
            fn $method(self, rhs: &Mpf) -> Mpf {
                Mpf($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

macro_rules! forward_assign {
    ($trait:ident, $method:ident, $binop:ident, $binmethod:ident) => {
        impl $trait<&Mpf> for Mpf {
            fn $method(&mut self, rhs: &Mpf) {
                let lhs = std::mem::replace(&mut self.0, Inner::ZERO);
                self.0 = $binop::$binmethod(lhs, &rhs.0);
            }
        }
        impl $trait<Mpf> for Mpf {
            fn $method(&mut self, rhs: Mpf) {
                $trait::$method(self, &rhs);
            }
        }
    };
}

forward_assign!(AddAssign, add_assign, Add, add);
forward_assign!(SubAssign, sub_assign, Sub, sub);
forward_assign!(MulAssign, mul_assign, Mul, mul);
forward_assign!(DivAssign, div_assign, Div, div);

impl Neg for Mpf {
    type Output = Mpf;
    fn neg(self) -> Mpf {
        Mpf(-self.0)
    }
}

impl Neg for &Mpf {
    type Output = Mpf;
    fn neg(self) -> Mpf {
        Mpf(-self.0.clone())
    }
}

impl Zero for Mpf {
    fn zero() -> Self {
        Mpf(Inner::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 == Inner::ZERO
    }
}

impl One for Mpf {
    fn one() -> Self {
        Mpf(Inner::ONE)
    }
}

impl Scalar for Mpf {
    fn approx_f64(&self) -> f64 {
        self.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_round_trip_is_exact_for_dyadics() {
        let v = rat(-13, 32);
        let f = Mpf::from_rat(&v, 100);
        assert_eq!(f.to_rat(), v);
    }

    #[test]
    fn division_rounds_to_working_precision() {
        let third = Mpf::from_rat(&rat(1, 3), 100);
        let err = (third.to_rat() - rat(1, 3)).abs_val();
        // |fl(1/3) - 1/3| <= 2^-100
        let bound = Rat::new(BigInt::one(), BigInt::from(2).pow(99));
        assert!(err < bound, "err = {err}");
        assert!(!err.is_zero());
    }

    #[test]
    fn precision_raises_exactly() {
        let x = Mpf::from_rat(&rat(22, 7), 80);
        let hi = x.with_bits(200);
        assert_eq!(x.to_rat(), hi.to_rat());
        assert_eq!(hi.precision_bits(), 200);
    }

    #[test]
    fn arithmetic_matches_f64_roughly() {
        let a = Mpf::from_rat(&rat(355, 113), 120);
        let b = Mpf::from_rat(&rat(-7, 5), 120);
        let c = &a * &b;
        let want = (355.0 / 113.0) * (-7.0 / 5.0);
        assert!((c.to_f64() - want).abs() < 1e-12);
        assert!(c.is_neg());
        assert_eq!(c.abs_val(), -c.clone());
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Mpf::from_rat(&Rat::from_i64(2).unwrap(), 150);
        let s = x.sqrt();
        let back = &s * &s;
        let err = (back.to_rat() - Rat::from_i64(2).unwrap()).abs_val();
        assert!(err < rat(1, 1_000_000_000).pow(4));
    }

    #[test]
    fn big_negative_integers_convert() {
        let v = Rat::from_integer(BigInt::parse_bytes(b"-123456789012345678901234567890", 10).unwrap());
        let f = Mpf::from_rat(&v, 200);
        assert_eq!(f.to_rat(), v);
    }
}
