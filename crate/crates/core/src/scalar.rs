//! Scalar abstraction for the dense linear algebra kernels.
//!
//! The same LDL^T code runs over three scalar types: exact rationals for
//! certificate verification, the arbitrary-precision float [`crate::Mpf`]
//! inside the solver, and plain `f64` in quick numeric checks and tests.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::Rat;

/// A field scalar: exact division, total sign logic, no NaN-like values.
///
/// The assign-by-reference bounds keep the kernels allocation-light for
/// heap-backed scalars (`Rat`, [`crate::Mpf`]).
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    fn is_pos(&self) -> bool {
        *self > Self::zero()
    }

    fn is_neg(&self) -> bool {
        *self < Self::zero()
    }

    fn abs_val(&self) -> Self {
        if self.is_neg() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Lossy view for logs and diagnostics only.
    fn approx_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rat {
    fn approx_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn generic_sum<T: Scalar>(vals: &[T]) -> T {
        let mut acc = T::zero();
        for v in vals {
            acc += v;
        }
        acc
    }

    #[test]
    fn works_over_f64_and_rat() {
        assert_eq!(generic_sum(&[1.0, 2.5, -0.5]), 3.0);
        let r = |x: i64| Rat::from_i64(x).unwrap();
        assert_eq!(generic_sum(&[r(1), r(2), r(-4)]), r(-1));
        assert!(r(-3).is_neg());
        assert_eq!(r(-3).abs_val(), r(3));
    }
}
