//! A small field-operations trait so the closed-form free-energy functions
//! can be written once and evaluated over exact rationals, floats, or
//! truncated series.
//!
//! Division panics on invalid input; the formula evaluators only divide by
//! quantities that are units in the respective ring (denominators of the
//! form `1 ± x` with `x` of positive order, or pure monomials).

use crate::scalar::{GaussRat, Rat};
use crate::series::{Exp, Series};
use num_bigint::BigInt;
use num_traits::One;

pub trait FieldOps: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// The constant 1 shaped like `self` (same window for series).
    fn one_like(&self) -> Self;
    /// The integer `n` shaped like `self`.
    fn int_like(&self, n: i64) -> Self;
    /// The rational `num/den` shaped like `self`.
    fn ratio_like(&self, num: i64, den: i64) -> Self;

    fn pow_i(&self, n: i64) -> Self {
        if n == 0 {
            return self.one_like();
        }
        let base = if n < 0 {
            self.one_like().div(self)
        } else {
            self.clone()
        };
        let mut acc = base.clone();
        for _ in 1..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }
}

impl FieldOps for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn int_like(&self, n: i64) -> Self {
        n as f64
    }
    fn ratio_like(&self, num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn pow_i(&self, n: i64) -> Self {
        self.powi(n as i32)
    }
}

impl FieldOps for Rat {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        assert!(!num_traits::Zero::is_zero(o), "rational division by zero");
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn int_like(&self, n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn ratio_like(&self, num: i64, den: i64) -> Self {
        Rat::new(BigInt::from(num), BigInt::from(den))
    }
}

impl FieldOps for Series {
    fn add(&self, o: &Self) -> Self {
        Series::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Series::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Series::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Series::div(self, o).expect("series division by a unit expected")
    }
    fn neg(&self) -> Self {
        Series::neg(self)
    }
    fn one_like(&self) -> Self {
        Series::one(self.prec())
    }
    fn int_like(&self, n: i64) -> Self {
        Series::constant(GaussRat::from_int(n), self.prec())
    }
    fn ratio_like(&self, num: i64, den: i64) -> Self {
        Series::constant(GaussRat::from_ratio(num, den), self.prec())
    }
    fn pow_i(&self, n: i64) -> Self {
        Series::pow_int(self, n).expect("series power of a unit expected")
    }
}

/// Shared helper: `1 - x`.
pub fn one_minus<T: FieldOps>(x: &T) -> T {
    x.one_like().sub(x)
}

/// Shared helper: `1 + x`.
pub fn one_plus<T: FieldOps>(x: &T) -> T {
    x.one_like().add(x)
}

/// Exponent helper kept next to the trait so series call sites can build
/// monomials at a common window.
pub fn monomial(e: Exp, prec: Exp) -> Series {
    Series::monomial(GaussRat::one(), e, prec)
}
