//! Scalar abstractions.
//!
//! Everything that touches floating point numbers (grids, fields, quadrature,
//! the solver) is generic over [`Scalar`], implemented for `f32` and `f64`.
//! Parameter arithmetic that only needs field operations (critical exponents,
//! regime classification) is generic over the weaker [`Exponent`] trait, which
//! is also implemented for exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, NumCast, Signed};
use rustfft::FftNum;

/// Numbers usable as regime exponents: `d`, `p`, `alpha`, `lambda`.
pub trait Exponent:
    Clone + PartialOrd + Num + Signed + Debug + Display + Send + Sync + 'static
{
    fn from_int(v: u32) -> Self;

    fn as_f64(&self) -> f64;

    /// Equality used to decide the fair-competition case.
    ///
    /// Exact for rationals; `|a - b| <= 1e-12 * max(1, |b|)` for floats
    /// (widened to a few ulps for `f32`).
    fn fair_eq(&self, other: &Self) -> bool;

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

/// Floating point scalar used for all numerical work.
pub trait Scalar:
    Exponent
    + Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + FftNum
    + Default
    + Copy
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_(v: usize) -> Self {
        <Self as NumCast>::from(v).expect("usize representable in scalar type")
    }
}

macro_rules! impl_float_exponent {
    ($f:ty) => {
        impl Exponent for $f {
            fn from_int(v: u32) -> Self {
                v as $f
            }

            fn as_f64(&self) -> f64 {
                *self as f64
            }

            fn fair_eq(&self, other: &Self) -> bool {
                let tol = (1e-12 as $f).max(8.0 * <$f>::EPSILON);
                (*self - *other).abs() <= tol * (1.0 as $f).max(other.abs())
            }
        }

        impl Scalar for $f {}
    };
}

impl_float_exponent!(f32);
impl_float_exponent!(f64);

impl Exponent for Rational64 {
    fn from_int(v: u32) -> Self {
        Rational64::from_integer(v as i64)
    }

    fn as_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn fair_eq(&self, other: &Self) -> bool {
        self == other
    }
}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::lit(v)
}
