//! Scalar abstractions.
//!
//! [`Scalar`] covers field arithmetic and is implemented by `f32`, `f64` and
//! exact rationals, so weighted sums and the combined reward can be checked
//! without rounding. [`Real`] adds the transcendental functions needed by the
//! Gaussian penalty, cosine distances and standard errors.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Exact rational numbers for closed-form checks.
pub type Rational = Ratio<i64>;

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`, exact for rationals and correctly rounded for floats.
    fn ratio_of(num: i64, den: i64) -> Self;

    fn of_usize(n: usize) -> Self {
        Self::ratio_of(n as i64, 1)
    }

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f32 {
    fn ratio_of(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
}

impl Scalar for f64 {
    fn ratio_of(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer + Signed + Clone + FromPrimitive + Debug + Send + Sync + 'static,
{
    fn ratio_of(num: i64, den: i64) -> Self {
        Ratio::new(
            I::from_i64(num).expect("numerator fits"),
            I::from_i64(den).expect("denominator fits"),
        )
    }
}

/// Floating point type usable by the reward, concept and metric code.
pub trait Real:
    Scalar + Float + FromPrimitive + Sum + Default + Display + Serialize + DeserializeOwned
{
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 constant representable")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ratio of two counts, zero when the denominator is zero.
pub(crate) fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::ratio_of(num as i64, den as i64)
    }
}

pub(crate) fn mean<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        T::zero()
    } else {
        values.iter().copied().sum::<T>() / T::of_usize(values.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_is_exact_for_rationals() {
        assert_eq!(Rational::ratio_of(18, 100), Rational::new(9, 50));
        assert_eq!(f64::ratio_of(18, 100), 0.18);
        assert_eq!(f32::ratio_of(3, 10), 0.3f32);
    }

    #[test]
    fn clamp() {
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!((-0.5f64).clamp_unit(), 0.0);
        assert_eq!(Rational::new(3, 2).clamp_unit(), Rational::from_integer(1));
        assert_eq!(ratio::<f64>(1, 0), 0.0);
    }
}
