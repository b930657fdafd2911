//! Scalar abstraction shared by the soft-decision code paths.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable for LLRs, probabilities and bound evaluation: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; saturates to infinity outside the type's range.
    fn of(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x.is_sign_negative() { Self::neg_infinity() } else { Self::infinity() })
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Jacobian logarithm `ln(e^a + e^b)`, exact (max plus correction term).
#[inline]
pub fn max_star<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Numerically stable `ln Σ exp(x_i)`. Returns `-inf` for an empty input.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max == T::infinity() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Stable `ln(1 + e^{-x})`.
#[inline]
pub fn softplus_neg<T: Real>(x: T) -> T {
    if x > T::zero() {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}
