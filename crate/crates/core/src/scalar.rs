//! Floating-point scalar abstraction shared by the probability kernel,
//! embedding tables and the optimizer.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lower clamp applied to probabilities before taking logarithms.
    ///
    /// 1e-9 where the type can represent `1 - 1e-9`, machine epsilon otherwise.
    fn prob_floor() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {
    fn prob_floor() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn prob_floor() -> Self {
        1e-9
    }
}

/// Clamp a probability to `[floor, 1 - floor]`.
#[inline]
pub fn clamp_prob<T: Scalar>(p: T) -> T {
    let lo = T::prob_floor();
    let hi = T::one() - lo;
    if p < lo {
        lo
    } else if p > hi {
        hi
    } else {
        p
    }
}
