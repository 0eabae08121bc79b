//! Scalar abstraction shared by the numeric modules.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real number type the estimators, cost model, bandit and analysis code are
/// generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values at all, which no implementor does.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Largest design-matrix condition number accepted by the least-squares
/// solver for this scalar type: `1e12`, clamped to `1/epsilon` for types
/// whose precision cannot resolve that.
pub fn max_condition<T: Scalar>() -> T {
    let cap = T::lit(1e12);
    let eps_cap = T::one() / T::epsilon();
    if eps_cap < cap {
        eps_cap
    } else {
        cap
    }
}
