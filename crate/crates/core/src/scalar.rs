use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Arithmetic needed by the closed-form least-squares coefficients.
///
/// Anything that behaves like a field works, including exact rationals.
pub trait Field: Num + Clone + PartialOrd + Debug {}

impl<T> Field for T where T: Num + Clone + PartialOrd + Debug {}

/// Floating-point scalar used by the numeric modules (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Scalar")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("every Scalar converts to f64")
    }

    /// Machine epsilon as `f64`.
    fn eps() -> f64 {
        Self::epsilon().as_f64()
    }

    /// Hyperbolic tangent from a pure-Rust libm, so results do not depend on
    /// the platform math library.
    fn tanh_portable(self) -> Self;
}

impl Scalar for f32 {
    fn tanh_portable(self) -> Self {
        libm::tanhf(self)
    }
}

impl Scalar for f64 {
    fn tanh_portable(self) -> Self {
        libm::tanh(self)
    }
}
