//! Scalar abstraction shared by every crate in the workspace.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real floating point scalar usable by the dense kernels (`f32` or `f64`).
///
/// `RealField` already carries the arithmetic; we only add `Copy` and the
/// conversions needed for reporting. `num_traits::Float` is deliberately not
/// required because its methods collide with the `RealField` ones.
pub trait Real: RealField + Copy + ToPrimitive + Debug + Display + LowerExp + 'static {
    /// Lossless-enough literal conversion.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Conversion for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T where T: RealField + Copy + ToPrimitive + Debug + Display + LowerExp + 'static {}

#[cfg(test)]
mod tests {
    use super::*;

    fn halve<T: Real>(x: T) -> T {
        x * T::lit(0.5)
    }

    #[test]
    fn both_widths() {
        assert_eq!(halve(3.0f64), 1.5);
        assert_eq!(halve(3.0f32), 1.5);
        assert!(f32::eps().as_f64() > f64::eps());
    }
}
