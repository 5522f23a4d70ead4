//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the planner runs on (`f32` or `f64`).
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(<f32 as Scalar>::of(0.5), 0.5f32);
        assert_eq!(Scalar::f64(2.0f32), 2.0);
        assert_eq!(<f64 as Scalar>::of_usize(7), 7.0);
        let x: f64 = Scalar::of(-3.0);
        assert_eq!(x.abs(), 3.0);
    }
}
