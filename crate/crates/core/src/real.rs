//! Scalar abstraction used throughout the crate.
//!
//! All numerical routines are generic over [`Real`], which bundles the
//! floating-point behaviour they rely on (arithmetic, transcendentals,
//! conversions from literal constants). `f32` and `f64` implement it;
//! the concrete aliases exported at the crate root fix `f64`, which is
//! the precision the shipped tolerances are calibrated for.

use core::fmt::{Debug, Display, LowerExp};

/// Floating-point scalar usable by the solvers and trajectory code.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + num_traits::ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts a literal `f64` constant (tolerances, tableau weights).
    ///
    /// Panics if the constant is not representable, which cannot happen
    /// for the finite literals used internally.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal constant")
    }

    /// The scalar as `f64`, for diagnostics and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn half(self) -> Self {
        self / Self::of(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
