//! Scalar abstraction for the numeric core.
//!
//! Everything downstream (probability tables, the LP solver, the threshold
//! searches) is generic over [`Real`], so the same code runs at `f32` or
//! `f64`. The contractual tolerances are stated for `f64`; the helpers below
//! widen them when the scalar's epsilon would otherwise make valid inputs
//! unconstructible.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the crate: `f32` or `f64`,
/// or any type satisfying the same bounds.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Shorthand for lifting an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Tolerance for "sums to one" checks on probability tables.
///
/// 1e-12 at `f64`; scaled by machine epsilon for narrower types where 1e-12
/// is below representable rounding noise.
pub fn sum_tolerance<T: Real>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(32.0))
}

/// Tolerance for cross-table consistency checks (counterfactual marginals).
pub fn consistency_tolerance<T: Real>() -> T {
    T::of(1e-9).max(T::epsilon() * T::of(1024.0))
}

/// Sums four values with a fixed association so that derived marginals and
/// the raw cell sum agree bit-for-bit.
pub fn sum4<T: Real>(a: T, b: T, c: T, d: T) -> T {
    (a + b) + (c + d)
}
