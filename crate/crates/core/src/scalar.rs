//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Simulation code and the CLI use the `f64` aliases exported
//! from the crate root.

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Floating-point scalar used throughout the crate.
pub trait Real: RealField + FromPrimitive + Copy {}

impl<T: RealField + FromPrimitive + Copy> Real for T {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_pi<T: Real>(angle: T) -> T {
    let two_pi = T::two_pi();
    let mut a = angle % two_pi;
    if a > T::pi() {
        a -= two_pi;
    } else if a <= -T::pi() {
        a += two_pi;
    }
    a
}

/// Wraps an angle to `[0, 2pi)`.
pub fn wrap_two_pi<T: Real>(angle: T) -> T {
    let two_pi = T::two_pi();
    let a = angle % two_pi;
    if a < T::zero() {
        a + two_pi
    } else {
        a
    }
}
