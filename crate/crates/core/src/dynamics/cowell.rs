//! Inertial two-satellite propagation, independent of the nodal model.

use nalgebra::{SVector, Vector3};

use super::integrator::{integrate, IntegratorOptions};
use super::kepler::CartesianState;
use super::PerturbationInput;
use crate::error::Result;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CowellSample<T: Real> {
    pub t: T,
    pub sat1: CartesianState<T>,
    pub sat2: CartesianState<T>,
    /// `r2 - r1` in RTN of satellite 1.
    pub dr_rtn1: Vector3<T>,
}

fn split<T: Real>(y: &SVector<T, 12>) -> (CartesianState<T>, CartesianState<T>) {
    let v = |i: usize| Vector3::new(y[i], y[i + 1], y[i + 2]);
    (
        CartesianState { r: v(0), v: v(3) },
        CartesianState { r: v(6), v: v(9) },
    )
}

fn two_body<T: Real>(r: &Vector3<T>, mu: T) -> Vector3<T> {
    let rn = r.norm();
    -r * (mu / (rn * rn * rn))
}

/// Propagates both satellites in inertial coordinates with RTN perturbations
/// supplied by `accel(t, sat1, sat2)`.
pub fn cowell_propagate<T, F>(
    sat1: &CartesianState<T>,
    sat2: &CartesianState<T>,
    mu: T,
    accel: F,
    t0: T,
    times: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<Vec<CowellSample<T>>>
where
    T: Real,
    F: Fn(T, &CartesianState<T>, &CartesianState<T>) -> PerturbationInput<T>,
{
    let y0 = SVector::<T, 12>::from_iterator(
        sat1.r.iter().chain(sat1.v.iter()).chain(sat2.r.iter()).chain(sat2.v.iter()).copied(),
    );
    let rhs = |t: T, y: &SVector<T, 12>| {
        let (s1, s2) = split(y);
        let u = accel(t, &s1, &s2);
        let a1 = two_body(&s1.r, mu) + s1.rtn_to_inertial(&u.u1);
        let a2 = two_body(&s2.r, mu) + s2.rtn_to_inertial(&u.u2);
        Ok(SVector::<T, 12>::from_iterator(
            s1.v.iter().chain(a1.iter()).chain(s2.v.iter()).chain(a2.iter()).copied(),
        ))
    };
    let ys = integrate(rhs, t0, y0, times, opts)?;
    Ok(times
        .iter()
        .zip(ys.iter())
        .map(|(&t, y)| {
            let (s1, s2) = split(y);
            CowellSample {
                t,
                sat1: s1,
                sat2: s2,
                dr_rtn1: s1.inertial_to_rtn(&(s2.r - s1.r)),
            }
        })
        .collect())
}
