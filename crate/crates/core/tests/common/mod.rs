#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use nodal_core::dynamics::{cartesian_to_elements, elements_to_cartesian, CartesianState};
use nodal_core::frames::{relative_orientation, ClassicalElements};
use nodal_core::relstate::{NodalRelativeState, ReferenceParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const MU: f64 = 398600.4418;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_elements(rng: &mut impl Rng) -> ClassicalElements<f64> {
    ClassicalElements::new(
        rng.random_range(6800.0..20000.0),
        rng.random_range(0.0..0.6),
        rng.random_range(0.01..PI - 0.01),
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
    )
    .unwrap()
}

/// A random pair with relative inclination inside `(0.01, pi - 0.01)`.
pub fn random_pair(rng: &mut impl Rng) -> (ClassicalElements<f64>, ClassicalElements<f64>) {
    loop {
        let a = random_elements(rng);
        let b = random_elements(rng);
        if let Ok(o) = relative_orientation(&a, &b) {
            if o.gamma > 0.01 && o.gamma < PI - 0.01 {
                return (a, b);
            }
        }
    }
}

/// A random relative state near the origin with noncoplanar geometry.
pub fn random_state(rng: &mut impl Rng) -> (NodalRelativeState<f64>, ReferenceParams<f64>) {
    let e1: f64 = rng.random_range(0.0..0.5);
    let v1: f64 = rng.random_range(0.0..TAU);
    let eta = ReferenceParams::new(rng.random_range(6000.0..20000.0), e1 * v1.cos(), e1 * v1.sin()).unwrap();
    let mut s = || rng.random_range(-1.0..1.0);
    let oe = NodalRelativeState {
        dtheta: 0.3 * s(),
        dp: 0.05 * s(),
        dxi_x: 0.05 * s(),
        dxi_y: 0.05 * s(),
        dh_x: 0.2 * s(),
        dh_y: 0.2 * s(),
    };
    (oe, eta)
}

/// Orbit through the current position of `el` with velocity perturbed by
/// `dv` (inertial). Returns `None` if the result is not a usable ellipse.
pub fn orbit_through_point(el: &ClassicalElements<f64>, dv: Vector3<f64>) -> Option<ClassicalElements<f64>> {
    let s = elements_to_cartesian(el, MU);
    let s2 = CartesianState { r: s.r, v: s.v + dv };
    let o = cartesian_to_elements(&s2, MU).ok()?;
    let p = o.elements.semiparameter();
    let rp = o.elements.a * (1.0 - o.elements.e);
    (o.elements.e < 0.9 && rp > 6400.0 && p.is_finite()).then_some(o.elements)
}

/// Column `j` of a central finite difference of `f` at `x`, Richardson-extrapolated
/// from steps `h` and `h / 2`.
pub fn central_diff<const N: usize, const M: usize>(
    f: impl Fn(&nalgebra::SVector<f64, N>) -> nalgebra::SVector<f64, M>,
    x: &nalgebra::SVector<f64, N>,
    j: usize,
    h: f64,
) -> nalgebra::SVector<f64, M> {
    let d = |h: f64| {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

/// Asserts `|a - b| <= rel * max(|b|, floor)` entrywise.
pub fn assert_rel_close(a: f64, b: f64, rel: f64, floor: f64, what: &str) {
    let scale = b.abs().max(floor);
    assert!((a - b).abs() <= rel * scale, "{what}: analytic {a:e} vs numeric {b:e}");
}
