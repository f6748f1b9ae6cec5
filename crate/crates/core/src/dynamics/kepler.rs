//! Osculating-element conversions and Keplerian time advance.

use nalgebra::Vector3;

use crate::error::{to_f64, Error, Result};
use crate::frames::{pci_to_pqw, pci_to_rtn, ClassicalElements};
use crate::scalar::{lit, wrap_pi, Real};

/// Inertial position (km) and velocity (km/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianState<T: Real> {
    pub r: Vector3<T>,
    pub v: Vector3<T>,
}

impl<T: Real> CartesianState<T> {
    pub fn new(r: Vector3<T>, v: Vector3<T>) -> Result<Self> {
        if r.norm() == T::zero() || !r.iter().chain(v.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("Cartesian state needs finite r != 0".into()));
        }
        Ok(Self { r, v })
    }

    /// Rows are the inertial R, T, N unit vectors of this state.
    pub fn rtn_basis(&self) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
        let rhat = self.r.normalize();
        let nhat = self.r.cross(&self.v).normalize();
        let that = nhat.cross(&rhat);
        (rhat, that, nhat)
    }

    /// Expresses an RTN vector in inertial coordinates.
    pub fn rtn_to_inertial(&self, u: &Vector3<T>) -> Vector3<T> {
        let (r, t, n) = self.rtn_basis();
        r * u[0] + t * u[1] + n * u[2]
    }

    /// Expresses an inertial vector in RTN coordinates of this state.
    pub fn inertial_to_rtn(&self, w: &Vector3<T>) -> Vector3<T> {
        let (r, t, n) = self.rtn_basis();
        Vector3::new(r.dot(w), t.dot(w), n.dot(w))
    }
}

/// Osculating elements with flags for the conventions applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Osculating<T: Real> {
    pub elements: ClassicalElements<T>,
    /// `e` below threshold: `argp = 0` and `nu` is the argument of latitude.
    pub circular: bool,
    /// `sin i` below threshold: `raan = 0` and the node is the inertial X axis.
    pub equatorial: bool,
}

const DEGENERATE: f64 = 1e-11;

pub fn elements_to_cartesian<T: Real>(el: &ClassicalElements<T>, mu: T) -> CartesianState<T> {
    let p = el.semiparameter();
    let (s, c) = el.nu.sin_cos();
    let r = p / (T::one() + el.e * c);
    let vs = (mu / p).sqrt();
    let to_pci = pci_to_pqw(el).transpose();
    CartesianState {
        r: to_pci * Vector3::new(r * c, r * s, T::zero()),
        v: to_pci * Vector3::new(-vs * s, vs * (el.e + c), T::zero()),
    }
}

pub fn cartesian_to_elements<T: Real>(s: &CartesianState<T>, mu: T) -> Result<Osculating<T>> {
    let r = s.r.norm();
    let h = s.r.cross(&s.v);
    let hmag = h.norm();
    let v2 = s.v.norm_squared();
    let energy = v2 / lit(2.0) - mu / r;
    if !(energy < T::zero()) || hmag == T::zero() {
        return Err(Error::NotElliptic { energy: to_f64(energy) });
    }
    let a = -mu / (lit::<T>(2.0) * energy);
    let e_vec = (s.r * (v2 - mu / r) - s.v * s.r.dot(&s.v)) / mu;
    let e = e_vec.norm();
    let hhat = h / hmag;
    let inc = (hhat.x.hypot(hhat.y)).atan2(hhat.z);
    let node = Vector3::new(-h.y, h.x, T::zero());
    let equatorial = node.norm() < lit::<T>(DEGENERATE) * hmag;
    let circular = e < lit(DEGENERATE);

    let nhat = if equatorial { Vector3::x() } else { node.normalize() };
    let raan = if equatorial { T::zero() } else { nhat.y.atan2(nhat.x) };
    let angle_from = |from: &Vector3<T>, to: &Vector3<T>| hhat.dot(&from.cross(to)).atan2(from.dot(to));
    let (argp, nu, e) = if circular {
        (T::zero(), angle_from(&nhat, &s.r), T::zero())
    } else {
        (angle_from(&nhat, &e_vec), angle_from(&e_vec, &s.r), e)
    };
    Ok(Osculating {
        elements: ClassicalElements::new(a, e, inc, raan, argp, nu)?,
        circular,
        equatorial,
    })
}

pub fn true_to_eccentric<T: Real>(nu: T, e: T) -> T {
    let (s, c) = nu.sin_cos();
    ((T::one() - e * e).sqrt() * s).atan2(e + c)
}

pub fn eccentric_to_true<T: Real>(ecc_anomaly: T, e: T) -> T {
    let (s, c) = ecc_anomaly.sin_cos();
    ((T::one() - e * e).sqrt() * s).atan2(c - e)
}

/// Solves Kepler's equation `M = E - e sin E` by Newton iteration.
pub fn solve_kepler<T: Real>(mean_anomaly: T, e: T) -> T {
    let m = wrap_pi(mean_anomaly);
    let mut ea = if e < lit(0.8) { m } else { T::pi() * m.signum() };
    for _ in 0..50 {
        let delta = (ea - e * ea.sin() - m) / (T::one() - e * ea.cos());
        ea -= delta;
        if delta.abs() < lit(1e-15) {
            break;
        }
    }
    ea
}

pub fn mean_motion<T: Real>(a: T, mu: T) -> T {
    (mu / (a * a * a)).sqrt()
}

pub fn period<T: Real>(a: T, mu: T) -> T {
    T::two_pi() / mean_motion(a, mu)
}

/// Advances the true anomaly of an unperturbed orbit by `dt` seconds (negative allowed).
pub fn kepler_advance<T: Real>(el: &ClassicalElements<T>, dt: T, mu: T) -> ClassicalElements<T> {
    let ea = true_to_eccentric(el.nu, el.e);
    let m0 = ea - el.e * ea.sin();
    let m = m0 + mean_motion(el.a, mu) * dt;
    el.with_true_anomaly(eccentric_to_true(solve_kepler(m, el.e), el.e))
}

/// Applies an instantaneous velocity change given in the satellite's RTN frame.
pub fn apply_impulse<T: Real>(el: &ClassicalElements<T>, dv_rtn: &Vector3<T>, mu: T) -> Result<ClassicalElements<T>> {
    let mut s = elements_to_cartesian(el, mu);
    s.v += pci_to_rtn(el).transpose() * *dv_rtn;
    Ok(cartesian_to_elements(&s, mu)?.elements)
}
