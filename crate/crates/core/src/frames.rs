//! Elementary rotations, direction cosine matrices and the conversion from two
//! sets of classical elements to the relative orientation of their orbits.
//!
//! Rotations follow the coordinate-basis convention: `rot_z(t)` maps the
//! coordinates of a vector in a frame to its coordinates in the frame rotated
//! by `t` about Z. Chaining `rot_z(argp) * rot_x(inc) * rot_z(raan)` therefore
//! transforms inertial coordinates into perifocal coordinates.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{to_f64, Error, Result};
use crate::scalar::{lit, wrap_pi, Real};

/// Relative inclinations below this value are treated as coplanar.
pub const COPLANAR_GAMMA: f64 = 1e-9;
/// Relative inclinations above `pi - RETROGRADE_MARGIN` are rejected.
pub const RETROGRADE_MARGIN: f64 = 1e-6;

/// A proper orthonormal 3x3 direction cosine matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dcm<T: Real>(Matrix3<T>);

impl<T: Real> Dcm<T> {
    pub fn identity() -> Self {
        Dcm(Matrix3::identity())
    }

    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<T>) -> Self {
        Dcm(m)
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Dcm(self.0.transpose())
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.0[(row, col)]
    }

    /// Largest deviation of `D^T D` from identity and of `det D` from one.
    pub fn orthonormality_error(&self) -> T {
        let gram = self.0.transpose() * self.0 - Matrix3::identity();
        let det = (self.0.determinant() - T::one()).abs();
        gram.amax().max(det)
    }
}

impl<T: Real> Mul for Dcm<T> {
    type Output = Dcm<T>;
    fn mul(self, rhs: Dcm<T>) -> Dcm<T> {
        Dcm(self.0 * rhs.0)
    }
}

impl<T: Real> Mul<Vector3<T>> for Dcm<T> {
    type Output = Vector3<T>;
    fn mul(self, rhs: Vector3<T>) -> Vector3<T> {
        self.0 * rhs
    }
}

/// Coordinate rotation about the X axis.
pub fn rot_x<T: Real>(theta: T) -> Dcm<T> {
    let (s, c) = theta.sin_cos();
    let (o, l) = (T::zero(), T::one());
    Dcm(Matrix3::new(l, o, o, o, c, s, o, -s, c))
}

/// Coordinate rotation about the Z axis.
pub fn rot_z<T: Real>(theta: T) -> Dcm<T> {
    let (s, c) = theta.sin_cos();
    let (o, l) = (T::zero(), T::one());
    Dcm(Matrix3::new(c, s, o, -s, c, o, o, o, l))
}

/// Classical orbital elements of one satellite in the primary-centred
/// inertial frame. Lengths in km, angles in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalElements<T: Real> {
    pub a: T,
    pub e: T,
    pub inc: T,
    pub raan: T,
    pub argp: T,
    pub nu: T,
}

impl<T: Real> ClassicalElements<T> {
    /// Validates a closed orbit and wraps `raan`, `argp`, `nu` to `(-pi, pi]`.
    pub fn new(a: T, e: T, inc: T, raan: T, argp: T, nu: T) -> Result<Self> {
        let finite = [a, e, inc, raan, argp, nu].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite orbital element".into()));
        }
        if a <= T::zero() {
            return Err(Error::InvalidInput(format!("semimajor axis {} <= 0", to_f64(a))));
        }
        if e < T::zero() || e >= T::one() {
            return Err(Error::InvalidInput(format!("eccentricity {} not in [0, 1)", to_f64(e))));
        }
        if inc < T::zero() || inc > T::pi() {
            return Err(Error::InvalidInput(format!("inclination {} not in [0, pi]", to_f64(inc))));
        }
        Ok(Self {
            a,
            e,
            inc,
            raan: wrap_pi(raan),
            argp: wrap_pi(argp),
            nu: wrap_pi(nu),
        })
    }

    /// Same as [`ClassicalElements::new`] with the four angles given in degrees.
    pub fn from_degrees(a: T, e: T, inc: T, raan: T, argp: T, nu: T) -> Result<Self> {
        let r = |d: T| d * T::pi() / lit(180.0);
        Self::new(a, e, r(inc), r(raan), r(argp), r(nu))
    }

    /// Semiparameter `a (1 - e^2)`.
    pub fn semiparameter(&self) -> T {
        self.a * (T::one() - self.e * self.e)
    }

    pub fn radius(&self) -> T {
        self.semiparameter() / (T::one() + self.e * self.nu.cos())
    }

    pub fn with_true_anomaly(&self, nu: T) -> Self {
        Self {
            nu: wrap_pi(nu),
            ..*self
        }
    }
}

/// Inertial-to-perifocal DCM `T_Z(argp) T_X(inc) T_Z(raan)`.
pub fn pci_to_pqw<T: Real>(el: &ClassicalElements<T>) -> Dcm<T> {
    rot_z(el.argp) * rot_x(el.inc) * rot_z(el.raan)
}

/// Inertial-to-RTN DCM of a satellite (perifocal frame rotated by the true anomaly).
pub fn pci_to_rtn<T: Real>(el: &ClassicalElements<T>) -> Dcm<T> {
    rot_z(el.nu) * pci_to_pqw(el)
}

/// Orientation of orbit 2 relative to orbit 1, referred to the relative node
/// (the ascending crossing of orbit 2 through the plane of orbit 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeOrientation<T: Real> {
    /// Relative inclination in `[0, pi)`.
    pub gamma: T,
    /// Arc from the ascending node of orbit 1 to the relative node.
    pub alpha1: T,
    /// Arc from the ascending node of orbit 2 to the relative node.
    pub alpha2: T,
    /// Periapsis angles from the relative node.
    pub lambda1: T,
    pub lambda2: T,
    /// Position angles from the relative node.
    pub theta1: T,
    pub theta2: T,
    /// Set when `gamma` is below [`COPLANAR_GAMMA`]; the relative node is then
    /// placed at the ascending node of orbit 1 (`alpha1 = 0`).
    pub coplanar: bool,
}

/// Node offsets and relative inclination extracted from
/// `T_Z(-alpha1) T_X(-gamma) T_Z(alpha2) = T_X(i1) T_Z(raan1 - raan2) T_X(-i2)`.
///
/// With `M` the right-hand side, the left-hand product gives
/// `M[2][2] = cos gamma`, `(M[2][0], M[2][1]) = sin gamma (-sin alpha2, cos alpha2)` and
/// `(M[0][2], M[1][2]) = sin gamma (sin alpha1, -cos alpha1)`.
/// In the coplanar limit `M = T_Z(alpha2 - alpha1)` and `alpha2` comes from `(M[0][1], M[0][0])`.
pub fn relative_orientation<T: Real>(
    el1: &ClassicalElements<T>,
    el2: &ClassicalElements<T>,
) -> Result<RelativeOrientation<T>> {
    let m = (rot_x(el1.inc) * rot_z(el1.raan - el2.raan) * rot_x(-el2.inc)).0;
    let sin_gamma = (m[(2, 0)] * m[(2, 0)] + m[(2, 1)] * m[(2, 1)]).sqrt();
    let gamma = sin_gamma.atan2(m[(2, 2)]);
    if gamma > T::pi() - lit(RETROGRADE_MARGIN) {
        return Err(Error::RetrogradeSingularity { gamma: to_f64(gamma) });
    }
    let coplanar = gamma < lit(COPLANAR_GAMMA);
    let (alpha1, alpha2) = if coplanar {
        (T::zero(), m[(0, 1)].atan2(m[(0, 0)]))
    } else {
        (m[(0, 2)].atan2(-m[(1, 2)]), (-m[(2, 0)]).atan2(m[(2, 1)]))
    };
    let lambda1 = wrap_pi(el1.argp - alpha1);
    let lambda2 = wrap_pi(el2.argp - alpha2);
    Ok(RelativeOrientation {
        gamma,
        alpha1,
        alpha2,
        lambda1,
        lambda2,
        theta1: wrap_pi(el1.nu + lambda1),
        theta2: wrap_pi(el2.nu + lambda2),
        coplanar,
    })
}

/// DCM from RTN of satellite 2 to RTN of satellite 1, `T_Z(theta1) T_X(-gamma) T_Z(-theta2)`.
pub fn dcm_rtn2_to_rtn1<T: Real>(theta1: T, gamma: T, theta2: T) -> Dcm<T> {
    rot_z(theta1) * rot_x(-gamma) * rot_z(-theta2)
}
