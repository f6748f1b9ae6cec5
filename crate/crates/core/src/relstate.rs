//! The six nodal relative states, the reference-orbit parameters, and the
//! mapping from both to local (RTN of satellite 1) position and velocity.

use nalgebra::{Matrix3, Matrix3x6, Vector2, Vector3, Vector6};

use crate::dynamics::{f_eta, f_unperturbed};
use crate::error::{to_f64, Error, Result};
use crate::frames::{relative_orientation, ClassicalElements, COPLANAR_GAMMA};
use crate::scalar::{lit, wrap_pi, Real};

/// Relative state of satellite 2 with respect to satellite 1.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NodalRelativeState<T: Real> {
    /// Phase `theta2 - theta1`, wrapped to `(-pi, pi]`.
    pub dtheta: T,
    /// Relative semiparameter error `(p2 - p1) / p1`.
    pub dp: T,
    pub dxi_x: T,
    pub dxi_y: T,
    /// `tan(gamma / 2) (cos theta1, sin theta1)`.
    pub dh_x: T,
    pub dh_y: T,
}

impl<T: Real> NodalRelativeState<T> {
    pub fn zero() -> Self {
        Self {
            dtheta: T::zero(),
            dp: T::zero(),
            dxi_x: T::zero(),
            dxi_y: T::zero(),
            dh_x: T::zero(),
            dh_y: T::zero(),
        }
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(self.dtheta, self.dp, self.dxi_x, self.dxi_y, self.dh_x, self.dh_y)
    }

    /// Builds a state from `[dtheta, dp, dxi_x, dxi_y, dh_x, dh_y]`, wrapping the phase.
    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self {
            dtheta: wrap_pi(v[0]),
            dp: v[1],
            dxi_x: v[2],
            dxi_y: v[3],
            dh_x: v[4],
            dh_y: v[5],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite()) && self.dp > -T::one()
    }

    /// Magnitude of the relative eccentricity vector.
    pub fn dxi(&self) -> T {
        self.dxi_x.hypot(self.dxi_y)
    }

    /// Magnitude of the relative inclination vector, `tan(gamma / 2)`.
    pub fn dh(&self) -> T {
        self.dh_x.hypot(self.dh_y)
    }
}

/// Reference-orbit parameters `[p1, e1 cos v1, e1 sin v1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceParams<T: Real> {
    pub p1: T,
    pub ec: T,
    pub es: T,
}

impl<T: Real> ReferenceParams<T> {
    pub fn new(p1: T, ec: T, es: T) -> Result<Self> {
        if !(p1 > T::zero()) || !(ec * ec + es * es < T::one()) {
            return Err(Error::InvalidInput(format!(
                "reference parameters p1={} ec={} es={}",
                to_f64(p1),
                to_f64(ec),
                to_f64(es)
            )));
        }
        Ok(Self { p1, ec, es })
    }

    pub fn from_elements(el: &ClassicalElements<T>) -> Self {
        Self {
            p1: el.semiparameter(),
            ec: el.e * el.nu.cos(),
            es: el.e * el.nu.sin(),
        }
    }

    pub fn to_vector(&self) -> Vector3<T> {
        Vector3::new(self.p1, self.ec, self.es)
    }

    pub fn from_vector(v: &Vector3<T>) -> Self {
        Self {
            p1: v[0],
            ec: v[1],
            es: v[2],
        }
    }

    pub fn e1(&self) -> T {
        self.ec.hypot(self.es)
    }

    /// True anomaly of satellite 1 (zero for a circular reference orbit).
    pub fn v1(&self) -> T {
        self.es.atan2(self.ec)
    }

    pub fn r1(&self) -> T {
        self.p1 / (T::one() + self.ec)
    }

    /// Keplerian true-anomaly rate `sqrt(mu / p1^3) (1 + e1 cos v1)^2`.
    pub fn true_anomaly_rate(&self, mu: T) -> T {
        let k = T::one() + self.ec;
        (mu / (self.p1 * self.p1 * self.p1)).sqrt() * k * k
    }
}

/// Nodal states and reference parameters of a pair of classical element sets.
pub fn oe_from_classical<T: Real>(
    el1: &ClassicalElements<T>,
    el2: &ClassicalElements<T>,
) -> Result<(NodalRelativeState<T>, ReferenceParams<T>)> {
    let o = relative_orientation(el1, el2)?;
    let p1 = el1.semiparameter();
    let p2 = el2.semiparameter();
    let half_tan = (o.gamma / lit(2.0)).tan();
    let u2 = o.theta1 - o.lambda2;
    let u1 = o.theta1 - o.lambda1;
    let oe = NodalRelativeState {
        dtheta: wrap_pi(o.theta2 - o.theta1),
        dp: (p2 - p1) / p1,
        dxi_x: el2.e * u2.cos() - el1.e * u1.cos(),
        dxi_y: el2.e * u2.sin() - el1.e * u1.sin(),
        dh_x: half_tan * o.theta1.cos(),
        dh_y: half_tan * o.theta1.sin(),
    };
    Ok((oe, ReferenceParams::from_elements(el1)))
}

/// Node-referenced angles; available only for noncoplanar pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalAngles<T: Real> {
    pub theta1: T,
    pub theta2: T,
    pub lambda1: T,
    pub lambda2: T,
}

/// Orbit invariants recovered from `(oe, eta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveredElements<T: Real> {
    pub a2: T,
    pub e2: T,
    pub gamma: T,
    /// `lambda2 - lambda1`, meaningful when `e2 > 0`.
    pub dlambda: T,
    pub dtheta: T,
    /// `None` when the relative node is undefined (coplanar pair).
    pub nodal: Option<NodalAngles<T>>,
}

impl<T: Real> RecoveredElements<T> {
    pub fn nodal_angles(&self) -> Result<NodalAngles<T>> {
        self.nodal.ok_or(Error::AmbiguousTheta1)
    }
}

/// Eccentricity of orbit 2 from the relative eccentricity vector.
pub fn e2_from_state<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> T {
    let (x, y) = (oe.dxi_x + eta.ec, oe.dxi_y + eta.es);
    x.hypot(y)
}

/// `lambda2 - lambda1`.
pub fn dlambda_from_state<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> T {
    let e1 = eta.e1();
    if e1 == T::zero() {
        // lambda1 undefined; measure from the reference direction instead.
        return (-oe.dxi_y).atan2(oe.dxi_x);
    }
    let (c, s) = (eta.ec / e1, eta.es / e1);
    (oe.dxi_x * s - oe.dxi_y * c).atan2(oe.dxi_x * c + oe.dxi_y * s + e1)
}

/// Recovers `{a2, e2, gamma, lambda_j, theta_j}` from the relative states.
///
/// `e2` is evaluated as the norm of `dxi + e1 (cos v1, sin v1)`, which equals
/// `sqrt(dxi^2 + e1^2 + 2 e1 (dxi_x cos v1 + dxi_y sin v1))` without the cancellation.
pub fn classical_from_oe<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
) -> Result<RecoveredElements<T>> {
    let e2 = e2_from_state(oe, eta);
    if e2 >= T::one() {
        return Err(Error::InvalidInput(format!("recovered e2 = {} is not elliptic", to_f64(e2))));
    }
    let a2 = eta.p1 * (T::one() + oe.dp) / (T::one() - e2 * e2);
    let dh = oe.dh();
    let gamma = lit::<T>(2.0) * dh.atan();
    let dlambda = dlambda_from_state(oe, eta);
    let nodal = if gamma < lit(COPLANAR_GAMMA) {
        None
    } else {
        let theta1 = oe.dh_y.atan2(oe.dh_x);
        let lambda1 = wrap_pi(theta1 - eta.v1());
        Some(NodalAngles {
            theta1,
            theta2: wrap_pi(theta1 + oe.dtheta),
            lambda1,
            lambda2: wrap_pi(lambda1 + dlambda),
        })
    };
    Ok(RecoveredElements {
        a2,
        e2,
        gamma,
        dlambda,
        dtheta: oe.dtheta,
        nodal,
    })
}

/// Relative eccentricity and inclination vectors in the node-aligned frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EccIncVectors<T: Real> {
    /// `None` when the relative node is undefined (`dh = 0`).
    pub de: Option<Vector2<T>>,
    pub di: Vector2<T>,
    pub dxi_mag: T,
    pub dh_mag: T,
    /// Phase between the two vectors; `None` if either magnitude is zero.
    pub dphi: Option<T>,
}

pub fn ecc_inc_vectors<T: Real>(oe: &NodalRelativeState<T>, _eta: &ReferenceParams<T>) -> EccIncVectors<T> {
    let dxi_mag = oe.dxi();
    let dh_mag = oe.dh();
    let de = (dh_mag > T::zero()).then(|| {
        // [dxi_x, dxi_y] = R(theta1) [de_x, -de_y]
        let (s, c) = oe.dh_y.atan2(oe.dh_x).sin_cos();
        let x = c * oe.dxi_x + s * oe.dxi_y;
        let y = -s * oe.dxi_x + c * oe.dxi_y;
        Vector2::new(x, -y)
    });
    let dphi = (dxi_mag > T::zero() && dh_mag > T::zero())
        .then(|| wrap_pi(oe.dh_y.atan2(oe.dh_x) - oe.dxi_y.atan2(oe.dxi_x)));
    EccIncVectors {
        de,
        di: Vector2::new(dh_mag, T::zero()),
        dxi_mag,
        dh_mag,
        dphi,
    }
}

/// Angle between the two position vectors from `hav psi = hav dtheta + sin theta1 sin theta2 hav gamma`.
pub fn haversine_psi<T: Real>(theta1: T, theta2: T, gamma: T) -> T {
    let hav = |x: T| {
        let s = (x / lit(2.0)).sin();
        s * s
    };
    let h = hav(theta2 - theta1) + theta1.sin() * theta2.sin() * hav(gamma);
    let h = h.max(T::zero()).min(T::one());
    lit::<T>(2.0) * h.sqrt().asin()
}

/// Relative position of satellite 2 in RTN of satellite 1, with its intermediate quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativePosition<T: Real> {
    pub dr: Vector3<T>,
    pub r1: T,
    pub r2: T,
    /// `r2 / r1`.
    pub q: T,
    /// Unit vector toward satellite 2 in RTN of satellite 1.
    pub b: Vector3<T>,
}

impl<T: Real> RelativePosition<T> {
    /// Range from `r1 sqrt(1 + q^2 - 2 q b1)`.
    pub fn range(&self) -> T {
        let q = self.q;
        self.r1 * (T::one() + q * q - lit::<T>(2.0) * q * self.b[0]).max(T::zero()).sqrt()
    }
}

/// Denominator of the radius of satellite 2: `1 + (dxi_x + ec) cos dtheta - (dxi_y + es) sin dtheta`.
pub(crate) fn radius2_denominator<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> T {
    let (s, c) = oe.dtheta.sin_cos();
    T::one() + (oe.dxi_x + eta.ec) * c - (oe.dxi_y + eta.es) * s
}

pub(crate) fn check_denominator<T: Real>(d: T) -> Result<T> {
    if d > T::zero() && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::GeometryError { denominator: to_f64(d) })
    }
}

fn unit_direction<T: Real>(oe: &NodalRelativeState<T>) -> Vector3<T> {
    let (hx, hy) = (oe.dh_x, oe.dh_y);
    let (s, c) = oe.dtheta.sin_cos();
    let two = lit::<T>(2.0);
    let den = T::one() + hx * hx + hy * hy;
    Vector3::new(
        ((T::one() + hx * hx - hy * hy) * c - two * hx * hy * s) / den,
        ((T::one() - hx * hx + hy * hy) * s - two * hx * hy * c) / den,
        (two * hy * c + two * hx * s) / den,
    )
}

pub fn relative_position<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
) -> Result<RelativePosition<T>> {
    let d = check_denominator(radius2_denominator(oe, eta))?;
    let r1 = eta.r1();
    let r2 = eta.p1 * (T::one() + oe.dp) / d;
    let b = unit_direction(oe);
    Ok(RelativePosition {
        dr: b * r2 - Vector3::x() * r1,
        r1,
        r2,
        q: r2 / r1,
        b,
    })
}

/// Analytic partials of the relative position with respect to `oe` (3x6) and `eta` (3x3).
///
/// Uses `dr = r2 b - r1 x`, where `r2 = p1 (1 + dp) / D` depends on
/// `(dtheta, dp, dxi, eta)` and `b` on `(dtheta, dh)`.
pub fn position_jacobians<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
) -> Result<(Matrix3x6<T>, Matrix3<T>)> {
    let d = check_denominator(radius2_denominator(oe, eta))?;
    let (s, c) = oe.dtheta.sin_cos();
    let one = T::one();
    let two = lit::<T>(2.0);
    let r2 = eta.p1 * (one + oe.dp) / d;
    let b = unit_direction(oe);

    // Partials of D.
    let e_theta = (oe.dxi_x + eta.ec) * s + (oe.dxi_y + eta.es) * c;
    let dd_dtheta = -e_theta;
    let dd_dxi = (c, -s);

    // Partials of r2.
    let dr2_dtheta = -r2 / d * dd_dtheta;
    let dr2_ddp = eta.p1 / d;
    let dr2_dxix = -r2 / d * dd_dxi.0;
    let dr2_dxiy = -r2 / d * dd_dxi.1;
    let dr2_dp1 = (one + oe.dp) / d;
    let dr2_dec = -r2 / d * c;
    let dr2_des = r2 / d * s;

    // Partials of b.
    let (hx, hy) = (oe.dh_x, oe.dh_y);
    let den = one + hx * hx + hy * hy;
    let db_dtheta = Vector3::new(
        (-(one + hx * hx - hy * hy) * s - two * hx * hy * c) / den,
        ((one - hx * hx + hy * hy) * c + two * hx * hy * s) / den,
        (-two * hy * s + two * hx * c) / den,
    );
    let db_dhx = (Vector3::new(two * hx * c - two * hy * s, -two * hx * s - two * hy * c, two * s)
        - b * (two * hx))
        / den;
    let db_dhy = (Vector3::new(-two * hy * c - two * hx * s, two * hy * s - two * hx * c, two * c)
        - b * (two * hy))
        / den;

    let mut j_oe = Matrix3x6::zeros();
    j_oe.set_column(0, &(b * dr2_dtheta + db_dtheta * r2));
    j_oe.set_column(1, &(b * dr2_ddp));
    j_oe.set_column(2, &(b * dr2_dxix));
    j_oe.set_column(3, &(b * dr2_dxiy));
    j_oe.set_column(4, &(db_dhx * r2));
    j_oe.set_column(5, &(db_dhy * r2));

    let k = one + eta.ec;
    let dr1_dp1 = one / k;
    let dr1_dec = -eta.p1 / (k * k);
    let ex = Vector3::x();
    let mut j_eta = Matrix3::zeros();
    j_eta.set_column(0, &(b * dr2_dp1 - ex * dr1_dp1));
    j_eta.set_column(1, &(b * dr2_dec - ex * dr1_dec));
    j_eta.set_column(2, &(b * dr2_des));
    Ok((j_oe, j_eta))
}

/// Relative velocity in RTN of satellite 1 under Keplerian motion.
pub fn relative_velocity<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    mu: T,
) -> Result<Vector3<T>> {
    let (j_oe, j_eta) = position_jacobians(oe, eta)?;
    Ok(j_oe * f_unperturbed(oe, eta, mu) + j_eta * f_eta(eta, mu))
}

/// Relative position and velocity in RTN of satellite 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalState<T: Real> {
    pub dr: Vector3<T>,
    pub dv: Vector3<T>,
}

pub fn local_state<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    mu: T,
) -> Result<LocalState<T>> {
    Ok(LocalState {
        dr: relative_position(oe, eta)?.dr,
        dv: relative_velocity(oe, eta, mu)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{dcm_rtn2_to_rtn1, relative_orientation};
    use approx::assert_abs_diff_eq;

    fn paper_pair() -> (ClassicalElements<f64>, ClassicalElements<f64>) {
        (
            ClassicalElements::from_degrees(8.9e3, 0.5, 10.0, 20.0, 0.0, 30.0).unwrap(),
            ClassicalElements::from_degrees(6.8e3, 0.1, 40.0, 90.0, 30.0, 70.0).unwrap(),
        )
    }

    #[test]
    fn identical_orbits_give_zero_state() {
        let (el1, _) = paper_pair();
        let (oe, eta) = oe_from_classical(&el1, &el1).unwrap();
        assert!(oe.to_vector().amax() < 1e-12);
        assert_abs_diff_eq!(eta.p1, el1.semiparameter(), epsilon = 1e-9);
        let rec = classical_from_oe(&oe, &eta).unwrap();
        assert_abs_diff_eq!(rec.e2, el1.e, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.a2, el1.a, epsilon = 1e-8);
        assert!(rec.gamma < 1e-12);
        assert_eq!(rec.nodal_angles(), Err(Error::AmbiguousTheta1));
    }

    #[test]
    fn circular_coplanar_phase_offset() {
        let el1 = ClassicalElements::new(7000.0, 0.0, 0.3, 0.2, 0.0, 0.1).unwrap();
        let el2 = el1.with_true_anomaly(0.1 + 0.25);
        let (oe, _) = oe_from_classical(&el1, &el2).unwrap();
        assert_abs_diff_eq!(oe.dtheta, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(oe.dp, 0.0);
        assert_abs_diff_eq!(oe.dxi(), 0.0);
        assert!(oe.dh() < 1e-12);
    }

    #[test]
    fn paper_pair_matches_direct_evaluation() {
        // Direct evaluation of the parameter definitions from the orientation angles.
        let (el1, el2) = paper_pair();
        let o = relative_orientation(&el1, &el2).unwrap();
        let (oe, eta) = oe_from_classical(&el1, &el2).unwrap();
        let p1 = 8.9e3 * (1.0 - 0.25);
        let p2 = 6.8e3 * (1.0 - 0.01);
        assert_abs_diff_eq!(oe.dp, (p2 - p1) / p1, epsilon = 1e-15);
        assert_abs_diff_eq!(oe.dxi_x, 0.1 * (o.theta1 - o.lambda2).cos() - 0.5 * (30f64.to_radians()).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(oe.dh(), (o.gamma / 2.0).tan(), epsilon = 1e-15);
        assert_abs_diff_eq!(eta.ec, 0.5 * 30f64.to_radians().cos(), epsilon = 1e-15);

        let rec = classical_from_oe(&oe, &eta).unwrap();
        let n = rec.nodal_angles().unwrap();
        assert_abs_diff_eq!(rec.a2, 6.8e3, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.e2, 0.1, epsilon = 1e-13);
        assert_abs_diff_eq!(rec.gamma, o.gamma, epsilon = 1e-13);
        assert_abs_diff_eq!(n.lambda1, o.lambda1, epsilon = 1e-12);
        assert_abs_diff_eq!(n.lambda2, o.lambda2, epsilon = 1e-12);
        assert_abs_diff_eq!(n.theta2, o.theta2, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_recoveries() {
        let eta = ReferenceParams::new(7000.0, 0.0, 0.0).unwrap();
        let rec = classical_from_oe(&NodalRelativeState::zero(), &eta).unwrap();
        assert_eq!(rec.e2, 0.0);
        assert_eq!(rec.a2, 7000.0);
        assert_eq!(rec.gamma, 0.0);
    }

    #[test]
    fn aligned_vectors_have_zero_phase() {
        let oe = NodalRelativeState { dxi_x: 0.02, dh_x: 0.3, ..NodalRelativeState::zero() };
        let eta = ReferenceParams::new(7000.0, 0.1, 0.0).unwrap();
        let v = ecc_inc_vectors(&oe, &eta);
        assert_eq!(v.dphi, Some(0.0));
        assert_abs_diff_eq!(v.de.unwrap(), Vector2::new(0.02, 0.0));
        let none = ecc_inc_vectors(&NodalRelativeState { dh_x: 0.0, ..oe }, &eta);
        assert_eq!(none.dphi, None);
        assert_eq!(none.de, None);
    }

    #[test]
    fn phase_two_path_equality() {
        // Eq. for de from recovered {e_j, lambda_j}, versus the rotation of dxi.
        let (el1, el2) = paper_pair();
        let (oe, eta) = oe_from_classical(&el1, &el2).unwrap();
        let v = ecc_inc_vectors(&oe, &eta);
        let rec = classical_from_oe(&oe, &eta).unwrap();
        let n = rec.nodal_angles().unwrap();
        let de = Vector2::new(
            rec.e2 * n.lambda2.cos() - el1.e * n.lambda1.cos(),
            rec.e2 * n.lambda2.sin() - el1.e * n.lambda1.sin(),
        );
        assert_abs_diff_eq!(v.de.unwrap(), de, epsilon = 1e-13);
        assert_abs_diff_eq!(v.dphi.unwrap(), de.y.atan2(de.x), epsilon = 1e-12);
        assert_abs_diff_eq!(v.dxi_mag, de.norm(), epsilon = 1e-14);
    }

    #[test]
    fn haversine_cases() {
        assert_abs_diff_eq!(haversine_psi(0.3, -0.2, 0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(haversine_psi(0.0, 0.0, 1.1), 0.0);
        for &(t1, t2, g) in &[(0.3, 1.2, 0.7), (-2.0, 2.5, 2.0), (1.0, -0.4, 0.1)] {
            let h = (g / 2.0f64).tan();
            let oe = NodalRelativeState {
                dtheta: wrap_pi(t2 - t1),
                dh_x: h * f64::cos(t1),
                dh_y: h * f64::sin(t1),
                ..NodalRelativeState::zero()
            };
            let eta = ReferenceParams::new(7000.0, 0.0, 0.0).unwrap();
            let b = relative_position(&oe, &eta).unwrap().b;
            assert_abs_diff_eq!(haversine_psi(t1, t2, g), b[0].clamp(-1.0, 1.0).acos(), epsilon = 1e-7);
        }
    }

    #[test]
    fn position_at_origin_and_coplanar() {
        let eta = ReferenceParams::<f64>::new(7000.0, 0.1, 0.05).unwrap();
        let p = relative_position(&NodalRelativeState::zero(), &eta).unwrap();
        assert_abs_diff_eq!(p.dr, Vector3::zeros(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.q, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.b, Vector3::x());

        let oe = NodalRelativeState { dp: 0.02, dxi_x: 0.01, ..NodalRelativeState::zero() };
        let p = relative_position(&oe, &eta).unwrap();
        assert_abs_diff_eq!(p.b, Vector3::x());
        assert_abs_diff_eq!(p.dr.norm(), p.r1 * (p.q - 1.0).abs(), epsilon = 1e-9);
        assert_abs_diff_eq!(p.range(), p.dr.norm(), epsilon = 1e-9);
    }

    #[test]
    fn position_matches_inertial_difference() {
        let (el1, el2) = paper_pair();
        let (oe, eta) = oe_from_classical(&el1, &el2).unwrap();
        let p = relative_position(&oe, &eta).unwrap();
        // Chain through the frames: RTN2 radius rotated into RTN1 minus r1.
        let o = relative_orientation(&el1, &el2).unwrap();
        let dr = dcm_rtn2_to_rtn1(o.theta1, o.gamma, o.theta2) * Vector3::new(el2.radius(), 0.0, 0.0)
            - Vector3::new(el1.radius(), 0.0, 0.0);
        assert_abs_diff_eq!(p.dr, dr, epsilon = 1e-9 * el1.radius());
        assert_abs_diff_eq!(p.b.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn geometry_error_on_nonpositive_denominator() {
        let eta = ReferenceParams::new(7000.0, 0.0, 0.0).unwrap();
        let oe = NodalRelativeState { dxi_x: -1.5, ..NodalRelativeState::zero() };
        assert!(matches!(relative_position(&oe, &eta), Err(Error::GeometryError { .. })));
    }

    #[test]
    fn jacobians_at_origin() {
        let eta = ReferenceParams::new(7000.0, 0.0, 0.0).unwrap();
        let (j, _) = position_jacobians(&NodalRelativeState::zero(), &eta).unwrap();
        assert_abs_diff_eq!(j[(0, 1)], 7000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j.column(0).into_owned(), Vector3::new(0.0, 7000.0, 0.0), epsilon = 1e-9);
    }

    #[test]
    fn colocated_circular_has_zero_velocity() {
        let eta = ReferenceParams::new(7000.0, 0.0, 0.0).unwrap();
        let v = relative_velocity(&NodalRelativeState::zero(), &eta, 398600.4418).unwrap();
        assert_abs_diff_eq!(v, Vector3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn nonsingular_for_circular_orbits_and_small_gamma() {
        let el1 = ClassicalElements::new(7000.0, 0.0, 0.5, 0.1, 0.0, 0.4).unwrap();
        let mut prev: Option<NodalRelativeState<f64>> = None;
        for k in 0..6 {
            let di = 10f64.powi(-(k + 4));
            let el2 = ClassicalElements::new(7010.0, 0.0, 0.5 + di, 0.1, 0.0, 0.41).unwrap();
            let (oe, _) = oe_from_classical(&el1, &el2).unwrap();
            assert!(oe.is_valid());
            if let Some(p) = prev {
                assert!((oe.dtheta - p.dtheta).abs() < 1e-3);
                assert!((oe.dp - p.dp).abs() < 1e-15);
            }
            prev = Some(oe);
        }
    }
}
