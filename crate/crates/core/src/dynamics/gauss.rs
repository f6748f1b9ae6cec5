//! Input matrices of the perturbed nodal dynamics and the variational
//! equations of the relative inclination and nodal elements.

use nalgebra::{Matrix3, Matrix6x3, Vector3, Vector6};

use super::{f_eta, f_unperturbed, PerturbationInput};
use crate::error::{Error, Result};
use crate::frames::{relative_orientation, ClassicalElements, COPLANAR_GAMMA};
use crate::relstate::{check_denominator, radius2_denominator, NodalRelativeState, ReferenceParams};
use crate::scalar::{lit, Real};

/// Matrices mapping RTN accelerations into state rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputMatrices<T: Real> {
    /// Sensitivity of `oe` to the acceleration of satellite 1 (enters with a minus sign).
    pub g1: Matrix6x3<T>,
    /// Sensitivity of `oe` to the acceleration of satellite 2.
    pub g2: Matrix6x3<T>,
    /// Sensitivity of `eta` to the acceleration of satellite 1.
    pub geta: Matrix3<T>,
}

pub fn input_matrices<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    mu: T,
) -> Result<InputMatrices<T>> {
    let d = check_denominator(radius2_denominator(oe, eta))?;
    let one = T::one();
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (s, c) = oe.dtheta.sin_cos();
    let (hx, hy) = (oe.dh_x, oe.dh_y);
    let (xc, xs) = (oe.dxi_x + eta.ec, oe.dxi_y + eta.es);

    let p1 = eta.p1;
    let r1 = eta.r1();
    let p2 = p1 * (one + oe.dp);
    let r2 = p2 / d;
    let h_theta = hx * s + hy * c;
    let e_theta = xc * s + xs * c;
    let hh = one + hx * hx + hy * hy;

    let k2 = r2 / (mu * p2).sqrt();
    let pr2 = p2 / r2;
    #[rustfmt::skip]
    let g2 = Matrix6x3::new(
        T::zero(),    T::zero(),                      h_theta,
        T::zero(),    two * (one + oe.dp),            T::zero(),
        pr2 * s,      two * pr2 * c + e_theta * s,    xs * h_theta,
        pr2 * c,      -two * pr2 * s + e_theta * c,   -xc * h_theta,
        T::zero(),    T::zero(),                      half * hh * c,
        T::zero(),    T::zero(),                      -half * hh * s,
    ) * k2;

    let k1 = r1 / (mu * p1).sqrt();
    let pr1 = p1 / r1;
    #[rustfmt::skip]
    let g1 = Matrix6x3::new(
        T::zero(), T::zero(),           -hy,
        T::zero(), two * (one + oe.dp), T::zero(),
        T::zero(), two * pr1,           -xs * hy,
        pr1,       eta.es,              xc * hy,
        T::zero(), T::zero(),           half * (one + hx * hx - hy * hy),
        T::zero(), T::zero(),           hx * hy,
    ) * k1;

    #[rustfmt::skip]
    let geta = Matrix3::new(
        T::zero(), two * p1,  T::zero(),
        T::zero(), two * pr1, T::zero(),
        pr1,       eta.es,    T::zero(),
    ) * k1;

    Ok(InputMatrices { g1, g2, geta })
}

/// Full perturbed rates `(d oe/dt, d eta/dt)`.
pub fn perturbed_derivative<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    u: &PerturbationInput<T>,
    mu: T,
) -> Result<(Vector6<T>, Vector3<T>)> {
    let base = f_unperturbed(oe, eta, mu);
    let base_eta = f_eta(eta, mu);
    if u.is_zero() {
        return Ok((base, base_eta));
    }
    let g = input_matrices(oe, eta, mu)?;
    Ok((base + g.g2 * u.u2 - g.g1 * u.u1, base_eta + g.geta * u.u1))
}

/// Classical and nodal angles of an orbit pair, as needed by [`nodal_variational`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGeometry<T: Real> {
    pub gamma: T,
    pub alpha1: T,
    pub alpha2: T,
    pub theta1: T,
    pub theta2: T,
    pub inc1: T,
    pub inc2: T,
    pub p1: T,
    pub p2: T,
    pub e1: T,
    pub e2: T,
    pub nu1: T,
    pub nu2: T,
}

impl<T: Real> PairGeometry<T> {
    pub fn from_elements(el1: &ClassicalElements<T>, el2: &ClassicalElements<T>) -> Result<Self> {
        let o = relative_orientation(el1, el2)?;
        Ok(Self {
            gamma: o.gamma,
            alpha1: o.alpha1,
            alpha2: o.alpha2,
            theta1: o.theta1,
            theta2: o.theta2,
            inc1: el1.inc,
            inc2: el2.inc,
            p1: el1.semiparameter(),
            p2: el2.semiparameter(),
            e1: el1.e,
            e2: el2.e,
            nu1: el1.nu,
            nu2: el2.nu,
        })
    }
}

/// Time derivatives of the relative inclination, node offsets and nodal elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalRates<T: Real> {
    pub alpha1: T,
    pub alpha2: T,
    pub gamma: T,
    pub theta1: T,
    pub theta2: T,
    pub lambda1: T,
    pub lambda2: T,
}

/// Rates of `{alpha_j, gamma, theta_j, lambda_j}` under RTN accelerations `u`.
///
/// The periapsis rates divide by `e_j`; circular orbits with in-plane
/// accelerations yield [`Error::CircularPeriapsis`].
pub fn nodal_variational<T: Real>(
    g: &PairGeometry<T>,
    u: &PerturbationInput<T>,
    mu: T,
) -> Result<NodalRates<T>> {
    let r1 = g.p1 / (T::one() + g.e1 * g.nu1.cos());
    let r2 = g.p2 / (T::one() + g.e2 * g.nu2.cos());
    let ut1 = u.u1 * (r1 / (mu * g.p1).sqrt());
    let ut2 = u.u2 * (r2 / (mu * g.p2).sqrt());
    let (un1, un2) = (ut1[2], ut2[2]);

    let (sin_g, cos_g) = g.gamma.sin_cos();
    let planar = g.gamma < lit(COPLANAR_GAMMA);
    if planar && (un1 != T::zero() || un2 != T::zero()) {
        return Err(Error::CoplanarNormalInput);
    }
    let (st1, ct1) = g.theta1.sin_cos();
    let (st2, ct2) = g.theta2.sin_cos();
    // Cross-coupling terms vanish with zero normal input, including the coplanar case.
    let (cot_g, csc_g) = if planar { (T::zero(), T::zero()) } else { (cos_g / sin_g, T::one() / sin_g) };
    let cot = |x: T| x.cos() / x.sin();

    let node1 = st1 * cot_g * un1 - st2 * csc_g * un2;
    let node2 = -st2 * cot_g * un2 + st1 * csc_g * un1;

    let periapsis = |p: T, r: T, e: T, nu: T, ur: T, ut: T| -> Result<T> {
        if ur == T::zero() && ut == T::zero() {
            return Ok(T::zero());
        }
        if e == T::zero() {
            return Err(Error::CircularPeriapsis);
        }
        Ok((p + r) / (r * e) * nu.sin() * ut - p / (r * e) * nu.cos() * ur)
    };

    let alpha1 = if un1 == T::zero() && un2 == T::zero() {
        T::zero()
    } else {
        st2 * csc_g * un2 - (st1 * cot_g + (g.theta1 + g.alpha1).sin() * cot(g.inc1)) * un1
    };
    let alpha2 = if un1 == T::zero() && un2 == T::zero() {
        T::zero()
    } else {
        (st2 * cot_g - (g.theta2 + g.alpha2).sin() * cot(g.inc2)) * un2 - st1 * csc_g * un1
    };

    Ok(NodalRates {
        alpha1,
        alpha2,
        gamma: ct2 * un2 - ct1 * un1,
        theta1: (mu * g.p1).sqrt() / (r1 * r1) + node1,
        theta2: (mu * g.p2).sqrt() / (r2 * r2) + node2,
        lambda1: periapsis(g.p1, r1, g.e1, g.nu1, ut1[0], ut1[1])? + node1,
        lambda2: periapsis(g.p2, r2, g.e2, g.nu2, ut2[0], ut2[1])? + node2,
    })
}

/// State change of `(oe, eta)` to first order for an impulse `dv` on satellite 1.
pub fn impulse_first_order<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    dv: &Vector3<T>,
    mu: T,
) -> Result<(Vector6<T>, Vector3<T>)> {
    let g = input_matrices(oe, eta, mu)?;
    Ok((-(g.g1 * dv), g.geta * dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relstate::oe_from_classical;
    use approx::assert_abs_diff_eq;

    const MU: f64 = 398600.4418;

    #[test]
    fn coplanar_inputs_reduce() {
        let oe = NodalRelativeState { dtheta: 0.3, dp: 0.01, dxi_x: 0.02, dxi_y: -0.01, dh_x: 0.0, dh_y: 0.0 };
        let eta = ReferenceParams::new(7000.0, 0.1, 0.05).unwrap();
        let g = input_matrices(&oe, &eta, MU).unwrap();
        let d = radius2_denominator(&oe, &eta);
        let r2 = 7000.0 * 1.01 / d;
        let k2 = r2 / (MU * 7000.0 * 1.01).sqrt();
        assert_abs_diff_eq!(g.g2[(4, 2)], k2 * 0.3f64.cos() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.g2[(5, 2)], -k2 * 0.3f64.sin() / 2.0, epsilon = 1e-15);
        assert_eq!(g.g2[(0, 2)], 0.0);
    }

    #[test]
    fn semiparameter_rows() {
        let oe = NodalRelativeState { dtheta: 0.3, dp: 0.04, dxi_x: 0.02, dxi_y: -0.01, dh_x: 0.1, dh_y: 0.2 };
        let eta = ReferenceParams::new(7000.0, 0.1, 0.05).unwrap();
        let g = input_matrices(&oe, &eta, MU).unwrap();
        let r1 = eta.r1();
        let k1 = r1 / (MU * 7000.0).sqrt();
        assert_abs_diff_eq!(g.g1[(1, 1)], k1 * 2.0 * 1.04, epsilon = 1e-15);
        let r2 = 7000.0 * 1.04 / radius2_denominator(&oe, &eta);
        let k2 = r2 / (MU * 7000.0 * 1.04).sqrt();
        assert_abs_diff_eq!(g.g2[(1, 1)], k2 * 2.0 * 1.04, epsilon = 1e-15);
        assert_eq!(g.geta.row(0).into_owned(), nalgebra::RowVector3::new(0.0, k1 * 2.0 * 7000.0, 0.0));
    }

    #[test]
    fn colocated_equal_accelerations_cancel() {
        let eta = ReferenceParams::new(7000.0, 0.1, 0.05).unwrap();
        let oe = NodalRelativeState::zero();
        let a = Vector3::new(0.0, 1e-6, 0.0);
        let u = PerturbationInput { u1: a, u2: a };
        let (d, _) = perturbed_derivative(&oe, &eta, &u, MU).unwrap();
        assert_abs_diff_eq!(d, f_unperturbed(&oe, &eta, MU), epsilon = 1e-18);
    }

    #[test]
    fn zero_input_equals_keplerian() {
        let eta = ReferenceParams::new(7000.0, 0.1, 0.05).unwrap();
        let oe = NodalRelativeState { dtheta: 0.1, dp: 0.01, dxi_x: 0.0, dxi_y: 0.01, dh_x: 0.1, dh_y: 0.0 };
        let (d, de) = perturbed_derivative(&oe, &eta, &PerturbationInput::zero(), MU).unwrap();
        assert_eq!(d, f_unperturbed(&oe, &eta, MU));
        assert_eq!(de, f_eta(&eta, MU));
    }

    #[test]
    fn normal_input_on_satellite_one_tilts_plane() {
        let eta = ReferenceParams::new(7000.0, 0.1, 0.05).unwrap();
        let oe = NodalRelativeState { dtheta: 0.1, dp: 0.01, dxi_x: 0.01, dxi_y: 0.0, dh_x: 0.0, dh_y: 0.0 };
        let u = PerturbationInput { u1: Vector3::new(0.0, 0.0, 1e-6), u2: Vector3::zeros() };
        let (d, _) = perturbed_derivative(&oe, &eta, &u, MU).unwrap();
        let f = f_unperturbed(&oe, &eta, MU);
        assert_eq!(d[0], f[0]);
        let k1 = eta.r1() / (MU * 7000.0).sqrt();
        assert_abs_diff_eq!(d[4] - f[4], -k1 * 0.5e-6, epsilon = 1e-20);
        assert_abs_diff_eq!(d[5] - f[5], 0.0);
    }

    #[test]
    fn keplerian_nodal_rates() {
        let el1 = ClassicalElements::from_degrees(8.9e3, 0.5, 10.0, 20.0, 0.0, 30.0).unwrap();
        let el2 = ClassicalElements::from_degrees(6.8e3, 0.1, 40.0, 90.0, 30.0, 70.0).unwrap();
        let g = PairGeometry::from_elements(&el1, &el2).unwrap();
        let rates = nodal_variational(&g, &PerturbationInput::zero(), MU).unwrap();
        assert_eq!(rates.gamma, 0.0);
        assert_eq!(rates.lambda1, 0.0);
        assert_eq!(rates.lambda2, 0.0);
        assert_abs_diff_eq!(rates.theta1, (MU * g.p1).sqrt() / el1.radius().powi(2), epsilon = 1e-18);
        assert_abs_diff_eq!(rates.theta2, (MU * g.p2).sqrt() / el2.radius().powi(2), epsilon = 1e-18);
    }

    #[test]
    fn normal_input_at_quarter_geometry() {
        let el1 = ClassicalElements::from_degrees(7000.0, 0.1, 30.0, 0.0, 0.0, 0.0).unwrap();
        let el2 = ClassicalElements::from_degrees(7000.0, 0.1, 60.0, 0.0, 0.0, 0.0).unwrap();
        let mut g = PairGeometry::from_elements(&el1, &el2).unwrap();
        g.gamma = std::f64::consts::FRAC_PI_2;
        g.theta2 = std::f64::consts::FRAC_PI_2;
        let u = PerturbationInput { u1: Vector3::zeros(), u2: Vector3::new(0.0, 0.0, 1e-6) };
        let rates = nodal_variational(&g, &u, MU).unwrap();
        let r2 = g.p2 / (1.0 + g.e2 * g.nu2.cos());
        let un2 = r2 / (MU * g.p2).sqrt() * 1e-6;
        assert_abs_diff_eq!(rates.gamma, 0.0, epsilon = 1e-22);
        assert_abs_diff_eq!(rates.alpha1, un2, epsilon = 1e-22);
    }

    #[test]
    fn coplanar_normal_rejected() {
        let el1 = ClassicalElements::from_degrees(7000.0, 0.1, 30.0, 10.0, 0.0, 0.0).unwrap();
        let g = PairGeometry::from_elements(&el1, &el1).unwrap();
        let u = PerturbationInput { u1: Vector3::new(0.0, 0.0, 1e-6), u2: Vector3::zeros() };
        assert_eq!(nodal_variational(&g, &u, MU), Err(Error::CoplanarNormalInput));
    }

    #[test]
    fn impulse_map_matches_cartesian_route() {
        use crate::dynamics::kepler::apply_impulse;
        let el1 = ClassicalElements::from_degrees(8.9e3, 0.5, 10.0, 20.0, 0.0, 30.0).unwrap();
        let el2 = ClassicalElements::from_degrees(6.8e3, 0.1, 40.0, 90.0, 30.0, 70.0).unwrap();
        let (oe, eta) = oe_from_classical(&el1, &el2).unwrap();
        let dv = Vector3::new(2e-6, -1e-6, 3e-6);
        let (doe, deta) = impulse_first_order(&oe, &eta, &dv, MU).unwrap();
        let el1b = apply_impulse(&el1, &dv, MU).unwrap();
        let (oe_b, eta_b) = oe_from_classical(&el1b, &el2).unwrap();
        let mut diff = oe_b.to_vector() - oe.to_vector();
        diff[0] = crate::scalar::wrap_pi(diff[0]);
        // Second-order residual ~ |dv|^2 * |G|^2.
        assert!((diff - doe).amax() < 1e-9, "{diff} vs {doe}");
        assert!((eta_b.to_vector() - eta.to_vector() - deta).abs().max() < 1e-6);
    }
}
