//! Time evolution of the nodal relative states and reference parameters.
//!
//! Keplerian dynamics, the input matrices of the perturbed model, the
//! integrator, and an independent Cowell propagator used as an oracle.

pub mod cowell;
pub mod gauss;
pub mod integrator;
pub mod kepler;

use std::io::Write;

use nalgebra::{Matrix2, Matrix6, SVector, Vector2, Vector3, Vector6};

use crate::error::{to_f64, Error, Result};
use crate::relstate::{radius2_denominator, relative_position, NodalRelativeState, ReferenceParams};
use crate::scalar::{lit, wrap_pi, Real};

pub use cowell::{cowell_propagate, CowellSample};
pub use gauss::{
    impulse_first_order, input_matrices, nodal_variational, perturbed_derivative, InputMatrices, NodalRates,
    PairGeometry,
};
pub use integrator::{integrate, IntegratorOptions};
pub use kepler::{
    apply_impulse, cartesian_to_elements, elements_to_cartesian, kepler_advance, CartesianState, Osculating,
};

/// Earth gravitational parameter, km^3/s^2.
pub const MU_EARTH: f64 = 398600.4418;
/// Sun gravitational parameter, km^3/s^2.
pub const MU_SUN: f64 = 1.32712440018e11;

/// Point-mass gravity of the primary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityModel<T: Real> {
    pub mu: T,
}

impl<T: Real> GravityModel<T> {
    pub fn new(mu: T) -> Result<Self> {
        if mu > T::zero() && mu.is_finite() {
            Ok(Self { mu })
        } else {
            Err(Error::InvalidInput("gravitational parameter must be positive".into()))
        }
    }
}

/// Perturbing accelerations (km/s^2): `u1` in RTN of satellite 1, `u2` in RTN of satellite 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationInput<T: Real> {
    pub u1: Vector3<T>,
    pub u2: Vector3<T>,
}

impl<T: Real> PerturbationInput<T> {
    pub fn zero() -> Self {
        Self {
            u1: Vector3::zeros(),
            u2: Vector3::zeros(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u1.iter().chain(self.u2.iter()).all(|x| *x == T::zero())
    }
}

/// Keplerian rates of the relative states.
pub fn f_unperturbed<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>, mu: T) -> Vector6<T> {
    let nu_dot = eta.true_anomaly_rate(mu);
    let d = radius2_denominator(oe, eta);
    let k = T::one() + eta.ec;
    let one_dp = T::one() + oe.dp;
    let phase = d * d / (k * k * (one_dp * one_dp * one_dp).sqrt()) - T::one();
    Vector6::new(phase, T::zero(), -oe.dxi_y, oe.dxi_x, -oe.dh_y, oe.dh_x) * nu_dot
}

/// Keplerian rates of the reference parameters.
pub fn f_eta<T: Real>(eta: &ReferenceParams<T>, mu: T) -> Vector3<T> {
    Vector3::new(T::zero(), -eta.es, eta.ec) * eta.true_anomaly_rate(mu)
}

/// Jacobian of [`f_unperturbed`] with respect to `oe`.
pub fn f_jacobian<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>, mu: T) -> Matrix6<T> {
    let nu_dot = eta.true_anomaly_rate(mu);
    let (s, c) = oe.dtheta.sin_cos();
    let d = radius2_denominator(oe, eta);
    let k = T::one() + eta.ec;
    let one_dp = T::one() + oe.dp;
    let scale = T::one() / (k * k * (one_dp * one_dp * one_dp).sqrt());
    let e_theta = (oe.dxi_x + eta.ec) * s + (oe.dxi_y + eta.es) * c;
    let two = lit::<T>(2.0);
    let mut jac = Matrix6::zeros();
    jac[(0, 0)] = -two * d * e_theta * scale;
    jac[(0, 1)] = -lit::<T>(1.5) * d * d * scale / one_dp;
    jac[(0, 2)] = two * d * c * scale;
    jac[(0, 3)] = -two * d * s * scale;
    jac[(2, 3)] = -T::one();
    jac[(3, 2)] = T::one();
    jac[(4, 5)] = -T::one();
    jac[(5, 4)] = T::one();
    jac * nu_dot
}

/// Relative states with no closed-form solution omitted; `dtheta` is not advanced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPartial<T: Real> {
    pub dp: T,
    pub dxi: Vector2<T>,
    pub dh: Vector2<T>,
}

fn rotation2<T: Real>(angle: T) -> Matrix2<T> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Advances `dp`, `dxi` and `dh` in closed form by a change `dv1` of the reference true anomaly.
pub fn analytic_step<T: Real>(oe0: &NodalRelativeState<T>, dv1: T) -> AnalyticPartial<T> {
    let rot = rotation2(dv1);
    AnalyticPartial {
        dp: oe0.dp,
        dxi: rot * Vector2::new(oe0.dxi_x, oe0.dxi_y),
        dh: rot * Vector2::new(oe0.dh_x, oe0.dh_y),
    }
}

/// Rotates the reference parameters by `dv1` (unperturbed motion of `eta`).
pub fn rotate_eta<T: Real>(eta: &ReferenceParams<T>, dv1: T) -> ReferenceParams<T> {
    let v = rotation2(dv1) * Vector2::new(eta.ec, eta.es);
    ReferenceParams {
        p1: eta.p1,
        ec: v[0],
        es: v[1],
    }
}

/// One sample of a propagated nodal trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample<T: Real> {
    pub t: T,
    pub oe: NodalRelativeState<T>,
    pub eta: ReferenceParams<T>,
}

pub(crate) fn pack<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> SVector<T, 9> {
    let o = oe.to_vector();
    let e = eta.to_vector();
    SVector::<T, 9>::from_iterator(o.iter().chain(e.iter()).copied())
}

pub(crate) fn unpack<T: Real>(y: &SVector<T, 9>) -> (NodalRelativeState<T>, ReferenceParams<T>) {
    let oe = NodalRelativeState {
        dtheta: y[0],
        dp: y[1],
        dxi_x: y[2],
        dxi_y: y[3],
        dh_x: y[4],
        dh_y: y[5],
    };
    (oe, ReferenceParams::from_vector(&Vector3::new(y[6], y[7], y[8])))
}

/// Integrates the perturbed dynamics of `(oe, eta)` and samples them at `times`.
///
/// `accel(t, oe, eta)` supplies the RTN accelerations of both satellites; it is
/// called at integrator stage points and must not depend on call order.
pub fn propagate<T, F>(
    oe0: &NodalRelativeState<T>,
    eta0: &ReferenceParams<T>,
    mu: T,
    accel: F,
    t0: T,
    times: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<Vec<TrajectorySample<T>>>
where
    T: Real,
    F: Fn(T, &NodalRelativeState<T>, &ReferenceParams<T>) -> PerturbationInput<T>,
{
    let rhs = |t: T, y: &SVector<T, 9>| {
        let (oe, eta) = unpack(y);
        let u = accel(t, &oe, &eta);
        let (d_oe, d_eta) = perturbed_derivative(&oe, &eta, &u, mu)?;
        Ok(SVector::<T, 9>::from_iterator(d_oe.iter().chain(d_eta.iter()).copied()))
    };
    let ys = integrate(rhs, t0, pack(oe0, eta0), times, opts)?;
    Ok(times
        .iter()
        .zip(ys.iter())
        .map(|(&t, y)| {
            let (mut oe, eta) = unpack(y);
            oe.dtheta = wrap_pi(oe.dtheta);
            TrajectorySample { t, oe, eta }
        })
        .collect())
}

/// Writes a trajectory as CSV with the relative position in RTN of satellite 1.
pub fn write_trajectory_csv<T: Real, W: Write>(out: &mut W, samples: &[TrajectorySample<T>]) -> std::io::Result<()> {
    writeln!(out, "t,dtheta,dp,dxi_x,dxi_y,dh_x,dh_y,p1,e1cosv1,e1sinv1,dr_R,dr_T,dr_N")?;
    for s in samples {
        let dr = relative_position(&s.oe, &s.eta)
            .map(|p| p.dr.map(to_f64))
            .unwrap_or_else(|_| Vector3::repeat(f64::NAN));
        let state = [
            s.t, s.oe.dtheta, s.oe.dp, s.oe.dxi_x, s.oe.dxi_y, s.oe.dh_x, s.oe.dh_y, s.eta.p1, s.eta.ec, s.eta.es,
        ];
        let vals = state.iter().map(|&v| to_f64(v)).chain(dr.iter().copied()).collect::<Vec<f64>>();
        let line: Vec<String> = vals.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
