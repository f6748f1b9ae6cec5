//! Angles-only measurements (azimuth, elevation, apparent size) and an
//! extended Kalman filter over the nodal relative state.

use nalgebra::{Matrix3, Matrix3x6, Matrix6, RowVector3, SVector, Vector3, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{f_jacobian, f_unperturbed, integrate, rotate_eta, analytic_step, IntegratorOptions};
use crate::error::{Error, Result};
use crate::relstate::{position_jacobians, relative_position, NodalRelativeState, ReferenceParams};
use crate::scalar::{lit, wrap_pi, Real};

/// Elevation closer than this to +-pi/2 makes azimuth ill-conditioned.
pub const GIMBAL_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementTriple<T: Real> {
    pub az: T,
    pub el: T,
    /// Apparent angular size `d / range`.
    pub beta: T,
}

impl<T: Real> MeasurementTriple<T> {
    pub fn to_vector(&self) -> Vector3<T> {
        Vector3::new(self.az, self.el, self.beta)
    }
}

/// Standard deviations of the three measurement channels, rad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec<T: Real> {
    pub sigma_az: T,
    pub sigma_el: T,
    pub sigma_beta: T,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(sigma_az: T, sigma_el: T, sigma_beta: T) -> Result<Self> {
        if [sigma_az, sigma_el, sigma_beta].iter().all(|s| *s > T::zero()) {
            Ok(Self { sigma_az, sigma_el, sigma_beta })
        } else {
            Err(Error::InvalidInput("noise standard deviations must be positive".into()))
        }
    }

    pub fn covariance(&self) -> Matrix3<T> {
        Matrix3::from_diagonal(&Vector3::new(
            self.sigma_az * self.sigma_az,
            self.sigma_el * self.sigma_el,
            self.sigma_beta * self.sigma_beta,
        ))
    }
}

/// Noiseless measurement of a target of diameter `d` at relative position `dr`.
pub fn measurement_model<T: Real>(dr: &Vector3<T>, d: T) -> Result<MeasurementTriple<T>> {
    let rho = dr.norm();
    if rho == T::zero() {
        return Err(Error::ZeroRange);
    }
    Ok(MeasurementTriple {
        az: dr[1].atan2(dr[0]),
        el: (dr[2] / rho).max(-T::one()).min(T::one()).asin(),
        beta: d / rho,
    })
}

/// Noisy measurement with independent Gaussian errors on each channel.
pub fn measure<T: Real, R: Rng + ?Sized>(
    dr: &Vector3<T>,
    d: T,
    noise: &NoiseSpec<T>,
    rng: &mut R,
) -> Result<MeasurementTriple<T>> {
    let y = measurement_model(dr, d)?;
    let mut draw = || lit::<T>(rng.sample::<f64, _>(StandardNormal));
    Ok(MeasurementTriple {
        az: y.az + noise.sigma_az * draw(),
        el: y.el + noise.sigma_el * draw(),
        beta: y.beta + noise.sigma_beta * draw(),
    })
}

/// Predicted measurement and its Jacobian with respect to the relative state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction<T: Real> {
    pub y: MeasurementTriple<T>,
    pub h: Matrix3x6<T>,
    /// Set when the elevation is within [`GIMBAL_MARGIN`] of +-pi/2.
    pub gimbal_degenerate: bool,
}

/// Partials of `(az, el, beta)` with respect to the relative position.
pub fn measurement_position_jacobian<T: Real>(dr: &Vector3<T>, d: T) -> Result<Matrix3<T>> {
    let rho2 = dr.norm_squared();
    if rho2 == T::zero() {
        return Err(Error::ZeroRange);
    }
    let rho = rho2.sqrt();
    let (x, y, z) = (dr[0], dr[1], dr[2]);
    let rxy2 = x * x + y * y;
    let rxy = rxy2.sqrt();
    let az_row = if rxy2 > T::zero() {
        RowVector3::new(-y / rxy2, x / rxy2, T::zero())
    } else {
        RowVector3::zeros()
    };
    let el_row = if rxy > T::zero() {
        RowVector3::new(-z * x / (rho2 * rxy), -z * y / (rho2 * rxy), rxy / rho2)
    } else {
        RowVector3::zeros()
    };
    let beta_row = dr.transpose() * (-d / (rho2 * rho));
    Ok(Matrix3::from_rows(&[az_row, el_row, beta_row]))
}

pub fn predict_measurement<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    d: T,
) -> Result<Prediction<T>> {
    let dr = relative_position(oe, eta)?.dr;
    let y = measurement_model(&dr, d)?;
    let (j_oe, _) = position_jacobians(oe, eta)?;
    let h = measurement_position_jacobian(&dr, d)? * j_oe;
    Ok(Prediction {
        y,
        h,
        gimbal_degenerate: (T::frac_pi_2() - y.el.abs()) < lit(GIMBAL_MARGIN),
    })
}

/// Estimate and error covariance of the nodal relative state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterState<T: Real> {
    pub oe_hat: NodalRelativeState<T>,
    pub p: Matrix6<T>,
}

impl<T: Real> FilterState<T> {
    pub fn new(oe_hat: NodalRelativeState<T>, p: Matrix6<T>) -> Self {
        Self { oe_hat, p }
    }

    /// Three-sigma bound of each state component.
    pub fn three_sigma(&self) -> Vector6<T> {
        self.p.diagonal().map(|v| lit::<T>(3.0) * v.max(T::zero()).sqrt())
    }
}

fn symmetrize<T: Real>(p: &Matrix6<T>) -> Matrix6<T> {
    (p + p.transpose()) * lit::<T>(0.5)
}

/// Propagated mean, reference parameters and state-transition matrix over one interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition<T: Real> {
    pub oe: NodalRelativeState<T>,
    pub eta: ReferenceParams<T>,
    pub phi: Matrix6<T>,
}

/// Propagates `(oe, eta)` over `dt` under Keplerian motion together with the
/// state-transition matrix.
///
/// The integrated variables are the phase, the swept reference true anomaly
/// and the 36 entries of the transition matrix; the remaining states follow
/// from the closed-form rotation by the swept angle.
pub fn transition<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    dt: T,
    mu: T,
    opts: &IntegratorOptions<T>,
) -> Result<Transition<T>> {
    let at = |dv1: T, dtheta: T| {
        let part = analytic_step(oe, dv1);
        let state = NodalRelativeState {
            dtheta,
            dp: part.dp,
            dxi_x: part.dxi[0],
            dxi_y: part.dxi[1],
            dh_x: part.dh[0],
            dh_y: part.dh[1],
        };
        (state, rotate_eta(eta, dv1))
    };
    let rhs = |_: T, y: &SVector<T, 38>| {
        let (state, e) = at(y[1], y[0]);
        let f = f_unperturbed(&state, &e, mu);
        let jac = f_jacobian(&state, &e, mu);
        let phi = Matrix6::from_column_slice(&y.as_slice()[2..]);
        let dphi = jac * phi;
        let mut out = SVector::<T, 38>::zeros();
        out[0] = f[0];
        out[1] = e.true_anomaly_rate(mu);
        out.as_mut_slice()[2..].copy_from_slice(dphi.as_slice());
        Ok(out)
    };
    let mut y0 = SVector::<T, 38>::zeros();
    y0[0] = oe.dtheta;
    y0.as_mut_slice()[2..].copy_from_slice(Matrix6::<T>::identity().as_slice());
    let y = if dt == T::zero() {
        y0
    } else {
        integrate(rhs, T::zero(), y0, &[dt], opts)?[0]
    };
    let (mut state, e) = at(y[1], y[0]);
    state.dtheta = wrap_pi(state.dtheta);
    Ok(Transition {
        oe: state,
        eta: e,
        phi: Matrix6::from_column_slice(&y.as_slice()[2..]),
    })
}

/// Time update. `q` is a process-noise spectral density (per second).
pub fn ekf_propagate<T: Real>(
    fs: &FilterState<T>,
    eta: &ReferenceParams<T>,
    dt: T,
    q: &Matrix6<T>,
    mu: T,
    opts: &IntegratorOptions<T>,
) -> Result<(FilterState<T>, ReferenceParams<T>)> {
    if dt < T::zero() {
        return Err(Error::InvalidInput("filter propagation needs dt >= 0".into()));
    }
    let tr = transition(&fs.oe_hat, eta, dt, mu, opts)?;
    let p = tr.phi * fs.p * tr.phi.transpose() + q * dt;
    Ok((FilterState::new(tr.oe, symmetrize(&p)), tr.eta))
}

/// Generic linear update in Joseph form. Returns the corrected state and covariance.
pub fn kalman_update<T: Real>(
    x: &Vector6<T>,
    p: &Matrix6<T>,
    innovation: &Vector3<T>,
    h: &Matrix3x6<T>,
    r: &Matrix3<T>,
) -> Result<(Vector6<T>, Matrix6<T>, Matrix3<T>)> {
    let s = h * p * h.transpose() + r;
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("singular innovation covariance".into()))?;
    let k = p * h.transpose() * s_inv;
    let ikh = Matrix6::identity() - k * h;
    let p_new = ikh * p * ikh.transpose() + k * r * k.transpose();
    Ok((x + k * innovation, symmetrize(&p_new), s))
}

/// Result of a measurement update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateOutcome<T: Real> {
    pub state: FilterState<T>,
    /// `z - y(oe_hat)`, azimuth wrapped to `(-pi, pi]`.
    pub innovation: Vector3<T>,
    /// Normalized innovation squared.
    pub nis: T,
    /// Set when `nis` exceeds the gate. The measurement is still applied.
    pub outlier: bool,
    pub gimbal_degenerate: bool,
}

/// Measurement update. `gate` is a chi-square threshold on the innovation
/// (3 degrees of freedom); `None` disables flagging.
pub fn ekf_update<T: Real>(
    fs: &FilterState<T>,
    eta: &ReferenceParams<T>,
    z: &MeasurementTriple<T>,
    noise: &NoiseSpec<T>,
    d: T,
    gate: Option<T>,
) -> Result<UpdateOutcome<T>> {
    let pred = predict_measurement(&fs.oe_hat, eta, d)?;
    let mut nu = z.to_vector() - pred.y.to_vector();
    nu[0] = wrap_pi(nu[0]);
    let (x, p, s) = kalman_update(&fs.oe_hat.to_vector(), &fs.p, &nu, &pred.h, &noise.covariance())?;
    let nis = s.try_inverse().map(|si| (nu.transpose() * si * nu)[0]).unwrap_or(T::zero());
    Ok(UpdateOutcome {
        state: FilterState::new(NodalRelativeState::from_vector(&x), p),
        innovation: nu,
        nis,
        outlier: gate.is_some_and(|g| nis > g),
        gimbal_degenerate: pred.gimbal_degenerate,
    })
}

/// Estimation error `oe_hat - oe` with the phase difference wrapped.
pub fn estimation_error<T: Real>(oe_hat: &NodalRelativeState<T>, oe: &NodalRelativeState<T>) -> Vector6<T> {
    let mut e = oe_hat.to_vector() - oe.to_vector();
    e[0] = wrap_pi(e[0]);
    e
}

/// Normalized estimation error squared `e' P^-1 e`.
pub fn nees<T: Real>(err: &Vector6<T>, p: &Matrix6<T>) -> Result<T> {
    let chol = p
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("covariance is not positive definite".into()))?;
    Ok(err.dot(&chol.solve(err)))
}
