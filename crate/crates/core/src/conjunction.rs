//! Orbit-intersection screening, the collision safety margin and the
//! minimum-norm avoidance impulse.

use nalgebra::{Vector3, Vector6};

use crate::dynamics::{input_matrices, propagate, IntegratorOptions, PerturbationInput};
use crate::error::{to_f64, Error, Result};
use crate::relstate::{dlambda_from_state, e2_from_state, relative_position, NodalRelativeState, ReferenceParams};
use crate::scalar::{lit, Real};

pub const DEFAULT_COPLANAR_TOL: f64 = 1e-9;
pub const DEFAULT_NODE_TOL: f64 = 1e-9;
/// Below this `|g|` an impulse cannot change the margin.
pub const MIN_SENSITIVITY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Coplanar,
    Ascending,
    Descending,
}

/// Signed margin of one intersection condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchMargin<T: Real> {
    pub branch: Branch,
    pub margin: T,
    pub satisfied: bool,
}

/// Outcome of the orbit-intersection test.
///
/// A coplanar pair carries one branch (`dp^2 - drho^2`, satisfied when
/// non-positive). A noncoplanar pair carries the ascending and descending
/// node-crossing margins, each satisfied when within the node tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C1Verdict<T: Real> {
    pub coplanar: Option<BranchMargin<T>>,
    pub ascending: Option<BranchMargin<T>>,
    pub descending: Option<BranchMargin<T>>,
}

impl<T: Real> C1Verdict<T> {
    /// True when any applicable branch admits an intersection.
    pub fn satisfied(&self) -> bool {
        [self.coplanar, self.ascending, self.descending]
            .iter()
            .flatten()
            .any(|b| b.satisfied)
    }

    pub fn branches(&self) -> impl Iterator<Item = BranchMargin<T>> + '_ {
        [self.coplanar, self.ascending, self.descending].into_iter().flatten()
    }
}

/// Amplitude and phase of the coplanar intersection equation
/// `dp + drho cos(v1 + phi_c) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoplanarTerms<T: Real> {
    pub drho: T,
    pub phi_c: T,
    pub dlambda: T,
    pub e2: T,
}

pub fn coplanar_terms<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> CoplanarTerms<T> {
    let e1 = eta.e1();
    let e2 = e2_from_state(oe, eta);
    let dlambda = dlambda_from_state(oe, eta);
    let (s, c) = dlambda.sin_cos();
    let x = (T::one() + oe.dp) * e1 - e2 * c;
    let y = e2 * s;
    CoplanarTerms {
        drho: x.hypot(y),
        phi_c: y.atan2(x),
        dlambda,
        e2,
    }
}

/// `e1 cos(lambda1)` and `dxi cos(dphi)`, both projections onto the relative node.
fn node_projections<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> Result<(T, T)> {
    let dh = oe.dh();
    if dh == T::zero() {
        return Err(Error::ZetaUndefined);
    }
    let e1_cos_l1 = (oe.dh_x * eta.ec + oe.dh_y * eta.es) / dh;
    let dxi_cos_dphi = (oe.dh_x * oe.dxi_x + oe.dh_y * oe.dxi_y) / dh;
    Ok((e1_cos_l1, dxi_cos_dphi))
}

pub fn c1_test<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    coplanar_tol: T,
    node_tol: T,
) -> C1Verdict<T> {
    if oe.dh() <= coplanar_tol {
        let terms = coplanar_terms(oe, eta);
        let margin = oe.dp * oe.dp - terms.drho * terms.drho;
        return C1Verdict {
            coplanar: Some(BranchMargin {
                branch: Branch::Coplanar,
                margin,
                satisfied: margin <= T::zero(),
            }),
            ascending: None,
            descending: None,
        };
    }
    let (asc, desc) = node_margins(oe, eta).expect("dh above coplanar tolerance");
    let mk = |branch, margin: T| BranchMargin {
        branch,
        margin,
        satisfied: margin.abs() <= node_tol,
    };
    C1Verdict {
        coplanar: None,
        ascending: Some(mk(Branch::Ascending, asc)),
        descending: Some(mk(Branch::Descending, desc)),
    }
}

/// Ascending and descending node-crossing margins of a noncoplanar pair.
pub fn node_margins<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> Result<(T, T)> {
    if oe.dh() <= lit(DEFAULT_COPLANAR_TOL) {
        return Err(Error::Theta1Degenerate);
    }
    let (e1c, xic) = node_projections(oe, eta)?;
    let one = T::one();
    Ok((oe.dp * (one + e1c) - xic, oe.dp * (one - e1c) + xic))
}

/// Collision safety margin at the ascending relative node.
pub fn zeta<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> Result<T> {
    zeta_branch(oe, eta, T::one())
}

/// Same margin at the descending relative node.
pub fn zeta_descending<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>) -> Result<T> {
    zeta_branch(oe, eta, -T::one())
}

fn zeta_branch<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>, sign: T) -> Result<T> {
    let (e1c, xic) = node_projections(oe, eta)?;
    Ok(oe.dp + sign * (oe.dp * e1c - xic))
}

/// Partials of the ascending margin with respect to `oe` and `eta`.
pub fn zeta_gradient<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
) -> Result<(Vector6<T>, Vector3<T>)> {
    zeta_gradient_branch(oe, eta, T::one())
}

pub fn zeta_descending_gradient<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
) -> Result<(Vector6<T>, Vector3<T>)> {
    zeta_gradient_branch(oe, eta, -T::one())
}

fn zeta_gradient_branch<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    sign: T,
) -> Result<(Vector6<T>, Vector3<T>)> {
    let dh = oe.dh();
    if dh == T::zero() {
        return Err(Error::ZetaUndefined);
    }
    let (hx, hy) = (oe.dh_x, oe.dh_y);
    // zeta = dp - sign * S / dh with S = h . (dxi - dp e1 (cos v1, sin v1)).
    let wx = oe.dxi_x - oe.dp * eta.ec;
    let wy = oe.dxi_y - oe.dp * eta.es;
    let s = hx * wx + hy * wy;
    let dh3 = dh * dh * dh;
    let d_oe = Vector6::new(
        T::zero(),
        T::one() + sign * (hx * eta.ec + hy * eta.es) / dh,
        -sign * hx / dh,
        -sign * hy / dh,
        -sign * (wx / dh - s * hx / dh3),
        -sign * (wy / dh - s * hy / dh3),
    );
    let d_eta = Vector3::new(T::zero(), sign * oe.dp * hx / dh, sign * oe.dp * hy / dh);
    Ok((d_oe, d_eta))
}

/// Minimum-norm impulse on satellite 1 that shifts the margin by `delta_zeta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManeuverPlan<T: Real> {
    pub t_m: T,
    /// Impulse in RTN of satellite 1, km/s.
    pub delta_v: Vector3<T>,
    pub delta_zeta: T,
    /// First-order sensitivity of the margin to the impulse, s/km.
    pub g_vec: Vector3<T>,
}

/// Sensitivity `g` of the ascending margin to an impulse on satellite 1.
pub fn zeta_sensitivity<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>, mu: T) -> Result<Vector3<T>> {
    let (d_oe, d_eta) = zeta_gradient(oe, eta)?;
    let g = input_matrices(oe, eta, mu)?;
    Ok(g.geta.transpose() * d_eta - g.g1.transpose() * d_oe)
}

pub fn plan_avoidance<T: Real>(
    oe: &NodalRelativeState<T>,
    eta: &ReferenceParams<T>,
    delta_zeta: T,
    mu: T,
    t_m: T,
) -> Result<ManeuverPlan<T>> {
    let g_vec = zeta_sensitivity(oe, eta, mu)?;
    let n2 = g_vec.norm_squared();
    if !(n2.sqrt() > lit(MIN_SENSITIVITY)) {
        return Err(Error::ZeroSensitivity { norm: to_f64(n2.sqrt()) });
    }
    Ok(ManeuverPlan {
        t_m,
        delta_v: g_vec * (delta_zeta / n2),
        delta_zeta,
        g_vec,
    })
}

/// Closest approach found by [`c2_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C2Result<T: Real> {
    pub collides: bool,
    pub t_min: T,
    pub d_min: T,
}

fn shorter_period<T: Real>(oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>, mu: T) -> T {
    let one = T::one();
    let e1 = eta.e1();
    let e2 = e2_from_state(oe, eta).min(lit(0.999_999));
    let a1 = eta.p1 / (one - e1 * e1);
    let a2 = eta.p1 * (one + oe.dp) / (one - e2 * e2);
    let period = |a: T| T::two_pi() * (a * a * a / mu).sqrt();
    period(a1).min(period(a2))
}

/// Searches `[t0, tf]` for the minimum inter-satellite distance under Keplerian motion.
///
/// The interval is sampled at the smaller of 1/200 of the shorter orbital
/// period and 1/200 of the interval, then refined by golden-section search
/// around the best sample.
pub fn c2_check<T: Real>(
    oe0: &NodalRelativeState<T>,
    eta0: &ReferenceParams<T>,
    mu: T,
    t0: T,
    tf: T,
    miss_tol: T,
    opts: &IntegratorOptions<T>,
) -> Result<C2Result<T>> {
    if !(tf > t0) {
        return Err(Error::InvalidInput("c2_check needs tf > t0".into()));
    }
    let n200 = lit::<T>(200.0);
    let dt = (shorter_period(oe0, eta0, mu) / n200).min((tf - t0) / n200);
    let n = to_f64((tf - t0) / dt).ceil() as usize;
    let mut times: Vec<T> = (0..=n).map(|k| (t0 + dt * lit(k as f64)).min(tf)).collect();
    times.dedup();
    let zero_u = |_: T, _: &NodalRelativeState<T>, _: &ReferenceParams<T>| PerturbationInput::zero();
    let samples = propagate(oe0, eta0, mu, zero_u, t0, &times, opts)?;
    let range = |oe: &NodalRelativeState<T>, eta: &ReferenceParams<T>| relative_position(oe, eta).map(|p| p.dr.norm());

    let mut best = (0usize, T::max_value().unwrap_or_else(|| lit(f64::MAX)));
    for (i, s) in samples.iter().enumerate() {
        let d = range(&s.oe, &s.eta)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    let lo_idx = best.0.saturating_sub(1);
    let hi_idx = (best.0 + 1).min(samples.len() - 1);
    let start = samples[lo_idx];
    let dist_at = |t: T| -> Result<T> {
        if t <= start.t {
            return range(&start.oe, &start.eta);
        }
        let s = propagate(&start.oe, &start.eta, mu, zero_u, start.t, &[t], opts)?;
        range(&s[0].oe, &s[0].eta)
    };

    let inv_phi = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (start.t, samples[hi_idx].t);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = dist_at(c)?;
    let mut fd = dist_at(d)?;
    let t_tol = lit::<T>(1e-6) * (T::one() + b.abs());
    for _ in 0..200 {
        if (b - a).abs() <= t_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = dist_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = dist_at(d)?;
        }
    }
    let (mut t_min, mut d_min) = if fc < fd { (c, fc) } else { (d, fd) };
    if best.1 < d_min {
        t_min = samples[best.0].t;
        d_min = best.1;
    }
    Ok(C2Result {
        collides: d_min <= miss_tol,
        t_min,
        d_min,
    })
}
