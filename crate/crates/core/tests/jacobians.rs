mod common;

use common::{central_diff, random_state, rng, MU};
use nalgebra::{SVector, Vector3, Vector6};
use nodal_core::conjunction::{zeta, zeta_descending, zeta_descending_gradient, zeta_gradient};
use nodal_core::dynamics::{f_jacobian, f_unperturbed};
use nodal_core::navigation::predict_measurement;
use nodal_core::relstate::{position_jacobians, relative_position, NodalRelativeState, ReferenceParams};
use nodal_core::scalar::wrap_pi;

const REL: f64 = 1e-6;

/// Column-wise relative check: `|analytic - numeric|_inf <= REL * |numeric|_inf`.
fn check_column<const M: usize>(analytic: SVector<f64, M>, numeric: SVector<f64, M>, what: &str) {
    let scale = numeric.amax().max(analytic.amax());
    if scale == 0.0 {
        return;
    }
    let err = (analytic - numeric).amax();
    assert!(err <= REL * scale, "{what}: err {err:e} scale {scale:e}\n{analytic}\n{numeric}");
}

fn oe_of(x: &Vector6<f64>) -> NodalRelativeState<f64> {
    NodalRelativeState::from_vector(x)
}

fn eta_of(x: &Vector3<f64>) -> ReferenceParams<f64> {
    ReferenceParams::from_vector(x)
}

#[test]
fn position_jacobians_match_finite_differences() {
    let mut r = rng(11);
    for k in 0..100 {
        let (oe, eta) = random_state(&mut r);
        let (j_oe, j_eta) = position_jacobians(&oe, &eta).unwrap();
        let x = oe.to_vector();
        for j in 0..6 {
            let fd = central_diff(|x| relative_position(&oe_of(x), &eta).unwrap().dr, &x, j, 1e-4);
            check_column(j_oe.column(j).into_owned(), fd, &format!("state {k} d dr / d oe[{j}]"));
        }
        let e = eta.to_vector();
        for (j, h) in [(0, 1.0), (1, 1e-4), (2, 1e-4)] {
            let fd = central_diff(|e| relative_position(&oe, &eta_of(e)).unwrap().dr, &e, j, h);
            check_column(j_eta.column(j).into_owned(), fd, &format!("state {k} d dr / d eta[{j}]"));
        }
    }
}

#[test]
fn zeta_gradients_match_finite_differences() {
    let mut r = rng(12);
    for k in 0..100 {
        let (oe, eta) = random_state(&mut r);
        for (name, value, grad) in [
            ("asc", zeta as fn(&_, &_) -> _, zeta_gradient as fn(&_, &_) -> _),
            ("desc", zeta_descending, zeta_descending_gradient),
        ] {
            let (g_oe, g_eta) = grad(&oe, &eta).unwrap();
            let x = oe.to_vector();
            let fd_oe = Vector6::from_fn(|j, _| {
                central_diff(|x| SVector::<f64, 1>::new(value(&oe_of(x), &eta).unwrap()), &x, j, 1e-4)[0]
            });
            check_column(g_oe, fd_oe, &format!("{name} state {k} d zeta / d oe"));
            let e = eta.to_vector();
            let fd_eta = Vector3::from_fn(|j, _| {
                central_diff(|e| SVector::<f64, 1>::new(value(&oe, &eta_of(e)).unwrap()), &e, j, 1e-4)[0]
            });
            check_column(g_eta, fd_eta, &format!("{name} state {k} d zeta / d eta"));
            assert_eq!(g_oe[0], 0.0);
        }
    }
}

#[test]
fn measurement_jacobian_matches_finite_differences() {
    let mut r = rng(13);
    for k in 0..100 {
        let (oe, eta) = random_state(&mut r);
        let pred = predict_measurement(&oe, &eta, 90.0).unwrap();
        let x = oe.to_vector();
        let y0 = pred.y.to_vector();
        let y = |x: &Vector6<f64>| {
            let mut v = predict_measurement(&oe_of(x), &eta, 90.0).unwrap().y.to_vector();
            v[0] = y0[0] + wrap_pi(v[0] - y0[0]);
            v
        };
        for j in 0..6 {
            let fd = central_diff(y, &x, j, 1e-4);
            // Rows differ in scale by orders of magnitude (beta ~ d / range).
            for i in 0..3 {
                let a = pred.h[(i, j)];
                let scale = fd[i].abs().max(a.abs()).max(pred.h.row(i).amax() * 1e-6);
                assert!((a - fd[i]).abs() <= REL * scale.max(1e-300), "state {k} H[{i},{j}] {a:e} vs {:e}", fd[i]);
            }
        }
    }
}

#[test]
fn dynamics_jacobian_matches_finite_differences() {
    let mut r = rng(14);
    for k in 0..100 {
        let (oe, eta) = random_state(&mut r);
        let jac = f_jacobian(&oe, &eta, MU);
        let x = oe.to_vector();
        for j in 0..6 {
            let fd = central_diff(|x| f_unperturbed(&oe_of(x), &eta, MU), &x, j, 1e-4);
            check_column(jac.column(j).into_owned(), fd, &format!("state {k} F column {j}"));
        }
    }
}
