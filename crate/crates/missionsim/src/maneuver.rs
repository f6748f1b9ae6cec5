//! Avoidance-impulse sweep along an estimated trajectory and its replay in
//! inertial propagation.

use nodal_core::dynamics::{cowell_propagate, CartesianState, PerturbationInput};
use serde::Serialize;

use crate::config::{ScenarioConfig, DAY};
use crate::error::{SimError, SimResult};
use crate::flyby::{run_filter, ManeuverPoint, RunPlan};
use crate::scenario::{cowell_options, truth_trajectory, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Approach {
    /// Epoch of closest approach, s since the start of the run.
    pub t: f64,
    pub distance_km: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManeuverReport {
    pub sweep: Vec<ManeuverPoint>,
    pub selected: ManeuverPoint,
    /// Largest impulse over the sweep epochs between day 1 and day 7, km/s.
    pub early_window_max_dv: f64,
    pub nominal: Approach,
    pub maneuvered: Approach,
}

/// Sample indices spaced by `step` seconds over `times`.
pub fn sweep_indices(times: &[f64], step: f64) -> Vec<usize> {
    let dt = times[1] - times[0];
    let stride = ((step / dt).round() as usize).max(1);
    (0..times.len()).step_by(stride).collect()
}

/// Closest approach of two bodies propagated inertially from `t0` over
/// `[t_lo, t_hi]`, refined around the best coarse sample.
pub fn closest_approach(
    s1: &CartesianState<f64>,
    s2: &CartesianState<f64>,
    mu: f64,
    t0: f64,
    t_lo: f64,
    t_hi: f64,
    rel_tol: f64,
) -> SimResult<Approach> {
    let opts = cowell_options(rel_tol, s1);
    let zero = |_: f64, _: &CartesianState<f64>, _: &CartesianState<f64>| PerturbationInput::zero();
    let grid = |lo: f64, hi: f64, n: usize| -> Vec<f64> { (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect() };
    let best = |times: &[f64]| -> SimResult<(f64, f64)> {
        let out = cowell_propagate(s1, s2, mu, zero, t0, times, &opts)?;
        Ok(out
            .iter()
            .map(|s| (s.t, s.dr_rtn1.norm()))
            .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a }))
    };
    let coarse = grid(t_lo, t_hi, 4000);
    let (tc, _) = best(&coarse)?;
    let h = (t_hi - t_lo) / 4000.0;
    let fine = grid((tc - h).max(t0), tc + h, 2000);
    let (tf, df) = best(&fine)?;
    let h2 = 2.0 * h / 2000.0;
    if tf - h2 < t0 {
        return Ok(Approach { t: tf, distance_km: df });
    }
    // Nearly rectilinear relative motion: distance squared is quadratic in time.
    let tri = [tf - h2, tf, tf + h2];
    let out = cowell_propagate(s1, s2, mu, zero, t0, &tri, &opts)?;
    let d2: Vec<f64> = out.iter().map(|s| s.dr_rtn1.norm_squared()).collect();
    let curv = d2[0] - 2.0 * d2[1] + d2[2];
    if curv > 0.0 {
        let shift = 0.5 * (d2[0] - d2[2]) / curv;
        if shift.abs() <= 1.0 {
            let t = tf + shift * h2;
            let d = (d2[1] - 0.25 * (d2[0] - d2[2]) * shift).max(0.0).sqrt();
            return Ok(Approach { t, distance_km: d.min(df) });
        }
    }
    Ok(Approach { t: tf, distance_km: df })
}

/// Evaluates the avoidance impulse along the run-0 estimate, applies the one
/// nearest `cfg.maneuver.epoch_days` to the true spacecraft and replays the
/// encounter inertially.
pub fn run_maneuver_sweep(cfg: &ScenarioConfig) -> SimResult<ManeuverReport> {
    let scn = Scenario::from_config(cfg)?;
    let times = cfg.sample_times();
    let truth = truth_trajectory(&scn, cfg, &times)?;
    let steps = sweep_indices(&times, cfg.maneuver.sweep_step_hours * 3600.0);
    let plan = RunPlan {
        cfg,
        truth: &truth,
        noise: cfg.noise()?,
        log_stride: times.len(),
        keep_full: false,
        maneuver_steps: &steps,
    };
    let run = run_filter(&plan, 0)?;
    let target_t = cfg.maneuver.epoch_days * DAY;
    let selected = *run
        .maneuvers
        .iter()
        .min_by(|a, b| (a.t - target_t).abs().total_cmp(&(b.t - target_t).abs()))
        .ok_or_else(|| SimError::Config("no sweep epochs inside the run".into()))?;
    let early_window_max_dv = run
        .maneuvers
        .iter()
        .filter(|m| m.t >= DAY && m.t <= 7.0 * DAY)
        .map(|m| m.dv_norm)
        .fold(0.0, f64::max);

    let window = (scn.t_impact - 2.0 * DAY, scn.t_impact + 2.0 * DAY);
    let (c1, c2) = scn.cartesian_at(selected.t);
    let nominal = closest_approach(&c1, &c2, cfg.mu, selected.t, window.0, window.1, cfg.rel_tol)?;
    let burned = CartesianState { r: c1.r, v: c1.v + c1.rtn_to_inertial(&selected.delta_v.into()) };
    let maneuvered = closest_approach(&burned, &c2, cfg.mu, selected.t, window.0, window.1, cfg.rel_tol)?;
    Ok(ManeuverReport {
        sweep: run.maneuvers,
        selected,
        early_window_max_dv,
        nominal,
        maneuvered,
    })
}
