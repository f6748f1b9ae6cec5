//! One filter run against a shared truth trajectory.

use nalgebra::{Matrix6, RowVector6, Vector3, Vector6};
use nodal_core::conjunction::{plan_avoidance, zeta, zeta_gradient};
use nodal_core::navigation::{
    ekf_propagate, ekf_update, estimation_error, measure, nees, FilterState, NoiseSpec,
};
use nodal_core::relstate::{position_jacobians, relative_position, NodalRelativeState, ReferenceParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::SimResult;
use crate::scenario::TruthSample;

/// Random stream of run `run` under `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Filter quantities logged after each update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLog {
    pub t: f64,
    pub oe_hat: NodalRelativeState<f64>,
    pub err: Vector6<f64>,
    pub three_sigma: Vector6<f64>,
    /// Estimated minus true range, km.
    pub range_err: f64,
    pub range_3sigma: f64,
    pub zeta_hat: f64,
    pub zeta_3sigma: f64,
    pub innovation: Vector3<f64>,
    pub nees: f64,
    pub outlier: bool,
}

/// Avoidance impulse evaluated on the estimate at one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManeuverPoint {
    pub t: f64,
    pub zeta_hat: f64,
    pub zeta_3sigma: f64,
    pub delta_zeta: f64,
    /// RTN impulse on the spacecraft, km/s.
    pub delta_v: [f64; 3],
    pub dv_norm: f64,
}

/// Per-run statistics and an optional full log.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub run: u64,
    /// Steps whose component error lies inside the three-sigma bound.
    pub covered: [u64; 6],
    pub steps: u64,
    /// Margin band contains zero at every post-transient step.
    pub detected: bool,
    pub outliers: u64,
    /// Range error of the initial estimate, before the first update.
    pub initial_range_err: f64,
    /// One-sigma range uncertainty implied by the initial covariance.
    pub initial_range_sigma: f64,
    pub final_range_err: f64,
    pub final_range_3sigma: f64,
    /// Decimated log for ensemble envelopes.
    pub coarse: Vec<StepLog>,
    /// Every step, kept only when requested.
    pub full: Option<Vec<StepLog>>,
    pub maneuvers: Vec<ManeuverPoint>,
}

/// Settings shared by all runs of a campaign.
pub struct RunPlan<'a> {
    pub cfg: &'a ScenarioConfig,
    pub truth: &'a [TruthSample],
    pub noise: NoiseSpec<f64>,
    /// Keep every `log_stride`-th step in `coarse`.
    pub log_stride: usize,
    pub keep_full: bool,
    /// Sample indices at which the avoidance impulse is evaluated.
    pub maneuver_steps: &'a [usize],
}

fn range_and_sigma(oe: &NodalRelativeState<f64>, eta: &ReferenceParams<f64>, p: &Matrix6<f64>) -> SimResult<(f64, f64)> {
    let dr = relative_position(oe, eta)?.dr;
    let (j, _) = position_jacobians(oe, eta)?;
    let u = dr.normalize().transpose() * j;
    Ok((dr.norm(), (u * p * u.transpose())[0].max(0.0).sqrt()))
}

fn zeta_and_sigma(oe: &NodalRelativeState<f64>, eta: &ReferenceParams<f64>, p: &Matrix6<f64>) -> SimResult<(f64, f64)> {
    let z = zeta(oe, eta)?;
    let (g, _) = zeta_gradient(oe, eta)?;
    let g: RowVector6<f64> = g.transpose();
    Ok((z, (g * p * g.transpose())[0].max(0.0).sqrt()))
}

pub fn run_filter(plan: &RunPlan<'_>, run: u64) -> SimResult<RunOutcome> {
    let cfg = plan.cfg;
    let mut rng = run_rng(cfg.seed, run);
    let opts = cfg.integrator();
    let q = cfg.q();
    let first = plan.truth[0];

    let mut x0 = first.oe.to_vector();
    for v in x0.iter_mut() {
        *v += cfg.init_perturb_sigma * rng.sample::<f64, _>(StandardNormal);
    }
    let mut fs = FilterState::new(NodalRelativeState::from_vector(&x0), cfg.p0());
    let (rho0, sigma0) = range_and_sigma(&fs.oe_hat, &first.eta, &fs.p)?;
    let initial_range_err = rho0 - first.dr.norm();

    let mut out = RunOutcome {
        run,
        covered: [0; 6],
        steps: 0,
        detected: true,
        outliers: 0,
        initial_range_err,
        initial_range_sigma: sigma0,
        final_range_err: f64::NAN,
        final_range_3sigma: f64::NAN,
        coarse: Vec::new(),
        full: plan.keep_full.then(Vec::new),
        maneuvers: Vec::new(),
    };

    let mut eta_hat = first.eta;
    let mut t_prev = first.t;
    let t_transient = first.t + cfg.transient;
    let mut next_maneuver = plan.maneuver_steps.iter().peekable();
    for (k, truth) in plan.truth.iter().enumerate() {
        if k > 0 {
            let (next, _) = ekf_propagate(&fs, &eta_hat, truth.t - t_prev, &q, cfg.mu, &opts)?;
            fs = next;
        }
        // The reference parameters are known exactly.
        eta_hat = truth.eta;
        t_prev = truth.t;

        let z = measure(&truth.dr, cfg.diameter_km, &plan.noise, &mut rng)?;
        let upd = ekf_update(&fs, &eta_hat, &z, &plan.noise, cfg.diameter_km, cfg.chi2_gate)?;
        fs = upd.state;

        let err = estimation_error(&fs.oe_hat, &truth.oe);
        let three_sigma = fs.three_sigma();
        let (rho_hat, rho_sigma) = range_and_sigma(&fs.oe_hat, &eta_hat, &fs.p)?;
        let (zeta_hat, zeta_sigma) = zeta_and_sigma(&fs.oe_hat, &eta_hat, &fs.p)?;
        let log = StepLog {
            t: truth.t,
            oe_hat: fs.oe_hat,
            err,
            three_sigma,
            range_err: rho_hat - truth.dr.norm(),
            range_3sigma: 3.0 * rho_sigma,
            zeta_hat,
            zeta_3sigma: 3.0 * zeta_sigma,
            innovation: upd.innovation,
            nees: nees(&err, &fs.p).unwrap_or(f64::NAN),
            outlier: upd.outlier,
        };

        out.steps += 1;
        out.outliers += u64::from(upd.outlier);
        for i in 0..6 {
            out.covered[i] += u64::from(err[i].abs() <= three_sigma[i]);
        }
        if truth.t >= t_transient && zeta_hat.abs() > log.zeta_3sigma {
            out.detected = false;
        }
        if next_maneuver.peek().is_some_and(|&&s| s == k) {
            next_maneuver.next();
            // Push the margin away from zero.
            let sign = if zeta_hat < 0.0 { -1.0 } else { 1.0 };
            let delta_zeta = sign * (log.zeta_3sigma + cfg.maneuver.offset);
            let m = plan_avoidance(&fs.oe_hat, &eta_hat, delta_zeta, cfg.mu, truth.t)?;
            out.maneuvers.push(ManeuverPoint {
                t: truth.t,
                zeta_hat,
                zeta_3sigma: log.zeta_3sigma,
                delta_zeta,
                delta_v: m.delta_v.into(),
                dv_norm: m.delta_v.norm(),
            });
        }
        if k % plan.log_stride == 0 || k + 1 == plan.truth.len() {
            out.coarse.push(log);
        }
        if let Some(full) = out.full.as_mut() {
            full.push(log);
        }
        out.final_range_err = log.range_err;
        out.final_range_3sigma = log.range_3sigma;
    }
    Ok(out)
}
