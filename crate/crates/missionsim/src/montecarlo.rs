//! Monte Carlo campaigns over independent measurement and initialization draws.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::SimResult;
use crate::flyby::{run_filter, RunOutcome, RunPlan};
use crate::scenario::{truth_trajectory, Scenario, TruthSample};

/// Ensemble statistics at one logged epoch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub t: f64,
    /// Ensemble standard deviation of each state error.
    pub true_sigma: [f64; 6],
    /// Mean filter one-sigma bound of each state.
    pub filter_sigma: [f64; 6],
    pub range_err_sigma: f64,
    pub range_filter_sigma: f64,
    pub mean_nees: f64,
    /// Fraction of runs whose margin band contains zero at this epoch.
    pub zeta_contains_zero: f64,
}

/// Scalar results of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub runs: usize,
    pub steps_per_run: u64,
    pub sample_dt: f64,
    pub seed: u64,
    /// Fraction of runs whose margin band contains zero at every post-transient step.
    pub detection_rate: f64,
    /// Fraction of (run, step) pairs inside the three-sigma bound, per component.
    pub coverage: [f64; 6],
    pub coverage_aggregate: f64,
    /// Ensemble standard deviation of the range error at the first epoch (before any update), km.
    pub initial_range_err_sigma: f64,
    /// One-sigma range uncertainty implied by the initial covariance, km.
    pub initial_range_uncertainty: f64,
    /// Ensemble standard deviation of the range error at the last epoch, km.
    pub final_range_err_sigma: f64,
    pub final_range_err_mean: f64,
    /// Mean filter three-sigma range bound at the last epoch, km.
    pub final_range_3sigma_mean: f64,
    /// Fraction of logged epochs whose mean NEES lies inside the two-sided 99% band.
    pub nees_in_band: f64,
    pub outliers_flagged: u64,
}

/// Result of [`run_montecarlo`].
pub struct Campaign {
    pub summary: CampaignSummary,
    pub envelopes: Vec<EnvelopeRow>,
    pub runs: Vec<RunOutcome>,
    pub truth: Vec<TruthSample>,
}

/// Wilson-Hilferty approximation of a chi-square quantile.
pub fn chi2_quantile(dof: f64, z: f64) -> f64 {
    let c = 2.0 / (9.0 * dof);
    dof * (1.0 - c + z * c.sqrt()).powi(3)
}

fn std_dev(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Epoch spacing of the envelope log so that a campaign keeps about 2000 rows.
pub fn log_stride(steps: usize) -> usize {
    (steps / 2000).max(1)
}

/// Runs `cfg.mc_runs` filters against one truth trajectory.
///
/// Runs execute in parallel; each owns a random stream derived from
/// `(seed, run index)` and results are reduced in run order, so outputs do not
/// depend on the thread count. Run `0` keeps its full log and evaluates the
/// avoidance impulse at `maneuver_steps`.
pub fn run_montecarlo(cfg: &ScenarioConfig, maneuver_steps: &[usize]) -> SimResult<Campaign> {
    let scn = Scenario::from_config(cfg)?;
    let times = cfg.sample_times();
    let truth = truth_trajectory(&scn, cfg, &times)?;
    let noise = cfg.noise()?;
    let stride = log_stride(times.len());
    let runs: Vec<RunOutcome> = (0..cfg.mc_runs as u64)
        .into_par_iter()
        .map(|run| {
            let plan = RunPlan {
                cfg,
                truth: &truth,
                noise,
                log_stride: stride,
                keep_full: run == 0,
                maneuver_steps: if run == 0 { maneuver_steps } else { &[] },
            };
            run_filter(&plan, run)
        })
        .collect::<SimResult<_>>()?;

    let n = runs.len() as f64;
    let steps = runs[0].steps;
    let total: u64 = runs.iter().map(|r| r.steps).sum();
    let mut coverage = [0.0; 6];
    for (i, c) in coverage.iter_mut().enumerate() {
        *c = runs.iter().map(|r| r.covered[i]).sum::<u64>() as f64 / total as f64;
    }
    let coverage_aggregate = coverage.iter().sum::<f64>() / 6.0;

    let rows = runs[0].coarse.len();
    let nees_lo = chi2_quantile(6.0 * n, -2.5758) / n;
    let nees_hi = chi2_quantile(6.0 * n, 2.5758) / n;
    let mut envelopes = Vec::with_capacity(rows);
    for j in 0..rows {
        let at = |r: &RunOutcome| r.coarse[j];
        let mut true_sigma = [0.0; 6];
        let mut filter_sigma = [0.0; 6];
        for i in 0..6 {
            // Errors are zero-mean by construction; the ensemble spread is about zero.
            true_sigma[i] = (runs.iter().map(|r| at(r).err[i].powi(2)).sum::<f64>() / n).sqrt();
            filter_sigma[i] = runs.iter().map(|r| at(r).three_sigma[i] / 3.0).sum::<f64>() / n;
        }
        envelopes.push(EnvelopeRow {
            t: at(&runs[0]).t,
            true_sigma,
            filter_sigma,
            range_err_sigma: (runs.iter().map(|r| at(r).range_err.powi(2)).sum::<f64>() / n).sqrt(),
            range_filter_sigma: runs.iter().map(|r| at(r).range_3sigma / 3.0).sum::<f64>() / n,
            mean_nees: runs.iter().map(|r| at(r).nees).sum::<f64>() / n,
            zeta_contains_zero: runs.iter().filter(|r| at(r).zeta_hat.abs() <= at(r).zeta_3sigma).count() as f64 / n,
        });
    }
    let nees_in_band = envelopes
        .iter()
        .filter(|e| e.mean_nees >= nees_lo && e.mean_nees <= nees_hi)
        .count() as f64
        / rows as f64;

    let (_, initial_sigma) = std_dev(runs.iter().map(|r| r.initial_range_err));
    let (final_mean, final_sigma) = std_dev(runs.iter().map(|r| r.final_range_err));
    let summary = CampaignSummary {
        runs: runs.len(),
        steps_per_run: steps,
        sample_dt: cfg.sample_dt,
        seed: cfg.seed,
        detection_rate: runs.iter().filter(|r| r.detected).count() as f64 / n,
        coverage,
        coverage_aggregate,
        initial_range_err_sigma: initial_sigma,
        initial_range_uncertainty: runs[0].initial_range_sigma,
        final_range_err_sigma: final_sigma,
        final_range_err_mean: final_mean,
        final_range_3sigma_mean: runs.iter().map(|r| r.final_range_3sigma).sum::<f64>() / n,
        nees_in_band,
        outliers_flagged: runs.iter().map(|r| r.outliers).sum(),
    };
    Ok(Campaign { summary, envelopes, runs, truth })
}
