//! Conjunction screening of the nominal encounter.

use nodal_core::conjunction::{c1_test, c2_check, zeta, zeta_descending, DEFAULT_COPLANAR_TOL, DEFAULT_NODE_TOL};
use serde::Serialize;

use crate::config::{ScenarioConfig, DAY};
use crate::error::SimResult;
use crate::scenario::{truth_trajectory, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScreenRow {
    pub t: f64,
    pub range_km: f64,
    pub zeta_ascending: f64,
    pub zeta_descending: f64,
    pub necessary_condition: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScreeningReport {
    pub t_impact: f64,
    pub collides: bool,
    pub t_min: f64,
    pub d_min_km: f64,
    #[serde(skip)]
    pub rows: Vec<ScreenRow>,
}

/// Margins along the true trajectory at `step` spacing, with the sampled
/// minimum distance up to one day past impact.
pub fn screen(cfg: &ScenarioConfig, step: f64) -> SimResult<ScreeningReport> {
    let scn = Scenario::from_config(cfg)?;
    let n = (scn.t_impact / step).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    let truth = truth_trajectory(&scn, cfg, &times)?;
    let rows = truth
        .iter()
        .map(|s| {
            Ok(ScreenRow {
                t: s.t,
                range_km: s.dr.norm(),
                zeta_ascending: zeta(&s.oe, &s.eta)?,
                zeta_descending: zeta_descending(&s.oe, &s.eta)?,
                necessary_condition: c1_test(&s.oe, &s.eta, DEFAULT_COPLANAR_TOL, DEFAULT_NODE_TOL).satisfied(),
            })
        })
        .collect::<SimResult<Vec<_>>>()?;
    let (oe, eta) = scn.initial_state()?;
    let c2 = c2_check(&oe, &eta, cfg.mu, 0.0, scn.t_impact + DAY, cfg.diameter_km / 2.0, &cfg.integrator())?;
    Ok(ScreeningReport {
        t_impact: scn.t_impact,
        collides: c2.collides,
        t_min: c2.t_min,
        d_min_km: c2.d_min,
        rows,
    })
}
