//! Construction of the encounter and of the truth trajectory.

use nalgebra::Vector3;
use nodal_core::dynamics::{
    cartesian_to_elements, cowell_propagate, elements_to_cartesian, kepler_advance, propagate, CartesianState,
    PerturbationInput,
};
use nodal_core::frames::ClassicalElements;
use nodal_core::relstate::{oe_from_classical, relative_position, NodalRelativeState, ReferenceParams};

use crate::config::{EncounterSpec, ScenarioConfig, TruthModel};
use crate::error::{SimError, SimResult};

/// Spacecraft orbit that meets `target` at its current position.
///
/// The spacecraft plane is tilted by `gamma` about the target's radial
/// direction, so the impact point lies on the ascending relative node. The
/// relative velocity has radial component `radial_speed` and magnitude
/// `relative_speed`.
pub fn build_collision_scenario(
    spec: &EncounterSpec,
    target: &ClassicalElements<f64>,
    mu: f64,
) -> SimResult<(ClassicalElements<f64>, ClassicalElements<f64>)> {
    let gamma = spec.gamma_deg.to_radians();
    if !(spec.relative_speed > 0.0) || !(gamma > 0.0 && gamma < std::f64::consts::PI) {
        return Err(SimError::InfeasibleEncounter(
            "need relative speed > 0 and gamma in (0, 180) deg".into(),
        ));
    }
    let s2 = elements_to_cartesian(target, mu);
    let (rhat, t2, n2) = s2.rtn_basis();
    let (vr2, vt2) = (s2.v.dot(&rhat), s2.v.dot(&t2));
    let (sg, cg) = gamma.sin_cos();
    let disc = spec.relative_speed.powi(2) - spec.radial_speed.powi(2) - (vt2 * sg).powi(2);
    if disc < 0.0 {
        return Err(SimError::InfeasibleEncounter(format!(
            "relative speed {} km/s too small for gamma {} deg",
            spec.relative_speed, spec.gamma_deg
        )));
    }
    // The slower root keeps the spacecraft bound for realistic encounter speeds.
    let vt1 = vt2 * cg - disc.sqrt();
    let t1 = t2 * cg - n2 * sg;
    let v1 = rhat * (vr2 + spec.radial_speed) + t1 * vt1;
    let s1 = CartesianState { r: s2.r, v: v1 };
    let sc = cartesian_to_elements(&s1, mu)
        .map_err(|e| SimError::InfeasibleEncounter(format!("spacecraft orbit: {e}")))?;
    Ok((sc.elements, *target))
}

/// Both orbits at the start of the run, with the impact epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    pub mu: f64,
    /// Spacecraft (satellite 1) at the start of the run.
    pub sat1: ClassicalElements<f64>,
    /// Target (satellite 2) at the start of the run.
    pub sat2: ClassicalElements<f64>,
    /// Impact epoch, s since the start of the run.
    pub t_impact: f64,
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> SimResult<Self> {
        cfg.validate()?;
        let target = cfg.target.to_elements()?;
        let (sc, tg) = match cfg.spacecraft {
            Some(el) => (el.to_elements()?, target),
            None => build_collision_scenario(&cfg.encounter, &target, cfg.mu)?,
        };
        Ok(Self {
            mu: cfg.mu,
            sat1: kepler_advance(&sc, cfg.t_start, cfg.mu),
            sat2: kepler_advance(&tg, cfg.t_start, cfg.mu),
            t_impact: cfg.impact_time(),
        })
    }

    pub fn initial_state(&self) -> SimResult<(NodalRelativeState<f64>, ReferenceParams<f64>)> {
        Ok(oe_from_classical(&self.sat1, &self.sat2)?)
    }

    /// Inertial states of both bodies at `t` (s since start) under Keplerian motion.
    pub fn cartesian_at(&self, t: f64) -> (CartesianState<f64>, CartesianState<f64>) {
        (
            elements_to_cartesian(&kepler_advance(&self.sat1, t, self.mu), self.mu),
            elements_to_cartesian(&kepler_advance(&self.sat2, t, self.mu), self.mu),
        )
    }
}

/// True relative state at one sample epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub oe: NodalRelativeState<f64>,
    pub eta: ReferenceParams<f64>,
    /// Relative position in RTN of the spacecraft, km.
    pub dr: Vector3<f64>,
}

pub fn truth_trajectory(scn: &Scenario, cfg: &ScenarioConfig, times: &[f64]) -> SimResult<Vec<TruthSample>> {
    match cfg.truth_model {
        TruthModel::Nodal => {
            let (oe, eta) = scn.initial_state()?;
            let zero = |_: f64, _: &NodalRelativeState<f64>, _: &ReferenceParams<f64>| PerturbationInput::zero();
            propagate(&oe, &eta, scn.mu, zero, 0.0, times, &cfg.integrator())?
                .into_iter()
                .map(|s| {
                    let dr = relative_position(&s.oe, &s.eta)?.dr;
                    Ok(TruthSample { t: s.t, oe: s.oe, eta: s.eta, dr })
                })
                .collect()
        }
        TruthModel::Cowell => {
            let (c1, c2) = scn.cartesian_at(0.0);
            let opts = cowell_options(cfg.rel_tol, &c1);
            cowell_propagate(&c1, &c2, scn.mu, |_, _, _| PerturbationInput::zero(), 0.0, times, &opts)?
                .into_iter()
                .map(|s| {
                    let el1 = cartesian_to_elements(&s.sat1, scn.mu)?.elements;
                    let el2 = cartesian_to_elements(&s.sat2, scn.mu)?.elements;
                    let (oe, eta) = oe_from_classical(&el1, &el2)?;
                    Ok(TruthSample { t: s.t, oe, eta, dr: s.dr_rtn1 })
                })
                .collect()
        }
    }
}

/// Inertial-propagation tolerances: the absolute floor is scaled to the
/// orbit size so position and velocity components share one relative accuracy.
pub fn cowell_options(rel_tol: f64, s: &CartesianState<f64>) -> nodal_core::dynamics::IntegratorOptions<f64> {
    let scale = s.v.norm().min(s.r.norm());
    nodal_core::dynamics::IntegratorOptions::new(rel_tol, rel_tol * scale)
}
