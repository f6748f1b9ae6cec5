//! Scenario configuration. Angles are in degrees in this file format and
//! converted to radians when the scenario is built.

use std::path::Path;

use nalgebra::Matrix6;
use nodal_core::dynamics::{IntegratorOptions, MU_SUN};
use nodal_core::frames::ClassicalElements;
use nodal_core::navigation::NoiseSpec;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

pub const DAY: f64 = 86400.0;
pub const AU_KM: f64 = 149_597_870.7;

/// Classical elements with angles in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsDeg {
    pub a_km: f64,
    pub e: f64,
    pub inc_deg: f64,
    pub raan_deg: f64,
    pub argp_deg: f64,
    pub nu_deg: f64,
}

impl ElementsDeg {
    pub fn to_elements(&self) -> SimResult<ClassicalElements<f64>> {
        Ok(ClassicalElements::from_degrees(
            self.a_km,
            self.e,
            self.inc_deg,
            self.raan_deg,
            self.argp_deg,
            self.nu_deg,
        )?)
    }
}

/// Encounter geometry at the impact epoch, relative to the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncounterSpec {
    /// Spacecraft-minus-target speed at impact, km/s.
    pub relative_speed: f64,
    /// Relative inclination of the two orbital planes, deg.
    pub gamma_deg: f64,
    /// Radial component of the relative velocity at impact, km/s.
    pub radial_speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDeg {
    pub az: f64,
    pub el: f64,
    pub beta: f64,
}

impl NoiseDeg {
    pub fn to_spec(&self) -> SimResult<NoiseSpec<f64>> {
        Ok(NoiseSpec::new(self.az.to_radians(), self.el.to_radians(), self.beta.to_radians())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthModel {
    /// Keplerian nodal-element propagation.
    Nodal,
    /// Inertial two-body propagation of both bodies.
    Cowell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManeuverConfig {
    /// Constant added to the three-sigma margin uncertainty.
    pub offset: f64,
    /// Impulse epoch, days after the start of the run.
    pub epoch_days: f64,
    /// Spacing of the impulse-magnitude sweep, hours.
    pub sweep_step_hours: f64,
}

impl Default for ManeuverConfig {
    fn default() -> Self {
        Self {
            offset: 1e-4,
            epoch_days: 3.0,
            sweep_step_hours: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Gravitational parameter of the primary, km^3/s^2.
    pub mu: f64,
    /// Target (satellite 2) elements at the impact epoch.
    pub target: ElementsDeg,
    /// Colliding spacecraft built from this geometry unless `spacecraft` is given.
    pub encounter: EncounterSpec,
    /// Explicit spacecraft (satellite 1) elements at the impact epoch.
    pub spacecraft: Option<ElementsDeg>,
    /// Target diameter, km.
    pub diameter_km: f64,
    pub noise_deg: NoiseDeg,
    /// Measurement cadence, s.
    pub sample_dt: f64,
    /// Start and end of the run relative to impact, s (both negative).
    pub t_start: f64,
    pub t_end: f64,
    /// Standard deviation of the initial estimate error on each state.
    pub init_perturb_sigma: f64,
    /// Process-noise spectral density, per second.
    pub q_diag: [f64; 6],
    pub p0_diag: [f64; 6],
    pub seed: u64,
    pub mc_runs: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub truth_model: TruthModel,
    /// Length of the initial transient excluded from detection statistics, s.
    pub transient: f64,
    /// Chi-square gate on the normalized innovation (3 dof); flags only.
    pub chi2_gate: Option<f64>,
    pub maneuver: ManeuverConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let s = 1.5e-4;
        Self {
            mu: MU_SUN,
            target: ElementsDeg {
                a_km: 2.435 * AU_KM,
                e: 0.164,
                inc_deg: 3.06,
                raan_deg: 80.9,
                argp_deg: 250.1,
                nu_deg: 60.0,
            },
            encounter: EncounterSpec {
                relative_speed: 15.0,
                gamma_deg: 4.0,
                radial_speed: -12.0,
            },
            spacecraft: None,
            diameter_km: 90.0,
            noise_deg: NoiseDeg { az: 1e-3, el: 1e-3, beta: 1e-3 },
            sample_dt: 60.0,
            t_start: -20.0 * DAY,
            t_end: -0.25 * DAY,
            init_perturb_sigma: s,
            q_diag: [1e-16, 1e-20, 1e-20, 1e-20, 1e-20, 1e-20],
            p0_diag: [s * s; 6],
            seed: 42,
            mc_runs: 25,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            truth_model: TruthModel::Nodal,
            transient: DAY,
            chi2_gate: Some(16.27),
            maneuver: ManeuverConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Full-size campaign: 200 runs at a 5 s cadence.
    pub fn paper_scale(mut self) -> Self {
        self.mc_runs = 200;
        self.sample_dt = 5.0;
        self
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if !(self.mu > 0.0) {
            return bad("mu must be positive");
        }
        if !(self.t_start < self.t_end && self.t_end <= 0.0) {
            return bad("need t_start < t_end <= 0 (seconds relative to impact)");
        }
        if !(self.sample_dt > 0.0) {
            return bad("sample_dt must be positive");
        }
        if self.mc_runs < 1 {
            return bad("mc_runs must be at least 1");
        }
        if !(self.diameter_km > 0.0) {
            return bad("diameter must be positive");
        }
        if self.q_diag.iter().chain(&self.p0_diag).any(|v| !(*v >= 0.0)) {
            return bad("covariance diagonals must be non-negative");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    pub fn noise(&self) -> SimResult<NoiseSpec<f64>> {
        self.noise_deg.to_spec()
    }

    pub fn q(&self) -> Matrix6<f64> {
        Matrix6::from_diagonal(&self.q_diag.into())
    }

    pub fn p0(&self) -> Matrix6<f64> {
        Matrix6::from_diagonal(&self.p0_diag.into())
    }

    pub fn integrator(&self) -> IntegratorOptions<f64> {
        IntegratorOptions::new(self.rel_tol, self.abs_tol)
    }

    /// Sample epochs in seconds since the start of the run.
    pub fn sample_times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let n = (span / self.sample_dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_dt).collect()
    }

    /// Impact epoch in seconds since the start of the run.
    pub fn impact_time(&self) -> f64 {
        -self.t_start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let cfg = ScenarioConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        back.validate().unwrap();
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"mc_runs": 3, "sample_dt": 120.0}"#).unwrap();
        assert_eq!(cfg.mc_runs, 3);
        assert_eq!(cfg.diameter_km, 90.0);
    }

    #[test]
    fn rejects_bad_timeline() {
        let cfg = ScenarioConfig { t_end: 10.0, ..ScenarioConfig::default() };
        assert!(cfg.validate().is_err());
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn sample_grid_spans_the_run() {
        let cfg = ScenarioConfig::default();
        let t = cfg.sample_times();
        assert_eq!(t[0], 0.0);
        assert!((t.last().unwrap() - (cfg.t_end - cfg.t_start)).abs() < 1e-6);
        assert_eq!(cfg.paper_scale().sample_dt, 5.0);
    }
}
