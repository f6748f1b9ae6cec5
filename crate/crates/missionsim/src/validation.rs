//! Nodal model against inertial propagation of the same two orbits.

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::Vector3;
use nodal_core::dynamics::{
    cowell_propagate, elements_to_cartesian, propagate, IntegratorOptions, PerturbationInput, MU_EARTH,
};
use nodal_core::frames::ClassicalElements;
use nodal_core::relstate::{oe_from_classical, relative_position};
use serde::Serialize;

use crate::error::SimResult;

#[derive(Clone, Copy, Debug)]
pub struct ValidationCase {
    pub sat1: ClassicalElements<f64>,
    pub sat2: ClassicalElements<f64>,
    pub mu: f64,
    pub duration: f64,
    pub samples: usize,
    /// Amplitude of the sinusoidal RTN accelerations, km/s^2; zero disables them.
    pub amplitude: f64,
    pub rel_tol: f64,
}

impl Default for ValidationCase {
    fn default() -> Self {
        Self {
            sat1: ClassicalElements::from_degrees(8.9e3, 0.5, 10.0, 20.0, 0.0, 30.0).expect("valid elements"),
            sat2: ClassicalElements::from_degrees(6.8e3, 0.1, 40.0, 90.0, 30.0, 70.0).expect("valid elements"),
            mu: MU_EARTH,
            duration: 1e4,
            samples: 200,
            amplitude: 1e-3,
            rel_tol: 1e-12,
        }
    }
}

/// Deterministic, smooth test forcing on both satellites.
pub fn test_forcing(t: f64, amplitude: f64) -> PerturbationInput<f64> {
    let s = |period: f64, phase: f64| amplitude * (TAU * t / period + phase).sin();
    PerturbationInput {
        u1: Vector3::new(s(900.0, 0.0), s(1100.0, 1.0), s(1300.0, 2.0)),
        u2: Vector3::new(s(1000.0, 0.5), s(1200.0, 1.5), s(1400.0, 2.5)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub amplitude: f64,
    pub rel_tol: f64,
    /// Largest position difference over the samples, km.
    pub max_error_km: f64,
    pub elapsed_s: f64,
    /// Per sample: t, model relative position (RTN), Cowell relative position (RTN).
    #[serde(skip)]
    pub rows: Vec<(f64, Vector3<f64>, Vector3<f64>)>,
}

pub fn run_validation(case: &ValidationCase) -> SimResult<ValidationReport> {
    let start = Instant::now();
    let times: Vec<f64> = (1..=case.samples).map(|k| case.duration * k as f64 / case.samples as f64).collect();
    let amp = case.amplitude;
    let (oe, eta) = oe_from_classical(&case.sat1, &case.sat2)?;
    let model = propagate(
        &oe,
        &eta,
        case.mu,
        |t, _, _| test_forcing(t, amp),
        0.0,
        &times,
        &IntegratorOptions::new(case.rel_tol, case.rel_tol * 1e-2),
    )?;
    let s1 = elements_to_cartesian(&case.sat1, case.mu);
    let s2 = elements_to_cartesian(&case.sat2, case.mu);
    let cow = cowell_propagate(
        &s1,
        &s2,
        case.mu,
        |t, _, _| test_forcing(t, amp),
        0.0,
        &times,
        &IntegratorOptions::new(case.rel_tol, case.rel_tol * 1e2),
    )?;
    let mut rows = Vec::with_capacity(times.len());
    let mut max_error_km: f64 = 0.0;
    for (m, c) in model.iter().zip(&cow) {
        let dr = relative_position(&m.oe, &m.eta)?.dr;
        max_error_km = max_error_km.max((dr - c.dr_rtn1).norm());
        rows.push((m.t, dr, c.dr_rtn1));
    }
    Ok(ValidationReport {
        amplitude: amp,
        rel_tol: case.rel_tol,
        max_error_km,
        elapsed_s: start.elapsed().as_secs_f64(),
        rows,
    })
}
