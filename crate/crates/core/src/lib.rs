//! Satellite relative motion in nonsingular nodal elements.
//!
//! The state of satellite 2 relative to satellite 1 is described by six
//! nodal relative states plus three reference-orbit parameters. The crate
//! provides frame algebra, the element mappings, Keplerian and perturbed
//! dynamics, collision screening and maneuver planning, and an angles-only
//! extended Kalman filter. All numerics are generic over the scalar type;
//! `f64` aliases are provided at the crate root.

pub mod conjunction;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod navigation;
pub mod relstate;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` relative state.
pub type NodalState = relstate::NodalRelativeState<f64>;
/// `f64` reference parameters.
pub type Reference = relstate::ReferenceParams<f64>;
/// `f64` classical elements.
pub type Elements = frames::ClassicalElements<f64>;
/// `f64` Cartesian state.
pub type Cartesian = dynamics::CartesianState<f64>;
/// `f64` direction cosine matrix.
pub type Dcm64 = frames::Dcm<f64>;
/// `f64` perturbation input.
pub type Perturbation = dynamics::PerturbationInput<f64>;
/// `f64` filter state.
pub type Filter = navigation::FilterState<f64>;
