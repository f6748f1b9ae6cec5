//! Encounter scenarios, filter campaigns and avoidance studies built on
//! `nodal-core`.

pub mod config;
pub mod error;
pub mod flyby;
pub mod maneuver;
pub mod montecarlo;
pub mod output;
pub mod scenario;
pub mod screening;
pub mod validation;

pub use config::ScenarioConfig;
pub use error::{SimError, SimResult};
