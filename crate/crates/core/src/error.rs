use thiserror::Error;

/// Errors raised by the relative-motion toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("relative inclination {gamma} rad is too close to pi (retrograde pair)")]
    RetrogradeSingularity { gamma: f64 },
    #[error("relative node undefined: inclination vector below coplanar threshold")]
    AmbiguousTheta1,
    #[error("node-crossing branch requested for a coplanar pair")]
    Theta1Degenerate,
    #[error("radius denominator {denominator} is not positive")]
    GeometryError { denominator: f64 },
    #[error("normal acceleration applied to a coplanar pair")]
    CoplanarNormalInput,
    #[error("periapsis angle undefined for a circular orbit")]
    CircularPeriapsis,
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },
    #[error("orbit is not elliptic (energy {energy})")]
    NotElliptic { energy: f64 },
    #[error("safety margin undefined for zero relative inclination")]
    ZetaUndefined,
    #[error("collision margin insensitive to impulse (|g| = {norm})")]
    ZeroSensitivity { norm: f64 },
    #[error("relative range is zero")]
    ZeroRange,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn to_f64<T: crate::Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}
