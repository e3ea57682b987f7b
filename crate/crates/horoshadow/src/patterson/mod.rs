//! Orbit growth, critical exponents and atomic approximations of the
//! Patterson density.

mod measure;
mod profile;

pub use measure::{
    binned_total_variation, build_counting_measure, build_patterson, conformal_reweight,
    poincare_partial, pushforward, read_measure, tail_fraction, write_measure,
    AtomicBoundaryMeasure, MEASURE_FORMAT,
};
pub use profile::{
    cyclic_orbit_distances, estimate_delta, estimate_delta_poincare, growth_condition_check,
    CountingProfile, CriticalExponentEstimate, GrowthCheckReport, DEFAULT_MIN_COUNT,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PattersonError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window [{lo}, {hi}] outside the profile range [0, {max}]")]
    BadWindow { lo: f64, hi: f64, max: f64 },
    #[error("empty shell [{index}, {})", index + 1)]
    EmptyShell { index: usize },
    #[error("exponent s = {s} must exceed the critical exponent estimate {delta}")]
    ExponentTooSmall { s: f64, delta: f64 },
    #[error("measure file: {0}")]
    MeasureFile(String),
}
