//! Experiment geometry, the analytic coincidence rate and its path-sum oracle.

mod config;
mod oracle;
mod rate;

pub use config::{Arm, ExperimentConfig, ExperimentParams, Scheme, PARAXIAL_LIMIT};
pub use oracle::{
    max_relative_change, oracle_check, oracle_rate, oracle_surface, shape_deviation,
    slit_propagator, OracleCheck, Slit, DEFAULT_QUADRATURE_POINTS, MIN_QUADRATURE_POINTS,
    ORACLE_TOLERANCE, QUADRATURE_TOLERANCE,
};
pub(crate) use rate::rate;
pub use rate::{
    arm_envelope, coincidence_rate, coincidence_rate_sum_diff, envelope, interference_factor,
    interference_phase, interference_phase_sum_diff, rate_surface, Provenance, RateSurface,
    MIN_SURFACE_BINS,
};
