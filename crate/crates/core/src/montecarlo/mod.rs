//! Seeded Monte Carlo generation of coincidence histograms.

mod sampler;
pub mod seeding;
mod stats;

pub use sampler::{
    normalize_density, normalize_density_on_grid, rejection_bound, sample_events,
    CoincidenceHistogram, SamplerConfig, BOUND_CHECK_BINS, DEFAULT_BINS, DEFAULT_CHUNK_SIZE,
    DEFAULT_EVENTS, DEFAULT_SEED, NORMALIZATION_GRID,
};
pub use stats::{chi_square, density_deviation, expected_counts, ChiSquare};
