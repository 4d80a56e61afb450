//! Two-photon Young's double-slit simulator.
//!
//! Computes analytic coincidence-rate surfaces for biphotons passing a double slit
//! (both photons through the same slit, or through opposite slits), checks them
//! against a brute-force path-sum oracle, draws synthetic coincidence histograms by
//! Monte Carlo and extracts fringe periods, visibilities and stripe tilts.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the file formats and the
//! command-line driver use.

// NaN-rejecting checks are written as `!(x > y)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod montecarlo;
pub mod physics;
pub mod scalar;

pub use error::{Error, Result};
pub use grid::Grid;
pub use scalar::{Real, SPEED_OF_LIGHT};

pub type ExperimentConfigF64 = physics::ExperimentConfig<f64>;
pub type ExperimentParamsF64 = physics::ExperimentParams<f64>;
pub type RateSurfaceF64 = physics::RateSurface<f64>;
pub type CoincidenceHistogramF64 = montecarlo::CoincidenceHistogram<f64>;
pub type CutProfileF64 = analysis::CutProfile<f64>;
pub type FringeFitF64 = analysis::FringeFit<f64>;
pub type TiltF64 = analysis::Tilt<f64>;
