//! Analytic two-photon coincidence rate and sampled rate surfaces.
//!
//! The rate at detector positions `(x1, x2)` is
//!
//! ```text
//! R = E1(x1) E2(x2) (1 + cos φ),   φ = (ω1 x1 ± ω2 x2) d / (c z)
//! ```
//!
//! with `+` for Scheme I and `-` for Scheme II. `E1`, `E2` are the single-slit
//! sinc² envelopes of the two arms (identically 1 when the envelope is switched off).

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Arm, ExperimentConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{cell_centres, sinc, Real};

/// Smallest grid accepted by [`rate_surface`].
pub const MIN_SURFACE_BINS: usize = 8;

/// Single-slit Fraunhofer envelope `sinc²(π b x / (λ z))`.
pub fn envelope<T: Real>(x: T, lambda: T, cfg: &ExperimentConfig<T>) -> T {
    let u = T::PI() * cfg.slit_width() * x / (lambda * cfg.distance());
    let s = sinc(u);
    s * s
}

/// Envelope of one detector arm, honoring the config's envelope switch.
pub fn arm_envelope<T: Real>(x: T, arm: Arm, cfg: &ExperimentConfig<T>) -> T {
    if cfg.envelope_enabled() {
        envelope(x, cfg.lambda(arm), cfg)
    } else {
        T::one()
    }
}

/// Two-photon phase `(ω1 x1 ± ω2 x2) d / (c z)`.
pub fn interference_phase<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> T {
    let sign: T = cfg.scheme().phase_sign();
    let scale = cfg.slit_spacing() / (cfg.speed_of_light() * cfg.distance());
    (cfg.omega1() * x1 + sign * (cfg.omega2() * x2)) * scale
}

/// The same phase written with the sum and difference frequencies.
///
/// Scheme I: `ω+ (x1 + x2)/2 + ω- (x1 - x2)/2`. Scheme II: `ω+ (x1 - x2)/2 + ω- (x1 + x2)/2`.
pub fn interference_phase_sum_diff<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> T {
    let two = T::lit(2.0);
    let scale = cfg.slit_spacing() / (cfg.speed_of_light() * cfg.distance());
    let (co, counter) = ((x1 + x2) / two, (x1 - x2) / two);
    let arg = match cfg.scheme() {
        super::Scheme::SchemeI => cfg.omega_sum() * co + cfg.omega_diff() * counter,
        super::Scheme::SchemeII => cfg.omega_sum() * counter + cfg.omega_diff() * co,
    };
    arg * scale
}

/// `1 + cos φ`, the bare interference factor in `[0, 2]`.
pub fn interference_factor<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> T {
    T::one() + interference_phase(x1, x2, cfg).cos()
}

/// Coincidence rate at detector positions `x1`, `x2` (meters), in `[0, 2]`.
pub fn coincidence_rate<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> Result<T> {
    if !x1.is_finite() {
        return Err(Error::NonFinite("x1"));
    }
    if !x2.is_finite() {
        return Err(Error::NonFinite("x2"));
    }
    Ok(rate(x1, x2, cfg))
}

/// Coincidence rate evaluated through the sum/difference-frequency phase.
pub fn coincidence_rate_sum_diff<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> Result<T> {
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::NonFinite("detector position"));
    }
    let factor = T::one() + interference_phase_sum_diff(x1, x2, cfg).cos();
    Ok(arm_envelope(x1, Arm::D1, cfg) * arm_envelope(x2, Arm::D2, cfg) * factor)
}

#[inline]
pub(crate) fn rate<T: Real>(x1: T, x2: T, cfg: &ExperimentConfig<T>) -> T {
    arm_envelope(x1, Arm::D1, cfg)
        * arm_envelope(x2, Arm::D2, cfg)
        * interference_factor(x1, x2, cfg)
}

/// Where a surface's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Analytic,
    Oracle,
}

/// Rate values on a uniform `(x1, x2)` grid, stored row-major (`x1` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSurface<T> {
    axis1: Vec<T>,
    axis2: Vec<T>,
    values: Vec<T>,
    provenance: Provenance,
}

impl<T: Real> RateSurface<T> {
    pub fn new(
        axis1: Vec<T>,
        axis2: Vec<T>,
        values: Vec<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::InvalidArgument(format!(
                "surface has {} values for a {}x{} grid",
                values.len(),
                axis1.len(),
                axis2.len()
            )));
        }
        check_uniform_axis(&axis1, "axis1")?;
        check_uniform_axis(&axis2, "axis2")?;
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero())) {
            return Err(Error::InvalidArgument(format!(
                "surface value {v} is not >= 0"
            )));
        }
        Ok(Self {
            axis1,
            axis2,
            values,
            provenance,
        })
    }

    pub fn axis1(&self) -> &[T] {
        &self.axis1
    }

    pub fn axis2(&self) -> &[T] {
        &self.axis2
    }

    /// Row-major values, `values[i * axis2.len() + j]` at `(axis1[i], axis2[j])`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.axis2.len() + j]
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }
}

impl<T: Real> Grid<T> for RateSurface<T> {
    fn centres1(&self) -> &[T] {
        &self.axis1
    }

    fn centres2(&self) -> &[T] {
        &self.axis2
    }

    fn value(&self, i: usize, j: usize) -> T {
        self.get(i, j)
    }
}

fn check_uniform_axis<T: Real>(axis: &[T], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{name} needs at least two points"
        )));
    }
    let step = axis[1] - axis[0];
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "{name} is not strictly increasing"
        )));
    }
    let tol = step * T::lit(1e-4);
    for w in axis.windows(2) {
        let d = w[1] - w[0];
        if !(d > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "{name} is not strictly increasing"
            )));
        }
        if (d - step).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "{name} spacing is not uniform"
            )));
        }
    }
    Ok(())
}

/// Analytic rate sampled at the centres of an `n_bins × n_bins` grid over the window.
pub fn rate_surface<T: Real>(cfg: &ExperimentConfig<T>, n_bins: usize) -> Result<RateSurface<T>> {
    if n_bins < MIN_SURFACE_BINS {
        return Err(Error::InvalidArgument(format!(
            "n_bins must be >= {MIN_SURFACE_BINS}, got {n_bins}"
        )));
    }
    let axis = cell_centres(cfg.window_halfwidth(), n_bins);
    let values: Vec<T> = axis
        .par_iter()
        .flat_map_iter(|&x1| axis.iter().map(move |&x2| rate(x1, x2, cfg)))
        .collect();
    RateSurface::new(axis.clone(), axis, values, Provenance::Analytic)
}
