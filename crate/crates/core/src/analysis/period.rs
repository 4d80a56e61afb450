use crate::error::{Error, Result};
use crate::physics::{ExperimentConfig, Scheme};
use crate::scalar::Real;

use super::CutKind;

/// Angular frequency that sets the fringe along `kind` (may be zero).
pub fn effective_frequency<T: Real>(cfg: &ExperimentConfig<T>, kind: CutKind) -> T {
    match (cfg.scheme(), kind) {
        (_, CutKind::FixD2ScanD1) => cfg.omega1(),
        (_, CutKind::FixD1ScanD2) => cfg.omega2(),
        (Scheme::SchemeI, CutKind::CoMoving) | (Scheme::SchemeII, CutKind::CounterMoving) => {
            cfg.omega_sum()
        }
        (Scheme::SchemeI, CutKind::CounterMoving) | (Scheme::SchemeII, CutKind::CoMoving) => {
            cfg.omega_diff().abs()
        }
    }
}

/// Fringe period `2π c z / (ω_eff d)` along the scan parameter of `kind`.
///
/// Fails with [`Error::NoFringe`] on the degenerate difference-frequency direction.
pub fn predicted_period<T: Real>(cfg: &ExperimentConfig<T>, kind: CutKind) -> Result<T> {
    let omega = effective_frequency(cfg, kind);
    if omega == T::zero() {
        return Err(Error::NoFringe);
    }
    Ok(T::TAU() * cfg.speed_of_light() * cfg.distance() / (omega * cfg.slit_spacing()))
}
