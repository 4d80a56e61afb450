use serde::Serialize;

use super::fit::{fit_with_envelope, FringeFit};
use crate::error::{Error, Result};
use crate::montecarlo::CoincidenceHistogram;
use crate::physics::{arm_envelope, Arm, ExperimentConfig};
use crate::scalar::Real;

/// Singles profiles must span at least this many single-photon fringe periods.
pub const MIN_SINGLES_PERIODS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalVisibility<T> {
    pub arm: Arm,
    pub visibility: T,
    /// Whether the underlying fit trusted its period.
    pub reliable: bool,
    pub fit: FringeFit<T>,
}

/// Fitted fringe visibility of one detector's singles counts, envelope-corrected.
pub fn marginal_visibility<T: Real>(
    hist: &CoincidenceHistogram<T>,
    cfg: &ExperimentConfig<T>,
    arm: Arm,
) -> Result<MarginalVisibility<T>> {
    let single_period = cfg.lambda(arm) * cfg.distance() / cfg.slit_spacing();
    let spanned = T::lit(2.0) * cfg.window_halfwidth() / single_period;
    if spanned < T::lit(MIN_SINGLES_PERIODS) {
        return Err(Error::InvalidArgument(format!(
            "window spans {:.2} single-photon periods, need >= {MIN_SINGLES_PERIODS}",
            spanned.as_f64()
        )));
    }
    let x = hist.centres(arm);
    let y: Vec<T> = hist
        .singles(arm)
        .iter()
        .map(|&c| T::from_u64(c).expect("count fits"))
        .collect();
    let err: Vec<T> = y.iter().map(|v| v.sqrt()).collect();
    let env: Vec<T> = x.iter().map(|&v| arm_envelope(v, arm, cfg)).collect();
    let fit = fit_with_envelope(x, &y, Some(&err), &env)?;
    Ok(MarginalVisibility {
        arm,
        visibility: fit.visibility,
        reliable: fit.converged,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{sample_events, SamplerConfig};
    use crate::physics::{rate, ExperimentParams, Scheme};
    use crate::scalar::cell_centres;

    #[test]
    fn analytic_marginal_over_whole_periods_is_flat() {
        // Window = 6 whole periods of the 800 nm fringe, envelope off.
        let period = 800e-9 * 0.547 / 400e-6;
        let c = ExperimentConfig::new(ExperimentParams {
            scheme: Scheme::SchemeI,
            lambda1: 800e-9,
            lambda2: 800e-9,
            slit_spacing: 400e-6,
            slit_width: 100e-6,
            distance: 0.547,
            window_halfwidth: 3.0 * period,
            envelope: false,
        })
        .unwrap();
        let x = cell_centres(c.window_halfwidth(), 64);
        let inner = cell_centres(c.window_halfwidth(), 256);
        let y: Vec<f64> = x
            .iter()
            .map(|&x1| inner.iter().map(|&x2| rate(x1, x2, &c)).sum::<f64>() / 256.0)
            .collect();
        for v in &y {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let fit = fit_with_envelope(&x, &y, None, &vec![1.0; 64]).unwrap();
        assert!(fit.visibility < 1e-9);
        assert!(!fit.converged);
    }

    #[test]
    fn sampled_singles_are_flat() {
        let c = ExperimentConfig::new(ExperimentParams {
            scheme: Scheme::SchemeI,
            lambda1: 800e-9,
            lambda2: 800e-9,
            slit_spacing: 400e-6,
            slit_width: 100e-6,
            distance: 0.547,
            window_halfwidth: 3e-3,
            envelope: true,
        })
        .unwrap();
        let h = sample_events(
            &c,
            &SamplerConfig {
                n_events: 200_000,
                ..Default::default()
            },
        )
        .unwrap();
        for arm in [Arm::D1, Arm::D2] {
            let m = marginal_visibility(&h, &c, arm).unwrap();
            assert!(m.visibility < 0.05, "{m:?}");
        }
        let narrow = c.with_window(1e-3).unwrap();
        assert!(marginal_visibility(&h, &narrow, Arm::D1).is_err());
    }
}
