//! Goodness-of-fit helpers comparing histograms with the analytic density.

use rayon::prelude::*;
use serde::Serialize;

use super::sampler::CoincidenceHistogram;
use crate::error::{Error, Result};
use crate::physics::{rate, ExperimentConfig};
use crate::scalar::{cell_centres, Real};

/// Expected counts per bin for `n_events` draws from the analytic density.
///
/// Each bin's probability is the integral of the rate over the bin (midpoint rule with
/// `subsamples²` nodes per bin) divided by the integral over the whole window.
pub fn expected_counts<T: Real>(
    cfg: &ExperimentConfig<T>,
    n_bins: usize,
    n_events: u64,
    subsamples: usize,
) -> Result<Vec<T>> {
    if n_bins == 0 || subsamples == 0 {
        return Err(Error::InvalidArgument(
            "bins and subsamples must be positive".into(),
        ));
    }
    let fine = cell_centres(cfg.window_halfwidth(), n_bins * subsamples);
    let integrals: Vec<T> = (0..n_bins * n_bins)
        .into_par_iter()
        .map(|bin| {
            let (i, j) = (bin / n_bins, bin % n_bins);
            let mut acc = T::zero();
            for &x1 in &fine[i * subsamples..(i + 1) * subsamples] {
                for &x2 in &fine[j * subsamples..(j + 1) * subsamples] {
                    acc = acc + rate(x1, x2, cfg);
                }
            }
            acc
        })
        .collect();
    let total = integrals.iter().fold(T::zero(), |a, &b| a + b);
    if !(total > T::zero()) {
        return Err(Error::DegenerateNormalization(total.as_f64()));
    }
    let n = T::from_u64(n_events).expect("event count converts to Real");
    Ok(integrals.into_iter().map(|v| v * n / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    /// Bins whose expectation fell below the threshold and were pooled into one cell.
    pub pooled_bins: usize,
}

impl ChiSquare {
    pub fn reduced(&self) -> f64 {
        self.statistic / self.degrees_of_freedom as f64
    }
}

/// Pearson chi-square of `observed` against `expected`.
///
/// Bins with expectation below `min_expected` are pooled into a single cell; the
/// degrees of freedom are the number of cells minus one (totals are fixed).
pub fn chi_square<T: Real>(
    observed: &[u64],
    expected: &[T],
    min_expected: f64,
) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidArgument(
            "observed/expected length mismatch".into(),
        ));
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp, mut pooled_bins) = (0.0, 0.0, 0usize);
    for (&o, &e) in observed.iter().zip(expected) {
        let e = e.as_f64();
        let o = o as f64;
        if e < min_expected {
            pooled_obs += o;
            pooled_exp += e;
            pooled_bins += 1;
        } else {
            statistic += (o - e) * (o - e) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        cells += 1;
    }
    if cells < 2 {
        return Err(Error::InvalidArgument(
            "chi-square needs at least two cells".into(),
        ));
    }
    Ok(ChiSquare {
        statistic,
        degrees_of_freedom: cells - 1,
        pooled_bins,
    })
}

/// Largest `|count/N - p|` over bins, with `p` the expected bin probability.
pub fn density_deviation<T: Real>(hist: &CoincidenceHistogram<T>, expected: &[T]) -> f64 {
    let n = hist.total_events() as f64;
    hist.counts()
        .iter()
        .zip(expected)
        .map(|(&c, &e)| (c as f64 / n - e.as_f64() / n).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_of_perfect_match_is_zero() {
        let obs = [10u64, 20, 30];
        let exp = [10.0f64, 20.0, 30.0];
        let c = chi_square(&obs, &exp, 5.0).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.degrees_of_freedom, 2);
    }

    #[test]
    fn small_bins_are_pooled() {
        let obs = [1u64, 2, 100, 97];
        let exp = [2.0f64, 1.0, 100.0, 97.0];
        let c = chi_square(&obs, &exp, 5.0).unwrap();
        assert_eq!(c.pooled_bins, 2);
        assert_eq!(c.degrees_of_freedom, 2);
        assert_eq!(c.statistic, 0.0);
        assert!(chi_square(&obs, &exp[..3], 5.0).is_err());
    }
}
