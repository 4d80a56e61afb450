use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeding::{chunk_rng, NOISE_STREAM};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::physics::{arm_envelope, rate, Arm, ExperimentConfig};
use crate::scalar::{cell_centres, cell_edges, Real};

pub const DEFAULT_BINS: usize = 64;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_EVENTS: u64 = 1_000_000;
pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;
/// Resolution of the grid on which the rejection bound is verified.
pub const BOUND_CHECK_BINS: usize = 256;
/// Default resolution of the normalization quadrature.
pub const NORMALIZATION_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_events: u64,
    pub seed: u64,
    pub n_bins: usize,
    pub poisson_noise: bool,
    /// Accepted events per deterministic sub-stream.
    pub chunk_size: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_events: DEFAULT_EVENTS,
            seed: DEFAULT_SEED,
            n_bins: DEFAULT_BINS,
            poisson_noise: false,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_events < 1 {
            return Err(Error::config("events", "n_events >= 1"));
        }
        if self.n_bins < 8 {
            return Err(Error::config("n_bins", "n_bins >= 8"));
        }
        if self.chunk_size < 1 {
            return Err(Error::config("chunk_size", "chunk_size >= 1"));
        }
        Ok(())
    }

    pub fn n_chunks(&self) -> u64 {
        self.n_events.div_ceil(self.chunk_size)
    }
}

/// Binned coincidence counts with per-detector singles.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram<T> {
    edges1: Vec<T>,
    edges2: Vec<T>,
    centres1: Vec<T>,
    centres2: Vec<T>,
    counts: Vec<u64>,
    singles1: Vec<u64>,
    singles2: Vec<u64>,
    total_events: u64,
    experiment: ExperimentConfig<T>,
    sampler: SamplerConfig,
}

impl<T: Real> CoincidenceHistogram<T> {
    /// Assembles a histogram from row-major counts; singles are the count marginals.
    pub fn from_counts(
        experiment: ExperimentConfig<T>,
        sampler: SamplerConfig,
        counts: Vec<u64>,
        total_events: u64,
    ) -> Result<Self> {
        let n = sampler.n_bins;
        if counts.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} counts for a {n}x{n} histogram",
                counts.len()
            )));
        }
        let w = experiment.window_halfwidth();
        let mut singles1 = vec![0u64; n];
        let mut singles2 = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                let c = counts[i * n + j];
                singles1[i] += c;
                singles2[j] += c;
            }
        }
        Ok(Self {
            edges1: cell_edges(w, n),
            edges2: cell_edges(w, n),
            centres1: cell_centres(w, n),
            centres2: cell_centres(w, n),
            counts,
            singles1,
            singles2,
            total_events,
            experiment,
            sampler,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.sampler.n_bins
    }

    pub fn edges1(&self) -> &[T] {
        &self.edges1
    }

    pub fn edges2(&self) -> &[T] {
        &self.edges2
    }

    pub fn centres(&self, arm: Arm) -> &[T] {
        match arm {
            Arm::D1 => &self.centres1,
            Arm::D2 => &self.centres2,
        }
    }

    /// Row-major counts, `counts[i * n + j]` for D1 bin `i` and D2 bin `j`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.sampler.n_bins + j]
    }

    pub fn singles(&self, arm: Arm) -> &[u64] {
        match arm {
            Arm::D1 => &self.singles1,
            Arm::D2 => &self.singles2,
        }
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }

    pub fn experiment(&self) -> &ExperimentConfig<T> {
        &self.experiment
    }

    pub fn sampler(&self) -> &SamplerConfig {
        &self.sampler
    }

    pub fn bin_area(&self) -> T {
        (self.edges1[1] - self.edges1[0]) * (self.edges2[1] - self.edges2[0])
    }
}

impl<T: Real> Grid<T> for CoincidenceHistogram<T> {
    fn centres1(&self) -> &[T] {
        &self.centres1
    }

    fn centres2(&self) -> &[T] {
        &self.centres2
    }

    fn value(&self, i: usize, j: usize) -> T {
        T::from_u64(self.count(i, j)).expect("count converts to Real")
    }
}

/// `∫∫ rate dx1 dx2` over the window by midpoint quadrature on a 512² grid.
pub fn normalize_density<T: Real>(cfg: &ExperimentConfig<T>) -> Result<T> {
    normalize_density_on_grid(cfg, NORMALIZATION_GRID)
}

/// [`normalize_density`] with an explicit quadrature resolution.
pub fn normalize_density_on_grid<T: Real>(cfg: &ExperimentConfig<T>, grid: usize) -> Result<T> {
    if grid < 1 {
        return Err(Error::InvalidArgument(
            "normalization grid must be >= 1".into(),
        ));
    }
    let w = cfg.window_halfwidth();
    let axis = cell_centres(w, grid);
    // Row sums are collected in order and added sequentially so the result does not
    // depend on the thread pool.
    let rows: Vec<T> = axis
        .par_iter()
        .map(|&x1| {
            axis.iter()
                .fold(T::zero(), |acc, &x2| acc + rate(x1, x2, cfg))
        })
        .collect();
    let step = T::lit(2.0) * w / T::from_count(grid);
    let z = rows.into_iter().fold(T::zero(), |a, b| a + b) * step * step;
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::DegenerateNormalization(z.as_f64()));
    }
    Ok(z)
}

/// Upper bound on the rate over the window: twice the largest envelope product.
pub fn rejection_bound<T: Real>(cfg: &ExperimentConfig<T>) -> T {
    // Both envelopes peak at x = 0, which every window contains.
    let peak = arm_envelope(T::zero(), Arm::D1, cfg) * arm_envelope(T::zero(), Arm::D2, cfg);
    T::lit(2.0) * peak
}

fn check_bound<T: Real>(cfg: &ExperimentConfig<T>, bound: T) -> Result<()> {
    let axis = cell_centres(cfg.window_halfwidth(), BOUND_CHECK_BINS);
    let slack = bound * (T::one() + T::epsilon() * T::lit(4.0));
    for &x1 in &axis {
        for &x2 in &axis {
            let r = rate(x1, x2, cfg);
            if r > slack {
                return Err(Error::BoundViolated {
                    bound: bound.as_f64(),
                    rate: r.as_f64(),
                    x1: x1.as_f64(),
                    x2: x2.as_f64(),
                });
            }
        }
    }
    Ok(())
}

#[inline]
fn bin_index<T: Real>(x: T, w: T, n: usize) -> usize {
    let t = (x + w) / (T::lit(2.0) * w) * T::from_count(n);
    t.floor().to_usize().unwrap_or(0).min(n - 1)
}

fn sample_chunk<T: Real>(
    cfg: &ExperimentConfig<T>,
    scfg: &SamplerConfig,
    bound: T,
    chunk: u64,
) -> Vec<u64> {
    let n = scfg.n_bins;
    let first = chunk * scfg.chunk_size;
    let accepted_target = scfg.chunk_size.min(scfg.n_events - first);
    let mut rng = chunk_rng(scfg.seed, chunk);
    let w = cfg.window_halfwidth();
    let two = T::lit(2.0);
    let mut counts = vec![0u64; n * n];
    let mut accepted = 0;
    while accepted < accepted_target {
        let x1 = w * (two * T::lit(rng.random::<f64>()) - T::one());
        let x2 = w * (two * T::lit(rng.random::<f64>()) - T::one());
        let u = T::lit(rng.random::<f64>());
        if u * bound < rate(x1, x2, cfg) {
            counts[bin_index(x1, w, n) * n + bin_index(x2, w, n)] += 1;
            accepted += 1;
        }
    }
    counts
}

/// Draws `n_events` coincidences by rejection sampling and bins them.
///
/// Events are produced in chunks of `chunk_size`; chunk `k` uses its own generator
/// (see [`super::seeding`]) and chunk histograms are merged by addition, so the
/// result depends only on `(cfg, scfg)` and not on the number of worker threads.
pub fn sample_events<T: Real>(
    cfg: &ExperimentConfig<T>,
    scfg: &SamplerConfig,
) -> Result<CoincidenceHistogram<T>> {
    scfg.validate()?;
    let bound = rejection_bound(cfg);
    check_bound(cfg, bound)?;
    let n = scfg.n_bins;
    let mut counts = (0..scfg.n_chunks())
        .into_par_iter()
        .map(|k| sample_chunk(cfg, scfg, bound, k))
        .reduce(
            || vec![0u64; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    if scfg.poisson_noise {
        let mut rng = chunk_rng(scfg.seed, NOISE_STREAM);
        for c in counts.iter_mut() {
            if *c > 0 {
                let draw: f64 = Poisson::new(*c as f64)
                    .expect("positive Poisson mean")
                    .sample(&mut rng);
                *c = draw as u64;
            }
        }
    }
    CoincidenceHistogram::from_counts(*cfg, *scfg, counts, scfg.n_events)
}
