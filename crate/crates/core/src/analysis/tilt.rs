//! Stripe orientation of a 2D coincidence pattern from its dominant spatial frequency.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::physics::ExperimentConfig;
use crate::scalar::Real;

pub const MIN_TILT_BINS: usize = 32;
const ZERO_PADDING: usize = 4;
/// The spectral peak must exceed the mean half-plane power by this factor.
const PEAK_SIGNIFICANCE: f64 = 50.0;
const MIN_STRIPE_PERIODS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tilt<T> {
    /// Direction of the fringe wave-vector, degrees from the +x1 axis, in (-90, 90].
    pub angle_degrees: T,
    /// Peak spatial frequency along x1 and x2 (cycles per meter).
    pub frequency1: T,
    pub frequency2: T,
}

impl<T: Real> Tilt<T> {
    /// Unsigned deviation of the stripe normal from the nearest diagonal.
    pub fn off_diagonal_degrees(&self) -> T {
        (self.angle_degrees.abs() - T::lit(45.0)).abs()
    }
}

/// Stripe-normal angle of an ideal pattern: `atan2(±ω2, ω1)` in degrees.
pub fn expected_tilt_degrees<T: Real>(cfg: &ExperimentConfig<T>) -> T {
    let sign: T = cfg.scheme().phase_sign();
    (sign * cfg.omega2()).atan2(cfg.omega1()).to_degrees()
}

/// Locates the dominant nonzero spatial frequency of `surface` and returns its direction.
///
/// The smooth separable background (the envelope product, estimated from the row and
/// column means) is subtracted first, the residual is Hann-windowed and zero-padded,
/// and the strongest half-plane peak is refined to sub-bin precision by a
/// three-point log-parabolic fit along each axis.
pub fn estimate_tilt<T: Real, G: Grid<T> + ?Sized>(surface: &G) -> Result<Tilt<T>> {
    let (n1, n2) = surface.shape();
    if n1 < MIN_TILT_BINS || n2 < MIN_TILT_BINS {
        return Err(Error::InvalidArgument(format!(
            "tilt estimation needs >= {MIN_TILT_BINS}x{MIN_TILT_BINS} bins, got {n1}x{n2}"
        )));
    }
    let (c1, c2) = (surface.centres1(), surface.centres2());
    let dx1 = (c1[n1 - 1] - c1[0]) / T::from_count(n1 - 1);
    let dx2 = (c2[n2 - 1] - c2[0]) / T::from_count(n2 - 1);

    let mut row = vec![T::zero(); n1];
    let mut col = vec![T::zero(); n2];
    let mut total = T::zero();
    for (i, r) in row.iter_mut().enumerate() {
        for (j, c) in col.iter_mut().enumerate() {
            let v = surface.value(i, j);
            *r = *r + v;
            *c = *c + v;
            total = total + v;
        }
    }
    if !(total > T::zero()) {
        return Err(Error::NoStripes("surface is empty".into()));
    }

    let (p1, p2) = (n1 * ZERO_PADDING, n2 * ZERO_PADDING);
    let h1 = hann::<T>(n1);
    let h2 = hann::<T>(n2);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); p1 * p2];
    for i in 0..n1 {
        for j in 0..n2 {
            let background = row[i] * col[j] / total;
            let v = (surface.value(i, j) - background) * h1[i] * h2[j];
            buf[i * p2 + j] = Complex::new(v, T::zero());
        }
    }
    fft_2d(&mut buf, p1, p2);
    let power: Vec<T> = buf.iter().map(|c| c.norm_sqr()).collect();
    let at = |i: isize, j: isize| -> T {
        let i = i.rem_euclid(p1 as isize) as usize;
        let j = j.rem_euclid(p2 as isize) as usize;
        power[i * p2 + j]
    };

    // Half plane: f1 > 0, or f1 = 0 with f2 > 0.
    let (mut best, mut bi, mut bj) = (T::zero(), 0isize, 0isize);
    let mut sum = T::zero();
    let mut count = 0usize;
    for i in 0..=(p1 / 2) as isize {
        let j_range: Box<dyn Iterator<Item = isize>> = if i == 0 {
            Box::new(1..=(p2 / 2) as isize)
        } else {
            Box::new(-((p2 / 2) as isize) + 1..=(p2 / 2) as isize)
        };
        for j in j_range {
            let p = at(i, j);
            sum = sum + p;
            count += 1;
            if p > best {
                best = p;
                bi = i;
                bj = j;
            }
        }
    }
    let mean = sum / T::from_count(count);
    if !(best > T::zero()) || best < T::lit(PEAK_SIGNIFICANCE) * mean {
        return Err(Error::NoStripes("no significant spectral peak".into()));
    }

    let fi = T::from_isize(bi).expect("index fits")
        + log_parabolic(at(bi - 1, bj), at(bi, bj), at(bi + 1, bj));
    let fj = T::from_isize(bj).expect("index fits")
        + log_parabolic(at(bi, bj - 1), at(bi, bj), at(bi, bj + 1));
    let frequency1 = fi / (T::from_count(p1) * dx1);
    let frequency2 = fj / (T::from_count(p2) * dx2);

    let extent = (T::from_count(n1) * dx1).min(T::from_count(n2) * dx2);
    let magnitude = (frequency1 * frequency1 + frequency2 * frequency2).sqrt();
    if magnitude * extent < T::lit(MIN_STRIPE_PERIODS) {
        return Err(Error::NoStripes(format!(
            "only {:.2} stripe periods in the window",
            (magnitude * extent).as_f64()
        )));
    }
    Ok(Tilt {
        angle_degrees: frequency2.atan2(frequency1).to_degrees(),
        frequency1,
        frequency2,
    })
}

/// Offset of the vertex of the parabola through `(−1, ln l), (0, ln c), (1, ln r)`.
fn log_parabolic<T: Real>(l: T, c: T, r: T) -> T {
    let tiny = T::min_positive_value();
    let (l, c, r) = (l.max(tiny).ln(), c.max(tiny).ln(), r.max(tiny).ln());
    let denom = l - T::lit(2.0) * c + r;
    if denom < T::zero() {
        (T::lit(0.5) * (l - r) / denom)
            .max(-T::lit(0.5))
            .min(T::lit(0.5))
    } else {
        T::zero()
    }
}

/// Symmetric Hann window with nonzero end points, `sin²(π (i+1) / (n+1))`.
fn hann<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let s = (T::PI() * T::from_count(i + 1) / T::from_count(n + 1)).sin();
            s * s
        })
        .collect()
}

fn fft_2d<T: Real>(buf: &mut [Complex<T>], rows: usize, cols: usize) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(cols);
    for r in buf.chunks_exact_mut(cols) {
        row_fft.process(r);
    }
    let col_fft = planner.plan_fft_forward(rows);
    let mut column = vec![Complex::new(T::zero(), T::zero()); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = buf[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            buf[r * cols + c] = column[r];
        }
    }
}
