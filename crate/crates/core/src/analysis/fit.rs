//! Fringe fitting: `y ≈ A · env(x) · (1 + V cos(2πx/P + φ))`.
//!
//! The known envelope is divided out (clamped from below) to seed the period from
//! the dominant discrete-Fourier peak. The four parameters are then refined by
//! Levenberg–Marquardt directly in the units of `y`, so points near envelope nulls
//! carry little weight instead of being amplified.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::cut::{CutProfile, MIN_CUT_POINTS};
use crate::error::{Error, Result};
use crate::physics::ExperimentConfig;
use crate::scalar::Real;

/// Envelope values below this are clamped before division.
pub const ENVELOPE_FLOOR: f64 = 0.02;
/// A period is trusted only if the profile spans at least this many of them.
/// Fitted periods must stay above this many samples.
const MIN_SAMPLES_PER_PERIOD_SEARCH: f64 = 2.5;
/// A trusted period is sampled at least this many times.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 3.0;
/// Points below this fraction of the peak envelope do not take part in seeding.
const SEED_ENVELOPE_FRACTION: f64 = 0.1;
/// Minimum number of fitted periods across the profile for a trusted period.
pub const MIN_PERIODS_SPANNED: f64 = 2.0;
/// Below this visibility the fitted period carries no information.
pub const MIN_VISIBILITY: f64 = 0.05;

const INITIAL_DAMPING: f64 = 1e-3;
const DAMPING_FACTOR: f64 = 10.0;
const MAX_DAMPING: f64 = 1e12;
const MAX_ITERATIONS: usize = 200;
const PARAMETER_TOLERANCE: f64 = 1e-8;
const ZERO_PADDING: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit<T> {
    pub amplitude: T,
    /// Modulation depth in `[0, 1]`.
    pub visibility: T,
    pub period: T,
    /// Phase at `x = 0`, in `(-π, π]`.
    pub phase: T,
    /// Unweighted RMS of `y - model` in the units of `y`.
    pub rms_residual: T,
    /// The optimizer converged and the period is trustworthy (see the module constants).
    pub converged: bool,
    /// The optimizer itself met its stopping criterion.
    pub optimizer_converged: bool,
    pub iterations: usize,
    /// Profile span divided by the fitted period.
    pub periods_spanned: T,
}

impl<T: Real> FringeFit<T> {
    /// Model value at `x` with envelope `env`.
    pub fn model(&self, x: T, env: T) -> T {
        self.amplitude
            * env
            * (T::one() + self.visibility * (T::TAU() * x / self.period + self.phase).cos())
    }
}

/// Fits a fringe to a cut, dividing out the envelope implied by its trajectory.
pub fn fit_fringe<T: Real>(
    profile: &CutProfile<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<FringeFit<T>> {
    let env: Vec<T> = profile
        .x()
        .iter()
        .map(|&x| profile.kind().envelope(x, cfg))
        .collect();
    fit_with_envelope(profile.x(), profile.y(), profile.y_err(), &env)
}

/// Fringe fit with an explicit per-point envelope.
pub fn fit_with_envelope<T: Real>(
    x: &[T],
    y: &[T],
    y_err: Option<&[T]>,
    env: &[T],
) -> Result<FringeFit<T>> {
    let n = x.len();
    if n < MIN_CUT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "fringe fit needs >= {MIN_CUT_POINTS} points, got {n}"
        )));
    }
    if y.len() != n || env.len() != n || y_err.is_some_and(|e| e.len() != n) {
        return Err(Error::InvalidArgument("fit inputs differ in length".into()));
    }
    let step = (x[n - 1] - x[0]) / T::from_count(n - 1);
    let tol = step * T::lit(1e-6);
    if !(step > T::zero()) || x.windows(2).any(|w| (w[1] - w[0] - step).abs() > tol) {
        return Err(Error::InvalidArgument(
            "fringe fit needs uniformly spaced x".into(),
        ));
    }
    let span = x[n - 1] - x[0];
    let weights = weights(y_err, n);

    let floor = T::lit(ENVELOPE_FLOOR);
    let corrected: Vec<T> = y.iter().zip(env).map(|(&v, &e)| v / e.max(floor)).collect();
    let problem = Problem {
        x,
        y,
        env,
        weights: &weights,
        span,
    };

    // Near envelope zeros the corrected profile is dominated by the floor, not the
    // fringe, so those points are left out of the frequency seed.
    let env_max = env.iter().copied().fold(T::zero(), T::max);
    let seed_weights: Vec<T> = weights
        .iter()
        .zip(env)
        .map(|(&w, &e)| {
            if e >= T::lit(SEED_ENVELOPE_FRACTION) * env_max {
                w
            } else {
                T::zero()
            }
        })
        .collect();
    let Some(seed_freq) = dominant_frequency(&corrected, &seed_weights, step) else {
        // No modulation at all: report the flat level.
        let a = problem.linear_offset();
        let fit = [a, T::zero(), T::zero(), T::one()];
        return Ok(problem.finish(fit, false, 0));
    };

    // Seed the linear parameters at the DFT frequency.
    let g0 = (seed_freq * span).min(T::from_count(n - 1) / T::lit(MIN_SAMPLES_PER_PERIOD_SEARCH));
    let (a, c, s) =
        problem
            .linear_solve(g0)
            .unwrap_or((problem.linear_offset(), T::zero(), T::zero()));
    let (params, converged, iterations) = problem.levenberg_marquardt([a, c, s, g0]);
    Ok(problem.finish(params, converged, iterations))
}

fn weights<T: Real>(y_err: Option<&[T]>, n: usize) -> Vec<T> {
    match y_err {
        None => vec![T::one(); n],
        Some(err) => {
            // Zero error bars (empty bins) get the smallest positive error in the profile.
            let floor = err
                .iter()
                .copied()
                .filter(|e| *e > T::zero())
                .fold(T::infinity(), T::min);
            let floor = if floor.is_finite() { floor } else { T::one() };
            err.iter()
                .map(|&e| {
                    let e = e.max(floor);
                    T::one() / (e * e)
                })
                .collect()
        }
    }
}

/// Frequency (cycles per unit x) of the largest non-DC peak of the weighted,
/// mean-subtracted, zero-padded spectrum. `None` when the signal is flat.
fn dominant_frequency<T: Real>(u: &[T], weights: &[T], step: T) -> Option<T> {
    let n = u.len();
    let wsum = weights.iter().fold(T::zero(), |a, &b| a + b);
    let mean = u
        .iter()
        .zip(weights)
        .fold(T::zero(), |a, (&v, &w)| a + v * w)
        / wsum;
    let size = (n * ZERO_PADDING).next_power_of_two();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
    // Weighting by sqrt(w) keeps noisy points from dominating the seed.
    let wmax = weights.iter().copied().fold(T::zero(), T::max);
    for (k, (&v, &w)) in u.iter().zip(weights).enumerate() {
        buf[k] = Complex::new((v - mean) * (w / wmax).sqrt(), T::zero());
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let power: Vec<T> = buf[..=size / 2].iter().map(|c| c.norm_sqr()).collect();
    let total = u
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    let scale = mean.abs().max(T::min_positive_value());
    if !(total > T::lit(1e-24) * scale * scale * T::from_count(n)) {
        return None;
    }
    // Skip the DC lobe: start after power stops falling away from zero frequency.
    let mut start = 1;
    while start + 1 < power.len() && power[start + 1] < power[start] {
        start += 1;
    }
    let (mut k, mut best) = (start, power[start]);
    for (i, &p) in power.iter().enumerate().skip(start) {
        if p > best {
            best = p;
            k = i;
        }
    }
    let mut idx = T::from_count(k);
    if k > 0 && k + 1 < power.len() {
        let (l, c, r) = (power[k - 1], power[k], power[k + 1]);
        let denom = l - T::lit(2.0) * c + r;
        if denom < T::zero() {
            idx = idx + T::lit(0.5) * (l - r) / denom;
        }
    }
    let f = idx / (T::from_count(size) * step);
    (f > T::zero()).then_some(f)
}

struct Problem<'a, T> {
    x: &'a [T],
    y: &'a [T],
    env: &'a [T],
    weights: &'a [T],
    span: T,
}

impl<T: Real> Problem<'_, T> {
    /// Weighted best constant level `a` for `y ≈ a · env`.
    fn linear_offset(&self) -> T {
        let (mut num, mut den) = (T::zero(), T::zero());
        for i in 0..self.x.len() {
            num = num + self.weights[i] * self.env[i] * self.y[i];
            den = den + self.weights[i] * self.env[i] * self.env[i];
        }
        if den > T::zero() {
            num / den
        } else {
            T::zero()
        }
    }

    /// Weighted linear least squares for `(a, c, s)` at fixed scaled frequency `g`.
    fn linear_solve(&self, g: T) -> Option<(T, T, T)> {
        let mut ata = [[T::zero(); 3]; 3];
        let mut atb = [T::zero(); 3];
        for i in 0..self.x.len() {
            let theta = T::TAU() * g * self.x[i] / self.span;
            let basis = [
                self.env[i],
                self.env[i] * theta.cos(),
                self.env[i] * theta.sin(),
            ];
            for r in 0..3 {
                atb[r] = atb[r] + self.weights[i] * basis[r] * self.y[i];
                for c in 0..3 {
                    ata[r][c] = ata[r][c] + self.weights[i] * basis[r] * basis[c];
                }
            }
        }
        let sol = solve(ata, atb)?;
        Some((sol[0], sol[1], sol[2]))
    }

    fn model(&self, p: &[T; 4], i: usize) -> T {
        let theta = T::TAU() * p[3] * self.x[i] / self.span;
        self.env[i] * (p[0] + p[1] * theta.cos() + p[2] * theta.sin())
    }

    fn cost(&self, p: &[T; 4]) -> T {
        (0..self.x.len()).fold(T::zero(), |acc, i| {
            let r = self.y[i] - self.model(p, i);
            acc + self.weights[i] * r * r
        })
    }

    fn normal_equations(&self, p: &[T; 4]) -> ([[T; 4]; 4], [T; 4]) {
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for i in 0..self.x.len() {
            let scaled_x = T::TAU() * self.x[i] / self.span;
            let theta = scaled_x * p[3];
            let (sin, cos) = theta.sin_cos();
            let e = self.env[i];
            let jac = [
                e,
                e * cos,
                e * sin,
                e * scaled_x * (p[2] * cos - p[1] * sin),
            ];
            let r = self.y[i] - self.model(p, i);
            let w = self.weights[i];
            for a in 0..4 {
                jtr[a] = jtr[a] + w * jac[a] * r;
                for b in 0..4 {
                    jtj[a][b] = jtj[a][b] + w * jac[a] * jac[b];
                }
            }
        }
        (jtj, jtr)
    }

    /// Largest parameter change relative to the parameter scales.
    fn relative_change(p: &[T; 4], q: &[T; 4]) -> T {
        let level = p[0]
            .abs()
            .max((p[1] * p[1] + p[2] * p[2]).sqrt())
            .max(T::min_positive_value());
        let lin = (0..3).fold(T::zero(), |m, k| m.max((q[k] - p[k]).abs() / level));
        lin.max((q[3] - p[3]).abs() / p[3].abs().max(T::min_positive_value()))
    }

    #[allow(clippy::needless_range_loop)]
    fn levenberg_marquardt(&self, mut p: [T; 4]) -> ([T; 4], bool, usize) {
        // At the Nyquist frequency one quadrature vanishes on the grid, so stay clear of it.
        let max_periods = T::from_count(self.x.len() - 1) / T::lit(MIN_SAMPLES_PER_PERIOD_SEARCH);
        let mut lambda = T::lit(INITIAL_DAMPING);
        let mut cost = self.cost(&p);
        for iteration in 1..=MAX_ITERATIONS {
            if cost == T::zero() {
                return (p, true, iteration - 1);
            }
            let (jtj, jtr) = self.normal_equations(&p);
            let mut stepped = false;
            while lambda <= T::lit(MAX_DAMPING) {
                let mut damped = jtj;
                for k in 0..4 {
                    damped[k][k] = damped[k][k] * (T::one() + lambda) + T::min_positive_value();
                }
                if let Some(delta) = solve(damped, jtr) {
                    let q = [
                        p[0] + delta[0],
                        p[1] + delta[1],
                        p[2] + delta[2],
                        p[3] + delta[3],
                    ];
                    let valid = q[3] > T::zero() && q[3] <= max_periods;
                    let new_cost = if valid { self.cost(&q) } else { T::infinity() };
                    if new_cost < cost {
                        let change = Self::relative_change(&p, &q);
                        p = q;
                        cost = new_cost;
                        lambda = lambda / T::lit(DAMPING_FACTOR);
                        stepped = true;
                        if change < T::lit(PARAMETER_TOLERANCE) {
                            return (p, true, iteration);
                        }
                        break;
                    }
                }
                lambda = lambda * T::lit(DAMPING_FACTOR);
            }
            if !stepped {
                // No descent direction left at any damping: a numerical minimum.
                return (p, true, iteration);
            }
        }
        (p, false, MAX_ITERATIONS)
    }

    fn finish(&self, p: [T; 4], optimizer_converged: bool, iterations: usize) -> FringeFit<T> {
        let [a, c, s, g] = p;
        let modulation = (c * c + s * s).sqrt();
        let visibility = if a > T::zero() {
            (modulation / a).min(T::one())
        } else {
            T::zero()
        };
        let period = self.span / g;
        // c cos θ + s sin θ = R cos(θ + φ) with φ = atan2(-s, c).
        let mut phase = (-s).atan2(c);
        if phase <= -T::PI() {
            phase = phase + T::TAU();
        }
        let n = self.x.len();
        let sq = (0..n).fold(T::zero(), |acc, i| {
            let r = self.y[i] - self.model(&p, i);
            acc + r * r
        });
        let periods_spanned = g;
        let samples_per_period = T::from_count(n - 1) / g;
        let trusted = optimizer_converged
            && periods_spanned >= T::lit(MIN_PERIODS_SPANNED)
            && samples_per_period >= T::lit(MIN_SAMPLES_PER_PERIOD)
            && visibility >= T::lit(MIN_VISIBILITY);
        FringeFit {
            amplitude: a.max(T::zero()),
            visibility,
            period,
            phase,
            rms_residual: (sq / T::from_count(n)).sqrt(),
            converged: trusted,
            optimizer_converged,
            iterations,
            periods_spanned,
        }
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
#[allow(clippy::needless_range_loop)]
fn solve<T: Real, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Option<[T; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); N];
    for row in (0..N).rev() {
        let tail = (row + 1..N).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analytic_cut, CutKind};
    use crate::physics::{ExperimentParams, Scheme};

    fn cfg(scheme: Scheme, l1: f64, l2: f64, z: f64) -> ExperimentConfig<f64> {
        ExperimentConfig::new(ExperimentParams {
            scheme,
            lambda1: l1,
            lambda2: l2,
            slit_spacing: 400e-6,
            slit_width: 100e-6,
            distance: z,
            window_halfwidth: 3e-3,
            envelope: true,
        })
        .unwrap()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| -3e-3 + 6e-3 * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn recovers_noiseless_cosine() {
        let x = grid(201);
        let period = 1.094e-3;
        let y: Vec<f64> = x
            .iter()
            .map(|&t| 5.0 * (1.0 + (std::f64::consts::TAU * t / period + 0.4).cos()))
            .collect();
        let env = vec![1.0; x.len()];
        let fit = fit_with_envelope(&x, &y, None, &env).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!((fit.period / period - 1.0).abs() < 1e-3);
        assert!((fit.visibility - 1.0).abs() < 5e-3);
        assert!((fit.phase - 0.4).abs() < 1e-6);
        assert!((fit.amplitude - 5.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn recovers_partial_visibility_and_negative_phase() {
        let x = grid(128);
        let y: Vec<f64> = x
            .iter()
            .map(|&t| 2.0 * (1.0 + 0.3 * (std::f64::consts::TAU * t / 0.8e-3 - 2.5).cos()))
            .collect();
        let fit = fit_with_envelope(&x, &y, None, &vec![1.0; 128]).unwrap();
        assert!((fit.visibility - 0.3).abs() < 1e-9);
        assert!((fit.phase + 2.5).abs() < 1e-7);
        assert!((fit.period - 0.8e-3).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_is_unreliable() {
        let c = cfg(Scheme::SchemeI, 800e-9, 800e-9, 0.547);
        let p = analytic_cut(&c, CutKind::CounterMoving, 129).unwrap();
        let fit = fit_fringe(&p, &c).unwrap();
        assert!(fit.visibility < 0.05);
        assert!(!fit.converged);
        assert!((fit.amplitude - 2.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_cut_through_envelope_nulls() {
        // At z = 30.3 cm the first envelope null sits inside the window.
        let c = cfg(Scheme::SchemeII, 760e-9, 840e-9, 0.303);
        let p = analytic_cut(&c, CutKind::FixD2ScanD1, 257).unwrap();
        let fit = fit_fringe(&p, &c).unwrap();
        assert!(fit.converged);
        let expect = crate::analysis::predicted_period(&c, CutKind::FixD2ScanD1).unwrap();
        assert!((fit.period / expect - 1.0).abs() < 1e-6);
        assert!(fit.visibility > 0.99);
        assert!(fit.rms_residual < 1e-6 * fit.amplitude);
    }

    #[test]
    fn sub_period_window_is_flagged() {
        let c = cfg(Scheme::SchemeI, 760e-9, 840e-9, 0.547);
        let p = analytic_cut(&c, CutKind::CounterMoving, 257).unwrap();
        let fit = fit_fringe(&p, &c).unwrap();
        assert!(!fit.converged);
        assert!(fit.periods_spanned < 1.0);
        let expect = crate::analysis::predicted_period(&c, CutKind::CounterMoving).unwrap();
        assert!(
            (fit.period / expect - 1.0).abs() < 0.01,
            "{} vs {expect}",
            fit.period
        );
    }

    #[test]
    fn rejects_short_or_ragged_input() {
        let x = grid(10);
        assert!(fit_with_envelope(&x, &x, None, &x).is_err());
        let mut x = grid(32);
        x[5] += 1e-5;
        let y = vec![1.0; 32];
        assert!(fit_with_envelope(&x, &y, None, &y).is_err());
    }

    #[test]
    fn small_solver() {
        let a = [[2.0_f64, 1.0], [1.0, 3.0]];
        let x = solve(a, [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }
}
