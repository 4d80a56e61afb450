//! Brute-force path-sum oracle for the coincidence rate.
//!
//! Each slit is discretized into midpoint sources; a detector at `x` collects the
//! mean phasor `exp(i ω r / c)` over them with exact (non-paraxial) path lengths.
//! Two-photon amplitudes are assembled from these propagators according to the
//! scheme's biphoton state and squared.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::Serialize;

use super::config::{Arm, ExperimentConfig, Scheme};
use super::rate::{Provenance, RateSurface};
use crate::error::{Error, Result};
use crate::scalar::{cell_centres, Real};

/// Smallest number of midpoint nodes per slit.
pub const MIN_QUADRATURE_POINTS: usize = 16;
pub const DEFAULT_QUADRATURE_POINTS: usize = 64;

/// One of the two slits. Slit 1 is centred at `+d/2`, slit 2 at `-d/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slit {
    S1,
    S2,
}

impl Slit {
    pub fn centre<T: Real>(self, cfg: &ExperimentConfig<T>) -> T {
        let half = cfg.slit_spacing() / T::lit(2.0);
        match self {
            Slit::S1 => half,
            Slit::S2 => -half,
        }
    }
}

fn check_points(quadrature_points: usize) -> Result<()> {
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(Error::InvalidArgument(format!(
            "quadrature_points must be >= {MIN_QUADRATURE_POINTS}, got {quadrature_points}"
        )));
    }
    Ok(())
}

/// Finite-slit propagator `g_j(x; ω)`: mean of `exp(i ω r(s, x) / c)` over the aperture.
///
/// Path lengths are measured relative to `z`; that constant phase is shared by every
/// term of a two-photon amplitude and drops out of `|A|²`.
pub fn slit_propagator<T: Real>(
    x: T,
    slit: Slit,
    lambda: T,
    cfg: &ExperimentConfig<T>,
    quadrature_points: usize,
) -> Result<Complex<T>> {
    check_points(quadrature_points)?;
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    Ok(propagator(x, slit, lambda, cfg, quadrature_points))
}

fn propagator<T: Real>(
    x: T,
    slit: Slit,
    lambda: T,
    cfg: &ExperimentConfig<T>,
    n: usize,
) -> Complex<T> {
    let k = T::TAU() / lambda;
    let z = cfg.distance();
    let centre = slit.centre(cfg);
    let half_node = cfg.slit_width() / T::from_count(2 * n);
    let mut acc = Complex::new(T::zero(), T::zero());
    for m in 0..n {
        let s = centre + (T::from_count(2 * m + 1) - T::from_count(n)) * half_node;
        let dx = x - s;
        let r = (z * z + dx * dx).sqrt();
        let excess = dx * dx / (r + z);
        acc = acc + Complex::from_polar(T::one(), k * excess);
    }
    acc / T::from_count(n)
}

/// Propagators of both slits at one detector position and wavelength.
#[derive(Clone, Copy)]
struct SlitPair<T> {
    s1: Complex<T>,
    s2: Complex<T>,
}

impl<T: Real> SlitPair<T> {
    fn at(x: T, lambda: T, cfg: &ExperimentConfig<T>, n: usize) -> Self {
        Self {
            s1: propagator(x, Slit::S1, lambda, cfg, n),
            s2: propagator(x, Slit::S2, lambda, cfg, n),
        }
    }
}

fn two_photon_intensity<T: Real>(scheme: Scheme, d1: SlitPair<T>, d2: SlitPair<T>) -> T {
    let amplitude = match scheme {
        // Both photons through S1, or both through S2.
        Scheme::SchemeI => d1.s1 * d2.s1 + d1.s2 * d2.s2,
        // ω1 through S1 and ω2 through S2, or the reverse.
        Scheme::SchemeII => d1.s1 * d2.s2 + d1.s2 * d2.s1,
    };
    amplitude.norm_sqr()
}

/// Oracle coincidence rate `|A|²` from exact path lengths, in `[0, 4]`.
pub fn oracle_rate<T: Real>(
    x1: T,
    x2: T,
    cfg: &ExperimentConfig<T>,
    quadrature_points: usize,
) -> Result<T> {
    check_points(quadrature_points)?;
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::NonFinite("detector position"));
    }
    let d1 = SlitPair::at(x1, cfg.lambda(Arm::D1), cfg, quadrature_points);
    let d2 = SlitPair::at(x2, cfg.lambda(Arm::D2), cfg, quadrature_points);
    Ok(two_photon_intensity(cfg.scheme(), d1, d2))
}

/// Oracle rate on the same bin-centre grid as [`super::rate_surface`].
pub fn oracle_surface<T: Real>(
    cfg: &ExperimentConfig<T>,
    n_bins: usize,
    quadrature_points: usize,
) -> Result<RateSurface<T>> {
    check_points(quadrature_points)?;
    if n_bins < super::rate::MIN_SURFACE_BINS {
        return Err(Error::InvalidArgument(format!(
            "n_bins must be >= 8, got {n_bins}"
        )));
    }
    let axis = cell_centres(cfg.window_halfwidth(), n_bins);
    let arm1: Vec<_> = axis
        .par_iter()
        .map(|&x| SlitPair::at(x, cfg.lambda(Arm::D1), cfg, quadrature_points))
        .collect();
    let arm2: Vec<_> = axis
        .par_iter()
        .map(|&x| SlitPair::at(x, cfg.lambda(Arm::D2), cfg, quadrature_points))
        .collect();
    let scheme = cfg.scheme();
    let values = arm1
        .iter()
        .flat_map(|&d1| {
            arm2.iter()
                .map(move |&d2| two_photon_intensity(scheme, d1, d2))
        })
        .collect();
    RateSurface::new(axis.clone(), axis, values, Provenance::Oracle)
}

/// Shape mismatch between a reference surface and a candidate.
///
/// The candidate is scaled by the least-squares factor onto the reference (the
/// overall proportionality constant of a rate is arbitrary), and the largest
/// absolute difference is reported relative to the reference peak.
pub fn shape_deviation<T: Real>(
    reference: &RateSurface<T>,
    candidate: &RateSurface<T>,
) -> Result<T> {
    if reference.axis1().len() != candidate.axis1().len()
        || reference.axis2().len() != candidate.axis2().len()
    {
        return Err(Error::InvalidArgument(
            "surfaces have different shapes".into(),
        ));
    }
    let (mut rc, mut cc) = (T::zero(), T::zero());
    for (&r, &c) in reference.values().iter().zip(candidate.values()) {
        rc = rc + r * c;
        cc = cc + c * c;
    }
    let peak = reference.max_value();
    if !(cc > T::zero() && peak > T::zero()) {
        return Err(Error::InvalidArgument(
            "cannot compare an all-zero surface".into(),
        ));
    }
    let scale = rc / cc;
    let worst = reference
        .values()
        .iter()
        .zip(candidate.values())
        .map(|(&r, &c)| (r - scale * c).abs())
        .fold(T::zero(), T::max);
    Ok(worst / peak)
}

/// Largest change between two surfaces relative to the peak of the second.
pub fn max_relative_change<T: Real>(a: &RateSurface<T>, b: &RateSurface<T>) -> T {
    let peak = b.max_value();
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max)
        / peak
}

/// Pass threshold for analytic-vs-oracle shape deviation.
pub const ORACLE_TOLERANCE: f64 = 0.02;
/// Pass threshold for the oracle's change under quadrature doubling.
pub const QUADRATURE_TOLERANCE: f64 = 1e-3;

/// Result of comparing the analytic surface with the path-sum oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub n_bins: usize,
    pub quadrature_points: usize,
    /// Shape deviation of the oracle from the analytic surface.
    pub max_deviation: f64,
    /// Oracle change when the quadrature is doubled.
    pub quadrature_change: f64,
    pub passed: bool,
}

/// Compares [`super::rate_surface`] against [`oracle_surface`] and checks quadrature convergence.
pub fn oracle_check<T: Real>(
    cfg: &ExperimentConfig<T>,
    n_bins: usize,
    quadrature_points: usize,
) -> Result<OracleCheck> {
    let analytic = super::rate_surface(cfg, n_bins)?;
    let oracle = oracle_surface(cfg, n_bins, quadrature_points)?;
    let refined = oracle_surface(cfg, n_bins, 2 * quadrature_points)?;
    let max_deviation = shape_deviation(&analytic, &oracle)?.as_f64();
    let quadrature_change = max_relative_change(&oracle, &refined).as_f64();
    Ok(OracleCheck {
        n_bins,
        quadrature_points,
        max_deviation,
        quadrature_change,
        passed: max_deviation < ORACLE_TOLERANCE && quadrature_change < QUADRATURE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{envelope, ExperimentParams};

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

    #[test]
    fn propagator_is_bounded_and_mirror_symmetric() {
        let c = cfg(Scheme::SchemeI, 800e-9, 800e-9, 0.547);
        for i in -30..=30 {
            let x = i as f64 * 1e-4;
            for slit in [Slit::S1, Slit::S2] {
                let g = slit_propagator(x, slit, 800e-9, &c, 64).unwrap();
                assert!(g.norm() <= 1.0 + 1e-12);
            }
        }
        let g1 = slit_propagator(0.0, Slit::S1, 800e-9, &c, 64).unwrap();
        let g2 = slit_propagator(0.0, Slit::S2, 800e-9, &c, 64).unwrap();
        assert!((g1.norm() - g2.norm()).abs() < 1e-14);
        assert!(slit_propagator(0.0, Slit::S1, 800e-9, &c, 15).is_err());
    }

    #[test]
    fn propagator_matches_shifted_sinc() {
        // Fraunhofer limit: |g_1(x)|² -> sinc²(π b (x - d/2) / (λ z)).
        let c = cfg(Scheme::SchemeI, 800e-9, 800e-9, 0.547);
        for lambda in [760e-9, 800e-9, 840e-9] {
            let mut worst: f64 = 0.0;
            for i in -300..=300 {
                let x = i as f64 * 1e-5;
                let g = slit_propagator(x, Slit::S1, lambda, &c, 64).unwrap();
                let expect = envelope(x - 200e-6, lambda, &c);
                worst = worst.max((g.norm_sqr() - expect).abs() / expect);
            }
            assert!(worst < 0.02, "lambda {lambda}: {worst}");
        }
    }

    #[test]
    fn origin_is_global_maximum_for_scheme_one() {
        let c = cfg(Scheme::SchemeI, 760e-9, 840e-9, 0.547);
        let s = oracle_surface(&c, 33, 64).unwrap();
        let centre = s.get(16, 16);
        assert_eq!(s.axis1()[16], 0.0);
        assert_eq!(centre, s.max_value());
        assert!((oracle_rate(0.0, 0.0, &c, 64).unwrap() - centre).abs() < 1e-12);
    }

    #[test]
    fn scheme_two_is_scheme_one_mirrored() {
        let one = cfg(Scheme::SchemeI, 760e-9, 840e-9, 0.303);
        let two = one.with_scheme(Scheme::SchemeII);
        for (x1, x2) in [
            (0.0, 0.0),
            (1.1e-3, -0.4e-3),
            (-2.5e-3, 2.9e-3),
            (0.3e-3, 0.7e-3),
        ] {
            let a = oracle_rate(x1, x2, &two, 64).unwrap();
            let b = oracle_rate(x1, -x2, &one, 64).unwrap();
            assert!((a - b).abs() <= 0.02 * a.max(b).max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn oracle_agrees_with_analytic_reference_case() {
        let c = cfg(Scheme::SchemeI, 760e-9, 840e-9, 0.547);
        let check = oracle_check(&c, 64, 64).unwrap();
        assert!(check.max_deviation < 0.02, "{check:?}");
        assert!(check.quadrature_change < 1e-3, "{check:?}");
        assert!(check.passed);
    }
}
