use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::montecarlo::CoincidenceHistogram;
use crate::physics::{arm_envelope, rate, Arm, ExperimentConfig, RateSurface};
use crate::scalar::Real;

pub const MIN_CUT_POINTS: usize = 16;

/// The four canonical detector trajectories through the `(x1, x2)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutKind {
    /// D2 parked at `x2 = 0`, D1 scanned: `x1 = x`.
    FixD2ScanD1,
    /// D1 parked at `x1 = 0`, D2 scanned: `x2 = x`.
    FixD1ScanD2,
    /// Detectors move oppositely: `x1 = -x2 = x`.
    CounterMoving,
    /// Detectors move together: `x1 = x2 = x`.
    CoMoving,
}

impl CutKind {
    pub const ALL: [CutKind; 4] = [
        CutKind::FixD2ScanD1,
        CutKind::FixD1ScanD2,
        CutKind::CounterMoving,
        CutKind::CoMoving,
    ];

    /// Detector positions `(x1, x2)` at scan parameter `x`.
    pub fn positions<T: Real>(self, x: T) -> (T, T) {
        match self {
            CutKind::FixD2ScanD1 => (x, T::zero()),
            CutKind::FixD1ScanD2 => (T::zero(), x),
            CutKind::CounterMoving => (x, -x),
            CutKind::CoMoving => (x, x),
        }
    }

    /// The trajectory this one becomes under `x2 -> -x2`.
    pub fn mirrored(self) -> Self {
        match self {
            CutKind::CounterMoving => CutKind::CoMoving,
            CutKind::CoMoving => CutKind::CounterMoving,
            other => other,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            CutKind::FixD2ScanD1 => "fix-d2-scan-d1",
            CutKind::FixD1ScanD2 => "fix-d1-scan-d2",
            CutKind::CounterMoving => "counter-moving",
            CutKind::CoMoving => "co-moving",
        }
    }

    /// Product of the arm envelopes along the trajectory.
    pub fn envelope<T: Real>(self, x: T, cfg: &ExperimentConfig<T>) -> T {
        let (x1, x2) = self.positions(x);
        arm_envelope(x1, Arm::D1, cfg) * arm_envelope(x2, Arm::D2, cfg)
    }
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for CutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CutKind::ALL
            .into_iter()
            .find(|k| k.slug() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown cut kind `{s}`")))
    }
}

/// A 1D coincidence profile along one detector trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CutProfile<T> {
    kind: CutKind,
    x: Vec<T>,
    y: Vec<T>,
    y_err: Option<Vec<T>>,
}

impl<T: Real> CutProfile<T> {
    pub fn new(kind: CutKind, x: Vec<T>, y: Vec<T>, y_err: Option<Vec<T>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument("x and y lengths differ".into()));
        }
        if let Some(e) = &y_err {
            if e.len() != y.len() {
                return Err(Error::InvalidArgument("y_err length differs from y".into()));
            }
            if e.iter().any(|v| !(*v >= T::zero())) {
                return Err(Error::InvalidArgument("error bars must be >= 0".into()));
            }
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "x must be strictly increasing".into(),
            ));
        }
        if y.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidArgument("profile values must be >= 0".into()));
        }
        Ok(Self { kind, x, y, y_err })
    }

    pub fn kind(&self) -> CutKind {
        self.kind
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn y_err(&self) -> Option<&[T]> {
        self.y_err.as_deref()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Anything a cut can be taken from.
#[derive(Debug, Clone, Copy)]
pub enum CutSource<'a, T> {
    /// Sampled with bilinear interpolation.
    Surface(&'a RateSurface<T>),
    /// Sampled from the nearest bin, with `√N` error bars.
    Histogram(&'a CoincidenceHistogram<T>),
}

impl<'a, T> From<&'a RateSurface<T>> for CutSource<'a, T> {
    fn from(s: &'a RateSurface<T>) -> Self {
        CutSource::Surface(s)
    }
}

impl<'a, T> From<&'a CoincidenceHistogram<T>> for CutSource<'a, T> {
    fn from(h: &'a CoincidenceHistogram<T>) -> Self {
        CutSource::Histogram(h)
    }
}

/// Scan-parameter interval `[lo, hi]` over which the trajectory stays on the grid.
fn scan_range<T: Real>(kind: CutKind, c1: &[T], c2: &[T]) -> Result<(T, T)> {
    let (a1, b1) = (c1[0], c1[c1.len() - 1]);
    let (a2, b2) = (c2[0], c2[c2.len() - 1]);
    let zero = T::zero();
    let (lo, hi) = match kind {
        CutKind::FixD2ScanD1 => {
            if zero < a2 || zero > b2 {
                return Err(Error::LineOutsideGrid("x2 = 0 is outside axis2".into()));
            }
            (a1, b1)
        }
        CutKind::FixD1ScanD2 => {
            if zero < a1 || zero > b1 {
                return Err(Error::LineOutsideGrid("x1 = 0 is outside axis1".into()));
            }
            (a2, b2)
        }
        CutKind::CoMoving => (a1.max(a2), b1.min(b2)),
        CutKind::CounterMoving => (a1.max(-b2), b1.min(-a2)),
    };
    if !(hi > lo) {
        return Err(Error::LineOutsideGrid(format!(
            "{kind} does not cross the grid"
        )));
    }
    Ok((lo, hi))
}

fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::from_count(n - 1);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + step * T::from_count(k)
            }
        })
        .collect()
}

/// Fractional index of `x` on a uniform axis.
fn fractional_index<T: Real>(axis: &[T], x: T) -> T {
    let step = axis[1] - axis[0];
    (x - axis[0]) / step
}

fn bilinear<T: Real>(s: &RateSurface<T>, x1: T, x2: T) -> T {
    let (n1, n2) = (s.axis1().len(), s.axis2().len());
    let locate = |axis: &[T], x: T, n: usize| {
        let t = fractional_index(axis, x);
        let i = t.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = (t - T::from_count(i)).max(T::zero()).min(T::one());
        (i, frac)
    };
    let (i, u) = locate(s.axis1(), x1, n1);
    let (j, v) = locate(s.axis2(), x2, n2);
    let one = T::one();
    s.get(i, j) * (one - u) * (one - v)
        + s.get(i + 1, j) * u * (one - v)
        + s.get(i, j + 1) * (one - u) * v
        + s.get(i + 1, j + 1) * u * v
}

fn nearest<T: Real>(axis: &[T], x: T) -> usize {
    fractional_index(axis, x)
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(axis.len() - 1)
}

/// Samples `source` along the trajectory `kind` at `n_points` evenly spaced values of `x`.
///
/// The scan parameter is `x` itself (not arc length), so on the diagonals the two
/// detectors sit at `(x, ±x)`.
pub fn extract_cut<'a, T: Real>(
    source: impl Into<CutSource<'a, T>>,
    kind: CutKind,
    n_points: usize,
) -> Result<CutProfile<T>> {
    if n_points < MIN_CUT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "cuts need >= {MIN_CUT_POINTS} points, got {n_points}"
        )));
    }
    match source.into() {
        CutSource::Surface(s) => {
            let (lo, hi) = scan_range(kind, s.axis1(), s.axis2())?;
            let x = linspace(lo, hi, n_points);
            let y = x
                .iter()
                .map(|&t| {
                    let (x1, x2) = kind.positions(t);
                    bilinear(s, x1, x2)
                })
                .collect();
            CutProfile::new(kind, x, y, None)
        }
        CutSource::Histogram(h) => {
            let (c1, c2) = (h.centres1(), h.centres2());
            let (lo, hi) = scan_range(kind, c1, c2)?;
            let x = linspace(lo, hi, n_points);
            let mut y = Vec::with_capacity(n_points);
            let mut err = Vec::with_capacity(n_points);
            for &t in &x {
                let (x1, x2) = kind.positions(t);
                let c = T::from_u64(h.count(nearest(c1, x1), nearest(c2, x2))).expect("count fits");
                y.push(c);
                err.push(c.sqrt());
            }
            CutProfile::new(kind, x, y, Some(err))
        }
    }
}

/// Cut evaluated directly from the analytic rate over `x ∈ [-w, w]`.
pub fn analytic_cut<T: Real>(
    cfg: &ExperimentConfig<T>,
    kind: CutKind,
    n_points: usize,
) -> Result<CutProfile<T>> {
    if n_points < MIN_CUT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "cuts need >= {MIN_CUT_POINTS} points, got {n_points}"
        )));
    }
    let w = cfg.window_halfwidth();
    let x = linspace(-w, w, n_points);
    let y = x
        .iter()
        .map(|&t| {
            let (x1, x2) = kind.positions(t);
            rate(x1, x2, cfg)
        })
        .collect();
    CutProfile::new(kind, x, y, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::SamplerConfig;
    use crate::physics::{rate_surface, ExperimentParams, Provenance, Scheme};

    fn cfg(scheme: Scheme, l1: f64, l2: f64) -> ExperimentConfig<f64> {
        ExperimentConfig::new(ExperimentParams {
            scheme,
            lambda1: l1,
            lambda2: l2,
            slit_spacing: 400e-6,
            slit_width: 100e-6,
            distance: 0.547,
            window_halfwidth: 3e-3,
            envelope: true,
        })
        .unwrap()
    }

    #[test]
    fn degenerate_counter_moving_has_no_modulation() {
        let c = cfg(Scheme::SchemeI, 800e-9, 800e-9);
        let s = rate_surface(&c, 64).unwrap();
        // 64 points land on the anti-diagonal grid nodes.
        let p = extract_cut(&s, CutKind::CounterMoving, 64).unwrap();
        for (&x, &y) in p.x().iter().zip(p.y()) {
            let flat = 2.0 * CutKind::CounterMoving.envelope(x, &c);
            assert!((y - flat).abs() < 1e-9, "{x}: {y} vs {flat}");
        }
        let exact = analytic_cut(&c, CutKind::CounterMoving, 101).unwrap();
        for (&x, &y) in exact.x().iter().zip(exact.y()) {
            assert_eq!(y, 2.0 * CutKind::CounterMoving.envelope(x, &c));
        }
    }

    #[test]
    fn surface_cut_hits_grid_nodes_exactly() {
        let c = cfg(Scheme::SchemeI, 760e-9, 840e-9);
        let s = rate_surface(&c, 64).unwrap();
        let p = extract_cut(&s, CutKind::CoMoving, 64).unwrap();
        for (k, &y) in p.y().iter().enumerate() {
            assert!((y - s.get(k, k)).abs() < 1e-9);
        }
    }

    #[test]
    fn histogram_cut_error_bars_are_root_counts() {
        let c = cfg(Scheme::SchemeI, 800e-9, 800e-9);
        let h = crate::montecarlo::sample_events(
            &c,
            &SamplerConfig {
                n_events: 200_000,
                ..Default::default()
            },
        )
        .unwrap();
        for kind in CutKind::ALL {
            let p = extract_cut(&h, kind, 64).unwrap();
            let err = p.y_err().unwrap();
            for (y, e) in p.y().iter().zip(err) {
                assert_eq!(y.sqrt(), *e);
            }
        }
        let diag = extract_cut(&h, CutKind::CoMoving, 64).unwrap();
        for k in 0..64 {
            assert_eq!(diag.y()[k], h.count(k, k) as f64);
        }
    }

    #[test]
    fn rejects_lines_off_the_grid() {
        let ax: Vec<f64> = (0..16).map(|i| 1.0 + i as f64).collect();
        let s = RateSurface::new(ax.clone(), ax, vec![1.0; 256], Provenance::Analytic).unwrap();
        assert!(matches!(
            extract_cut(&s, CutKind::FixD2ScanD1, 32),
            Err(Error::LineOutsideGrid(_))
        ));
        assert!(matches!(
            extract_cut(&s, CutKind::CounterMoving, 32),
            Err(Error::LineOutsideGrid(_))
        ));
        assert!(extract_cut(&s, CutKind::CoMoving, 32).is_ok());
        assert!(extract_cut(&s, CutKind::CoMoving, 15).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in CutKind::ALL {
            assert_eq!(k.slug().parse::<CutKind>().unwrap(), k);
            assert_eq!(k.mirrored().mirrored(), k);
        }
    }
}
