use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, SPEED_OF_LIGHT};

/// Which slit pairing the biphoton state realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Both photons of a pair pass through the same slit.
    SchemeI,
    /// The two photons pass through opposite slits.
    SchemeII,
}

impl Scheme {
    /// `+1` for Scheme I, `-1` for Scheme II: the sign of the D2 term in the two-photon phase.
    pub fn phase_sign<T: Real>(self) -> T {
        match self {
            Scheme::SchemeI => T::one(),
            Scheme::SchemeII => -T::one(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::SchemeI => "I",
            Scheme::SchemeII => "II",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "1" | "i" | "scheme1" | "SchemeI" => Ok(Scheme::SchemeI),
            "II" | "2" | "ii" | "scheme2" | "SchemeII" => Ok(Scheme::SchemeII),
            other => Err(Error::config(
                "scheme",
                format!("expected I or II, got `{other}`"),
            )),
        }
    }
}

/// Largest allowed `(window_halfwidth + slit_spacing) / distance` for the far-field phase.
pub const PARAXIAL_LIMIT: f64 = 0.05;

/// Unvalidated experiment parameters, all lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams<T> {
    pub scheme: Scheme,
    /// Wavelength selected by the filter in front of D1.
    pub lambda1: T,
    /// Wavelength selected by the filter in front of D2.
    pub lambda2: T,
    pub slit_spacing: T,
    pub slit_width: T,
    /// Slit-to-detector distance, or the effective diffraction length of a lens system.
    pub distance: T,
    /// Detectors scan `[-window_halfwidth, window_halfwidth]` on each axis.
    pub window_halfwidth: T,
    /// Multiply the interference term by the single-slit sinc² envelopes.
    pub envelope: bool,
}

/// A validated experiment geometry.
///
/// Construction goes through [`ExperimentConfig::new`], so every operation taking a
/// config can assume the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ExperimentConfig<T> {
    params: ExperimentParams<T>,
}

impl<T: Real> ExperimentConfig<T> {
    pub fn new(params: ExperimentParams<T>) -> Result<Self> {
        let p = &params;
        let finite = [
            ("lambda1", p.lambda1),
            ("lambda2", p.lambda2),
            ("slit_spacing", p.slit_spacing),
            ("slit_width", p.slit_width),
            ("distance", p.distance),
            ("window", p.window_halfwidth),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        let zero = T::zero();
        if p.lambda1 <= zero {
            return Err(Error::config("lambda1", "lambda1 > 0"));
        }
        if p.lambda2 <= zero {
            return Err(Error::config("lambda2", "lambda2 > 0"));
        }
        if p.slit_width <= zero {
            return Err(Error::config("slit_width", "slit_width > 0"));
        }
        if p.slit_spacing <= p.slit_width {
            return Err(Error::config("slit_width", "slit_spacing > slit_width"));
        }
        if p.distance <= zero {
            return Err(Error::config("distance", "distance > 0"));
        }
        if p.window_halfwidth <= zero {
            return Err(Error::config("window", "window > 0"));
        }
        let ratio = (p.window_halfwidth + p.slit_spacing) / p.distance;
        if ratio >= T::lit(PARAXIAL_LIMIT) {
            return Err(Error::config(
                "window",
                format!("(window + slit_spacing) / distance < {PARAXIAL_LIMIT}, got {ratio}"),
            ));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &ExperimentParams<T> {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.params.scheme
    }

    pub fn lambda1(&self) -> T {
        self.params.lambda1
    }

    pub fn lambda2(&self) -> T {
        self.params.lambda2
    }

    /// Wavelength of detector arm 1 or 2.
    pub fn lambda(&self, arm: Arm) -> T {
        match arm {
            Arm::D1 => self.params.lambda1,
            Arm::D2 => self.params.lambda2,
        }
    }

    pub fn slit_spacing(&self) -> T {
        self.params.slit_spacing
    }

    pub fn slit_width(&self) -> T {
        self.params.slit_width
    }

    pub fn distance(&self) -> T {
        self.params.distance
    }

    pub fn window_halfwidth(&self) -> T {
        self.params.window_halfwidth
    }

    pub fn envelope_enabled(&self) -> bool {
        self.params.envelope
    }

    pub fn speed_of_light(&self) -> T {
        T::lit(SPEED_OF_LIGHT)
    }

    /// Angular frequency `2πc/λ1` of the photon seen by D1.
    pub fn omega1(&self) -> T {
        angular_frequency(self.params.lambda1)
    }

    pub fn omega2(&self) -> T {
        angular_frequency(self.params.lambda2)
    }

    /// Sum frequency `ω1 + ω2`.
    pub fn omega_sum(&self) -> T {
        self.omega1() + self.omega2()
    }

    /// Difference frequency `ω1 - ω2`.
    pub fn omega_diff(&self) -> T {
        self.omega1() - self.omega2()
    }

    pub fn is_degenerate(&self) -> bool {
        self.params.lambda1 == self.params.lambda2
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        let mut out = *self;
        out.params.scheme = scheme;
        out
    }

    pub fn with_envelope(&self, envelope: bool) -> Self {
        let mut out = *self;
        out.params.envelope = envelope;
        out
    }

    /// Same geometry with a different scan window; re-validated.
    pub fn with_window(&self, window_halfwidth: T) -> Result<Self> {
        Self::new(ExperimentParams {
            window_halfwidth,
            ..self.params
        })
    }
}

impl<T: Real> TryFrom<ExperimentParams<T>> for ExperimentConfig<T> {
    type Error = Error;

    fn try_from(params: ExperimentParams<T>) -> Result<Self> {
        Self::new(params)
    }
}

/// Detector arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    D1,
    D2,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::D1 => 1,
            Arm::D2 => 2,
        }
    }
}

fn angular_frequency<T: Real>(lambda: T) -> T {
    T::TAU() * T::lit(SPEED_OF_LIGHT) / lambda
}
