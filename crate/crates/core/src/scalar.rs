//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point types the simulator runs on: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + LowerExp + Debug
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to any Real")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count converts to any Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + FftNum
        + Default
        + Display
        + LowerExp
        + Debug
{
}

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `sin(u)/u` with the removable singularity filled in.
#[inline]
pub fn sinc<T: Real>(u: T) -> T {
    if u == T::zero() {
        T::one()
    } else {
        u.sin() / u
    }
}

/// Symmetric grid of `n` cell centres covering `[-half_width, half_width]`.
///
/// Centre `i` is `(2i + 1 - n) * half_width / n`, so `centre(n - 1 - i) == -centre(i)` bit for bit.
pub fn cell_centres<T: Real>(half_width: T, n: usize) -> Vec<T> {
    let unit = half_width / T::from_count(n);
    (0..n)
        .map(|i| (T::from_count(2 * i + 1) - T::from_count(n)) * unit)
        .collect()
}

/// The `n + 1` cell edges matching [`cell_centres`].
pub fn cell_edges<T: Real>(half_width: T, n: usize) -> Vec<T> {
    let unit = half_width / T::from_count(n);
    (0..=n)
        .map(|i| (T::from_count(2 * i) - T::from_count(n)) * unit)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centres_are_mirror_exact() {
        for n in [8usize, 9, 64, 255] {
            let c = cell_centres(3.0e-3_f64, n);
            for i in 0..n {
                assert_eq!(c[n - 1 - i], -c[i]);
            }
            let e = cell_edges(3.0e-3_f64, n);
            assert_eq!(e[0], -3.0e-3);
            assert_eq!(e[n], 3.0e-3);
        }
    }

    #[test]
    fn sinc_at_zero() {
        assert_eq!(sinc(0.0_f64), 1.0);
        assert_eq!(sinc(0.0_f32), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
    }
}
