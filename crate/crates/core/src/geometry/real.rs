use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar abstraction shared by plain `f64` evaluation and reverse-mode
/// differentiation.
///
/// All geometry is written once against this trait so that the value computed
/// for a loss and the value recorded on a gradient tape come from the same code.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant carrying no derivative information.
    fn constant(v: f64) -> Self;

    fn value(self) -> f64;

    fn sqrt(self) -> Self;

    fn exp(self) -> Self;

    /// `2·atan2(√s2, w) / √s2`, the factor mapping a quaternion's vector part
    /// onto its rotation vector. Requires `w >= 0`; the limit `2/w` is used at
    /// `s2 = 0`.
    fn log_scale(s2: Self, w: Self) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }
}

/// Below this ratio `√s2 / w` the series expansions are used.
pub(crate) const LOG_SCALE_SERIES_THRESHOLD: f64 = 1e-3;

pub(crate) fn log_scale_value(s2: f64, w: f64) -> f64 {
    let s = s2.max(0.0).sqrt();
    if w > 0.0 && s < LOG_SCALE_SERIES_THRESHOLD * w {
        let r2 = s2 / (w * w);
        2.0 / w * (1.0 - r2 / 3.0 + r2 * r2 / 5.0)
    } else {
        2.0 * s.atan2(w) / s
    }
}

/// Partial derivatives of [`log_scale_value`] with respect to `(s2, w)`.
pub(crate) fn log_scale_partials(s2: f64, w: f64) -> (f64, f64) {
    let s = s2.max(0.0).sqrt();
    let d_w = -2.0 / (s2 + w * w);
    let d_s2 = if w > 0.0 && s < LOG_SCALE_SERIES_THRESHOLD * w {
        // sum_{n>=1} (-1)^n (2n / (2n+1)) r^(2n-2) / w^3
        let r2 = s2 / (w * w);
        (-2.0 / 3.0 + 4.0 / 5.0 * r2 - 6.0 / 7.0 * r2 * r2) / (w * w * w)
    } else {
        let theta = s.atan2(w);
        (w * s / (s2 + w * w) - theta) / (s2 * s)
    };
    (d_s2, d_w)
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(self) -> f64 {
        self
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn log_scale(s2: Self, w: Self) -> Self {
        log_scale_value(s2, w)
    }
}
