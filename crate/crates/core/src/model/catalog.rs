//! Named catalog of initial profiles and external force histories.
//!
//! Scenario files pick from these instead of carrying code, so every run is
//! reproducible from its text description alone.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::solver2d::bessel;

/// Time dependence of an external force; the force vector is `amplitude * shape(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceShape {
    Constant,
    /// Heaviside step switched on at `t_on`.
    Step { t_on: f64 },
    /// Raised-cosine pulse of unit time integral on `[t_on, t_on + duration]`.
    Pulse {
        #[serde(default)]
        t_on: f64,
        duration: f64,
    },
    Sine { omega: f64 },
}

impl ForceShape {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            ForceShape::Constant => 1.0,
            ForceShape::Step { t_on } => {
                if t >= t_on {
                    1.0
                } else {
                    0.0
                }
            }
            ForceShape::Pulse { t_on, duration } => {
                let s = t - t_on;
                if s <= 0.0 || s >= duration {
                    0.0
                } else {
                    (1.0 - (2.0 * PI * s / duration).cos()) / duration
                }
            }
            ForceShape::Sine { omega } => (omega * t).sin(),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match *self {
            ForceShape::Constant => {}
            ForceShape::Step { t_on } => {
                if !t_on.is_finite() {
                    out.push("force step time must be finite".into());
                }
            }
            ForceShape::Pulse { t_on, duration } => {
                if !t_on.is_finite() || !(duration > 0.0 && duration.is_finite()) {
                    out.push("force pulse needs finite onset and positive duration".into());
                }
            }
            ForceShape::Sine { omega } => {
                if !omega.is_finite() {
                    out.push("force frequency must be finite".into());
                }
            }
        }
        out
    }
}

/// External force with a fixed direction in component space.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceSpec {
    pub amplitude: Vec<f64>,
    pub shape: ForceShape,
}

impl ForceSpec {
    pub fn scalar(amplitude: f64, shape: ForceShape) -> Self {
        Self { amplitude: vec![amplitude], shape }
    }

    pub fn value_into(&self, t: f64, out: &mut [f64]) {
        let s = self.shape.value(t);
        for (o, a) in out.iter_mut().zip(&self.amplitude) {
            *o = a * s;
        }
    }
}

/// Spatial profile of an initial field, evaluated along the interval (or radius).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude * sin(mode * pi * (x - b1) / (b2 - b1))`
    SineMode { amplitude: f64, mode: u32 },
    /// `amplitude * J0(beta * r)` (disk interiors)
    BesselMode { amplitude: f64, beta: f64 },
    /// Linear interpolation through equispaced samples spanning the domain.
    Samples { values: Vec<f64> },
}

impl Profile {
    /// Profile value at `x` on the domain `[lo, hi]`.
    pub fn eval(&self, x: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Gaussian { amplitude, center, width } => {
                let u = (x - center) / width;
                amplitude * (-0.5 * u * u).exp()
            }
            Profile::SineMode { amplitude, mode } => {
                amplitude * (*mode as f64 * PI * (x - lo) / (hi - lo)).sin()
            }
            Profile::BesselMode { amplitude, beta } => amplitude * bessel::j0(beta * x),
            Profile::Samples { values } => interpolate(values, x, lo, hi),
        }
    }

    /// Spatial derivative of the profile.
    pub fn derivative(&self, x: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Gaussian { amplitude, center, width } => {
                let u = (x - center) / width;
                -amplitude * u / width * (-0.5 * u * u).exp()
            }
            Profile::SineMode { amplitude, mode } => {
                let kw = *mode as f64 * PI / (hi - lo);
                amplitude * kw * (kw * (x - lo)).cos()
            }
            Profile::BesselMode { amplitude, beta } => -amplitude * beta * bessel::j1(beta * x),
            Profile::Samples { values } => {
                if values.len() < 2 {
                    return 0.0;
                }
                let h = (hi - lo) / (values.len() - 1) as f64;
                let s = ((x - lo) / h).floor().clamp(0.0, (values.len() - 2) as f64) as usize;
                (values[s + 1] - values[s]) / h
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Profile::Zero => {}
            Profile::Gaussian { amplitude, center, width } => {
                if !(amplitude.is_finite() && center.is_finite()) || !(*width > 0.0 && width.is_finite()) {
                    out.push("gaussian profile needs finite amplitude/center and positive width".into());
                }
            }
            Profile::SineMode { amplitude, .. } => {
                if !amplitude.is_finite() {
                    out.push("sine mode amplitude must be finite".into());
                }
            }
            Profile::BesselMode { amplitude, beta } => {
                if !(amplitude.is_finite() && beta.is_finite()) {
                    out.push("bessel mode parameters must be finite".into());
                }
            }
            Profile::Samples { values } => {
                if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
                    out.push("sample profile needs at least two finite values".into());
                }
            }
        }
        out
    }
}

fn interpolate(values: &[f64], x: f64, lo: f64, hi: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let pos = ((x - lo) / (hi - lo) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let i = (pos.floor() as usize).min(n - 2);
            let w = pos - i as f64;
            values[i] * (1.0 - w) + values[i + 1] * w
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
}

/// Initial velocity of the interior field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VelocityInit {
    /// Velocity that makes the displacement a pure wave travelling in `direction`.
    Travelling { travelling: Direction },
    Profile(Profile),
}

impl Default for VelocityInit {
    fn default() -> Self {
        VelocityInit::Profile(Profile::Zero)
    }
}
