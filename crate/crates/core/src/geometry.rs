//! Induced metric, Christoffel symbol and covariant divergence on embedded curves.
//!
//! A curve is sampled at `N` uniform parameter values over one period. On a
//! closed curve derivatives are spectral (FFT); open charts use fourth-order
//! central differences with one-sided closures at the ends.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// FFT differentiation of periodic samples.
    Spectral,
    /// Fourth-order central differences; periodic wrap when `periodic` is set.
    FourthOrder { periodic: bool },
}

/// Metric data of a closed curve `u -> x(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMetric {
    pub u: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub g: Vec<f64>,
    pub sqrt_g: Vec<f64>,
    /// Parameter spacing.
    pub du: f64,
    pub scheme: Scheme,
}

impl CurveMetric {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Length of the curve, `sum sqrt(g) du`.
    pub fn length(&self) -> f64 {
        self.sqrt_g.iter().sum::<f64>() * self.du
    }
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Spectral derivative of periodic samples spaced `du` apart.
pub fn spectral_derivative(f: &[f64], du: f64) -> Vec<f64> {
    let n = f.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let (fwd, inv) = fft_pair(n);
    let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let period = du * n as f64;
    let base = 2.0 * std::f64::consts::PI / period;
    for (idx, c) in buf.iter_mut().enumerate() {
        let m = if idx <= n / 2 { idx as f64 } else { idx as f64 - n as f64 };
        if n % 2 == 0 && idx == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, m * base);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Fourth-order finite-difference derivative.
pub fn fd4_derivative(f: &[f64], du: f64, periodic: bool) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 5 {
        return out;
    }
    let c = 1.0 / (12.0 * du);
    for (i, o) in out.iter_mut().enumerate() {
        if periodic {
            let at = |d: isize| f[((i as isize + d).rem_euclid(n as isize)) as usize];
            *o = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) * c;
        } else if i >= 2 && i + 2 < n {
            *o = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
        } else if i < 2 {
            let s = &f[0..5];
            *o = if i == 0 {
                (-25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]) * c
            } else {
                (-3.0 * s[0] - 10.0 * s[1] + 18.0 * s[2] - 6.0 * s[3] + s[4]) * c
            };
        } else {
            let s = &f[n - 5..n];
            *o = if i == n - 1 {
                (3.0 * s[0] - 16.0 * s[1] + 36.0 * s[2] - 48.0 * s[3] + 25.0 * s[4]) * c
            } else {
                (-s[0] + 6.0 * s[1] - 18.0 * s[2] + 10.0 * s[3] + 3.0 * s[4]) * c
            };
        }
    }
    out
}

pub fn derivative(f: &[f64], du: f64, scheme: Scheme) -> Vec<f64> {
    match scheme {
        Scheme::Spectral => spectral_derivative(f, du),
        Scheme::FourthOrder { periodic } => fd4_derivative(f, du, periodic),
    }
}

/// Metric `g = |dx/du|^2` of a closed curve sampled uniformly over `period`.
pub fn induced_metric(samples: &[[f64; 2]], period: f64) -> Result<CurveMetric> {
    induced_metric_with(samples, period, Scheme::Spectral)
}

pub fn induced_metric_with(samples: &[[f64; 2]], period: f64, scheme: Scheme) -> Result<CurveMetric> {
    let n = samples.len();
    if n < 5 || !(period > 0.0) {
        return Err(Error::DegenerateCurve { min_metric: 0.0 });
    }
    if samples.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::DegenerateCurve { min_metric: f64::NAN });
    }
    let du = period / n as f64;
    let xs: Vec<f64> = samples.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = samples.iter().map(|p| p[1]).collect();
    let dx = derivative(&xs, du, scheme);
    let dy = derivative(&ys, du, scheme);
    let g: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| a * a + b * b).collect();
    let g_max = g.iter().cloned().fold(0.0, f64::max);
    let g_min = g.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(g_min > 1e-12 * g_max.max(1e-300)) || !g_min.is_finite() {
        return Err(Error::DegenerateCurve { min_metric: g_min });
    }
    Ok(CurveMetric {
        u: (0..n).map(|j| j as f64 * du).collect(),
        x: samples.to_vec(),
        sqrt_g: g.iter().map(|v| v.sqrt()).collect(),
        g,
        du,
        scheme,
    })
}

/// Samples of the closed curve `f(u)` at `n` uniform points of `[0, period)`.
pub fn sample_curve(n: usize, period: f64, f: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
    (0..n).map(|j| f(j as f64 * period / n as f64)).collect()
}

/// `Gamma^1_11 = g^{-1} dg/du / 2` at every sample.
pub fn christoffel_all(g: &[f64], du: f64, scheme: Scheme) -> Vec<f64> {
    let dg = derivative(g, du, scheme);
    g.iter().zip(&dg).map(|(gi, dgi)| 0.5 * dgi / gi).collect()
}

/// The single Christoffel symbol of a curve at sample `index`.
pub fn christoffel(g: &[f64], du: f64, scheme: Scheme, index: usize) -> f64 {
    christoffel_all(g, du, scheme)[index]
}

/// Covariant derivative of the metric, `dg/du - 2 Gamma g`, which vanishes for the Levi-Civita connection.
pub fn metric_compatibility_defect(metric: &CurveMetric) -> f64 {
    let gamma = christoffel_all(&metric.g, metric.du, metric.scheme);
    let dg = derivative(&metric.g, metric.du, metric.scheme);
    dg.iter()
        .zip(&gamma)
        .zip(&metric.g)
        .map(|((d, ga), g)| (d - 2.0 * ga * g).abs())
        .fold(0.0, f64::max)
}

/// `div v = g^{-1/2} d(g^{1/2} v)/du` for the tangent component `v`.
pub fn covariant_divergence(v: &[f64], metric: &CurveMetric) -> Vec<f64> {
    let weighted: Vec<f64> = v.iter().zip(&metric.sqrt_g).map(|(a, s)| a * s).collect();
    let d = derivative(&weighted, metric.du, metric.scheme);
    d.iter().zip(&metric.sqrt_g).map(|(a, s)| a / s).collect()
}

/// `|sum div(v) sqrt(g) du|` over the closed curve; zero up to quadrature error.
pub fn divergence_theorem_check(v: &[f64], metric: &CurveMetric) -> f64 {
    let div = covariant_divergence(v, metric);
    let total: f64 = div.iter().zip(&metric.sqrt_g).map(|(d, s)| d * s).sum::<f64>() * metric.du;
    total.abs()
}
