//! Bessel functions of the first kind, orders 0 and 1, and the Robin root oracle.

use crate::error::{Error, Result};

/// First zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
/// First positive zero of `J1` (first nontrivial zero of `J0'`).
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

const SERIES_LIMIT: f64 = 20.0;

fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for m in 1..200u32 {
        term *= q / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion for large arguments.
fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    for kk in 1..12 {
        let k = kk as f64;
        term *= (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * x);
        if kk % 2 == 1 {
            let sign = if (kk / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (kk / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax)
    } else {
        asymptotic(0, ax)
    }
}

pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(1, ax) } else { asymptotic(1, ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(Error::ConvergenceFailure(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fundamental wavenumber `beta` of a disk of radius `R` with the Robin
/// condition `k psi + T psi_r = 0` at `r = R`, i.e. the smallest positive
/// root of `k J0(beta R) - T beta J1(beta R) = 0`.
///
/// For `k = 0` the constant mode (`beta = 0`) is excluded and the first
/// nonzero Neumann root `j'_{0,1} / R` is returned instead.
pub fn robin_eigenvalue_oracle(k: f64, tension: f64, radius: f64) -> Result<f64> {
    if !(k >= 0.0 && tension > 0.0 && radius > 0.0) || !(k.is_finite() && tension.is_finite() && radius.is_finite()) {
        return Err(Error::invalid("robin oracle: need k >= 0, T > 0, R > 0"));
    }
    let h = k * radius / tension;
    let x = if h == 0.0 {
        bisect(j1, 1.0, 5.0)?
    } else {
        let f = |x: f64| (h * j0(x) - x * j1(x)) / (1.0 + h);
        let root = bisect(f, 1e-12, J0_FIRST_ZERO)?;
        let residual = f(root);
        if residual.abs() >= 1e-10 {
            return Err(Error::ConvergenceFailure(format!("robin root residual {residual}")));
        }
        root
    };
    Ok(x / radius)
}
