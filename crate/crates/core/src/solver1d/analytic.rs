//! Closed-form boundary trajectories used as references.

use crate::error::{Error, Result};

/// Solution of `m psi'' + (T/a) psi' + k psi = 0` with `psi(0), psi'(0) = init`.
///
/// Covers the under-, critically and over-damped branches. Pass
/// `a = f64::INFINITY` (or `T = 0`) for the undamped oscillator.
pub fn lamb_analytic(m: f64, tension: f64, a: f64, k: f64, init: (f64, f64), t: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid(format!("lamb_analytic: mass must be positive (got {m})")));
    }
    if !(k >= 0.0 && tension >= 0.0 && a > 0.0) {
        return Err(Error::invalid("lamb_analytic: need k >= 0, T >= 0, a > 0"));
    }
    Ok(damped_oscillator(m, tension / a, k, init, t))
}

/// `m x'' + c x' + k x = 0`.
pub fn damped_oscillator(m: f64, c: f64, k: f64, (x0, v0): (f64, f64), t: f64) -> f64 {
    let gamma = c / (2.0 * m);
    let disc = c * c - 4.0 * m * k;
    let scale = c * c + 4.0 * m * k;
    if disc.abs() <= 1e-12 * scale {
        (-gamma * t).exp() * (x0 + (v0 + gamma * x0) * t)
    } else if disc < 0.0 {
        let wd = (-disc).sqrt() / (2.0 * m);
        (-gamma * t).exp() * (x0 * (wd * t).cos() + (v0 + gamma * x0) / wd * (wd * t).sin())
    } else {
        let s = disc.sqrt() / (2.0 * m);
        let (r1, r2) = (-gamma + s, -gamma - s);
        let a1 = (v0 - r2 * x0) / (r1 - r2);
        a1 * (r1 * t).exp() + (x0 - a1) * (r2 * t).exp()
    }
}

/// Massless spring end of a semi-infinite string: `psi_B(0) exp(-(a k / T) t)`.
pub fn massless_spring_boundary_decay(a: f64, k: f64, tension: f64, psi_b0: f64, t: f64) -> Result<f64> {
    if !(tension > 0.0) {
        return Err(Error::invalid("massless decay: tension must be positive"));
    }
    Ok(psi_b0 * (-(a * k / tension) * t).exp())
}

/// Same boundary driven by initial interior data `(g, h)`:
/// `psi_B' + (a k / T) psi_B = a g'(a t) + h(a t)`.
///
/// The source integral is evaluated by composite Simpson with `panels` panels.
pub fn massless_spring_boundary_forced(
    a: f64,
    k: f64,
    tension: f64,
    psi_b0: f64,
    g_prime: impl Fn(f64) -> f64,
    h: impl Fn(f64) -> f64,
    t: f64,
    panels: usize,
) -> Result<f64> {
    let free = massless_spring_boundary_decay(a, k, tension, psi_b0, t)?;
    if t <= 0.0 {
        return Ok(free);
    }
    let beta = a * k / tension;
    let n = panels.max(2) & !1;
    let hstep = t / n as f64;
    let f = |s: f64| (-beta * (t - s)).exp() * (a * g_prime(a * s) + h(a * s));
    let mut acc = f(0.0) + f(t);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hstep);
    }
    Ok(free + acc * hstep / 3.0)
}
