//! Retarded-friction memory kernels.
//!
//! A kernel is a finite sum of damped (co)sinusoids plus an optional
//! instantaneous (Dirac) part,
//!
//! ```text
//! kappa(t) = alpha_inf * delta(t) + sum_i c_i exp(-lambda_i t) {cos|sin}(omega_i t)
//! ```
//!
//! and the friction it produces on a velocity history `v` is
//! `alpha_inf v(t) + int_0^t kappa(t - tau) v(tau) dtau`.
//!
//! Two engines evaluate that integral: [`KernelState`] realizes every term as a
//! complex auxiliary ODE `z' = (-lambda + i omega) z + v` and is O(1) per step;
//! [`convolve_direct`] is the O(N^2) composite-trapezoid reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which part of `exp((-lambda + i omega) t)` a term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    #[default]
    Cos,
    Sin,
}

/// One damped-oscillation term `c exp(-lambda t) {cos|sin}(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub c: f64,
    pub lambda: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phase: Phase,
}

impl KernelTerm {
    pub fn decaying(c: f64, lambda: f64) -> Self {
        Self { c, lambda, omega: 0.0, phase: Phase::Cos }
    }

    fn rate(&self) -> Complex64 {
        Complex64::new(-self.lambda, self.omega)
    }

    pub fn value(&self, t: f64) -> f64 {
        let envelope = self.c * (-self.lambda * t).exp();
        match self.phase {
            Phase::Cos => envelope * (self.omega * t).cos(),
            Phase::Sin => envelope * (self.omega * t).sin(),
        }
    }

    /// Laplace-Fourier transform `int_0^inf term(t) e^{i zeta t} dt`, valid for `Im zeta > -lambda`.
    pub fn transform(&self, zeta: Complex64) -> Complex64 {
        let i = Complex64::i();
        let plus = 1.0 / (self.lambda - i * (zeta + self.omega));
        let minus = 1.0 / (self.lambda - i * (zeta - self.omega));
        match self.phase {
            Phase::Cos => self.c * 0.5 * (plus + minus),
            Phase::Sin => self.c * (plus - minus) / (2.0 * i),
        }
    }
}

/// Friction kernel: damped-oscillation terms plus an instantaneous coefficient.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MemoryKernel {
    pub terms: Vec<KernelTerm>,
    pub instantaneous: f64,
}

impl MemoryKernel {
    pub fn new(terms: Vec<KernelTerm>, instantaneous: f64) -> Result<Self> {
        let kernel = Self { terms, instantaneous };
        let problems = kernel.violations();
        if problems.is_empty() {
            Ok(kernel)
        } else {
            Err(Error::InvalidSpec(problems))
        }
    }

    /// Pure instantaneous friction `alpha_inf v(t)`.
    pub fn instantaneous(alpha_inf: f64) -> Self {
        Self { terms: Vec::new(), instantaneous: alpha_inf }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.instantaneous == 0.0
    }

    /// Invariant violations, empty when the kernel is admissible.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, term) in self.terms.iter().enumerate() {
            if !(term.c.is_finite() && term.omega.is_finite()) {
                out.push(format!("kernel term {i}: non-finite coefficient"));
            }
            if !(term.lambda > 0.0 && term.lambda.is_finite()) {
                out.push(format!("kernel term {i}: decay rate must be positive (got {})", term.lambda));
            }
        }
        if !(self.instantaneous >= 0.0 && self.instantaneous.is_finite()) {
            out.push(format!(
                "kernel instantaneous coefficient must be nonnegative (got {})",
                self.instantaneous
            ));
        }
        out
    }

    /// Continuous part `kappa(t)` for `t >= 0` (the Dirac part is excluded).
    pub fn value(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.value(t)).sum()
    }

    /// Transform of the full kernel including the instantaneous part.
    pub fn transform(&self, zeta: Complex64) -> Complex64 {
        self.terms
            .iter()
            .fold(Complex64::new(self.instantaneous, 0.0), |acc, term| acc + term.transform(zeta))
    }

    /// Copy with every amplitude (and the instantaneous part) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| KernelTerm { c: t.c * factor, ..*t })
                .collect(),
            instantaneous: self.instantaneous * factor,
        }
    }
}

/// Kernel seen by a boundary mass attached through a spring `k_tilde` to a
/// semi-infinite string with wave speed `a` and tension `tension`:
/// `kappa(t) = k_tilde exp(-(a k_tilde / T) t)`.
pub fn kernel_from_string_coupling(a: f64, k_tilde: f64, tension: f64) -> Result<MemoryKernel> {
    let mut problems = Vec::new();
    if !(a > 0.0 && a.is_finite()) {
        problems.push(format!("wave speed must be positive (got {a})"));
    }
    if !(tension > 0.0 && tension.is_finite()) {
        problems.push(format!("tension must be positive (got {tension})"));
    }
    if !(k_tilde >= 0.0 && k_tilde.is_finite()) {
        problems.push(format!("interaction stiffness must be nonnegative (got {k_tilde})"));
    }
    if !problems.is_empty() {
        return Err(Error::InvalidSpec(problems));
    }
    if k_tilde == 0.0 {
        return Ok(MemoryKernel::default());
    }
    Ok(MemoryKernel {
        terms: vec![KernelTerm::decaying(k_tilde, a * k_tilde / tension)],
        instantaneous: 0.0,
    })
}

/// Brute-force friction signal for uniformly sampled velocities starting at `t = 0`.
///
/// Composite trapezoid on `int_0^{t_n} kappa(t_n - tau) v(tau) dtau` plus
/// `alpha_inf v(t_n)`. Quadratic cost; meant as a reference.
pub fn convolve_direct(kernel: &MemoryKernel, velocity: &[f64], dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive (got {dt})")));
    }
    if velocity.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("velocity samples must be finite"));
    }
    let n = velocity.len();
    let table: Vec<f64> = (0..n).map(|i| kernel.value(i as f64 * dt)).collect();
    let mut out = vec![0.0; n];
    for (step, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        if step > 0 {
            acc += 0.5 * (table[step] * velocity[0] + table[0] * velocity[step]);
            for j in 1..step {
                acc += table[step - j] * velocity[j];
            }
        }
        *slot = dt * acc + kernel.instantaneous * velocity[step];
    }
    Ok(out)
}

/// Auxiliary-variable state of the fast convolution engine.
///
/// Each kernel term carries `z_i = int_0^t exp((-lambda_i + i omega_i)(t - tau)) v(tau) dtau`,
/// stored as its (real, imaginary) pair. All zeros is the state of a system at rest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelState {
    pub aux: Vec<(f64, f64)>,
    pub last_input: f64,
}

impl KernelState {
    pub fn at_rest(kernel: &MemoryKernel) -> Self {
        Self { aux: vec![(0.0, 0.0); kernel.terms.len()], last_input: 0.0 }
    }

    /// History part of the friction, `sum_i c_i {Re|Im} z_i`.
    pub fn memory_force(&self, kernel: &MemoryKernel) -> f64 {
        kernel
            .terms
            .iter()
            .zip(&self.aux)
            .map(|(term, &(re, im))| match term.phase {
                Phase::Cos => term.c * re,
                Phase::Sin => term.c * im,
            })
            .sum()
    }

    /// Exact propagation of the auxiliary ODEs over `dt` with the velocity frozen at `velocity`.
    pub fn advance(&mut self, kernel: &MemoryKernel, velocity: f64, dt: f64) {
        if self.aux.len() != kernel.terms.len() {
            self.aux.resize(kernel.terms.len(), (0.0, 0.0));
        }
        for (term, slot) in kernel.terms.iter().zip(self.aux.iter_mut()) {
            let mu = term.rate();
            let prop = (mu * dt).exp();
            let gain = (prop - 1.0) / mu;
            let z = Complex64::new(slot.0, slot.1) * prop + gain * velocity;
            *slot = (z.re, z.im);
        }
        self.last_input = velocity;
    }
}

/// One step of the auxiliary engine.
///
/// `velocity` is the value held over the step; passing the midpoint velocity
/// makes the update second order. Returns the new state and the friction
/// `sum_i c_i q_i + alpha_inf v` at the end of the step.
pub fn advance_kernel_state(
    state: &KernelState,
    kernel: &MemoryKernel,
    velocity: f64,
    dt: f64,
) -> (KernelState, f64) {
    let mut next = state.clone();
    next.advance(kernel, velocity, dt);
    let force = next.memory_force(kernel) + kernel.instantaneous * velocity;
    (next, force)
}
