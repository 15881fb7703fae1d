//! Linear response in the complex frequency plane.
//!
//! Transforms follow `u_hat(zeta) = int_0^inf u(t) e^{i zeta t} dt` with
//! `zeta = omega + i eta`, `eta > 0`. For a system `m v' = -i A v - alpha * v + f`
//! the impedance is `Z(zeta) = -i [zeta m - A + i alpha_hat(zeta)]` and the
//! admittance `i [zeta m - A + i alpha_hat(zeta)]^{-1}`. With `s = -i zeta` a
//! scalar oscillator reads `Z(s) = m s + c + k / s`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{convolve_direct, MemoryKernel};
use crate::model::{
    build_system, validate_scenario, CoupledSystem, End, ForceShape, ForceSpec, Interior, Profile, Scenario,
    ValidatedScenario, VelocityInit,
};
use crate::solver1d::{self, reduced::integrate_forced};

/// Largest admissible truncation factor `exp(-eta_min T)`.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Sample points `zeta` in the open upper half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrequencyGrid {
    points: Vec<Complex64>,
}

impl ComplexFrequencyGrid {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        let bad: Vec<String> = points
            .iter()
            .filter(|z| !(z.im > 0.0 && z.re.is_finite() && z.im.is_finite()))
            .map(|z| format!("zeta = {z} is not in the open upper half-plane"))
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidSpec(bad));
        }
        if points.is_empty() {
            return Err(Error::invalid("frequency grid is empty"));
        }
        Ok(Self { points })
    }

    /// Tensor grid of `n_omega` real parts by `n_eta` imaginary parts, endpoints included.
    pub fn rectangle(omega: (f64, f64), eta: (f64, f64), n_omega: usize, n_eta: usize) -> Result<Self> {
        let lin = |(a, b): (f64, f64), n: usize| -> Vec<f64> {
            if n <= 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        };
        let mut pts = Vec::with_capacity(n_omega * n_eta);
        for e in lin(eta, n_eta) {
            for w in lin(omega, n_omega) {
                pts.push(Complex64::new(w, e));
            }
        }
        Self::new(pts)
    }

    /// `eta` in `[0.2, 1]`, `omega` in `[-5, 5]`.
    pub fn standard() -> Self {
        Self::rectangle((-5.0, 5.0), (0.2, 1.0), 21, 5).expect("standard grid")
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eta_min(&self) -> f64 {
        self.points.iter().map(|z| z.im).fold(f64::INFINITY, f64::min)
    }

    /// Shortest record length whose truncation factor is below [`TAIL_TOLERANCE`].
    pub fn required_duration(&self) -> f64 {
        -TAIL_TOLERANCE.ln() / self.eta_min()
    }
}

/// Transform values with a bound on the neglected tail `int_T^inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub values: Vec<Complex64>,
    pub tail_bound: Vec<f64>,
}

/// Trapezoid quadrature of `int_0^T u(t) e^{i zeta t} dt` for samples `u(n dt)`.
///
/// The tail bound assumes `|u| <= max |u|` over the last tenth of the record
/// stays valid beyond `T`. Fails when `exp(-eta_min T)` exceeds [`TAIL_TOLERANCE`].
pub fn laplace_transform(signal: &[f64], dt: f64, grid: &ComplexFrequencyGrid) -> Result<Transformed> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive (got {dt})")));
    }
    if signal.iter().any(|u| !u.is_finite()) {
        return Err(Error::invalid("signal samples must be finite"));
    }
    let n = signal.len();
    let t_end = n.saturating_sub(1) as f64 * dt;
    let factor = (-grid.eta_min() * t_end).exp();
    if factor > TAIL_TOLERANCE {
        return Err(Error::TailNotConverged { bound: factor, tolerance: TAIL_TOLERANCE });
    }
    let tail_start = n - (n / 10).max(1);
    let tail_max = signal[tail_start..].iter().fold(0.0_f64, |m, u| m.max(u.abs()));
    let (values, tail_bound) = grid
        .points()
        .par_iter()
        .map(|&zeta| {
            let step = (Complex64::i() * zeta * dt).exp();
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, u) in signal.iter().enumerate() {
                let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
                acc += w * u * phase;
                phase *= step;
            }
            (acc * dt, tail_max * (-zeta.im * t_end).exp() / zeta.im)
        })
        .unzip();
    Ok(Transformed { values, tail_bound })
}

fn s_of(zeta: Complex64) -> Complex64 {
    -Complex64::i() * zeta
}

/// `Z(s) = k/s + 2a + s` of a unit-mass damped oscillator.
pub fn impedance_damped_oscillator(k: f64, a_damp: f64, s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAtZero);
    }
    Ok(k / s + 2.0 * a_damp + s)
}

/// `Z(s) = m s + c + k/s` with `s = -i zeta`: a mass on a support spring radiating into a string of impedance `c`.
pub fn lamb_impedance(m: f64, c: f64, k: f64, zeta: Complex64) -> Complex64 {
    let s = s_of(zeta);
    m * s + c + k / s
}

/// `Z(zeta) = -i [zeta diag(m) - A + i alpha_hat]`.
pub fn impedance_operator(
    mass: &[f64],
    a: &DMatrix<Complex64>,
    alpha_hat: &DMatrix<Complex64>,
    zeta: Complex64,
) -> DMatrix<Complex64> {
    let i = Complex64::i();
    let n = mass.len();
    let mut z = DMatrix::from_fn(n, n, |r, c| -a[(r, c)] + i * alpha_hat[(r, c)]);
    for (r, m) in mass.iter().enumerate() {
        z[(r, r)] += zeta * m;
    }
    z * (-i)
}

/// `i [zeta diag(m) - A + i alpha_hat]^{-1}`, or `None` where the bracket is singular.
pub fn admittance_operator(
    mass: &[f64],
    a: &DMatrix<Complex64>,
    alpha_hat: &DMatrix<Complex64>,
    zeta: Complex64,
) -> Option<DMatrix<Complex64>> {
    let z = impedance_operator(mass, a, alpha_hat, zeta);
    z.try_inverse()
}

/// First-order form of the retarded oscillator `psi'' + k psi + kappa * psi' = g`
/// with `kappa(t) = k_tilde exp(-(a k_tilde/T) t)`; variables `(sqrt(k) psi, psi')`.
pub fn impedance_operator_retarded(k: f64, k_tilde: f64, a: f64, tension: f64, zeta: Complex64) -> DMatrix<Complex64> {
    let i = Complex64::i();
    let rk = k.sqrt();
    let a_mat = DMatrix::from_row_slice(2, 2, &[0.0.into(), i * rk, -i * rk, 0.0.into()]);
    let mut alpha = DMatrix::zeros(2, 2);
    if k_tilde != 0.0 {
        let lambda = a * k_tilde / tension;
        alpha[(1, 1)] = k_tilde / (lambda - i * zeta);
    }
    impedance_operator(&[1.0, 1.0], &a_mat, &alpha, zeta)
}

/// Impedance seen at component `keep` when every other component is force free (Schur complement).
pub fn reduce_to_component(z: &DMatrix<Complex64>, keep: usize) -> Option<Complex64> {
    let n = z.nrows();
    let others: Vec<usize> = (0..n).filter(|&r| r != keep).collect();
    if others.is_empty() {
        return Some(z[(keep, keep)]);
    }
    let m = others.len();
    let z_oo = DMatrix::from_fn(m, m, |r, c| z[(others[r], others[c])]);
    let z_ko = DMatrix::from_fn(1, m, |_, c| z[(keep, others[c])]);
    let z_ok = DMatrix::from_fn(m, 1, |r, _| z[(others[r], keep)]);
    let inv = z_oo.try_inverse()?;
    Some(z[(keep, keep)] - (z_ko * inv * z_ok)[(0, 0)])
}

/// Scalar impedance `psi'' + k psi + kappa * psi' = g` at velocity: `s + k/s + kappa_hat`.
pub fn retarded_scalar_impedance(k: f64, k_tilde: f64, a: f64, tension: f64, zeta: Complex64) -> Option<Complex64> {
    reduce_to_component(&impedance_operator_retarded(k, k_tilde, a, tension, zeta), 1)
}

/// Smooth force pulse used to excite a system at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseProbe {
    /// Node whose velocity is recorded and which receives the force.
    pub end: End,
    pub amplitude: f64,
    pub onset: f64,
    pub duration: f64,
}

impl Default for ImpulseProbe {
    fn default() -> Self {
        Self { end: End::B1, amplitude: 1.0, onset: 0.5, duration: 0.2 }
    }
}

/// Measured admittance `v_hat / f_hat` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceSamples {
    pub zeta: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub err_bound: Vec<f64>,
    pub velocity_hat: Vec<Complex64>,
    pub force_hat: Vec<Complex64>,
    /// Largest `|v|` recorded before the force switches on.
    pub pre_onset_response: f64,
}

/// Recorded force and velocity at whole steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseRecord {
    pub dt: f64,
    pub force: Vec<f64>,
    pub velocity: Vec<f64>,
}

fn at_rest(s: &Scenario) -> bool {
    s.initial.displacement == Profile::Zero
        && s.initial.velocity == VelocityInit::Profile(Profile::Zero)
        && s.initial.boundary.iter().all(|b| {
            b.psi.as_ref().is_none_or(|x| x.iter().all(|v| *v == 0.0))
                && b.velocity.as_ref().is_none_or(|x| x.iter().all(|v| *v == 0.0))
        })
}

/// Drives the node at `probe.end` with a pulse and records its velocity for `duration`.
pub fn record_impulse_response(scenario: &Scenario, probe: &ImpulseProbe, duration: f64) -> Result<ImpulseRecord> {
    if !at_rest(scenario) {
        return Err(Error::invalid("admittance measurement needs a system at rest"));
    }
    let mut s = scenario.clone();
    s.t_end = duration;
    let shape = ForceShape::Pulse { t_on: probe.onset, duration: probe.duration };
    let idx = probe.end.index();
    match &s.interior {
        Interior::Disk(_) => return Err(Error::invalid("admittance measurement supports line and lumped systems")),
        Interior::Lumped if probe.end != End::B1 => {
            return Err(Error::invalid("a lumped system has a single node at b1"))
        }
        _ => {}
    }
    let node = s.ends[idx]
        .boundary
        .as_mut()
        .ok_or_else(|| Error::invalid(format!("no boundary node at {}", probe.end.label())))?;
    if node.mass.len() != 1 {
        return Err(Error::invalid("admittance measurement needs a scalar boundary node"));
    }
    node.external_force = Some(ForceSpec::scalar(probe.amplitude, shape));
    let v = validate_scenario(s)?;
    record(&v, probe.end)
}

fn record(v: &ValidatedScenario, end: End) -> Result<ImpulseRecord> {
    match build_system(v)? {
        CoupledSystem::Lumped(red) => {
            let traj =
                integrate_forced(red.mass, red.hooke, &red.kernel, red.init, red.force.as_ref(), red.t_end, red.dt)?;
            Ok(ImpulseRecord { dt: red.dt, force: traj.force, velocity: traj.velocity })
        }
        CoupledSystem::Line(sys) => {
            let mut st = sys.initial_state()?;
            let n = v.n_steps();
            let mut rec = ImpulseRecord {
                dt: sys.dt(),
                force: Vec::with_capacity(n + 1),
                velocity: Vec::with_capacity(n + 1),
            };
            loop {
                rec.force.push(sys.external_boundary_force(end, st.time())[0]);
                rec.velocity.push(st.psi_b_dot(&sys, end)[0]);
                if st.step_index() >= n {
                    break;
                }
                solver1d::step_coupled(&sys, &mut st)?;
            }
            Ok(rec)
        }
        CoupledSystem::Disk(_) => Err(Error::invalid("admittance measurement supports line and lumped systems")),
    }
}

/// Impulse response measurement of the admittance at `probe.end`.
///
/// The force and velocity records are transformed with the same quadrature
/// and divided, so the pulse shape drops out for a linear system.
pub fn measure_admittance(
    scenario: &Scenario,
    probe: &ImpulseProbe,
    grid: &ComplexFrequencyGrid,
) -> Result<AdmittanceSamples> {
    let duration = probe.onset + probe.duration + grid.required_duration() * 1.05;
    let rec = record_impulse_response(scenario, probe, duration)?;
    admittance_from_record(&rec, probe.onset, grid)
}

pub fn admittance_from_record(rec: &ImpulseRecord, onset: f64, grid: &ComplexFrequencyGrid) -> Result<AdmittanceSamples> {
    let vh = laplace_transform(&rec.velocity, rec.dt, grid)?;
    let fh = laplace_transform(&rec.force, rec.dt, grid)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let y = vh.values[k] / fh.values[k];
        values.push(y);
        err.push(y.norm() * (vh.tail_bound[k] / vh.values[k].norm() + fh.tail_bound[k] / fh.values[k].norm()));
    }
    let pre = rec
        .velocity
        .iter()
        .enumerate()
        .take_while(|(j, _)| (*j as f64) * rec.dt < onset)
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
    Ok(AdmittanceSamples {
        zeta: grid.points().to_vec(),
        values,
        err_bound: err,
        velocity_hat: vh.values,
        force_hat: fh.values,
        pre_onset_response: pre,
    })
}

/// One row of an admittance or impedance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRow {
    pub re_zeta: f64,
    pub im_zeta: f64,
    pub re_val: f64,
    pub im_val: f64,
    pub err_bound: f64,
}

impl AdmittanceSamples {
    pub fn rows(&self) -> Vec<ResponseRow> {
        self.zeta
            .iter()
            .zip(&self.values)
            .zip(&self.err_bound)
            .map(|((z, y), e)| ResponseRow { re_zeta: z.re, im_zeta: z.im, re_val: y.re, im_val: y.im, err_bound: *e })
            .collect()
    }

    /// Largest `|Y Z - 1|` against an analytic impedance.
    pub fn reciprocity_defect(&self, impedance: impl Fn(Complex64) -> Complex64) -> f64 {
        self.zeta
            .iter()
            .zip(&self.values)
            .map(|(z, y)| (y * impedance(*z) - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

pub fn write_response_csv(rows: &[ResponseRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "re_zeta,im_zeta,re_val,im_val,err_bound")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.re_zeta, r.im_zeta, r.re_val, r.im_val, r.err_bound
        )?;
    }
    Ok(())
}

/// Outcome of the passivity check of a friction kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityVerdict {
    pub passed: bool,
    /// Smallest `Re kappa_hat(zeta)` on the test grid and where it occurs.
    pub min_re_transform: f64,
    pub witness_zeta: [f64; 2],
    /// Smallest normalized work `sum v (kappa * v) dt / sum v^2 dt` over the random signals.
    pub min_work: f64,
    pub witness_signal: usize,
}

const SIGNALS: usize = 24;
const SIGNAL_LEN: usize = 400;

/// Checks that the friction never produces energy: `Re kappa_hat >= 0` on a
/// dense upper half-plane grid and nonnegative discrete work on seeded random
/// velocity histories starting from rest.
pub fn check_positive_definite_ae(kernel: &MemoryKernel) -> PositivityVerdict {
    check_positive_definite_ae_seeded(kernel, 0x5eed)
}

pub fn check_positive_definite_ae_seeded(kernel: &MemoryKernel, seed: u64) -> PositivityVerdict {
    let mut min_re = f64::INFINITY;
    let mut witness = [0.0, 0.0];
    let scale = kernel.instantaneous.abs() + kernel.terms.iter().map(|t| t.c.abs() / t.lambda).sum::<f64>();
    let etas: Vec<f64> = (0..31).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 30.0)).collect();
    let omegas: Vec<f64> = (0..=400).map(|i| 1e3 * (6.0 * (i as f64 / 200.0 - 1.0)).sinh() / 6.0f64.sinh()).collect();
    let rates = kernel.terms.iter().map(|t| t.omega.abs()).chain(std::iter::once(0.0));
    let omegas: Vec<f64> = omegas.into_iter().chain(rates.flat_map(|w| [w, -w])).collect();
    for &eta in &etas {
        for &w in &omegas {
            let re = kernel.transform(Complex64::new(w, eta)).re;
            if re < min_re {
                min_re = re;
                witness = [w, eta];
            }
        }
    }
    let shortest = kernel.terms.iter().map(|t| 1.0 / t.lambda.max(t.omega.abs())).fold(1.0, f64::min);
    let dt = shortest / 20.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_work = f64::INFINITY;
    let mut worst = 0;
    for sig in 0..SIGNALS {
        let mut v = vec![0.0; SIGNAL_LEN];
        let smooth = sig % 3;
        for j in 1..SIGNAL_LEN {
            let noise: f64 = rng.gen_range(-1.0..1.0);
            v[j] = match smooth {
                0 => noise,
                1 => 0.8 * v[j - 1] + noise,
                _ => -0.8 * v[j - 1] + noise,
            };
        }
        let f = convolve_direct(kernel, &v, dt).expect("finite signal");
        let work: f64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
        let norm: f64 = v.iter().map(|a| a * a).sum();
        let w = work / norm;
        if w < min_work {
            min_work = w;
            worst = sig;
        }
    }
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    PositivityVerdict {
        passed: min_re >= -tol && min_work >= -tol,
        min_re_transform: min_re,
        witness_zeta: witness,
        min_work,
        witness_signal: worst,
    }
}
