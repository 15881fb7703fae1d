//! Circular membrane with a ring boundary.
//!
//! Finite-volume polar grid with cell centers at `r_i = (i + 1/2) dr`, so no
//! unknown sits at the origin. Cells are lumped masses `sigma r_i dr dtheta`
//! joined by springs whose energy is the discrete `T |grad psi|^2 / 2`. The
//! last cell reaches the boundary face `psi_L` through a half-cell spring.
//!
//! Every ring node stands for an arc of length `R dtheta` with mass
//! `lambda R dtheta`, support `k R dtheta` and interaction `k~ R dtheta`.
//! Massless nodes (`psi_L`, and `psi_B` when `lambda = 0`) are eliminated by
//! static condensation at every level, so the remaining unknowns are advanced
//! by plain leapfrog.

pub mod bessel;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::{DiskSpec, ForceSpec, InitialData, Interior, InteractionSpec, ValidatedScenario, VelocityInit, CFL_MAX};
use crate::solver1d::OVERFLOW_GUARD;

pub use bessel::robin_eigenvalue_oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    None,
    Spring,
    Rigid,
}

#[derive(Debug, Clone)]
pub struct MembraneSystem {
    spec: DiskSpec,
    nr: usize,
    nt: usize,
    dr: f64,
    dth: f64,
    r: Vec<f64>,
    cell_mass: Vec<f64>,
    /// Radial spring between cells `i` and `i + 1`.
    c_r: Vec<f64>,
    /// Angular spring between neighbours in ring `i`.
    c_th: Vec<f64>,
    /// Half-cell spring from the last cell to the boundary face.
    c_b: f64,
    arc: f64,
    ring_mass: f64,
    ring_k: f64,
    ring_kt: f64,
    kind: RingKind,
    dt: f64,
    initial: InitialData,
}

/// Three-level membrane state; cells are stored ring by ring (`i * n_theta + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct MembraneState {
    cells: [Vec<f64>; 3],
    /// Massive ring nodes (empty when the ring is massless).
    ring: [Vec<f64>; 3],
    step: usize,
    dt: f64,
}

const PREV: usize = 0;
const CUR: usize = 1;
const NEXT: usize = 2;

/// Flux and interaction force per unit length at each ring node.
#[derive(Debug, Clone, PartialEq)]
pub struct RingInterface {
    /// `T d_n psi` at the boundary face.
    pub normal_flux: Vec<f64>,
    /// `k~ (psi_B - psi_L)`.
    pub interaction: Vec<f64>,
    /// `-T d_n psi + k~ (psi_B - psi_L)`.
    pub residual: Vec<f64>,
}

struct Springs {
    c_r: Vec<f64>,
    c_th: Vec<f64>,
    c_b: f64,
    cell_mass: Vec<f64>,
    arc: f64,
}

fn springs(d: &DiskSpec) -> Springs {
    let nr = d.n_r;
    let dr = d.radius / nr as f64;
    let dth = 2.0 * PI / d.n_theta as f64;
    let r: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) * dr).collect();
    Springs {
        c_r: (0..nr.saturating_sub(1)).map(|i| d.tension * (i as f64 + 1.0) * dr * dth / dr).collect(),
        c_th: r.iter().map(|ri| d.tension * dr / (ri * dth)).collect(),
        c_b: d.tension * d.radius * dth / (0.5 * dr),
        cell_mass: r.iter().map(|ri| d.sigma * ri * dr * dth).collect(),
        arc: d.radius * dth,
    }
}

/// Largest stable leapfrog step from a Gershgorin bound on the stiffness-to-mass ratio.
pub fn stable_dt(d: &DiskSpec) -> f64 {
    let s = springs(d);
    let nr = d.n_r;
    let mut w2: f64 = 0.0;
    for i in 0..nr {
        let mut sum = 2.0 * s.c_th[i];
        if i > 0 {
            sum += s.c_r[i - 1];
        }
        if i + 1 < nr {
            sum += s.c_r[i];
        }
        if i + 1 == nr {
            sum += s.c_b;
        }
        w2 = w2.max(2.0 * sum / s.cell_mass[i]);
    }
    if d.ring_lambda > 0.0 {
        let kt = match d.interaction {
            InteractionSpec::Spring(ref m) if m.nrows() == 1 => m[(0, 0)].max(0.0),
            _ => 0.0,
        };
        let ring_sum = s.c_b + (d.ring_k + kt) * s.arc;
        w2 = w2.max(2.0 * ring_sum / (d.ring_lambda * s.arc));
    }
    CFL_MAX * 2.0 / w2.sqrt()
}

impl MembraneSystem {
    pub fn assemble(v: &ValidatedScenario) -> Result<Self> {
        let Interior::Disk(d) = &v.interior else {
            return Err(Error::invalid("membrane system requires a disk interior"));
        };
        let nr = d.n_r;
        let nt = d.n_theta;
        let dth = 2.0 * PI / nt as f64;
        // The ring weights come from the induced metric of its theta parametrization.
        let ring = geometry::sample_curve(nt, 2.0 * PI, |u| [d.radius * u.cos(), d.radius * u.sin()]);
        let metric = geometry::induced_metric(&ring, 2.0 * PI)?;
        let dev = metric.sqrt_g.iter().map(|s| (s - d.radius).abs()).fold(0.0, f64::max);
        if dev > 1e-9 * d.radius {
            return Err(Error::DegenerateCurve { min_metric: metric.g.iter().cloned().fold(f64::INFINITY, f64::min) });
        }
        let s = springs(d);
        let (kind, kt) = match &d.interaction {
            InteractionSpec::None => (RingKind::None, 0.0),
            InteractionSpec::Spring(m) => (RingKind::Spring, m[(0, 0)]),
            InteractionSpec::Rigid => (RingKind::Rigid, 0.0),
        };
        Ok(Self {
            spec: d.clone(),
            nr,
            nt,
            dr: d.radius / nr as f64,
            dth,
            r: (0..nr).map(|i| (i as f64 + 0.5) * d.radius / nr as f64).collect(),
            cell_mass: s.cell_mass,
            c_r: s.c_r,
            c_th: s.c_th,
            c_b: s.c_b,
            arc: s.arc,
            ring_mass: d.ring_lambda * s.arc,
            ring_k: d.ring_k * s.arc,
            ring_kt: kt * s.arc,
            kind,
            dt: v.dt,
            initial: v.initial.clone(),
        })
    }

    pub fn spec(&self) -> &DiskSpec {
        &self.spec
    }

    pub fn n_r(&self) -> usize {
        self.nr
    }

    pub fn n_theta(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dth
    }

    pub fn ring_kind(&self) -> RingKind {
        self.kind
    }

    pub fn ring_is_massive(&self) -> bool {
        self.ring_mass > 0.0
    }

    /// Arc length represented by one ring node.
    pub fn arc(&self) -> f64 {
        self.arc
    }

    fn ring_force_at(&self, t: f64) -> f64 {
        self.spec.ring_force.as_ref().map_or(0.0, |f: &ForceSpec| {
            let mut out = [0.0];
            f.value_into(t, &mut out);
            out[0]
        })
    }

    /// External force per unit length on the ring at time `t`.
    pub fn ring_force(&self, t: f64) -> f64 {
        self.ring_force_at(t)
    }

    fn angular(&self, j: usize) -> f64 {
        let m = self.initial.angular_mode;
        if m == 0 {
            1.0
        } else {
            (m as f64 * (self.theta(j) - self.initial.angular_phase)).cos()
        }
    }

    pub fn initial_state(&self) -> Result<MembraneState> {
        let (nr, nt) = (self.nr, self.nt);
        let rr = self.spec.radius;
        let init = &self.initial;
        let mut cells = vec![0.0; nr * nt];
        let mut vel = vec![0.0; nr * nt];
        for i in 0..nr {
            let p = init.displacement.eval(self.r[i], 0.0, rr);
            let q = match &init.velocity {
                VelocityInit::Profile(pv) => pv.eval(self.r[i], 0.0, rr),
                VelocityInit::Travelling { .. } => 0.0,
            };
            for j in 0..nt {
                cells[i * nt + j] = p * self.angular(j);
                vel[i * nt + j] = q * self.angular(j);
            }
        }
        let massive = self.ring_is_massive();
        let mut ring = Vec::new();
        let mut ring_vel = Vec::new();
        if massive {
            let bi = &init.boundary[0];
            let p_edge = init.displacement.eval(rr, 0.0, rr);
            let q_edge = match &init.velocity {
                VelocityInit::Profile(pv) => pv.eval(rr, 0.0, rr),
                VelocityInit::Travelling { .. } => 0.0,
            };
            for j in 0..nt {
                ring.push(bi.psi.as_ref().map_or(p_edge * self.angular(j), |x| x[0]));
                ring_vel.push(bi.velocity.as_ref().map_or(q_edge * self.angular(j), |x| x[0]));
            }
        }
        let mut state = MembraneState {
            cells: [Vec::new(), cells, vec![0.0; nr * nt]],
            ring: [Vec::new(), ring, vec![0.0; if massive { nt } else { 0 }]],
            step: 0,
            dt: self.dt,
        };
        let (acc, ring_acc) = self.accelerations(&state.cells[CUR], &state.ring[CUR], 0.0);
        let dt = self.dt;
        state.cells[PREV] = (0..nr * nt)
            .map(|i| state.cells[CUR][i] - dt * vel[i] + 0.5 * dt * dt * acc[i])
            .collect();
        state.ring[PREV] = (0..ring_acc.len())
            .map(|j| state.ring[CUR][j] - dt * ring_vel[j] + 0.5 * dt * dt * ring_acc[j])
            .collect();
        self.advance_next(&mut state)?;
        Ok(state)
    }

    /// Condensed face values `(psi_L, psi_B)` at every ring node.
    pub fn ring_nodes(&self, cells: &[f64], ring: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let nt = self.nt;
        let outer = &cells[(self.nr - 1) * nt..self.nr * nt];
        let f = self.ring_force_at(t) * self.arc;
        let (cb, kt, k) = (self.c_b, self.ring_kt, self.ring_k);
        let massive = self.ring_is_massive();
        let mut psi_l = vec![0.0; nt];
        let mut psi_b = vec![0.0; nt];
        for j in 0..nt {
            let c = outer[j];
            let (l, b) = match (self.kind, massive) {
                (RingKind::Rigid, true) => (ring[j], ring[j]),
                (RingKind::Rigid, false) => {
                    let x = (cb * c + f) / (cb + k);
                    (x, x)
                }
                (RingKind::Spring, true) => ((cb * c + kt * ring[j]) / (cb + kt), ring[j]),
                (RingKind::Spring, false) => {
                    let det = (cb + kt) * (kt + k) - kt * kt;
                    (((kt + k) * cb * c + kt * f) / det, (kt * cb * c + (cb + kt) * f) / det)
                }
                (RingKind::None, true) => (c, ring[j]),
                (RingKind::None, false) => (c, f / k),
            };
            psi_l[j] = l;
            psi_b[j] = b;
        }
        (psi_l, psi_b)
    }

    fn accelerations(&self, cells: &[f64], ring: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let (nr, nt) = (self.nr, self.nt);
        let mut acc = vec![0.0; nr * nt];
        let (psi_l, psi_b) = self.ring_nodes(cells, ring, t);
        for i in 0..nr {
            self.cell_row_accel(cells, &psi_l, i, &mut acc[i * nt..(i + 1) * nt]);
        }
        let ring_acc = if self.ring_is_massive() {
            self.ring_accel(cells, &psi_l, &psi_b, t)
        } else {
            Vec::new()
        };
        (acc, ring_acc)
    }

    #[inline]
    fn cell_row_accel(&self, cells: &[f64], psi_l: &[f64], i: usize, out: &mut [f64]) {
        let nt = self.nt;
        let row = &cells[i * nt..(i + 1) * nt];
        let cth = self.c_th[i];
        let inv_m = 1.0 / self.cell_mass[i];
        for j in 0..nt {
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            let x = row[j];
            let mut f = cth * (row[jp] - x) + cth * (row[jm] - x);
            if i > 0 {
                f += self.c_r[i - 1] * (cells[(i - 1) * nt + j] - x);
            }
            if i + 1 < self.nr {
                f += self.c_r[i] * (cells[(i + 1) * nt + j] - x);
            } else {
                f += self.c_b * (psi_l[j] - x);
            }
            out[j] = f * inv_m;
        }
    }

    fn ring_accel(&self, cells: &[f64], psi_l: &[f64], psi_b: &[f64], t: f64) -> Vec<f64> {
        let nt = self.nt;
        let outer = &cells[(self.nr - 1) * nt..self.nr * nt];
        let f = self.ring_force_at(t) * self.arc;
        (0..nt)
            .map(|j| {
                let b = psi_b[j];
                let coupling = match self.kind {
                    RingKind::Rigid => self.c_b * (outer[j] - b),
                    RingKind::Spring => self.ring_kt * (psi_l[j] - b),
                    RingKind::None => 0.0,
                };
                (coupling - self.ring_k * b + f) / self.ring_mass
            })
            .collect()
    }

    fn advance_next(&self, state: &mut MembraneState) -> Result<()> {
        step_membrane(self, state)?;
        step_ring(self, state)
    }

    pub fn interface(&self, state: &MembraneState) -> RingInterface {
        apply_ring_interaction(self, state)
    }

    /// Interior energy: lumped kinetic energy plus the stored spring energy up to the boundary face.
    pub fn interior_energy(&self, state: &MembraneState) -> f64 {
        let (nr, nt) = (self.nr, self.nt);
        let cur = &state.cells[CUR];
        let (psi_l, _) = self.ring_nodes(cur, &state.ring[CUR], state.time());
        let mut e = 0.0;
        for i in 0..nr {
            for j in 0..nt {
                let v = state.psi_dot(self, i, j);
                e += 0.5 * self.cell_mass[i] * v * v;
                let x = cur[i * nt + j];
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                e += 0.5 * self.c_th[i] * (cur[i * nt + jp] - x).powi(2);
                if i + 1 < nr {
                    e += 0.5 * self.c_r[i] * (cur[(i + 1) * nt + j] - x).powi(2);
                } else {
                    e += 0.5 * self.c_b * (psi_l[j] - x).powi(2);
                }
            }
        }
        e
    }

    /// Ring energy `sum (lambda v^2 + k psi_B^2 + k~ (psi_B - psi_L)^2) / 2` over the arc elements.
    pub fn ring_energy(&self, state: &MembraneState) -> f64 {
        let (psi_l, psi_b) = state.ring_faces(self);
        let vb = state.ring_velocity(self);
        (0..self.nt)
            .map(|j| {
                0.5 * self.ring_mass * vb[j] * vb[j]
                    + 0.5 * self.ring_k * psi_b[j] * psi_b[j]
                    + 0.5 * self.ring_kt * (psi_b[j] - psi_l[j]).powi(2)
            })
            .sum()
    }

    /// Power of the external ring force, `sum F arc psi_B'`.
    pub fn external_power(&self, state: &MembraneState) -> f64 {
        let f = self.ring_force_at(state.time()) * self.arc;
        state.ring_velocity(self).iter().map(|v| f * v).sum()
    }
}

impl MembraneState {
    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn psi(&self, sys: &MembraneSystem, i: usize, j: usize) -> f64 {
        self.cells[CUR][i * sys.nt + j]
    }

    pub fn psi_dot(&self, sys: &MembraneSystem, i: usize, j: usize) -> f64 {
        let idx = i * sys.nt + j;
        (self.cells[NEXT][idx] - self.cells[PREV][idx]) / (2.0 * self.dt)
    }

    /// Settled cell values, ring by ring.
    pub fn cells(&self) -> &[f64] {
        &self.cells[CUR]
    }

    /// `(psi_L, psi_B)` at the settled level.
    pub fn ring_faces(&self, sys: &MembraneSystem) -> (Vec<f64>, Vec<f64>) {
        sys.ring_nodes(&self.cells[CUR], &self.ring[CUR], self.time())
    }

    /// Centered ring velocity `psi_B'`.
    pub fn ring_velocity(&self, sys: &MembraneSystem) -> Vec<f64> {
        let t = self.time();
        let (_, bn) = sys.ring_nodes(&self.cells[NEXT], &self.ring[NEXT], t + self.dt);
        let (_, bp) = sys.ring_nodes(&self.cells[PREV], &self.ring[PREV], t - self.dt);
        bn.iter().zip(&bp).map(|(a, b)| (a - b) / (2.0 * self.dt)).collect()
    }

    /// Centered velocity of the boundary face `psi_L`.
    pub fn ring_trace_velocity(&self, sys: &MembraneSystem) -> Vec<f64> {
        let t = self.time();
        let (ln, _) = sys.ring_nodes(&self.cells[NEXT], &self.ring[NEXT], t + self.dt);
        let (lp, _) = sys.ring_nodes(&self.cells[PREV], &self.ring[PREV], t - self.dt);
        ln.iter().zip(&lp).map(|(a, b)| (a - b) / (2.0 * self.dt)).collect()
    }

    /// Theta average over the innermost `rings` radial cells.
    pub fn probe(&self, sys: &MembraneSystem, rings: usize) -> f64 {
        let n = rings.clamp(1, sys.nr) * sys.nt;
        self.cells[CUR][..n].iter().sum::<f64>() / n as f64
    }

    /// Same state rotated by `shift` theta cells.
    pub fn rotated(&self, sys: &MembraneSystem, shift: usize) -> Self {
        let nt = sys.nt;
        let rot = |v: &Vec<f64>| -> Vec<f64> {
            if v.is_empty() {
                return Vec::new();
            }
            let rows = v.len() / nt;
            let mut out = vec![0.0; v.len()];
            for i in 0..rows {
                for j in 0..nt {
                    out[i * nt + (j + shift) % nt] = v[i * nt + j];
                }
            }
            out
        };
        Self {
            cells: [rot(&self.cells[0]), rot(&self.cells[1]), rot(&self.cells[2])],
            ring: [rot(&self.ring[0]), rot(&self.ring[1]), rot(&self.ring[2])],
            step: self.step,
            dt: self.dt,
        }
    }
}

fn check(values: &[f64], time: f64, what: &str) -> Result<()> {
    if values.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_GUARD) {
        return Err(Error::NumericalBlowup { time, detail: what.into() });
    }
    Ok(())
}

/// Leapfrog update of every membrane cell into the lookahead level.
pub fn step_membrane(sys: &MembraneSystem, state: &mut MembraneState) -> Result<()> {
    let nt = sys.nt;
    let dt2 = sys.dt * sys.dt;
    let t = state.time();
    let (psi_l, _) = sys.ring_nodes(&state.cells[CUR], &state.ring[CUR], t);
    let mut acc = vec![0.0; nt];
    for i in 0..sys.nr {
        sys.cell_row_accel(&state.cells[CUR], &psi_l, i, &mut acc);
        for j in 0..nt {
            let idx = i * nt + j;
            state.cells[NEXT][idx] = 2.0 * state.cells[CUR][idx] - state.cells[PREV][idx] + dt2 * acc[j];
        }
    }
    check(&state.cells[NEXT], t + sys.dt, "membrane")
}

/// Leapfrog update of a heavy ring; massless rings are condensed and need no update.
pub fn step_ring(sys: &MembraneSystem, state: &mut MembraneState) -> Result<()> {
    if !sys.ring_is_massive() {
        return Ok(());
    }
    let t = state.time();
    let (psi_l, psi_b) = sys.ring_nodes(&state.cells[CUR], &state.ring[CUR], t);
    let acc = sys.ring_accel(&state.cells[CUR], &psi_l, &psi_b, t);
    let dt2 = sys.dt * sys.dt;
    for j in 0..sys.nt {
        state.ring[NEXT][j] = 2.0 * state.ring[CUR][j] - state.ring[PREV][j] + dt2 * acc[j];
    }
    check(&state.ring[NEXT], t + sys.dt, "ring")
}

/// Advances the settled level of the disk by one step.
pub fn step_disk(sys: &MembraneSystem, state: &mut MembraneState) -> Result<()> {
    state.cells.rotate_left(1);
    state.ring.rotate_left(1);
    state.step += 1;
    sys.advance_next(state)
}

/// Normal flux, interaction force and interface residual per unit length around the ring.
pub fn apply_ring_interaction(sys: &MembraneSystem, state: &MembraneState) -> RingInterface {
    let nt = sys.nt;
    let (psi_l, psi_b) = state.ring_faces(sys);
    let outer = &state.cells[CUR][(sys.nr - 1) * nt..sys.nr * nt];
    let tension = sys.spec.tension;
    let half = 0.5 * sys.dr;
    let kt = sys.ring_kt / sys.arc;
    let normal_flux: Vec<f64> = (0..nt).map(|j| tension * (psi_l[j] - outer[j]) / half).collect();
    let interaction: Vec<f64> = (0..nt)
        .map(|j| if sys.kind == RingKind::Spring { kt * (psi_b[j] - psi_l[j]) } else { 0.0 })
        .collect();
    let residual = match sys.kind {
        RingKind::Spring => (0..nt).map(|j| -normal_flux[j] + interaction[j]).collect(),
        _ => vec![0.0; nt],
    };
    RingInterface { normal_flux, interaction, residual }
}

/// Frequency (cycles per unit time) of the largest spectral peak of `signal`.
///
/// The mean is removed, a Hann window applied, the record zero padded 16-fold
/// and the peak refined by a parabola through the log magnitudes.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> f64 {
    let n = signal.len();
    if n < 4 {
        return 0.0;
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let n_pad = (n.next_power_of_two()) * 16;
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n_pad];
    for (i, s) in signal.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = Complex64::new((s - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n_pad).process(&mut buf);
    let mag: Vec<f64> = buf[..n_pad / 2].iter().map(|c| c.norm()).collect();
    let (peak, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let mut delta = 0.0;
    if peak + 1 < mag.len() {
        let (a, b, c) = (mag[peak - 1].max(1e-300).ln(), mag[peak].ln(), mag[peak + 1].max(1e-300).ln());
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            delta = 0.5 * (a - c) / denom;
        }
    }
    (peak as f64 + delta) / (n_pad as f64 * dt)
}

#[cfg(test)]
mod tests;
