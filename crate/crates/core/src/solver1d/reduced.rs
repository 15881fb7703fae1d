//! Boundary-only model with retarded friction,
//! `m psi'' + k psi + alpha_inf psi' + int_0^t kappa(t - tau) psi'(tau) dtau = F(t)`.

use crate::error::{Error, Result};
use crate::kernels::{KernelState, MemoryKernel};
use crate::model::{End, ForceSpec, Interior, ValidatedScenario};

use super::OVERFLOW_GUARD;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedInit {
    pub psi: f64,
    pub velocity: f64,
}

/// Samples at whole steps `t_n = n dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
    /// Average of the two adjacent half-step velocities.
    pub velocity: Vec<f64>,
    /// Total friction `alpha_inf v + sum_i c_i q_i` at each sample.
    pub friction: Vec<f64>,
    /// External force at each sample.
    pub force: Vec<f64>,
}

impl ReducedTrajectory {
    /// `1/2 m v^2 + 1/2 k psi^2` at each sample.
    pub fn energy(&self, m: f64, k: f64) -> Vec<f64> {
        self.psi
            .iter()
            .zip(&self.velocity)
            .map(|(x, v)| 0.5 * m * v * v + 0.5 * k * x * x)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub mass: f64,
    pub hooke: f64,
    pub kernel: MemoryKernel,
    pub force: Option<ForceSpec>,
    pub init: ReducedInit,
    pub dt: f64,
    pub t_end: f64,
}

impl ReducedSystem {
    pub fn from_scenario(v: &ValidatedScenario) -> Result<Self> {
        if v.interior != Interior::Lumped {
            return Err(Error::invalid("reduced system requires a lumped scenario"));
        }
        let node = v.end(End::B1).boundary.as_ref().ok_or_else(|| Error::invalid("missing b1 node"))?;
        let bi = &v.initial.boundary[0];
        Ok(Self {
            mass: node.mass[0],
            hooke: node.hooke[(0, 0)],
            kernel: node.kernel.clone(),
            force: node.external_force.clone(),
            init: ReducedInit {
                psi: bi.psi.as_ref().map_or(0.0, |x| x[0]),
                velocity: bi.velocity.as_ref().map_or(0.0, |x| x[0]),
            },
            dt: v.dt,
            t_end: v.t_end,
        })
    }

    pub fn integrate(&self) -> Result<ReducedTrajectory> {
        integrate_forced(self.mass, self.hooke, &self.kernel, self.init, self.force.as_ref(), self.t_end, self.dt)
    }
}

/// Integrates the unforced reduced model with the auxiliary-variable kernel engine.
pub fn integrate_reduced_boundary(
    m: f64,
    k: f64,
    kernel: &MemoryKernel,
    init: ReducedInit,
    t_end: f64,
    dt: f64,
) -> Result<ReducedTrajectory> {
    integrate_forced(m, k, kernel, init, None, t_end, dt)
}

/// Staggered leapfrog: `v` lives at half steps, the memory state is advanced
/// with `v^{n+1/2}`, and instantaneous friction uses the average of the two
/// half-step velocities (implicit).
pub fn integrate_forced(
    m: f64,
    k: f64,
    kernel: &MemoryKernel,
    init: ReducedInit,
    force: Option<&ForceSpec>,
    t_end: f64,
    dt: f64,
) -> Result<ReducedTrajectory> {
    let mut problems = kernel.violations();
    if !(m > 0.0 && m.is_finite()) {
        problems.push(format!("reduced model mass must be positive (got {m})"));
    }
    if !(k >= 0.0 && k.is_finite()) {
        problems.push(format!("reduced model stiffness must be nonnegative (got {k})"));
    }
    if !(dt > 0.0 && t_end >= 0.0 && dt.is_finite() && t_end.is_finite()) {
        problems.push("reduced model needs dt > 0 and t_end >= 0".into());
    }
    if !(init.psi.is_finite() && init.velocity.is_finite()) {
        problems.push("reduced model initial data must be finite".into());
    }
    if !problems.is_empty() {
        return Err(Error::InvalidSpec(problems));
    }
    let f_at = |t: f64| {
        force.map_or(0.0, |f| {
            let mut out = [0.0];
            f.value_into(t, &mut out);
            out[0]
        })
    };
    let n = (t_end / dt).round() as usize;
    let alpha = kernel.instantaneous;
    let mut aux = KernelState::at_rest(kernel);
    let mut traj = ReducedTrajectory {
        dt,
        t: Vec::with_capacity(n + 1),
        psi: Vec::with_capacity(n + 1),
        velocity: Vec::with_capacity(n + 1),
        friction: Vec::with_capacity(n + 1),
        force: Vec::with_capacity(n + 1),
    };
    let mut psi = init.psi;
    let f0 = f_at(0.0);
    let mut v_half = init.velocity + 0.5 * dt * (f0 - k * psi - alpha * init.velocity) / m;
    traj.t.push(0.0);
    traj.psi.push(psi);
    traj.velocity.push(init.velocity);
    traj.friction.push(alpha * init.velocity);
    traj.force.push(f0);
    for step in 1..=n {
        let t = step as f64 * dt;
        psi += dt * v_half;
        aux.advance(kernel, v_half, dt);
        let mem = aux.memory_force(kernel);
        let f = f_at(t);
        // m (v+ - v-) / dt = f - k psi - mem - alpha (v+ + v-) / 2
        let v_next = (m * v_half + dt * (f - k * psi - mem) - 0.5 * dt * alpha * v_half) / (m + 0.5 * dt * alpha);
        let v_whole = 0.5 * (v_half + v_next);
        if !(psi.is_finite() && v_next.is_finite()) || psi.abs() > OVERFLOW_GUARD || v_next.abs() > OVERFLOW_GUARD {
            return Err(Error::NumericalBlowup { time: t, detail: "reduced boundary".into() });
        }
        traj.t.push(t);
        traj.psi.push(psi);
        traj.velocity.push(v_whole);
        traj.friction.push(mem + alpha * v_whole);
        traj.force.push(f);
        v_half = v_next;
    }
    Ok(traj)
}
