//! Coupled interior/boundary integration in one space dimension.
//!
//! The interior `M psi_tt = K psi_zz + F_D` is advanced by leapfrog on a
//! lumped-mass grid. Each end node carries half a cell of inertia and is
//! solved together with its boundary node as a small implicit system:
//!
//! ```text
//! Mass (u+ - 2u + u-)/dt^2 + D (u+ - u-)/(2 dt) + S (u+ + 2u + u-)/4 = R(u)
//! ```
//!
//! where `u = (psi_e, psi_B)`, `S` collects the support spring `k` and the
//! interaction spring `k~`, `D` holds instantaneous friction or the outflow
//! impedance, and `R` carries the flux from the neighbouring node, external
//! forces and the memory part of the friction. Massless boundary components
//! swap their row for the algebraic relation `(k + k~) psi_B - k~ psi_e = F_B`.
//! A rigid interaction merges `psi_B` into the end node.
//!
//! The state keeps three time levels so that the public (settled) level has
//! an exact centered velocity.

pub mod analytic;
pub mod mtl;
pub mod reduced;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{KernelState, MemoryKernel};
use crate::model::{
    BoundaryNodeSpec, BoundaryState, End, FieldState1D, ForceSpec, InitialData, Interior,
    InteriorSpec1D, InteractionSpec, ValidatedScenario, VelocityInit,
};

pub use analytic::{lamb_analytic, massless_spring_boundary_decay, massless_spring_boundary_forced};
pub use mtl::{build_mtl, telegrapher_residual, MtlLine};
pub use reduced::{integrate_reduced_boundary, ReducedInit, ReducedSystem, ReducedTrajectory};

/// Any state entry above this magnitude aborts the run.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndKind {
    /// Fixed end, `psi = 0`.
    Clamped,
    /// Truncation of a semi-infinite interior with the characteristic impedance.
    Outflow,
    /// Free end node with a decoupled boundary node.
    Free,
    Spring,
    /// Boundary node merged into the end node.
    Rigid,
}

/// Assembled implicit system of one end.
#[derive(Debug, Clone)]
struct EndModel {
    kind: EndKind,
    node: usize,
    neighbor: usize,
    /// Whether `psi_B` is a separate unknown (spring and free ends).
    separate: bool,
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    springs: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    /// Indices into `u` of massless rows.
    massless: Vec<usize>,
    /// `(k + k~)` on `psi_B` and `-k~` on `psi_e`, for the massless rows.
    constraint: DMatrix<f64>,
    node_spec: Option<BoundaryNodeSpec>,
    k_tilde: Option<DMatrix<f64>>,
}

impl EndModel {
    fn n_u(&self, k: usize) -> usize {
        if self.separate {
            2 * k
        } else {
            k
        }
    }

    fn kernel(&self) -> Option<&MemoryKernel> {
        self.node_spec.as_ref().map(|n| &n.kernel).filter(|k| !k.terms.is_empty())
    }
}

/// Discretized 1D coupled system with a fixed time step.
#[derive(Debug, Clone)]
pub struct CoupledSystem1D {
    k: usize,
    n_cells: usize,
    b1: f64,
    dz: f64,
    dt: f64,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    /// Row-major `M^{-1} K`.
    accel_op: Vec<f64>,
    m_inv: DMatrix<f64>,
    interior_force: Option<ForceSpec>,
    ends: [EndModel; 2],
    initial: InitialData,
    speed_matrix: DMatrix<f64>,
    b2: f64,
}

/// Three-level state of a [`CoupledSystem1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState1D {
    /// Field levels n-1, n, n+1 (node-major).
    levels: [Vec<f64>; 3],
    /// Separate boundary unknowns per end and level.
    psi_b: [[Vec<f64>; 3]; 2],
    /// Kernel auxiliary state at level n, one per component.
    kernels: [Vec<KernelState>; 2],
    step: usize,
    t0: f64,
    dt: f64,
}

const PREV: usize = 0;
const CUR: usize = 1;
const NEXT: usize = 2;

/// Interface quantities at one end.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceForce {
    /// `K psi_z` from the second-order one-sided stencil.
    pub flux: Vec<f64>,
    /// `k~ (psi_B - psi_L)`, the force the interaction exerts on the interior.
    pub interaction: Vec<f64>,
    /// Continuum balance `-n K psi_z + k~ (psi_B - psi_L)` with `n` the outward normal sign.
    pub iel_residual: Vec<f64>,
    /// Residual of the discrete end equation actually solved.
    pub discrete_residual: Vec<f64>,
}

impl CoupledSystem1D {
    pub fn assemble(v: &ValidatedScenario) -> Result<Self> {
        let Interior::Line(spec) = &v.interior else {
            return Err(Error::invalid("line system requires a line interior"));
        };
        let modes = v.modes.as_ref().ok_or_else(|| Error::invalid("missing wave modes"))?;
        let k = spec.components();
        let dz = spec.dz();
        let m_inv = spec
            .mass_matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("interior mass matrix is singular"))?;
        let p = &m_inv * &spec.stiffness_matrix;
        let accel_op = (0..k * k).map(|idx| p[(idx / k, idx % k)]).collect();
        let ends = [
            Self::end_model(v, spec, End::B1, &modes.impedance)?,
            Self::end_model(v, spec, End::B2, &modes.impedance)?,
        ];
        Ok(Self {
            k,
            n_cells: spec.n_cells,
            b1: spec.b1,
            b2: spec.b2,
            dz,
            dt: v.dt,
            mass: spec.mass_matrix.clone(),
            stiffness: spec.stiffness_matrix.clone(),
            accel_op,
            m_inv,
            interior_force: spec.force.clone(),
            ends,
            initial: v.initial.clone(),
            speed_matrix: modes.speed_matrix.clone(),
        })
    }

    fn end_model(
        v: &ValidatedScenario,
        spec: &InteriorSpec1D,
        end: End,
        impedance: &DMatrix<f64>,
    ) -> Result<EndModel> {
        let k = spec.components();
        let (node, neighbor) = match end {
            End::B1 => (0, 1),
            End::B2 => (spec.n_cells, spec.n_cells - 1),
        };
        let es = v.end(end);
        let half = &spec.mass_matrix * (spec.dz() / 2.0);
        let kind = if spec.semi_infinite[end.index()] {
            EndKind::Outflow
        } else {
            match (&es.boundary, &es.interaction) {
                (None, _) => EndKind::Clamped,
                (Some(_), InteractionSpec::None) => EndKind::Free,
                (Some(_), InteractionSpec::Spring(_)) => EndKind::Spring,
                (Some(_), InteractionSpec::Rigid) => EndKind::Rigid,
            }
        };
        let separate = matches!(kind, EndKind::Free | EndKind::Spring);
        let n_u = if separate { 2 * k } else { k };
        let mut mass = DMatrix::zeros(n_u, n_u);
        let mut damping = DMatrix::zeros(n_u, n_u);
        let mut springs = DMatrix::zeros(n_u, n_u);
        mass.view_mut((0, 0), (k, k)).copy_from(&half);
        let mut massless = Vec::new();
        let mut constraint = DMatrix::zeros(0, n_u);
        let k_tilde = match &es.interaction {
            InteractionSpec::Spring(kt) if kind == EndKind::Spring => Some(kt.clone()),
            _ => None,
        };
        match kind {
            EndKind::Clamped => {}
            EndKind::Outflow => damping.copy_from(impedance),
            EndKind::Rigid => {
                let b = es.boundary.as_ref().expect("rigid end has a node");
                for i in 0..k {
                    mass[(i, i)] += b.mass[i];
                    damping[(i, i)] = b.kernel.instantaneous;
                }
                springs.copy_from(&b.hooke);
            }
            EndKind::Free | EndKind::Spring => {
                let b = es.boundary.as_ref().expect("structured end has a node");
                let kt = k_tilde.clone().unwrap_or_else(|| DMatrix::zeros(k, k));
                for i in 0..k {
                    mass[(k + i, k + i)] = b.mass[i];
                    damping[(k + i, k + i)] = b.kernel.instantaneous;
                }
                springs.view_mut((0, 0), (k, k)).copy_from(&kt);
                springs.view_mut((0, k), (k, k)).copy_from(&(-&kt));
                springs.view_mut((k, 0), (k, k)).copy_from(&(-&kt));
                springs.view_mut((k, k), (k, k)).copy_from(&(&kt + &b.hooke));
                massless = (0..k).filter(|&i| b.mass[i] == 0.0).map(|i| k + i).collect();
                constraint = DMatrix::from_fn(massless.len(), n_u, |r, c| springs[(massless[r], c)]);
            }
        }
        let dt = v.dt;
        let mut a = &mass / (dt * dt) + &damping / (2.0 * dt) + &springs / 4.0;
        for (r, &row) in massless.iter().enumerate() {
            for c in 0..n_u {
                a[(row, c)] = constraint[(r, c)];
            }
        }
        let a_inv = if kind == EndKind::Clamped {
            DMatrix::zeros(n_u, n_u)
        } else {
            a.try_inverse()
                .ok_or_else(|| Error::invalid(format!("end {} system is singular", end.label())))?
        };
        Ok(EndModel {
            kind,
            node,
            neighbor,
            separate,
            mass,
            damping,
            springs,
            a_inv,
            massless,
            constraint,
            node_spec: es.boundary.clone(),
            k_tilde,
        })
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn z(&self, j: usize) -> f64 {
        self.b1 + j as f64 * self.dz
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|j| self.z(j)).collect()
    }

    pub fn mass_matrix(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness_matrix(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn end_kind(&self, end: End) -> EndKind {
        self.ends[end.index()].kind
    }

    pub fn boundary_spec(&self, end: End) -> Option<&BoundaryNodeSpec> {
        self.ends[end.index()].node_spec.as_ref()
    }

    pub fn interaction_stiffness(&self, end: End) -> Option<&DMatrix<f64>> {
        self.ends[end.index()].k_tilde.as_ref()
    }

    /// Outflow impedance at `end`, if it is a truncated semi-infinite end.
    pub fn outflow_impedance(&self, end: End) -> Option<&DMatrix<f64>> {
        let e = &self.ends[end.index()];
        (e.kind == EndKind::Outflow).then_some(&e.damping)
    }

    fn interior_force_at(&self, t: f64) -> Option<Vec<f64>> {
        self.interior_force.as_ref().map(|f| {
            let mut out = vec![0.0; self.k];
            f.value_into(t, &mut out);
            out
        })
    }

    fn boundary_force_at(&self, end: End, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        if let Some(f) = self.ends[end.index()].node_spec.as_ref().and_then(|n| n.external_force.as_ref()) {
            f.value_into(t, &mut out);
        }
        out
    }

    /// External force on the boundary unknowns of `end` at time `t`.
    pub fn external_boundary_force(&self, end: End, t: f64) -> Vec<f64> {
        self.boundary_force_at(end, t)
    }

    /// External distributed force per unit length at time `t` (zero when absent).
    pub fn external_interior_force(&self, t: f64) -> Vec<f64> {
        self.interior_force_at(t).unwrap_or_else(|| vec![0.0; self.k])
    }

    /// Builds the three-level state from the scenario's initial data.
    pub fn initial_state(&self) -> Result<CoupledState1D> {
        let k = self.k;
        let n = self.n_nodes();
        let (lo, hi) = (self.b1, self.b2);
        let init = &self.initial;
        let w = DVector::from_fn(k, |i, _| init.weight(i));
        let mut psi = vec![0.0; n * k];
        let mut vel = vec![0.0; n * k];
        let cw = &self.speed_matrix * &w;
        for j in 0..n {
            let z = self.z(j);
            let phi = init.displacement.eval(z, lo, hi);
            for c in 0..k {
                psi[j * k + c] = w[c] * phi;
                vel[j * k + c] = match &init.velocity {
                    VelocityInit::Profile(p) => w[c] * p.eval(z, lo, hi),
                    VelocityInit::Travelling { travelling } => {
                        let dphi = init.displacement.derivative(z, lo, hi);
                        let s = match travelling {
                            crate::model::Direction::Right => -1.0,
                            crate::model::Direction::Left => 1.0,
                        };
                        s * cw[c] * dphi
                    }
                };
            }
        }
        let mut psi_b: [[Vec<f64>; 3]; 2] = Default::default();
        let mut vel_b: [Vec<f64>; 2] = Default::default();
        for end in End::BOTH {
            let e = &self.ends[end.index()];
            let node = e.node;
            let bi = &init.boundary[end.index()];
            match e.kind {
                EndKind::Clamped => {
                    psi[node * k..(node + 1) * k].fill(0.0);
                    vel[node * k..(node + 1) * k].fill(0.0);
                }
                EndKind::Rigid => {
                    if let Some(v) = &bi.velocity {
                        vel[node * k..(node + 1) * k].copy_from_slice(v);
                    }
                }
                EndKind::Free | EndKind::Spring => {
                    let p = bi.psi.clone().unwrap_or_else(|| psi[node * k..(node + 1) * k].to_vec());
                    let v = bi.velocity.clone().unwrap_or_else(|| vel[node * k..(node + 1) * k].to_vec());
                    psi_b[end.index()][CUR] = p;
                    psi_b[end.index()][NEXT] = vec![0.0; k];
                    vel_b[end.index()] = v;
                }
                EndKind::Outflow => {}
            }
        }
        let mut state = CoupledState1D {
            levels: [vec![0.0; n * k], psi, vec![0.0; n * k]],
            psi_b,
            kernels: [
                self.ends[0].kernel().map(|kr| vec![KernelState::at_rest(kr); k]).unwrap_or_default(),
                self.ends[1].kernel().map(|kr| vec![KernelState::at_rest(kr); k]).unwrap_or_default(),
            ],
            step: 0,
            t0: 0.0,
            dt: self.dt,
        };
        // Massless components sit on their constraint from the start.
        for end in End::BOTH {
            let e = &self.ends[end.index()];
            if e.separate && !e.massless.is_empty() {
                let psi_e = state.levels[CUR][e.node * k..(e.node + 1) * k].to_vec();
                let f = self.boundary_force_at(end, 0.0);
                let mut pb = state.psi_b[end.index()][CUR].clone();
                self.settle_massless(e, &psi_e, &mut pb, &f);
                state.psi_b[end.index()][CUR] = pb;
                for &row in &e.massless {
                    vel_b[end.index()][row - k] = 0.0;
                }
            }
        }
        self.taylor_start(&mut state, &vel, &vel_b);
        self.advance_next(&mut state)?;
        Ok(state)
    }

    /// Solves the massless rows of `psi_b` for given `psi_e`, keeping massive components fixed.
    fn settle_massless(&self, e: &EndModel, psi_e: &[f64], psi_b: &mut [f64], force: &[f64]) {
        let k = self.k;
        let ml: Vec<usize> = e.massless.iter().map(|r| r - k).collect();
        let nm = ml.len();
        let mut a = DMatrix::zeros(nm, nm);
        let mut rhs = DVector::zeros(nm);
        for (r, &i) in ml.iter().enumerate() {
            let mut acc = force[i];
            for c in 0..k {
                acc -= e.constraint[(r, c)] * psi_e[c];
                if !ml.contains(&c) {
                    acc -= e.constraint[(r, k + c)] * psi_b[c];
                }
            }
            rhs[r] = acc;
            for (cc, &j) in ml.iter().enumerate() {
                a[(r, cc)] = e.constraint[(r, k + j)];
            }
        }
        if let Some(sol) = a.lu().solve(&rhs) {
            for (r, &i) in ml.iter().enumerate() {
                psi_b[i] = sol[r];
            }
        }
    }

    /// Sets level n-1 from a second-order Taylor expansion about t = 0.
    fn taylor_start(&self, state: &mut CoupledState1D, vel: &[f64], vel_b: &[Vec<f64>; 2]) {
        let k = self.k;
        let n = self.n_nodes();
        let dt = self.dt;
        let cur = state.levels[CUR].clone();
        let mut acc = vec![0.0; n * k];
        let fd = self.interior_force_at(0.0);
        let fd_acc = fd.as_ref().map(|f| &self.m_inv * DVector::from_column_slice(f));
        for j in 1..n - 1 {
            self.interior_accel(&cur, j, &mut acc[j * k..(j + 1) * k]);
            if let Some(fa) = &fd_acc {
                for c in 0..k {
                    acc[j * k + c] += fa[c];
                }
            }
        }
        let mut prev_b: [Vec<f64>; 2] = Default::default();
        for end in End::BOTH {
            let e = &self.ends[end.index()];
            if e.kind == EndKind::Clamped {
                continue;
            }
            let n_u = e.n_u(k);
            let u = self.gather(state, end, CUR);
            let mut v = DVector::zeros(n_u);
            for c in 0..k {
                v[c] = vel[e.node * k + c];
                if e.separate {
                    v[k + c] = vel_b[end.index()][c];
                }
            }
            let r = self.end_rhs_forces(state, end, &cur, 0.0);
            let full = &r - &e.damping * &v - &e.springs * &u;
            let massive: Vec<usize> = (0..n_u).filter(|i| !e.massless.contains(i)).collect();
            let mm = DMatrix::from_fn(massive.len(), massive.len(), |a, b| e.mass[(massive[a], massive[b])]);
            let rhs = DVector::from_fn(massive.len(), |a, _| full[massive[a]]);
            let a_end = mm.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(massive.len()));
            let mut a_full = DVector::zeros(n_u);
            for (idx, &i) in massive.iter().enumerate() {
                a_full[i] = a_end[idx];
            }
            for c in 0..k {
                acc[e.node * k + c] = a_full[c];
            }
            if e.separate {
                let pb = &state.psi_b[end.index()][CUR];
                prev_b[end.index()] = (0..k)
                    .map(|c| pb[c] - dt * v[k + c] + 0.5 * dt * dt * a_full[k + c])
                    .collect();
            }
        }
        let prev: Vec<f64> = (0..n * k).map(|i| cur[i] - dt * vel[i] + 0.5 * dt * dt * acc[i]).collect();
        state.levels[PREV] = prev;
        for end in End::BOTH {
            let e = &self.ends[end.index()];
            if e.kind == EndKind::Clamped {
                state.levels[PREV][e.node * k..(e.node + 1) * k].fill(0.0);
            }
            if e.separate {
                let mut pb = std::mem::take(&mut prev_b[end.index()]);
                if !e.massless.is_empty() {
                    let psi_e = state.levels[PREV][e.node * k..(e.node + 1) * k].to_vec();
                    let f = self.boundary_force_at(end, -dt);
                    self.settle_massless(e, &psi_e, &mut pb, &f);
                }
                state.psi_b[end.index()][PREV] = pb;
            }
        }
    }

    #[inline]
    fn interior_accel(&self, psi: &[f64], j: usize, out: &mut [f64]) {
        let k = self.k;
        let inv_dz2 = 1.0 / (self.dz * self.dz);
        if k == 1 {
            out[0] = self.accel_op[0] * (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) * inv_dz2;
            return;
        }
        for c in 0..k {
            let mut s = 0.0;
            for d in 0..k {
                let lap = psi[(j + 1) * k + d] - 2.0 * psi[j * k + d] + psi[(j - 1) * k + d];
                s += self.accel_op[c * k + d] * lap;
            }
            out[c] = s * inv_dz2;
        }
    }

    fn gather(&self, state: &CoupledState1D, end: End, level: usize) -> DVector<f64> {
        let e = &self.ends[end.index()];
        let k = self.k;
        let mut u = DVector::zeros(e.n_u(k));
        for c in 0..k {
            u[c] = state.levels[level][e.node * k + c];
            if e.separate {
                u[k + c] = state.psi_b[end.index()][level][c];
            }
        }
        u
    }

    /// Explicit right-hand side `R` of the end system at the level held in `psi`.
    fn end_rhs_forces(&self, state: &CoupledState1D, end: End, psi: &[f64], t: f64) -> DVector<f64> {
        let e = &self.ends[end.index()];
        let k = self.k;
        let mut r = DVector::zeros(e.n_u(k));
        let diff: Vec<f64> = (0..k).map(|c| psi[e.neighbor * k + c] - psi[e.node * k + c]).collect();
        for c in 0..k {
            let mut f = 0.0;
            for d in 0..k {
                f += self.stiffness[(c, d)] * diff[d];
            }
            r[c] = f / self.dz;
        }
        if let Some(fd) = self.interior_force_at(t) {
            for c in 0..k {
                r[c] += fd[c] * self.dz / 2.0;
            }
        }
        if let Some(node) = &e.node_spec {
            let fb = self.boundary_force_at(end, t);
            let off = if e.separate { k } else { 0 };
            for c in 0..k {
                let mem = state.kernels[end.index()]
                    .get(c)
                    .map_or(0.0, |ks| ks.memory_force(&node.kernel));
                r[off + c] += fb[c] - mem;
            }
        }
        r
    }

    /// Fills interior nodes of level n+1 from levels n and n-1.
    fn interior_next(&self, state: &mut CoupledState1D) {
        let k = self.k;
        let n = self.n_nodes();
        let dt2 = self.dt * self.dt;
        let t = state.time();
        let fd_acc = self
            .interior_force_at(t)
            .map(|f| &self.m_inv * DVector::from_column_slice(&f));
        let [prev, cur, next] = &mut state.levels;
        let mut a = vec![0.0; k];
        for j in 1..n - 1 {
            self.interior_accel(cur, j, &mut a);
            for c in 0..k {
                let i = j * k + c;
                let extra = fd_acc.as_ref().map_or(0.0, |fa| fa[c]);
                next[i] = 2.0 * cur[i] - prev[i] + dt2 * (a[c] + extra);
            }
        }
    }

    /// Solves the implicit end system for level n+1.
    fn end_next(&self, state: &mut CoupledState1D, end: End) {
        let e = &self.ends[end.index()];
        let k = self.k;
        if e.kind == EndKind::Clamped {
            state.levels[NEXT][e.node * k..(e.node + 1) * k].fill(0.0);
            return;
        }
        let dt = self.dt;
        let t = state.time();
        let u = self.gather(state, end, CUR);
        let um = self.gather(state, end, PREV);
        let r = self.end_rhs_forces(state, end, &state.levels[CUR], t);
        let two_u = &u * 2.0;
        let mut rhs = r + &e.mass * (&two_u - &um) / (dt * dt) + &e.damping * &um / (2.0 * dt)
            - &e.springs * (&two_u + &um) / 4.0;
        if !e.massless.is_empty() {
            let fb = self.boundary_force_at(end, t + dt);
            for &row in &e.massless {
                rhs[row] = fb[row - k];
            }
        }
        let up = &e.a_inv * rhs;
        for c in 0..k {
            state.levels[NEXT][e.node * k + c] = up[c];
            if e.separate {
                state.psi_b[end.index()][NEXT][c] = up[k + c];
            }
        }
    }

    fn advance_next(&self, state: &mut CoupledState1D) -> Result<()> {
        self.interior_next(state);
        for end in End::BOTH {
            if self.ends[end.index()].kind == EndKind::Outflow {
                outflow_far_boundary(self, state, end)?;
            } else {
                self.end_next(state, end);
            }
        }
        guard(state)
    }

    /// Interface quantities at `end` for the settled level.
    pub fn interface_force(&self, state: &CoupledState1D, end: End) -> InterfaceForce {
        interface_force(self, state, end)
    }
}

fn guard(state: &CoupledState1D) -> Result<()> {
    let bad = |x: &f64| !x.is_finite() || x.abs() > OVERFLOW_GUARD;
    let field_bad = state.levels[NEXT].iter().any(bad);
    let bnd_bad = state.psi_b.iter().any(|e| e[NEXT].iter().any(bad));
    if field_bad || bnd_bad {
        return Err(Error::NumericalBlowup {
            time: state.time() + state.dt,
            detail: if field_bad { "interior field".into() } else { "boundary node".into() },
        });
    }
    Ok(())
}

impl CoupledState1D {
    pub fn time(&self) -> f64 {
        self.t0 + self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Field at node `j`, settled level.
    pub fn psi<'a>(&'a self, sys: &CoupledSystem1D, j: usize) -> &'a [f64] {
        let k = sys.k;
        &self.levels[CUR][j * k..(j + 1) * k]
    }

    /// Centered velocity at node `j`.
    pub fn psi_dot(&self, sys: &CoupledSystem1D, j: usize) -> Vec<f64> {
        let k = sys.k;
        (0..k)
            .map(|c| (self.levels[NEXT][j * k + c] - self.levels[PREV][j * k + c]) / (2.0 * self.dt))
            .collect()
    }

    /// Trace `psi_L` at `end`.
    pub fn psi_l(&self, sys: &CoupledSystem1D, end: End) -> Vec<f64> {
        self.psi(sys, sys.ends[end.index()].node).to_vec()
    }

    pub fn psi_l_dot(&self, sys: &CoupledSystem1D, end: End) -> Vec<f64> {
        self.psi_dot(sys, sys.ends[end.index()].node)
    }

    /// Boundary displacement at `end`; equals the trace for rigid ends and is zero where no node exists.
    pub fn psi_b(&self, sys: &CoupledSystem1D, end: End) -> Vec<f64> {
        let e = &sys.ends[end.index()];
        match e.kind {
            EndKind::Free | EndKind::Spring => self.psi_b[end.index()][CUR].clone(),
            EndKind::Rigid => self.psi_l(sys, end),
            EndKind::Clamped | EndKind::Outflow => vec![0.0; sys.k],
        }
    }

    pub fn psi_b_dot(&self, sys: &CoupledSystem1D, end: End) -> Vec<f64> {
        let e = &sys.ends[end.index()];
        match e.kind {
            EndKind::Free | EndKind::Spring => {
                let b = &self.psi_b[end.index()];
                (0..sys.k).map(|c| (b[NEXT][c] - b[PREV][c]) / (2.0 * self.dt)).collect()
            }
            EndKind::Rigid => self.psi_l_dot(sys, end),
            EndKind::Clamped | EndKind::Outflow => vec![0.0; sys.k],
        }
    }

    /// Friction force `sum c z + alpha_inf v` on the boundary node at `end`, settled level.
    pub fn friction(&self, sys: &CoupledSystem1D, end: End) -> Vec<f64> {
        let Some(node) = sys.boundary_spec(end) else {
            return vec![0.0; sys.k];
        };
        let v = self.psi_b_dot(sys, end);
        (0..sys.k)
            .map(|c| {
                let mem = self.kernels[end.index()].get(c).map_or(0.0, |ks| ks.memory_force(&node.kernel));
                mem + node.kernel.instantaneous * v[c]
            })
            .collect()
    }

    pub fn field(&self, sys: &CoupledSystem1D) -> FieldState1D {
        let n = sys.n_nodes();
        let k = sys.k;
        let mut psi_dot = vec![0.0; n * k];
        for j in 0..n {
            psi_dot[j * k..(j + 1) * k].copy_from_slice(&self.psi_dot(sys, j));
        }
        FieldState1D {
            grid: sys.grid(),
            components: k,
            psi: self.levels[CUR].clone(),
            psi_dot,
            psi_l: [self.psi_l(sys, End::B1), self.psi_l(sys, End::B2)],
            time: self.time(),
        }
    }

    pub fn boundary(&self, sys: &CoupledSystem1D, end: End) -> BoundaryState {
        let ks = &self.kernels[end.index()];
        BoundaryState {
            psi_b: self.psi_b(sys, end),
            psi_b_dot: self.psi_b_dot(sys, end),
            kernel_state: (!ks.is_empty()).then(|| ks.clone()),
        }
    }
}

/// Fills the interior nodes of the lookahead level (leapfrog).
///
/// This advances only the nodes strictly inside the interval; the ends are
/// completed by [`step_coupled`] through the interface solve.
pub fn step_interior(sys: &CoupledSystem1D, state: &mut CoupledState1D) -> Result<()> {
    sys.interior_next(state);
    let k = sys.k;
    let n = sys.n_nodes();
    let bad = state.levels[NEXT][k..(n - 1) * k]
        .iter()
        .any(|x| !x.is_finite() || x.abs() > OVERFLOW_GUARD);
    if bad {
        return Err(Error::NumericalBlowup { time: state.time() + state.dt, detail: "interior field".into() });
    }
    Ok(())
}

/// Characteristic closure at a truncated semi-infinite end.
///
/// The end node is a half cell loaded by the dashpot `Z = K C^{-1}`, which
/// absorbs right-going (b2) or left-going (b1) waves of every mode.
pub fn outflow_far_boundary(sys: &CoupledSystem1D, state: &mut CoupledState1D, end: End) -> Result<()> {
    if sys.end_kind(end) != EndKind::Outflow {
        return Err(Error::invalid(format!("end {} is not semi-infinite", end.label())));
    }
    sys.end_next(state, end);
    Ok(())
}

/// Advances the settled level by one step.
pub fn step_coupled(sys: &CoupledSystem1D, state: &mut CoupledState1D) -> Result<()> {
    let k = sys.k;
    let dt = sys.dt;
    for end in End::BOTH {
        let e = &sys.ends[end.index()];
        let Some(kernel) = e.kernel() else { continue };
        let (now, next): (Vec<f64>, Vec<f64>) = if e.separate {
            (state.psi_b[end.index()][CUR].clone(), state.psi_b[end.index()][NEXT].clone())
        } else {
            (
                state.levels[CUR][e.node * k..(e.node + 1) * k].to_vec(),
                state.levels[NEXT][e.node * k..(e.node + 1) * k].to_vec(),
            )
        };
        for (c, ks) in state.kernels[end.index()].iter_mut().enumerate() {
            ks.advance(kernel, (next[c] - now[c]) / dt, dt);
        }
    }
    state.levels.rotate_left(1);
    for b in state.psi_b.iter_mut() {
        b.rotate_left(1);
    }
    state.step += 1;
    sys.advance_next(state)
}

/// Flux, interaction force and balance residuals at `end` for the settled level.
pub fn interface_force(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> InterfaceForce {
    let k = sys.k;
    let e = &sys.ends[end.index()];
    let psi = &state.levels[CUR];
    let (j0, j1, j2) = match end {
        End::B1 => (0, 1, 2),
        End::B2 => (sys.n_cells, sys.n_cells - 1, sys.n_cells - 2),
    };
    let normal = end.normal();
    let dz = sys.dz;
    // Inward one-sided difference, turned into d/dz by the outward normal.
    let grad: Vec<f64> = (0..k)
        .map(|c| -normal * (-3.0 * psi[j0 * k + c] + 4.0 * psi[j1 * k + c] - psi[j2 * k + c]) / (2.0 * dz))
        .collect();
    let flux: Vec<f64> = (0..k)
        .map(|c| (0..k).map(|d| sys.stiffness[(c, d)] * grad[d]).sum())
        .collect();
    let psi_l = state.psi_l(sys, end);
    let interaction: Vec<f64> = match &e.k_tilde {
        Some(kt) => {
            let pb = &state.psi_b[end.index()][CUR];
            (0..k).map(|c| (0..k).map(|d| kt[(c, d)] * (pb[d] - psi_l[d])).sum()).collect()
        }
        None => vec![0.0; k],
    };
    let iel_residual = (0..k).map(|c| -normal * flux[c] + interaction[c]).collect();

    let discrete_residual = if e.kind == EndKind::Clamped {
        vec![0.0; k]
    } else {
        let dt = sys.dt;
        let u = sys.gather(state, end, CUR);
        let um = sys.gather(state, end, PREV);
        let up = sys.gather(state, end, NEXT);
        let r = sys.end_rhs_forces(state, end, psi, state.time());
        let res = &e.mass * (&up - &u * 2.0 + &um) / (dt * dt) + &e.damping * (&up - &um) / (2.0 * dt)
            + &e.springs * (&up + &u * 2.0 + &um) / 4.0
            - r;
        (0..k).map(|c| res[c]).collect()
    };
    InterfaceForce { flux, interaction, iel_residual, discrete_residual }
}

/// Forces the interaction exerts on the interior and on the boundary node at `end`.
///
/// The pair sums to zero exactly; both vanish for rigid, free and unstructured ends.
pub fn interaction_forces(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> (Vec<f64>, Vec<f64>) {
    let on_interior = interface_force(sys, state, end).interaction;
    let on_boundary = on_interior.iter().map(|f| -f).collect();
    (on_interior, on_boundary)
}

/// Standalone central-difference update of one boundary node.
///
/// Integrates `m psi_B'' + k psi_B + friction = f_int + F_B` over `dt` with
/// the interface and external forces held at their given values (velocity
/// Verlet; instantaneous friction is treated implicitly). Massless components
/// are placed on `k psi_B = f_int + F_B`.
pub fn step_boundary(
    node: &BoundaryNodeSpec,
    state: &BoundaryState,
    interface_force: &[f64],
    external_force: &[f64],
    dt: f64,
) -> Result<BoundaryState> {
    let k = node.mass.len();
    if state.psi_b.len() != k || interface_force.len() != k || external_force.len() != k {
        return Err(Error::invalid("boundary step: component count mismatch"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("boundary step: dt must be positive"));
    }
    let alpha = node.kernel.instantaneous;
    let mut kernels = state
        .kernel_state
        .clone()
        .unwrap_or_else(|| vec![KernelState::at_rest(&node.kernel); k]);
    let applied: Vec<f64> = (0..k).map(|c| interface_force[c] + external_force[c]).collect();
    let spring = |x: &[f64], c: usize| -> f64 { (0..k).map(|d| node.hooke[(c, d)] * x[d]).sum() };
    let mem = |ks: &[KernelState], c: usize| ks[c].memory_force(&node.kernel);

    let mut next = state.psi_b.clone();
    let mut v_next = state.psi_b_dot.clone();
    let acc0: Vec<f64> = (0..k)
        .map(|c| {
            if node.mass[c] > 0.0 {
                (applied[c] - spring(&state.psi_b, c) - mem(&kernels, c) - alpha * state.psi_b_dot[c]) / node.mass[c]
            } else {
                0.0
            }
        })
        .collect();
    for c in 0..k {
        if node.mass[c] > 0.0 {
            next[c] = state.psi_b[c] + dt * state.psi_b_dot[c] + 0.5 * dt * dt * acc0[c];
        }
    }
    // Massless components: solve their block of hooke against the applied force.
    let ml: Vec<usize> = (0..k).filter(|&c| node.mass[c] == 0.0).collect();
    if !ml.is_empty() {
        let a = DMatrix::from_fn(ml.len(), ml.len(), |r, s| node.hooke[(ml[r], ml[s])]);
        let rhs = DVector::from_fn(ml.len(), |r, _| {
            let c = ml[r];
            applied[c] - (0..k).filter(|d| !ml.contains(d)).map(|d| node.hooke[(c, d)] * next[d]).sum::<f64>()
        });
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::invalid("massless boundary node without stiffness"))?;
        for (r, &c) in ml.iter().enumerate() {
            v_next[c] = (sol[r] - state.psi_b[c]) / dt;
            next[c] = sol[r];
        }
    }
    for (c, ks) in kernels.iter_mut().enumerate() {
        ks.advance(&node.kernel, (next[c] - state.psi_b[c]) / dt, dt);
    }
    for c in 0..k {
        if node.mass[c] > 0.0 {
            let m = node.mass[c];
            // m (v+ - v) / dt = (F0 + F1) / 2 with -alpha v+ inside F1 taken implicitly.
            let f1_explicit = applied[c] - spring(&next, c) - mem(&kernels, c);
            v_next[c] = (m * state.psi_b_dot[c] + 0.5 * dt * (m * acc0[c] + f1_explicit)) / (m + 0.5 * dt * alpha);
        }
    }
    if next.iter().chain(&v_next).any(|x| !x.is_finite() || x.abs() > OVERFLOW_GUARD) {
        return Err(Error::NumericalBlowup { time: f64::NAN, detail: "boundary node".into() });
    }
    Ok(BoundaryState {
        psi_b: next,
        psi_b_dot: v_next,
        kernel_state: (!node.kernel.terms.is_empty()).then_some(kernels),
    })
}

#[cfg(test)]
mod tests;
