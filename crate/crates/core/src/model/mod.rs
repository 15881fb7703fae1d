//! Scenario types and their validation.
//!
//! A [`Scenario`] is a complete declarative description of one coupled system:
//! interior, boundary nodes, interactions, time grid, initial data and output
//! plan. [`validate_scenario`] checks every invariant and reports all
//! violations at once; [`build_system`] assembles the stepper for the chosen
//! interior kind.

pub mod catalog;
pub mod file;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{KernelState, MemoryKernel};
use crate::linalg::{self, WaveModes};
use crate::solver1d::reduced::ReducedSystem;
use crate::solver1d::CoupledSystem1D;
use crate::solver2d::MembraneSystem;

pub use catalog::{Direction, ForceShape, ForceSpec, Profile, VelocityInit};
pub use file::{load_scenario, parse_scenario};

/// Largest admissible Courant factor.
pub const CFL_MAX: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    B1,
    B2,
}

impl End {
    pub const BOTH: [End; 2] = [End::B1, End::B2];

    pub fn index(self) -> usize {
        match self {
            End::B1 => 0,
            End::B2 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            End::B1 => "b1",
            End::B2 => "b2",
        }
    }

    /// Outward normal sign along z: -1 at b1, +1 at b2.
    pub fn normal(self) -> f64 {
        match self {
            End::B1 => -1.0,
            End::B2 => 1.0,
        }
    }
}

/// Interior of a 1D problem: `mass psi_tt = stiffness psi_zz + F_D` on `[b1, b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorSpec1D {
    pub mass_matrix: DMatrix<f64>,
    pub stiffness_matrix: DMatrix<f64>,
    pub b1: f64,
    pub b2: f64,
    pub semi_infinite: [bool; 2],
    pub n_cells: usize,
    /// Distributed force per unit length, uniform in z.
    pub force: Option<ForceSpec>,
}

impl InteriorSpec1D {
    /// Scalar string with density `rho` and tension `tension`.
    pub fn string(rho: f64, tension: f64, b1: f64, b2: f64, n_cells: usize) -> Self {
        Self {
            mass_matrix: DMatrix::from_element(1, 1, rho),
            stiffness_matrix: DMatrix::from_element(1, 1, tension),
            b1,
            b2,
            semi_infinite: [false, false],
            n_cells,
            force: None,
        }
    }

    pub fn components(&self) -> usize {
        self.mass_matrix.nrows()
    }

    pub fn dz(&self) -> f64 {
        (self.b2 - self.b1) / self.n_cells as f64
    }
}

/// Boundary node with its own inertia, support stiffness and optional memory friction.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryNodeSpec {
    /// Diagonal of the boundary mass matrix; zero entries are massless components.
    pub mass: Vec<f64>,
    pub hooke: DMatrix<f64>,
    pub external_force: Option<ForceSpec>,
    /// Retarded friction applied componentwise to the boundary velocity.
    pub kernel: MemoryKernel,
}

impl BoundaryNodeSpec {
    pub fn scalar(mass: f64, hooke: f64) -> Self {
        Self {
            mass: vec![mass],
            hooke: DMatrix::from_element(1, 1, hooke),
            external_force: None,
            kernel: MemoryKernel::default(),
        }
    }

    pub fn with_kernel(mut self, kernel: MemoryKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_force(mut self, force: ForceSpec) -> Self {
        self.external_force = Some(force);
        self
    }
}

/// Interaction between a boundary node and the interior trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InteractionSpec {
    #[default]
    None,
    Spring(DMatrix<f64>),
    Rigid,
}

impl InteractionSpec {
    pub fn spring(k_tilde: f64) -> Self {
        InteractionSpec::Spring(DMatrix::from_element(1, 1, k_tilde))
    }

    pub fn name(&self) -> &'static str {
        match self {
            InteractionSpec::None => "none",
            InteractionSpec::Spring(_) => "spring",
            InteractionSpec::Rigid => "rigid",
        }
    }
}

/// Boundary and interaction at one end of a 1D interior.
///
/// A finite end with no boundary node is clamped; a semi-infinite end carries
/// the characteristic outflow closure instead.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EndSpec {
    pub boundary: Option<BoundaryNodeSpec>,
    pub interaction: InteractionSpec,
}

/// Circular membrane with a ring boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpec {
    pub radius: f64,
    pub sigma: f64,
    pub tension: f64,
    pub ring_lambda: f64,
    pub ring_k: f64,
    /// Scalar interaction per unit length along the ring.
    pub interaction: InteractionSpec,
    pub n_r: usize,
    pub n_theta: usize,
    /// Uniform force per unit length on the ring.
    pub ring_force: Option<ForceSpec>,
}

impl DiskSpec {
    /// Disk with a massless, unsupported ring rigidly attached (a free edge).
    pub fn new(radius: f64, sigma: f64, tension: f64, n_r: usize, n_theta: usize) -> Self {
        Self {
            radius,
            sigma,
            tension,
            ring_lambda: 0.0,
            ring_k: 0.0,
            interaction: InteractionSpec::Rigid,
            n_r,
            n_theta,
            ring_force: None,
        }
    }

    pub fn wave_speed(&self) -> f64 {
        (self.tension / self.sigma).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interior {
    Line(InteriorSpec1D),
    Disk(DiskSpec),
    /// No interior field: the boundary node at b1 alone, with its memory kernel.
    Lumped,
}

/// Initial state of one boundary node; `None` entries follow the interior trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryInit {
    pub psi: Option<Vec<f64>>,
    pub velocity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub displacement: Profile,
    pub velocity: VelocityInit,
    /// Component weights multiplying the profiles (length k); empty means all ones.
    pub weights: Vec<f64>,
    /// Disk only: the profile is multiplied by `cos(m (theta - phase))` when `m > 0`.
    pub angular_mode: u32,
    pub angular_phase: f64,
    pub boundary: [BoundaryInit; 2],
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            displacement: Profile::Zero,
            velocity: VelocityInit::default(),
            weights: Vec::new(),
            angular_mode: 0,
            angular_phase: 0.0,
            boundary: Default::default(),
        }
    }
}

impl InitialData {
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.get(i).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPlan {
    /// Record every `stride` steps.
    pub stride: usize,
    /// Times at which full field snapshots are written.
    pub snapshots: Vec<f64>,
    /// Disk probe: number of innermost radial cells averaged over theta.
    pub probe_radius_index: usize,
}

impl Default for OutputPlan {
    fn default() -> Self {
        Self { stride: 1, snapshots: Vec::new(), probe_radius_index: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub interior: Interior,
    pub ends: [EndSpec; 2],
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialData,
    pub output: OutputPlan,
}

impl Scenario {
    /// Scenario with zero initial data and the default output plan.
    pub fn new(interior: Interior, ends: [EndSpec; 2], t_end: f64, dt: f64) -> Self {
        Self { interior, ends, t_end, dt, initial: InitialData::default(), output: OutputPlan::default() }
    }

    pub fn end(&self, end: End) -> &EndSpec {
        &self.ends[end.index()]
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(0.0) as usize
    }
}

/// A scenario whose invariants have been checked, with derived quantities attached.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    scenario: Scenario,
    /// Modal data of the 1D interior, when there is one.
    pub modes: Option<WaveModes>,
    /// Stable step bound that the time step was checked against.
    pub dt_max: f64,
}

impl ValidatedScenario {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn into_inner(self) -> Scenario {
        self.scenario
    }
}

impl std::ops::Deref for ValidatedScenario {
    type Target = Scenario;
    fn deref(&self) -> &Scenario {
        &self.scenario
    }
}

/// Largest time step the line interior admits at Courant factor [`CFL_MAX`].
pub fn line_dt_max(spec: &InteriorSpec1D, modes: &WaveModes) -> f64 {
    let a_max = modes.speeds.last().copied().unwrap_or(0.0);
    CFL_MAX * spec.dz() / a_max
}

/// Checks every invariant of `s` and returns it wrapped, or all violations at once.
pub fn validate_scenario(s: Scenario) -> Result<ValidatedScenario> {
    let mut v = Vec::new();
    if !(s.t_end > 0.0 && s.t_end.is_finite()) {
        v.push(format!("t_end must be positive and finite (got {})", s.t_end));
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        v.push(format!("dt must be positive and finite (got {})", s.dt));
    }
    if s.output.stride == 0 {
        v.push("output stride must be at least 1".into());
    }
    v.extend(s.initial.displacement.violations());
    if let VelocityInit::Profile(p) = &s.initial.velocity {
        v.extend(p.violations());
    }
    if s.initial.weights.iter().any(|w| !w.is_finite()) || !s.initial.angular_phase.is_finite() {
        v.push("initial weights and angular phase must be finite".into());
    }

    let (modes, dt_max) = match &s.interior {
        Interior::Line(spec) => validate_line(&s, spec, &mut v),
        Interior::Disk(disk) => (None, validate_disk(&s, disk, &mut v)),
        Interior::Lumped => (None, validate_lumped(&s, &mut v)),
    };
    if s.dt.is_finite() && dt_max.is_finite() && s.dt > dt_max * (1.0 + 1e-12) {
        v.push(format!("CFL violated: dt = {} exceeds stable bound {}", s.dt, dt_max));
    }

    if v.is_empty() {
        Ok(ValidatedScenario { scenario: s, modes, dt_max })
    } else {
        Err(Error::InvalidSpec(v))
    }
}

fn check_len(v: &mut Vec<String>, what: &str, len: usize, k: usize) -> bool {
    if len != k {
        v.push(format!("{what} has {len} components, interior has {k}"));
        false
    } else {
        true
    }
}

fn check_force(v: &mut Vec<String>, what: &str, f: &Option<ForceSpec>, k: usize) {
    if let Some(f) = f {
        check_len(v, what, f.amplitude.len(), k);
        if f.amplitude.iter().any(|a| !a.is_finite()) {
            v.push(format!("{what} amplitude must be finite"));
        }
        v.extend(f.shape.violations());
    }
}

fn check_boundary_node(v: &mut Vec<String>, label: &str, node: &BoundaryNodeSpec, k: usize) {
    if check_len(v, &format!("boundary {label} mass"), node.mass.len(), k)
        && node.mass.iter().any(|m| !(*m >= 0.0 && m.is_finite()))
    {
        v.push(format!("boundary {label} mass entries must be finite and nonnegative"));
    }
    if node.hooke.nrows() != k || node.hooke.ncols() != k {
        v.push(format!("boundary {label} hooke must be {k}x{k}"));
    } else if !linalg::is_sym_psd(&node.hooke) {
        v.push(format!("boundary {label} hooke not symmetric positive semidefinite"));
    }
    for problem in node.kernel.violations() {
        v.push(format!("boundary {label} {problem}"));
    }
    check_force(v, &format!("boundary {label} force"), &node.external_force, k);
}

fn check_interaction(v: &mut Vec<String>, label: &str, inter: &InteractionSpec, k: usize) {
    if let InteractionSpec::Spring(kt) = inter {
        if kt.nrows() != k || kt.ncols() != k {
            v.push(format!("interaction {label} stiffness must be {k}x{k}"));
        } else if !linalg::is_spd(kt) {
            v.push(format!("interaction {label} stiffness not positive definite"));
        }
    }
}

fn validate_line(
    s: &Scenario,
    spec: &InteriorSpec1D,
    v: &mut Vec<String>,
) -> (Option<WaveModes>, f64) {
    let k = spec.mass_matrix.nrows();
    let mut matrices_ok = true;
    if k == 0 || !spec.mass_matrix.is_square() {
        v.push("interior mass matrix must be square and nonempty".into());
        matrices_ok = false;
    } else if !linalg::is_spd(&spec.mass_matrix) {
        v.push("interior mass matrix not symmetric positive definite".into());
        matrices_ok = false;
    }
    if spec.stiffness_matrix.nrows() != k || spec.stiffness_matrix.ncols() != k {
        v.push(format!("interior stiffness matrix must be {k}x{k}"));
        matrices_ok = false;
    } else if !linalg::is_spd(&spec.stiffness_matrix) {
        v.push("interior stiffness matrix not symmetric positive definite".into());
        matrices_ok = false;
    }
    if !(spec.b1.is_finite() && spec.b2.is_finite() && spec.b1 < spec.b2) {
        v.push(format!("domain requires finite b1 < b2 (got [{}, {}])", spec.b1, spec.b2));
    }
    if spec.n_cells < 8 {
        v.push(format!("n_cells must be at least 8 (got {})", spec.n_cells));
    }
    check_force(v, "interior force", &spec.force, k);
    if !s.initial.weights.is_empty() {
        check_len(v, "initial weights", s.initial.weights.len(), k);
    }

    for end in End::BOTH {
        let e = s.end(end);
        let label = end.label();
        if spec.semi_infinite[end.index()] {
            if e.boundary.is_some() || e.interaction != InteractionSpec::None {
                v.push(format!("semi-infinite end {label} cannot carry a boundary node or interaction"));
            }
            if s.initial.boundary[end.index()] != BoundaryInit::default() {
                v.push(format!("semi-infinite end {label} cannot carry boundary initial data"));
            }
            continue;
        }
        check_interaction(v, label, &e.interaction, k);
        let Some(node) = &e.boundary else {
            if e.interaction != InteractionSpec::None {
                v.push(format!("interaction at {label} requires a boundary node"));
            }
            continue;
        };
        check_boundary_node(v, label, node, k);
        if node.mass.len() != k || node.hooke.nrows() != k {
            continue;
        }
        let massless: Vec<usize> = (0..k).filter(|&i| node.mass[i] == 0.0).collect();
        if !massless.is_empty() && !node.kernel.is_empty() {
            v.push(format!("massless boundary {label} cannot carry a memory kernel"));
        }
        if e.interaction == InteractionSpec::None {
            for &i in &massless {
                if node.hooke[(i, i)] <= 0.0 {
                    v.push(format!(
                        "massless free boundary {label} component {i} has no stiffness and is undetermined"
                    ));
                }
            }
        }
        let init = &s.initial.boundary[end.index()];
        for (what, val) in [("psi", &init.psi), ("velocity", &init.velocity)] {
            if let Some(x) = val {
                check_len(v, &format!("initial boundary {label} {what}"), x.len(), k);
                if x.iter().any(|y| !y.is_finite()) {
                    v.push(format!("initial boundary {label} {what} must be finite"));
                }
            }
        }
        if e.interaction == InteractionSpec::Rigid && spec.b1 < spec.b2 {
            if let Some(psi) = &init.psi {
                let z = if end == End::B1 { spec.b1 } else { spec.b2 };
                let trace = s.initial.displacement.eval(z, spec.b1, spec.b2);
                for (i, p) in psi.iter().enumerate() {
                    let want = s.initial.weight(i) * trace;
                    if (p - want).abs() > 1e-12 * (1.0 + want.abs()) {
                        v.push(format!(
                            "rigid constraint violated at t=0 on {label}: psi_B = {p}, psi_L = {want}"
                        ));
                    }
                }
            }
        }
    }
    if s.initial.angular_mode != 0 {
        v.push("angular_mode applies only to disk interiors".into());
    }

    if !matrices_ok {
        return (None, f64::NAN);
    }
    let modes = linalg::wave_modes(&spec.mass_matrix, &spec.stiffness_matrix);
    if modes.speeds.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        v.push("wave speeds must be finite and positive".into());
        return (None, f64::NAN);
    }
    let dt_max = line_dt_max(spec, &modes);
    (Some(modes), dt_max)
}

fn validate_disk(s: &Scenario, d: &DiskSpec, v: &mut Vec<String>) -> f64 {
    for (name, x) in [("radius", d.radius), ("sigma", d.sigma), ("tension", d.tension)] {
        if !(x > 0.0 && x.is_finite()) {
            v.push(format!("disk {name} must be positive (got {x})"));
        }
    }
    for (name, x) in [("ring_lambda", d.ring_lambda), ("ring_k", d.ring_k)] {
        if !(x >= 0.0 && x.is_finite()) {
            v.push(format!("disk {name} must be nonnegative (got {x})"));
        }
    }
    if d.n_theta < 16 || d.n_theta % 2 != 0 {
        v.push(format!("n_theta must be even and at least 16 (got {})", d.n_theta));
    }
    if d.n_r < 4 {
        v.push(format!("n_r must be at least 4 (got {})", d.n_r));
    }
    check_interaction(v, "ring", &d.interaction, 1);
    check_force(v, "ring force", &d.ring_force, 1);
    if d.interaction == InteractionSpec::None && d.ring_lambda == 0.0 && d.ring_k == 0.0 {
        v.push("decoupled massless ring with no stiffness is undetermined".into());
    }
    if matches!(s.initial.velocity, VelocityInit::Travelling { .. }) {
        v.push("travelling initial velocity applies only to line interiors".into());
    }
    if s.ends[1] != EndSpec::default() || s.initial.boundary[1] != BoundaryInit::default() {
        v.push("disk scenarios have a single ring boundary; b2 must be empty".into());
    }
    if s.ends[0] != EndSpec::default() {
        v.push("disk ring parameters belong in the interior section".into());
    }
    if s.output.probe_radius_index == 0 || s.output.probe_radius_index > d.n_r {
        v.push("probe_radius_index must lie in 1..=n_r".into());
    }
    let init = &s.initial.boundary[0];
    for (what, val) in [("psi", &init.psi), ("velocity", &init.velocity)] {
        if let Some(x) = val {
            if x.len() != 1 || !x[0].is_finite() {
                v.push(format!("initial ring {what} must be one finite value"));
            }
        }
    }
    let bad = v.iter().any(|m| m.starts_with("disk") || m.starts_with("n_"));
    if bad {
        return f64::NAN;
    }
    crate::solver2d::stable_dt(d)
}

fn validate_lumped(s: &Scenario, v: &mut Vec<String>) -> f64 {
    let Some(node) = &s.end(End::B1).boundary else {
        v.push("lumped scenario requires a boundary node at b1".into());
        return f64::NAN;
    };
    let k = node.mass.len();
    if k != 1 {
        v.push("lumped scenarios are scalar (one component)".into());
        return f64::NAN;
    }
    check_boundary_node(v, "b1", node, 1);
    if !(node.mass[0] > 0.0) {
        v.push("lumped boundary node needs positive mass".into());
    }
    if s.ends[1] != EndSpec::default() || s.end(End::B1).interaction != InteractionSpec::None {
        v.push("lumped scenarios take no interaction and no b2 node".into());
    }
    let init = &s.initial.boundary[0];
    if init.psi.as_ref().is_some_and(|x| x.len() != 1 || !x[0].is_finite())
        || init.velocity.as_ref().is_some_and(|x| x.len() != 1 || !x[0].is_finite())
    {
        v.push("initial boundary b1 must be one finite value".into());
    }
    if !(node.mass[0] > 0.0) || !node.hooke[(0, 0)].is_finite() {
        return f64::NAN;
    }
    let omega = (node.hooke[(0, 0)] / node.mass[0]).sqrt();
    if omega > 0.0 {
        CFL_MAX * 2.0 / omega
    } else {
        f64::INFINITY
    }
}

/// Snapshot of a 1D interior field at one time level.
///
/// `psi` and `psi_dot` are node-major: component `c` of node `j` sits at `j * components + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState1D {
    pub grid: Vec<f64>,
    pub components: usize,
    pub psi: Vec<f64>,
    pub psi_dot: Vec<f64>,
    /// Trace of the field at b1 and b2.
    pub psi_l: [Vec<f64>; 2],
    pub time: f64,
}

impl FieldState1D {
    pub fn node(&self, j: usize) -> &[f64] {
        &self.psi[j * self.components..(j + 1) * self.components]
    }
}

/// Boundary degrees of freedom at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    pub psi_b: Vec<f64>,
    pub psi_b_dot: Vec<f64>,
    /// One auxiliary state per component when the node carries a memory kernel.
    pub kernel_state: Option<Vec<KernelState>>,
}

impl BoundaryState {
    pub fn at_rest(components: usize) -> Self {
        Self { psi_b: vec![0.0; components], psi_b_dot: vec![0.0; components], kernel_state: None }
    }
}

/// Assembled stepper for a validated scenario.
#[derive(Debug, Clone)]
pub enum CoupledSystem {
    Line(Box<CoupledSystem1D>),
    Disk(Box<MembraneSystem>),
    Lumped(ReducedSystem),
}

/// Discretizes the validated scenario into its stepper.
pub fn build_system(s: &ValidatedScenario) -> Result<CoupledSystem> {
    Ok(match &s.interior {
        Interior::Line(_) => CoupledSystem::Line(Box::new(CoupledSystem1D::assemble(s)?)),
        Interior::Disk(_) => CoupledSystem::Disk(Box::new(MembraneSystem::assemble(s)?)),
        Interior::Lumped => CoupledSystem::Lumped(ReducedSystem::from_scenario(s)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn lamb() -> Scenario {
        let mut interior = InteriorSpec1D::string(1.0, 1.0, 0.0, 20.0, 1000);
        interior.semi_infinite = [false, true];
        Scenario {
            interior: Interior::Line(interior),
            ends: [
                EndSpec { boundary: Some(BoundaryNodeSpec::scalar(1.0, 1.0)), interaction: InteractionSpec::Rigid },
                EndSpec::default(),
            ],
            t_end: 10.0,
            dt: 0.018,
            initial: InitialData::default(),
            output: OutputPlan::default(),
        }
    }

    #[test]
    fn lamb_configuration_is_accepted() {
        let v = validate_scenario(lamb()).unwrap();
        assert!((v.dt_max - 0.018).abs() < 1e-15);
    }

    #[test]
    fn negative_interaction_stiffness_rejected() {
        let mut s = lamb();
        s.ends[0].interaction = InteractionSpec::spring(-1.0);
        let Err(Error::InvalidSpec(v)) = validate_scenario(s) else { panic!() };
        assert!(v.iter().any(|m| m.contains("interaction b1 stiffness not positive definite")));
    }

    #[test]
    fn cfl_violation_rejected() {
        let mut s = lamb();
        s.dt = 0.03;
        let Err(Error::InvalidSpec(v)) = validate_scenario(s) else { panic!() };
        assert!(v.iter().any(|m| m.contains("CFL violated")));
    }

    #[test]
    fn all_violations_reported() {
        let mut s = lamb();
        s.dt = -1.0;
        s.t_end = f64::NAN;
        if let Interior::Line(spec) = &mut s.interior {
            spec.n_cells = 3;
        }
        let Err(Error::InvalidSpec(v)) = validate_scenario(s) else { panic!() };
        assert!(v.len() >= 3, "{v:?}");
    }

    #[test]
    fn rigid_initial_mismatch_rejected() {
        let mut s = lamb();
        s.initial.displacement = Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 };
        s.initial.boundary[0].psi = Some(vec![0.5]);
        assert!(validate_scenario(s).is_err());
    }

    #[test]
    fn massless_kernel_rejected() {
        let mut s = lamb();
        let node = BoundaryNodeSpec::scalar(0.0, 1.0)
            .with_kernel(MemoryKernel::instantaneous(1.0));
        s.ends[0].boundary = Some(node);
        assert!(validate_scenario(s).is_err());
    }
}
