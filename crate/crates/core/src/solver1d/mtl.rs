//! Multiconductor transmission line feeding an LC load.
//!
//! With charge `psi` the line is `L psi_tt = C^{-1} psi_zz`, current `I = psi_t`
//! and voltage `V = -C^{-1} psi_z`. The load inductance and inverse
//! capacitance play boundary mass and hooke; the coupling capacitance `A`
//! is the interaction spring.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{
    BoundaryInit, BoundaryNodeSpec, Direction, EndSpec, InitialData, Interior, InteriorSpec1D,
    InteractionSpec, OutputPlan, Profile, Scenario, VelocityInit, CFL_MAX,
};
use crate::linalg;

use super::{CoupledState1D, CoupledSystem1D};

/// Semi-infinite line with a lumped load at b1.
#[derive(Debug, Clone)]
pub struct MtlLine {
    /// Per-unit-length inductance `L`.
    pub inductance: DMatrix<f64>,
    /// Per-unit-length capacitance `C`.
    pub capacitance: DMatrix<f64>,
    /// Load inductance (diagonal).
    pub load_inductance: Vec<f64>,
    pub load_capacitance: DMatrix<f64>,
    /// `Spring(A)` for capacitive coupling or `Rigid` for a direct connection.
    pub coupling: InteractionSpec,
    /// Truncation length of the line.
    pub length: f64,
    pub n_cells: usize,
    pub t_end: f64,
    /// Initial load charge; the line starts with a right-going pulse matching it.
    pub load_charge: Vec<f64>,
    pub pulse_width: f64,
}

impl MtlLine {
    /// Scalar line with unit constants and a rigid unit LC load.
    pub fn unit(length: f64, n_cells: usize, t_end: f64) -> Self {
        let one = DMatrix::from_element(1, 1, 1.0);
        Self {
            inductance: one.clone(),
            capacitance: one.clone(),
            load_inductance: vec![1.0],
            load_capacitance: one,
            coupling: InteractionSpec::Rigid,
            length,
            n_cells,
            t_end,
            load_charge: vec![1.0],
            pulse_width: 1.0,
        }
    }
}

/// Maps the line and its load onto a 1D coupled scenario (time step at the largest stable Courant factor).
pub fn build_mtl(line: &MtlLine) -> Result<Scenario> {
    let mut v = Vec::new();
    if !linalg::is_spd(&line.inductance) {
        v.push("line inductance not positive definite".to_string());
    }
    if !linalg::is_spd(&line.capacitance) {
        v.push("line capacitance not positive definite".to_string());
    }
    if !linalg::is_spd(&line.load_capacitance) {
        v.push("load capacitance not positive definite".to_string());
    }
    if !(line.pulse_width > 0.0) {
        v.push("pulse width must be positive".to_string());
    }
    if !v.is_empty() {
        return Err(Error::InvalidSpec(v));
    }
    let c_inv = line.capacitance.clone().try_inverse().expect("spd");
    let load_c_inv = line.load_capacitance.clone().try_inverse().expect("spd");
    let k = line.inductance.nrows();
    let interior = InteriorSpec1D {
        mass_matrix: line.inductance.clone(),
        stiffness_matrix: c_inv.clone(),
        b1: 0.0,
        b2: line.length,
        semi_infinite: [false, true],
        n_cells: line.n_cells,
        force: None,
    };
    let modes = linalg::wave_modes(&line.inductance, &c_inv);
    let a_max = modes.speeds.last().copied().unwrap_or(1.0);
    let dt = CFL_MAX * interior.dz() / a_max;
    let node = BoundaryNodeSpec {
        mass: line.load_inductance.clone(),
        hooke: load_c_inv,
        external_force: None,
        kernel: Default::default(),
    };
    let mut weights = line.load_charge.clone();
    weights.resize(k, 0.0);
    Ok(Scenario {
        interior: Interior::Line(interior),
        ends: [EndSpec { boundary: Some(node), interaction: line.coupling.clone() }, EndSpec::default()],
        t_end: line.t_end,
        dt,
        initial: InitialData {
            displacement: Profile::Gaussian { amplitude: 1.0, center: 0.0, width: line.pulse_width },
            velocity: VelocityInit::Travelling { travelling: Direction::Right },
            weights,
            boundary: [BoundaryInit::default(), BoundaryInit::default()],
            ..InitialData::default()
        },
        output: OutputPlan::default(),
    })
}

/// Max-norm residuals of the telegrapher pair over interior nodes.
///
/// With `V = -C^{-1} psi_z` and `I = psi_t` formed by centered differences,
/// returns `(|V_z + L I_t|, |I_z + C V_t|)`. Both vanish for the continuum
/// solution; discretely they are second-order defects.
pub fn telegrapher_residual(sys: &CoupledSystem1D, prev: &CoupledState1D, state: &CoupledState1D, next: &CoupledState1D) -> (f64, f64) {
    let k = sys.components();
    let n = sys.n_nodes();
    let dz = sys.dz();
    let dt = sys.dt();
    let c_inv = sys.stiffness_matrix();
    let l = sys.mass_matrix();
    let c = c_inv.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(k, k));
    let voltage = |s: &CoupledState1D, j: usize| -> Vec<f64> {
        let g: Vec<f64> = (0..k).map(|d| (s.psi(sys, j + 1)[d] - s.psi(sys, j - 1)[d]) / (2.0 * dz)).collect();
        (0..k).map(|a| -(0..k).map(|b| c_inv[(a, b)] * g[b]).sum::<f64>()).collect()
    };
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for j in 2..n - 2 {
        let vp = voltage(state, j + 1);
        let vm = voltage(state, j - 1);
        let i_t: Vec<f64> = (0..k)
            .map(|d| (next.psi_dot(sys, j)[d] - prev.psi_dot(sys, j)[d]) / (2.0 * dt))
            .collect();
        for a in 0..k {
            let vz = (vp[a] - vm[a]) / (2.0 * dz);
            let li: f64 = (0..k).map(|b| l[(a, b)] * i_t[b]).sum();
            r1 = r1.max((vz + li).abs());
        }
        let ip = state.psi_dot(sys, j + 1);
        let im = state.psi_dot(sys, j - 1);
        let vn = voltage(next, j);
        let vpr = voltage(prev, j);
        for a in 0..k {
            let iz = (ip[a] - im[a]) / (2.0 * dz);
            let cv: f64 = (0..k).map(|b| c[(a, b)] * (vn[b] - vpr[b]) / (2.0 * dt)).sum();
            r2 = r2.max((iz + cv).abs());
        }
    }
    (r1, r2)
}
