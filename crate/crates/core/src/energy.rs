//! Energy ledgers: interior and boundary energies, interface fluxes and the detailed balance.
//!
//! Sign conventions at an end with outward normal `n` (`-1` at b1, `+1` at b2):
//! the interior flux out of the domain is `s_d = -n psi_t . K psi_z`, the
//! interaction power into the interior is `k~ (psi_B - psi_L) . psi_L'`, and
//! the detailed balance residual is their sum.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::quad_form;
use crate::model::{BoundaryNodeSpec, End, InteractionSpec};
use crate::solver1d::{interaction_forces, CoupledState1D, CoupledSystem1D, EndKind};
use crate::solver2d::{MembraneState, MembraneSystem};

/// Energy bookkeeping at one output time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub time: f64,
    pub h_d_total: f64,
    /// Boundary energy at b1 and b2 (the ring is stored at b1).
    pub h_b: [f64; 2],
    /// Interior energy flux out through each end.
    pub s_d: [f64; 2],
    /// Power the interaction delivers into the interior at each end.
    pub interaction_power: [f64; 2],
    pub balance_residual: [f64; 2],
    /// Power of all external forces.
    pub external_power: f64,
    /// Power removed by friction and by outflow ends.
    pub dissipated_power: f64,
    pub total: f64,
}

impl EnergyLedger {
    pub fn is_finite(&self) -> bool {
        let arr = [
            self.time,
            self.h_d_total,
            self.external_power,
            self.dissipated_power,
            self.total,
        ];
        arr.iter()
            .chain(&self.h_b)
            .chain(&self.s_d)
            .chain(&self.interaction_power)
            .chain(&self.balance_residual)
            .all(|x| x.is_finite())
    }
}

/// Interior energy with its nodal density.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorEnergy {
    pub total: f64,
    pub density: Vec<f64>,
}

/// `H_D = 1/2 psi_t . M psi_t + 1/2 psi_z . K psi_z` integrated over the line.
///
/// Gradients are taken per cell; the nodal density averages the two adjacent
/// cells, so the trapezoid rule over nodes equals the lumped discrete energy.
pub fn interior_energy(sys: &CoupledSystem1D, state: &CoupledState1D) -> InteriorEnergy {
    let k = sys.components();
    let n = sys.n_nodes();
    let dz = sys.dz();
    let mass = sys.mass_matrix();
    let stiff = sys.stiffness_matrix();
    let cell: Vec<f64> = (0..n - 1)
        .map(|j| {
            let a = state.psi(sys, j);
            let b = state.psi(sys, j + 1);
            let g: Vec<f64> = (0..k).map(|c| (b[c] - a[c]) / dz).collect();
            0.5 * quad_form(stiff, &g, &g)
        })
        .collect();
    let density: Vec<f64> = (0..n)
        .map(|j| {
            let v = state.psi_dot(sys, j);
            let kin = 0.5 * quad_form(mass, &v, &v);
            let pot = match j {
                0 => cell[0],
                _ if j == n - 1 => cell[n - 2],
                _ => 0.5 * (cell[j - 1] + cell[j]),
            };
            kin + pot
        })
        .collect();
    let total = dz * (density.iter().sum::<f64>() - 0.5 * (density[0] + density[n - 1]));
    InteriorEnergy { total, density }
}

/// `1/2 psi_B' . m psi_B' + 1/2 psi_B . H psi_B + 1/2 (psi_B - psi_L) . k~ (psi_B - psi_L)`.
///
/// The interaction energy is booked entirely on the boundary; it vanishes under the rigid constraint.
pub fn boundary_energy(
    node: &BoundaryNodeSpec,
    interaction: &InteractionSpec,
    psi_b: &[f64],
    psi_b_dot: &[f64],
    psi_l: &[f64],
) -> f64 {
    let kin: f64 = node.mass.iter().zip(psi_b_dot).map(|(m, v)| 0.5 * m * v * v).sum();
    let pot = 0.5 * quad_form(&node.hooke, psi_b, psi_b);
    let int = match interaction {
        InteractionSpec::Spring(kt) => {
            let d: Vec<f64> = psi_b.iter().zip(psi_l).map(|(b, l)| b - l).collect();
            0.5 * quad_form(kt, &d, &d)
        }
        InteractionSpec::None | InteractionSpec::Rigid => 0.0,
    };
    kin + pot + int
}

fn end_boundary_energy(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> f64 {
    let Some(node) = sys.boundary_spec(end) else {
        return 0.0;
    };
    let interaction = match sys.end_kind(end) {
        EndKind::Spring => InteractionSpec::Spring(sys.interaction_stiffness(end).cloned().unwrap_or_else(|| DMatrix::zeros(0, 0))),
        EndKind::Rigid => InteractionSpec::Rigid,
        _ => InteractionSpec::None,
    };
    boundary_energy(node, &interaction, &state.psi_b(sys, end), &state.psi_b_dot(sys, end), &state.psi_l(sys, end))
}

/// Interior flux out of `end`; at an outflow end this is the power absorbed by the closure.
pub fn interior_flux(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> f64 {
    let v = state.psi_l_dot(sys, end);
    match sys.end_kind(end) {
        EndKind::Clamped => 0.0,
        EndKind::Outflow => {
            let z = sys.outflow_impedance(end).expect("outflow end");
            quad_form(z, &v, &v)
        }
        _ => {
            let flux = sys.interface_force(state, end).flux;
            -end.normal() * v.iter().zip(&flux).map(|(a, b)| a * b).sum::<f64>()
        }
    }
}

/// Power of the interaction into the interior, `k~ (psi_B - psi_L) . psi_L'`.
pub fn interaction_power(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> f64 {
    if sys.end_kind(end) != EndKind::Spring {
        return 0.0;
    }
    let (on_interior, _) = interaction_forces(sys, state, end);
    let v = state.psi_l_dot(sys, end);
    on_interior.iter().zip(&v).map(|(f, v)| f * v).sum()
}

/// Power delivered through the interaction to the interior and to the boundary node, in that order.
///
/// Both are evaluated against the trace velocity, so they cancel exactly.
pub fn interface_powers(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> (f64, f64) {
    let (on_interior, on_boundary) = interaction_forces(sys, state, end);
    let v = state.psi_l_dot(sys, end);
    let p = |f: &[f64]| f.iter().zip(&v).map(|(f, v)| f * v).sum::<f64>();
    (p(&on_interior), p(&on_boundary))
}

/// `s_d + interaction power` at a spring end; identically zero elsewhere.
pub fn detailed_balance_residual(sys: &CoupledSystem1D, state: &CoupledState1D, end: End) -> f64 {
    if sys.end_kind(end) != EndKind::Spring {
        return 0.0;
    }
    interior_flux(sys, state, end) + interaction_power(sys, state, end)
}

fn external_power(sys: &CoupledSystem1D, state: &CoupledState1D) -> f64 {
    let t = state.time();
    let k = sys.components();
    let n = sys.n_nodes();
    let mut p = 0.0;
    let fd = sys.external_interior_force(t);
    if fd.iter().any(|f| *f != 0.0) {
        for j in 0..n {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let v = state.psi_dot(sys, j);
            p += w * sys.dz() * (0..k).map(|c| fd[c] * v[c]).sum::<f64>();
        }
    }
    for end in End::BOTH {
        if sys.boundary_spec(end).is_some() {
            let f = sys.external_boundary_force(end, t);
            let v = state.psi_b_dot(sys, end);
            p += f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    p
}

fn dissipated_power(sys: &CoupledSystem1D, state: &CoupledState1D) -> f64 {
    End::BOTH
        .iter()
        .map(|&end| {
            let friction = if sys.boundary_spec(end).is_some() {
                let f = state.friction(sys, end);
                let v = state.psi_b_dot(sys, end);
                f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            } else {
                0.0
            };
            let outflow = if sys.end_kind(end) == EndKind::Outflow { interior_flux(sys, state, end) } else { 0.0 };
            friction + outflow
        })
        .sum()
}

/// Full ledger of a 1D system at the settled level.
pub fn ledger_1d(sys: &CoupledSystem1D, state: &CoupledState1D) -> EnergyLedger {
    let h_d = interior_energy(sys, state).total;
    let h_b = [end_boundary_energy(sys, state, End::B1), end_boundary_energy(sys, state, End::B2)];
    let s_d = [interior_flux(sys, state, End::B1), interior_flux(sys, state, End::B2)];
    let ip = [interaction_power(sys, state, End::B1), interaction_power(sys, state, End::B2)];
    let res = [detailed_balance_residual(sys, state, End::B1), detailed_balance_residual(sys, state, End::B2)];
    EnergyLedger {
        time: state.time(),
        h_d_total: h_d,
        h_b,
        s_d,
        interaction_power: ip,
        balance_residual: res,
        external_power: external_power(sys, state),
        dissipated_power: dissipated_power(sys, state),
        total: h_d + h_b[0] + h_b[1],
    }
}

/// Ledger of the membrane and its ring; ring sums are weighted by arc length.
pub fn ledger_2d(sys: &MembraneSystem, state: &MembraneState) -> EnergyLedger {
    let h_d = sys.interior_energy(state);
    let h_ring = sys.ring_energy(state);
    let ri = sys.interface(state);
    let vl = state.ring_trace_velocity(sys);
    let arc = sys.arc();
    let s_d: f64 = -arc * ri.normal_flux.iter().zip(&vl).map(|(f, v)| f * v).sum::<f64>();
    let ip: f64 = arc * ri.interaction.iter().zip(&vl).map(|(f, v)| f * v).sum::<f64>();
    let res = if sys.ring_kind() == crate::solver2d::RingKind::Spring { s_d + ip } else { 0.0 };
    EnergyLedger {
        time: state.time(),
        h_d_total: h_d,
        h_b: [h_ring, 0.0],
        s_d: [s_d, 0.0],
        interaction_power: [ip, 0.0],
        balance_residual: [res, 0.0],
        external_power: sys.external_power(state),
        dissipated_power: 0.0,
        total: h_d + h_ring,
    }
}

/// Summary of a ledger trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    /// `max |E(t) - E(0) - W(t)| / max |E|` with `W` the net work of external forces and dissipation.
    pub max_drift: f64,
    /// RMS of `dE/dt - P_ext + P_diss` over interior output times.
    pub rms_defect: f64,
    /// Largest `|dE/dt - P_ext + P_diss|`.
    pub max_defect: f64,
    /// Fitted order of the detailed balance residual under refinement, per end.
    pub per_end_residual_order: [Option<f64>; 2],
}

/// Drift and balance defects of a uniformly spaced ledger trajectory.
pub fn conservation_report(ledgers: &[EnergyLedger]) -> ConservationReport {
    let n = ledgers.len();
    let mut report = ConservationReport {
        max_drift: 0.0,
        rms_defect: 0.0,
        max_defect: 0.0,
        per_end_residual_order: [None, None],
    };
    if n < 2 {
        return report;
    }
    let e0 = ledgers[0].total;
    let peak = ledgers.iter().map(|l| l.total.abs()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { peak } else { 1.0 };
    let net = |l: &EnergyLedger| l.external_power - l.dissipated_power;
    let mut work = 0.0;
    for w in ledgers.windows(2) {
        work += 0.5 * (w[1].time - w[0].time) * (net(&w[0]) + net(&w[1]));
        let drift = (w[1].total - e0 - work).abs() / scale;
        report.max_drift = report.max_drift.max(drift);
    }
    let mut sq = 0.0;
    let mut count = 0usize;
    for i in 1..n - 1 {
        let de = (ledgers[i + 1].total - ledgers[i - 1].total) / (ledgers[i + 1].time - ledgers[i - 1].time);
        let d = (de - net(&ledgers[i])).abs();
        sq += d * d;
        count += 1;
        report.max_defect = report.max_defect.max(d);
    }
    if count > 0 {
        report.rms_defect = (sq / count as f64).sqrt();
    }
    report
}

/// Least-squares slope of `log r` against `log h`.
pub fn fitted_order(ladder: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .filter(|(h, r)| *h > 0.0 && *r > 0.0)
        .map(|(h, r)| (h.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (den > 0.0).then(|| num / den)
}

impl ConservationReport {
    /// Attaches residual orders from a refinement ladder of `(h, max |residual| per end)`.
    pub fn with_residual_ladder(mut self, ladder: &[(f64, [f64; 2])]) -> Self {
        for e in 0..2 {
            let pts: Vec<(f64, f64)> = ladder.iter().map(|(h, r)| (*h, r[e])).collect();
            self.per_end_residual_order[e] = fitted_order(&pts);
        }
        self
    }
}
