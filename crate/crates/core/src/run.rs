//! Simulation driver: steps a validated scenario to its end time and records
//! trajectories, ledgers and field snapshots.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::energy::{self, conservation_report, ConservationReport, EnergyLedger};
use crate::error::Result;
use crate::model::{build_system, CoupledSystem, End, ValidatedScenario};
use crate::output::{ledger_table, save_json, Table};
use crate::solver1d::reduced::ReducedSystem;
use crate::solver1d::{step_coupled, CoupledSystem1D};
use crate::solver2d::{dominant_frequency, step_disk, MembraneSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub table: Table,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub kind: &'static str,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub records: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_balance_residual: [f64; 2],
    /// Disk only: dominant frequency of the probe signal, cycles per unit time.
    pub probe_frequency: Option<f64>,
    pub conservation: ConservationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: Table,
    pub ledger: Vec<EnergyLedger>,
    pub snapshots: Vec<Snapshot>,
    /// Disk probe series at every step (empty otherwise).
    pub probe: Vec<f64>,
    pub summary: RunSummary,
}

impl RunOutput {
    /// Boundary displacement at `end`, component 0, over the recorded times.
    pub fn psi_b(&self, end: End) -> Option<Vec<f64>> {
        self.trajectory
            .column(&format!("psi_B_{}[0]", end.label()))
            .or_else(|| (end == End::B1).then(|| self.trajectory.column("psi_B")).flatten())
    }

    pub fn times(&self) -> Vec<f64> {
        self.trajectory.column("t").unwrap_or_default()
    }

    /// Writes `trajectory.csv`, `ledger.csv`, `summary.json` and `snapshot_*.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let p = dir.join("trajectory.csv");
        self.trajectory.save_csv(&p)?;
        paths.push(p);
        let p = dir.join("ledger.csv");
        ledger_table(&self.ledger).save_csv(&p)?;
        paths.push(p);
        for (i, s) in self.snapshots.iter().enumerate() {
            let p = dir.join(format!("snapshot_{i:03}.csv"));
            s.table.save_csv(&p)?;
            paths.push(p);
        }
        let p = dir.join("summary.json");
        save_json(&self.summary, &p)?;
        paths.push(p);
        Ok(paths)
    }
}

fn snapshot_steps(v: &ValidatedScenario) -> Vec<(usize, f64)> {
    v.output.snapshots.iter().map(|t| ((t / v.dt).round() as usize, *t)).collect()
}

/// Runs the scenario to `t_end`, recording every `output.stride` steps.
pub fn simulate(v: &ValidatedScenario) -> Result<RunOutput> {
    match build_system(v)? {
        CoupledSystem::Line(sys) => simulate_line(v, &sys),
        CoupledSystem::Disk(sys) => simulate_disk(v, &sys),
        CoupledSystem::Lumped(red) => simulate_lumped(v, &red),
    }
}

fn line_snapshot(sys: &CoupledSystem1D, st: &crate::solver1d::CoupledState1D) -> Table {
    let k = sys.components();
    let mut cols = vec!["z".to_string()];
    cols.extend((0..k).map(|c| format!("psi[{c}]")));
    cols.extend((0..k).map(|c| format!("psi_t[{c}]")));
    let mut t = Table::new(cols);
    for j in 0..sys.n_nodes() {
        let mut row = vec![sys.z(j)];
        row.extend_from_slice(st.psi(sys, j));
        row.extend(st.psi_dot(sys, j));
        t.push(row);
    }
    t
}

fn simulate_line(v: &ValidatedScenario, sys: &CoupledSystem1D) -> Result<RunOutput> {
    let k = sys.components();
    let mut cols = vec!["t".to_string()];
    for name in ["psi_B", "psi_L"] {
        for end in End::BOTH {
            cols.extend((0..k).map(|c| format!("{name}_{}[{c}]", end.label())));
        }
    }
    cols.extend(["H_D", "H_B", "balance_residual"].map(String::from));
    let mut traj = Table::new(cols);
    let mut ledger = Vec::new();
    let mut snapshots = Vec::new();
    let snaps = snapshot_steps(v);
    let n = v.n_steps();
    let mut st = sys.initial_state()?;
    loop {
        let step = st.step_index();
        if step % v.output.stride == 0 || step == n {
            let l = energy::ledger_1d(sys, &st);
            let mut row = vec![st.time()];
            for end in End::BOTH {
                row.extend(st.psi_b(sys, end));
            }
            for end in End::BOTH {
                row.extend(st.psi_l(sys, end));
            }
            let res = l.balance_residual[0].abs().max(l.balance_residual[1].abs());
            row.extend([l.h_d_total, l.h_b[0] + l.h_b[1], res]);
            traj.push(row);
            ledger.push(l);
        }
        for (s, t) in &snaps {
            if *s == step {
                snapshots.push(Snapshot { time: *t, table: line_snapshot(sys, &st) });
            }
        }
        if step >= n {
            break;
        }
        step_coupled(sys, &mut st)?;
    }
    Ok(finish("line", v, traj, ledger, snapshots, Vec::new()))
}

fn disk_snapshot(sys: &MembraneSystem, st: &crate::solver2d::MembraneState) -> Table {
    let mut cols = vec!["r".to_string()];
    cols.extend((0..sys.n_theta()).map(|j| format!("theta[{j}]")));
    let mut t = Table::new(cols);
    for (i, r) in sys.radii().iter().enumerate() {
        let mut row = vec![*r];
        row.extend((0..sys.n_theta()).map(|j| st.psi(sys, i, j)));
        t.push(row);
    }
    t
}

fn simulate_disk(v: &ValidatedScenario, sys: &MembraneSystem) -> Result<RunOutput> {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..sys.n_theta()).map(|j| format!("psi_B[{j}]")));
    cols.push("H_B".into());
    let mut traj = Table::new(cols);
    let mut ledger = Vec::new();
    let mut snapshots = Vec::new();
    let snaps = snapshot_steps(v);
    let rings = v.output.probe_radius_index.max(1);
    let mut probe = Vec::new();
    let n = v.n_steps();
    let mut st = sys.initial_state()?;
    loop {
        let step = st.step_index();
        probe.push(st.probe(sys, rings));
        if step % v.output.stride == 0 || step == n {
            let l = energy::ledger_2d(sys, &st);
            let mut row = vec![st.time()];
            row.extend(st.ring_faces(sys).1);
            row.push(l.h_b[0]);
            traj.push(row);
            ledger.push(l);
        }
        for (s, t) in &snaps {
            if *s == step {
                snapshots.push(Snapshot { time: *t, table: disk_snapshot(sys, &st) });
            }
        }
        if step >= n {
            break;
        }
        step_disk(sys, &mut st)?;
    }
    Ok(finish("disk", v, traj, ledger, snapshots, probe))
}

fn simulate_lumped(v: &ValidatedScenario, red: &ReducedSystem) -> Result<RunOutput> {
    let tr = red.integrate()?;
    let cols = ["t", "psi_B", "psi_B_t", "friction", "force", "H_B"];
    let mut traj = Table::new(cols.map(String::from).to_vec());
    let mut ledger = Vec::new();
    let energy = tr.energy(red.mass, red.hooke);
    for i in (0..tr.t.len()).filter(|i| i % v.output.stride == 0 || *i + 1 == tr.t.len()) {
        traj.push(vec![tr.t[i], tr.psi[i], tr.velocity[i], tr.friction[i], tr.force[i], energy[i]]);
        ledger.push(EnergyLedger {
            time: tr.t[i],
            h_d_total: 0.0,
            h_b: [energy[i], 0.0],
            s_d: [0.0; 2],
            interaction_power: [0.0; 2],
            balance_residual: [0.0; 2],
            external_power: tr.force[i] * tr.velocity[i],
            dissipated_power: tr.friction[i] * tr.velocity[i],
            total: energy[i],
        });
    }
    Ok(finish("lumped", v, traj, ledger, Vec::new(), Vec::new()))
}

fn finish(
    kind: &'static str,
    v: &ValidatedScenario,
    trajectory: Table,
    ledger: Vec<EnergyLedger>,
    snapshots: Vec<Snapshot>,
    probe: Vec<f64>,
) -> RunOutput {
    let mut max_res = [0.0_f64; 2];
    for l in &ledger {
        for e in 0..2 {
            max_res[e] = max_res[e].max(l.balance_residual[e].abs());
        }
    }
    let summary = RunSummary {
        kind,
        steps: v.n_steps(),
        dt: v.dt,
        t_end: v.t_end,
        records: trajectory.len(),
        initial_energy: ledger.first().map_or(0.0, |l| l.total),
        final_energy: ledger.last().map_or(0.0, |l| l.total),
        max_balance_residual: max_res,
        probe_frequency: (probe.len() > 8).then(|| dominant_frequency(&probe, v.dt)),
        conservation: conservation_report(&ledger),
    };
    RunOutput { trajectory, ledger, snapshots, probe, summary }
}
