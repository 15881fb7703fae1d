//! Command-line front end.
//!
//! ```text
//! structbc run SCENARIO [--out DIR] [--dt DT] [--t-end T] [--seed N]
//! structbc sweep SCENARIO --ktilde 1,10,100,1000
//! structbc converge SCENARIO --levels 3
//! structbc respond SCENARIO
//! structbc energy-audit SCENARIO
//! ```
//!
//! Failures print one JSON object on stderr and exit with
//! 2 (validation), 3 (numerical blowup), 4 (convergence or tail) or 1 (I/O).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{fitted_order, ConservationReport};
use crate::error::{Error, Result};
use crate::kernels::{kernel_from_string_coupling, MemoryKernel};
use crate::model::{
    build_system, load_scenario, validate_scenario, CoupledSystem, End, InteractionSpec, Interior, Scenario,
};
use crate::output::{save_json, Table};
use crate::response::{
    check_positive_definite_ae_seeded, measure_admittance, write_response_csv, ComplexFrequencyGrid, ImpulseProbe,
    PositivityVerdict,
};
use crate::run::{simulate, RunOutput};
use crate::solver1d::analytic::lamb_analytic;
use crate::solver1d::reduced::{integrate_forced, ReducedInit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Run,
    Sweep,
    Converge,
    Respond,
    EnergyAudit,
}

/// Everything one invocation needs; written to `manifest.json` in the output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: PathBuf,
    pub command: CommandKind,
    pub out: PathBuf,
    pub seed: u64,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub ktilde: Vec<f64>,
    pub levels: usize,
}

#[derive(Parser)]
#[command(name = "structbc", version, about = "Wave equations with structured boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate and write trajectory, ledger and summary.
    Run(Common),
    /// Replace the b1 interaction by springs of the given stiffnesses and compare with the rigid limit.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        ktilde: Vec<f64>,
    },
    /// Refinement ladder with measured orders.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Impulse-response admittance at b1 on the standard frequency grid.
    Respond(Common),
    /// Conservation report and detailed balance residual series.
    EnergyAudit(Common),
}

impl Cmd {
    fn manifest(self) -> RunManifest {
        let (kind, c, ktilde, levels) = match self {
            Cmd::Run(c) => (CommandKind::Run, c, Vec::new(), 0),
            Cmd::Sweep { common, ktilde } => (CommandKind::Sweep, common, ktilde, 0),
            Cmd::Converge { common, levels } => (CommandKind::Converge, common, Vec::new(), levels),
            Cmd::Respond(c) => (CommandKind::Respond, c, Vec::new(), 0),
            Cmd::EnergyAudit(c) => (CommandKind::EnergyAudit, c, Vec::new(), 0),
        };
        RunManifest { scenario: c.scenario, command: kind, out: c.out, seed: c.seed, dt: c.dt, t_end: c.t_end, ktilde, levels }
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
    violations: Vec<String>,
}

/// Parses `std::env::args`, executes and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return 0;
            }
            let diag = Diagnostic { error: "Usage", exit_code: 2, message: e.to_string(), violations: Vec::new() };
            eprintln!("{}", serde_json::to_string(&diag).unwrap_or_default());
            return 2;
        }
    };
    match execute(&cli.command.manifest()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

fn report(e: &Error) {
    let violations = match e {
        Error::InvalidSpec(v) => v.clone(),
        _ => Vec::new(),
    };
    let diag = Diagnostic { error: e.kind(), exit_code: e.exit_code(), message: e.to_string(), violations };
    eprintln!("{}", serde_json::to_string(&diag).unwrap_or_default());
}

/// Loads the scenario and applies the `--dt` and `--t-end` overrides.
pub fn load_with_overrides(m: &RunManifest) -> Result<Scenario> {
    let mut s = load_scenario(&m.scenario)?;
    if let Some(dt) = m.dt {
        s.dt = dt;
    }
    if let Some(t) = m.t_end {
        s.t_end = t;
    }
    Ok(s)
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::invalid(format!("output directory {} not writable: {e}", dir.display())))?;
    let probe = dir.join(".write_test");
    std::fs::write(&probe, b"")
        .and_then(|_| std::fs::remove_file(&probe))
        .map_err(|e| Error::invalid(format!("output directory {} not writable: {e}", dir.display())))
}

/// Runs one manifest and returns the written artifact paths.
pub fn execute(m: &RunManifest) -> Result<Vec<PathBuf>> {
    let s = load_with_overrides(m)?;
    let v = validate_scenario(s.clone())?;
    prepare_out(&m.out)?;
    let mut paths = match m.command {
        CommandKind::Run => simulate(&v)?.write(&m.out)?,
        CommandKind::Sweep => {
            let rows = sweep_ktilde(&s, &m.ktilde)?;
            let p = m.out.join("sweep.csv");
            sweep_table(&rows).save_csv(&p)?;
            vec![p]
        }
        CommandKind::Converge => {
            let study = converge(&s, m.levels)?;
            let p = m.out.join("converge.csv");
            study.table().save_csv(&p)?;
            let q = m.out.join("converge.json");
            save_json(&study, &q)?;
            vec![p, q]
        }
        CommandKind::Respond => {
            let mut rest = s.clone();
            rest.initial = Default::default();
            respond(&rest, m.seed, &m.out)?
        }
        CommandKind::EnergyAudit => {
            let out = simulate(&v)?;
            write_audit(&energy_audit(&out), &out, &m.out)?
        }
    };
    let p = m.out.join("manifest.json");
    save_json(m, &p)?;
    paths.push(p);
    Ok(paths)
}

/// One member of a k~ sweep: relative sup errors against the rigid Lamb solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub k_tilde: f64,
    /// Full coupled simulation with a spring of stiffness `k_tilde` at b1.
    pub err_full: f64,
    /// Boundary-only model with the string-coupling kernel.
    pub err_reduced: f64,
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(vec!["k_tilde".into(), "err_full".into(), "err_reduced".into()]);
    for r in rows {
        t.push(vec![r.k_tilde, r.err_full, r.err_reduced]);
    }
    t
}

struct LambData {
    m: f64,
    k: f64,
    tension: f64,
    a: f64,
    kernel: MemoryKernel,
}

fn lamb_data(s: &Scenario) -> Result<LambData> {
    let Interior::Line(spec) = &s.interior else {
        return Err(Error::invalid("sweep needs a line interior"));
    };
    if spec.components() != 1 {
        return Err(Error::invalid("sweep needs a scalar line"));
    }
    let node = s.ends[0].boundary.as_ref().ok_or_else(|| Error::invalid("sweep needs a boundary node at b1"))?;
    let tension = spec.stiffness_matrix[(0, 0)];
    let rho = spec.mass_matrix[(0, 0)];
    Ok(LambData {
        m: node.mass[0],
        k: node.hooke[(0, 0)],
        tension,
        a: (tension / rho).sqrt(),
        kernel: node.kernel.clone(),
    })
}

fn rel_sup(got: &[f64], want: &[f64]) -> f64 {
    let peak = want.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let err = got.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if peak > 0.0 {
        err / peak
    } else {
        err
    }
}

/// Sweeps the b1 interaction stiffness; each member runs on its own thread.
pub fn sweep_ktilde(base: &Scenario, ks: &[f64]) -> Result<Vec<SweepRow>> {
    let d = lamb_data(base)?;
    if ks.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::invalid("every k_tilde must be positive and finite"));
    }
    ks.par_iter()
        .map(|&kt| {
            let mut s = base.clone();
            s.ends[0].interaction = InteractionSpec::spring(kt);
            let v = validate_scenario(s)?;
            let CoupledSystem::Line(sys) = build_system(&v)? else { unreachable!() };
            let st = sys.initial_state()?;
            let init = (st.psi_b(&sys, End::B1)[0], st.psi_b_dot(&sys, End::B1)[0]);
            let out = simulate(&v)?;
            let t = out.times();
            let reference: Vec<f64> =
                t.iter().map(|t| lamb_analytic(d.m, d.tension, d.a, d.k, init, *t)).collect::<Result<_>>()?;
            let err_full = rel_sup(&out.psi_b(End::B1).unwrap_or_default(), &reference);
            let mut kernel = kernel_from_string_coupling(d.a, kt, d.tension)?;
            kernel.terms.extend(d.kernel.terms.iter().copied());
            kernel.instantaneous += d.kernel.instantaneous;
            let red = integrate_forced(
                d.m,
                d.k,
                &kernel,
                ReducedInit { psi: init.0, velocity: init.1 },
                None,
                v.t_end,
                v.dt,
            )?;
            let reference: Vec<f64> =
                red.t.iter().map(|t| lamb_analytic(d.m, d.tension, d.a, d.k, init, *t)).collect::<Result<_>>()?;
            Ok(SweepRow { k_tilde: kt, err_full, err_reduced: rel_sup(&red.psi, &reference) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    /// Grid spacing (time step for lumped systems).
    pub h: f64,
    pub dt: f64,
    /// `max |q_l - q_{l+1}|` on the common output times; `None` on the finest level.
    pub diff_to_next: Option<f64>,
    /// `log2(diff_l / diff_{l+1})`.
    pub order: Option<f64>,
    pub max_balance_residual: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    /// Name of the compared quantity.
    pub quantity: String,
    pub rows: Vec<ConvergenceRow>,
    pub fitted_order: Option<f64>,
    pub per_end_residual_order: [Option<f64>; 2],
}

impl ConvergenceStudy {
    pub fn table(&self) -> Table {
        let cols = ["level", "h", "dt", "diff_to_next", "order", "balance_residual_b1", "balance_residual_b2"];
        let mut t = Table::new(cols.map(String::from).to_vec());
        for r in &self.rows {
            t.push(vec![
                r.level as f64,
                r.h,
                r.dt,
                r.diff_to_next.unwrap_or(f64::NAN),
                r.order.unwrap_or(f64::NAN),
                r.max_balance_residual[0],
                r.max_balance_residual[1],
            ]);
        }
        t
    }
}

/// Scenario refined by `factor`: grid spacing and time step divided, records kept at the same times.
pub fn refined(base: &Scenario, factor: usize) -> Scenario {
    let mut s = base.clone();
    s.dt /= factor as f64;
    s.output.stride *= factor;
    match &mut s.interior {
        Interior::Line(spec) => spec.n_cells *= factor,
        Interior::Disk(d) => {
            d.n_r *= factor;
            d.n_theta *= factor;
        }
        Interior::Lumped => {}
    }
    s
}

fn grid_spacing(s: &Scenario) -> f64 {
    match &s.interior {
        Interior::Line(spec) => spec.dz(),
        Interior::Disk(d) => d.radius / d.n_r as f64,
        Interior::Lumped => s.dt,
    }
}

fn quantity(out: &RunOutput, stride: usize) -> (String, Vec<f64>) {
    if !out.probe.is_empty() {
        let q = out.probe.iter().step_by(stride).copied().collect();
        return ("probe".into(), q);
    }
    let has_node = out.trajectory.column("psi_B_b1[0]").is_some_and(|c| c.iter().any(|x| *x != 0.0));
    if has_node {
        ("psi_B_b1[0]".into(), out.psi_b(End::B1).unwrap_or_default())
    } else if let Some(c) = out.trajectory.column("psi_L_b1[0]") {
        ("psi_L_b1[0]".into(), c)
    } else {
        ("psi_B".into(), out.psi_b(End::B1).unwrap_or_default())
    }
}

/// Runs `levels` successively halved resolutions and measures self-convergence orders.
pub fn converge(base: &Scenario, levels: usize) -> Result<ConvergenceStudy> {
    if levels < 2 {
        return Err(Error::invalid("converge needs at least 2 levels"));
    }
    let runs: Vec<(Scenario, RunOutput)> = (0..levels)
        .into_par_iter()
        .map(|l| {
            let s = refined(base, 1 << l);
            let out = simulate(&validate_scenario(s.clone())?)?;
            Ok((s, out))
        })
        .collect::<Result<_>>()?;
    let qs: Vec<(String, Vec<f64>)> =
        runs.iter().map(|(s, out)| quantity(out, s.output.stride)).collect();
    let mut rows = Vec::with_capacity(levels);
    for (l, (s, out)) in runs.iter().enumerate() {
        let diff = qs.get(l + 1).map(|next| {
            let (a, b) = (&qs[l].1, &next.1);
            a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        });
        rows.push(ConvergenceRow {
            level: l,
            h: grid_spacing(s),
            dt: s.dt,
            diff_to_next: diff,
            order: None,
            max_balance_residual: out.summary.max_balance_residual,
        });
    }
    for l in 0..levels {
        if let (Some(a), Some(b)) = (rows[l].diff_to_next, rows.get(l + 1).and_then(|r| r.diff_to_next)) {
            rows[l].order = (a > 0.0 && b > 0.0).then(|| (a / b).log2());
        }
    }
    let ladder: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.diff_to_next.map(|d| (r.h, d))).collect();
    let residuals: Vec<(f64, [f64; 2])> = rows.iter().map(|r| (r.h, r.max_balance_residual)).collect();
    let report = ConservationReport {
        max_drift: 0.0,
        rms_defect: 0.0,
        max_defect: 0.0,
        per_end_residual_order: [None, None],
    }
    .with_residual_ladder(&residuals);
    Ok(ConvergenceStudy {
        quantity: qs[0].0.clone(),
        rows,
        fitted_order: fitted_order(&ladder),
        per_end_residual_order: report.per_end_residual_order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct RespondSummary {
    points: usize,
    pre_onset_response: f64,
    max_err_bound: f64,
    kernel_b1: Option<PositivityVerdict>,
}

fn respond(s: &Scenario, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let grid = ComplexFrequencyGrid::standard();
    let samples = measure_admittance(s, &ImpulseProbe::default(), &grid)?;
    let p = dir.join("admittance.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&p)?);
    write_response_csv(&samples.rows(), &mut w)?;
    drop(w);
    let kernel = s.ends[0].boundary.as_ref().map(|b| check_positive_definite_ae_seeded(&b.kernel, seed));
    let summary = RespondSummary {
        points: samples.zeta.len(),
        pre_onset_response: samples.pre_onset_response,
        max_err_bound: samples.err_bound.iter().fold(0.0, |m: f64, e| m.max(*e)),
        kernel_b1: kernel,
    };
    let q = dir.join("respond.json");
    save_json(&summary, &q)?;
    Ok(vec![p, q])
}

/// Allowed relative rise of the tracked energy; the discrete energy of the
/// leapfrog scheme oscillates at the truncation level.
pub const RISE_TOLERANCE: f64 = 1e-3;

/// Energy audit of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyAudit {
    pub conservation: ConservationReport,
    pub max_balance_residual: [f64; 2],
    /// `max_{i<j} (E_j - E_i) / max |E|`: the largest rise of the tracked total energy.
    pub max_relative_rise: f64,
    /// `max_relative_rise` below [`RISE_TOLERANCE`].
    pub nonincreasing: bool,
    pub initial_energy: f64,
    pub final_energy: f64,
}

pub fn energy_audit(out: &RunOutput) -> EnergyAudit {
    let peak = out.ledger.iter().fold(0.0_f64, |m, l| m.max(l.total.abs()));
    let mut low = f64::INFINITY;
    let mut rise = 0.0_f64;
    for l in &out.ledger {
        rise = rise.max(l.total - low);
        low = low.min(l.total);
    }
    let rel = if peak > 0.0 { rise / peak } else { 0.0 };
    EnergyAudit {
        max_relative_rise: rel,
        nonincreasing: rel <= RISE_TOLERANCE,
        conservation: out.summary.conservation.clone(),
        max_balance_residual: out.summary.max_balance_residual,
        initial_energy: out.summary.initial_energy,
        final_energy: out.summary.final_energy,
    }
}

fn write_audit(audit: &EnergyAudit, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut t = Table::new(vec!["t".into(), "balance_residual_b1".into(), "balance_residual_b2".into()]);
    for l in &out.ledger {
        t.push(vec![l.time, l.balance_residual[0], l.balance_residual[1]]);
    }
    let p = dir.join("balance_residual.csv");
    t.save_csv(&p)?;
    let q = dir.join("ledger.csv");
    crate::output::ledger_table(&out.ledger).save_csv(&q)?;
    let r = dir.join("conservation.json");
    save_json(audit, &r)?;
    Ok(vec![p, q, r])
}
