//! TOML scenario documents.
//!
//! ```toml
//! [interior]
//! kind = "line"            # line | disk | lumped
//! mass = 1.0               # scalar, diagonal list, or rows
//! stiffness = 1.0
//! b1 = 0.0
//! b2 = 20.0
//! n_cells = 1000           # or dz
//! semi_infinite_b2 = true
//!
//! [boundary.b1]
//! mass = 1.0
//! hooke = 1.0
//! kernel = [{ c = 2.0, lambda = 2.0 }]
//! alpha_inf = 0.0
//! force = { amplitude = 1.0, shape = "step", t_on = 0.0 }
//!
//! [interaction.b1]
//! kind = "rigid"           # none | spring | rigid
//!
//! [time]
//! t_end = 10.0
//! cfl = 0.9                # or dt
//!
//! [initial]
//! displacement = { kind = "gaussian", amplitude = 1.0, center = 0.0, width = 1.0 }
//! velocity = { travelling = "right" }
//! b1 = { psi = [1.0], velocity = [0.0] }
//!
//! [output]
//! stride = 10
//! ```
//!
//! Disk interiors take `radius`, `sigma`, `tension`, `ring_lambda`, `ring_k`,
//! `n_r`, `n_theta` and optional `ring_force`, with the ring coupling under
//! `[interaction.ring]`. Lumped scenarios have no interior fields and use
//! `[boundary.b1]` alone.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use super::catalog::{ForceShape, ForceSpec, Profile, VelocityInit};
use super::*;
use crate::error::{Error, Result};
use crate::kernels::{KernelTerm, MemoryKernel};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Scalar(f64),
    Diagonal(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl MatrixInput {
    fn to_matrix(&self, k: usize, what: &str, errs: &mut Vec<String>) -> DMatrix<f64> {
        match self {
            MatrixInput::Scalar(x) => DMatrix::from_diagonal_element(k, k, *x),
            MatrixInput::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            MatrixInput::Rows(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    errs.push(format!("{what} must be a square matrix"));
                    return DMatrix::zeros(n, n);
                }
                DMatrix::from_fn(n, n, |i, j| rows[i][j])
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            MatrixInput::Scalar(_) => None,
            MatrixInput::Diagonal(d) => Some(d.len()),
            MatrixInput::Rows(r) => Some(r.len()),
        }
    }

    fn diagonal(&self, k: usize, what: &str, errs: &mut Vec<String>) -> Vec<f64> {
        let m = self.to_matrix(k, what, errs);
        let n = m.nrows();
        if (0..n).any(|i| (0..n).any(|j| i != j && m[(i, j)] != 0.0)) {
            errs.push(format!("{what} must be diagonal"));
        }
        m.diagonal().iter().copied().collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum VectorInput {
    Scalar(f64),
    List(Vec<f64>),
}

impl VectorInput {
    fn to_vec(&self, k: usize) -> Vec<f64> {
        match self {
            VectorInput::Scalar(x) => vec![*x; k],
            VectorInput::List(v) => v.clone(),
        }
    }
}

// Unknown keys are rejected by the flattened shape enum.
#[derive(Debug, Clone, Deserialize)]
struct ForceInput {
    amplitude: VectorInput,
    #[serde(flatten)]
    shape: ForceShape,
}

impl ForceInput {
    fn to_spec(&self, k: usize) -> ForceSpec {
        ForceSpec { amplitude: self.amplitude.to_vec(k), shape: self.shape.clone() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum InteriorKind {
    Line,
    Disk,
    Lumped,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InteriorFile {
    kind: InteriorKind,
    mass: Option<MatrixInput>,
    stiffness: Option<MatrixInput>,
    b1: Option<f64>,
    b2: Option<f64>,
    n_cells: Option<usize>,
    dz: Option<f64>,
    #[serde(default)]
    semi_infinite_b1: bool,
    #[serde(default)]
    semi_infinite_b2: bool,
    force: Option<ForceInput>,
    radius: Option<f64>,
    sigma: Option<f64>,
    tension: Option<f64>,
    ring_lambda: Option<f64>,
    ring_k: Option<f64>,
    n_r: Option<usize>,
    n_theta: Option<usize>,
    ring_force: Option<ForceInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryFile {
    #[serde(default = "zero_matrix")]
    mass: MatrixInput,
    #[serde(default = "zero_matrix")]
    hooke: MatrixInput,
    #[serde(default)]
    kernel: Vec<KernelTerm>,
    #[serde(default)]
    alpha_inf: f64,
    force: Option<ForceInput>,
}

fn zero_matrix() -> MatrixInput {
    MatrixInput::Scalar(0.0)
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum InteractionKind {
    None,
    Spring,
    Rigid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InteractionFile {
    kind: InteractionKind,
    stiffness: Option<MatrixInput>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    b1: Option<BoundaryFile>,
    b2: Option<BoundaryFile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InteractionSection {
    b1: Option<InteractionFile>,
    b2: Option<InteractionFile>,
    ring: Option<InteractionFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeFile {
    t_end: f64,
    dt: Option<f64>,
    cfl: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryInitFile {
    psi: Option<VectorInput>,
    velocity: Option<VectorInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialFile {
    #[serde(default = "zero_profile")]
    displacement: Profile,
    #[serde(default)]
    velocity: VelocityInit,
    #[serde(default)]
    weights: Vec<f64>,
    #[serde(default)]
    angular_mode: u32,
    #[serde(default)]
    angular_phase: f64,
    b1: Option<BoundaryInitFile>,
    b2: Option<BoundaryInitFile>,
    ring: Option<BoundaryInitFile>,
}

fn zero_profile() -> Profile {
    Profile::Zero
}

impl Default for InitialFile {
    fn default() -> Self {
        Self {
            displacement: Profile::Zero,
            velocity: VelocityInit::default(),
            weights: Vec::new(),
            angular_mode: 0,
            angular_phase: 0.0,
            b1: None,
            b2: None,
            ring: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    #[serde(default = "one")]
    stride: usize,
    #[serde(default)]
    snapshots: Vec<f64>,
    #[serde(default = "one")]
    probe_radius_index: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    interior: InteriorFile,
    #[serde(default)]
    boundary: BoundarySection,
    #[serde(default)]
    interaction: InteractionSection,
    time: TimeFile,
    #[serde(default)]
    initial: InitialFile,
    output: Option<OutputFile>,
}

/// Parses a scenario document. The result still has to pass [`validate_scenario`].
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    convert(file)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read scenario {}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn require<T: Copy>(x: Option<T>, what: &str, errs: &mut Vec<String>, fallback: T) -> T {
    x.unwrap_or_else(|| {
        errs.push(format!("missing {what}"));
        fallback
    })
}

fn boundary_node(b: &BoundaryFile, k: usize, label: &str, errs: &mut Vec<String>) -> BoundaryNodeSpec {
    BoundaryNodeSpec {
        mass: b.mass.diagonal(k, &format!("boundary {label} mass"), errs),
        hooke: b.hooke.to_matrix(k, &format!("boundary {label} hooke"), errs),
        external_force: b.force.as_ref().map(|f| f.to_spec(k)),
        kernel: MemoryKernel { terms: b.kernel.clone(), instantaneous: b.alpha_inf },
    }
}

fn interaction(i: &Option<InteractionFile>, k: usize, label: &str, errs: &mut Vec<String>) -> InteractionSpec {
    match i {
        None => InteractionSpec::None,
        Some(f) => {
            if f.kind != InteractionKind::Spring && f.stiffness.is_some() {
                errs.push(format!("interaction {label}: stiffness given for a non-spring kind"));
            }
            match f.kind {
                InteractionKind::None => InteractionSpec::None,
                InteractionKind::Rigid => InteractionSpec::Rigid,
                InteractionKind::Spring => match &f.stiffness {
                    Some(m) => InteractionSpec::Spring(m.to_matrix(k, &format!("interaction {label} stiffness"), errs)),
                    None => {
                        errs.push(format!("interaction {label}: spring needs a stiffness"));
                        InteractionSpec::None
                    }
                },
            }
        }
    }
}

fn boundary_init(b: &Option<BoundaryInitFile>, k: usize) -> BoundaryInit {
    match b {
        None => BoundaryInit::default(),
        Some(b) => BoundaryInit {
            psi: b.psi.as_ref().map(|v| v.to_vec(k)),
            velocity: b.velocity.as_ref().map(|v| v.to_vec(k)),
        },
    }
}

fn convert(f: ScenarioFile) -> Result<Scenario> {
    let mut errs = Vec::new();
    let i = &f.interior;
    let line_only = [
        ("mass", i.mass.is_some()),
        ("stiffness", i.stiffness.is_some()),
        ("b1", i.b1.is_some()),
        ("b2", i.b2.is_some()),
        ("n_cells", i.n_cells.is_some()),
        ("dz", i.dz.is_some()),
        ("semi_infinite_b1", i.semi_infinite_b1),
        ("semi_infinite_b2", i.semi_infinite_b2),
        ("force", i.force.is_some()),
    ];
    let disk_only = [
        ("radius", i.radius.is_some()),
        ("sigma", i.sigma.is_some()),
        ("tension", i.tension.is_some()),
        ("ring_lambda", i.ring_lambda.is_some()),
        ("ring_k", i.ring_k.is_some()),
        ("n_r", i.n_r.is_some()),
        ("n_theta", i.n_theta.is_some()),
        ("ring_force", i.ring_force.is_some()),
    ];
    let reject = |fields: &[(&str, bool)], kind: &str, errs: &mut Vec<String>| {
        for (name, present) in fields {
            if *present {
                errs.push(format!("interior field {name} does not apply to kind {kind}"));
            }
        }
    };

    let (interior, k) = match i.kind {
        InteriorKind::Line => {
            reject(&disk_only, "line", &mut errs);
            let mass = require(i.mass.as_ref(), "interior mass", &mut errs, &MatrixInput::Scalar(1.0));
            let stiffness = require(i.stiffness.as_ref(), "interior stiffness", &mut errs, &MatrixInput::Scalar(1.0));
            let k = mass.dim().or(stiffness.dim()).unwrap_or(1);
            let b1 = i.b1.unwrap_or(0.0);
            let b2 = require(i.b2, "interior b2", &mut errs, 1.0);
            let n_cells = match (i.n_cells, i.dz) {
                (Some(n), None) => n,
                (None, Some(dz)) if dz > 0.0 => ((b2 - b1) / dz).round().max(0.0) as usize,
                (None, Some(_)) => {
                    errs.push("dz must be positive".into());
                    0
                }
                (Some(_), Some(_)) => {
                    errs.push("give either n_cells or dz, not both".into());
                    0
                }
                (None, None) => {
                    errs.push("missing interior n_cells or dz".into());
                    0
                }
            };
            let spec = InteriorSpec1D {
                mass_matrix: mass.to_matrix(k, "interior mass", &mut errs),
                stiffness_matrix: stiffness.to_matrix(k, "interior stiffness", &mut errs),
                b1,
                b2,
                semi_infinite: [i.semi_infinite_b1, i.semi_infinite_b2],
                n_cells,
                force: i.force.as_ref().map(|x| x.to_spec(k)),
            };
            (Interior::Line(spec), k)
        }
        InteriorKind::Disk => {
            reject(&line_only, "disk", &mut errs);
            let disk = DiskSpec {
                radius: require(i.radius, "disk radius", &mut errs, 1.0),
                sigma: require(i.sigma, "disk sigma", &mut errs, 1.0),
                tension: require(i.tension, "disk tension", &mut errs, 1.0),
                ring_lambda: i.ring_lambda.unwrap_or(0.0),
                ring_k: i.ring_k.unwrap_or(0.0),
                interaction: interaction(&f.interaction.ring, 1, "ring", &mut errs),
                n_r: require(i.n_r, "disk n_r", &mut errs, 0),
                n_theta: require(i.n_theta, "disk n_theta", &mut errs, 0),
                ring_force: i.ring_force.as_ref().map(|x| x.to_spec(1)),
            };
            (Interior::Disk(disk), 1)
        }
        InteriorKind::Lumped => {
            reject(&line_only, "lumped", &mut errs);
            reject(&disk_only, "lumped", &mut errs);
            (Interior::Lumped, 1)
        }
    };
    if i.kind != InteriorKind::Disk && f.interaction.ring.is_some() {
        errs.push("interaction.ring applies only to disk interiors".into());
    }
    if i.kind == InteriorKind::Disk && (f.boundary.b1.is_some() || f.boundary.b2.is_some()) {
        errs.push("disk ring parameters belong in the interior section".into());
    }
    if i.kind != InteriorKind::Disk && f.initial.ring.is_some() {
        errs.push("initial.ring applies only to disk interiors".into());
    }

    let mut ends: [EndSpec; 2] = Default::default();
    for (slot, (b, inter, label)) in ends.iter_mut().zip([
        (&f.boundary.b1, &f.interaction.b1, "b1"),
        (&f.boundary.b2, &f.interaction.b2, "b2"),
    ]) {
        slot.boundary = b.as_ref().map(|b| boundary_node(b, k, label, &mut errs));
        slot.interaction = interaction(inter, k, label, &mut errs);
    }

    let init = &f.initial;
    let b1_init = if i.kind == InteriorKind::Disk { &init.ring } else { &init.b1 };
    let initial = InitialData {
        displacement: init.displacement.clone(),
        velocity: init.velocity.clone(),
        weights: init.weights.clone(),
        angular_mode: init.angular_mode,
        angular_phase: init.angular_phase,
        boundary: [boundary_init(b1_init, k), boundary_init(&init.b2, k)],
    };
    let output = match &f.output {
        None => OutputPlan::default(),
        Some(o) => OutputPlan {
            stride: o.stride,
            snapshots: o.snapshots.clone(),
            probe_radius_index: o.probe_radius_index,
        },
    };

    let mut scenario = Scenario {
        interior,
        ends,
        t_end: f.time.t_end,
        dt: f64::NAN,
        initial,
        output,
    };
    scenario.dt = match (f.time.dt, f.time.cfl) {
        (Some(dt), None) => dt,
        (None, Some(cfl)) => dt_from_cfl(&scenario, cfl),
        (None, None) => dt_from_cfl(&scenario, CFL_MAX),
        (Some(_), Some(_)) => {
            errs.push("give either time.dt or time.cfl, not both".into());
            f64::NAN
        }
    };

    if errs.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::InvalidSpec(errs))
    }
}

/// Time step at Courant factor `cfl`; NaN when the interior is malformed (validation reports why).
pub fn dt_from_cfl(s: &Scenario, cfl: f64) -> f64 {
    let bound = match &s.interior {
        Interior::Line(spec) => {
            if !(linalg::is_spd(&spec.mass_matrix)
                && spec.stiffness_matrix.shape() == spec.mass_matrix.shape()
                && linalg::is_spd(&spec.stiffness_matrix))
                || spec.n_cells == 0
            {
                return f64::NAN;
            }
            line_dt_max(spec, &linalg::wave_modes(&spec.mass_matrix, &spec.stiffness_matrix))
        }
        Interior::Disk(d) => {
            if !(d.radius > 0.0 && d.sigma > 0.0 && d.tension > 0.0 && d.n_r >= 1 && d.n_theta >= 4)
                || !(d.ring_lambda >= 0.0 && d.ring_k >= 0.0)
            {
                return f64::NAN;
            }
            crate::solver2d::stable_dt(d)
        }
        Interior::Lumped => {
            let Some(node) = &s.ends[0].boundary else { return f64::NAN };
            if node.mass.len() != 1 || !(node.mass[0] > 0.0) {
                return f64::NAN;
            }
            let omega = (node.hooke[(0, 0)] / node.mass[0]).sqrt();
            if omega > 0.0 {
                CFL_MAX * 2.0 / omega
            } else {
                return f64::NAN;
            }
        }
    };
    bound * cfl / CFL_MAX
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMB: &str = r#"
        [interior]
        kind = "line"
        mass = 1.0
        stiffness = 1.0
        b1 = 0.0
        b2 = 20.0
        n_cells = 1000
        semi_infinite_b2 = true

        [boundary.b1]
        mass = 1.0
        hooke = 1.0

        [interaction.b1]
        kind = "rigid"

        [time]
        t_end = 10.0
        cfl = 0.9

        [initial]
        displacement = { kind = "gaussian", amplitude = 1.0, center = 0.0, width = 1.0 }
        velocity = { travelling = "right" }
    "#;

    #[test]
    fn parses_lamb_document() {
        let s = parse_scenario(LAMB).unwrap();
        assert!((s.dt - 0.018).abs() < 1e-15);
        assert_eq!(s.ends[0].interaction, InteractionSpec::Rigid);
        assert_eq!(s.initial.velocity, VelocityInit::Travelling { travelling: Direction::Right });
        validate_scenario(s).unwrap();
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let text = LAMB.replace("semi_infinite_b2 = true", "semi_infinite_b2 = true\nnonlinear = 3");
        assert!(matches!(parse_scenario(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn force_and_kernel_tables() {
        let text = LAMB.replace(
            "hooke = 1.0",
            "hooke = 1.0\nkernel = [{ c = 2.0, lambda = 2.0 }]\nforce = { amplitude = 0.5, shape = \"pulse\", duration = 0.1 }",
        );
        let s = parse_scenario(&text).unwrap();
        let node = s.ends[0].boundary.as_ref().unwrap();
        assert_eq!(node.kernel.terms.len(), 1);
        let f = node.external_force.as_ref().unwrap();
        assert_eq!(f.amplitude, vec![0.5]);
        assert_eq!(f.shape, ForceShape::Pulse { t_on: 0.0, duration: 0.1 });
    }

    #[test]
    fn spring_without_stiffness_reported() {
        let text = LAMB.replace("kind = \"rigid\"", "kind = \"spring\"");
        let Err(Error::InvalidSpec(v)) = parse_scenario(&text) else { panic!() };
        assert!(v[0].contains("needs a stiffness"));
    }
}
