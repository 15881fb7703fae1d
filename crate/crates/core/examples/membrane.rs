//! Circular membrane with an elastically supported edge: the measured tone
//! against the Robin eigenvalue.

use std::f64::consts::PI;

use structbc::model::{load_scenario, validate_scenario, Profile};
use structbc::run::simulate;
use structbc::solver2d::robin_eigenvalue_oracle;

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/membrane.toml");
    let mut s = load_scenario(path)?;
    let beta = robin_eigenvalue_oracle(1.0, 1.0, 1.0)?;
    s.initial.displacement = Profile::BesselMode { amplitude: 1.0, beta };
    let out = simulate(&validate_scenario(s)?)?;
    let f = out.summary.probe_frequency.unwrap_or(f64::NAN);
    println!("beta R = {beta:.6}");
    println!("measured {f:.5}, expected {:.5}", beta / (2.0 * PI));
    println!("snapshots: {}", out.snapshots.len());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
