//! Spring-coupled boundary: the full string simulation against the
//! boundary-only model with the exponential memory kernel it induces.

use structbc::kernels::kernel_from_string_coupling;
use structbc::model::{load_scenario, validate_scenario, End};
use structbc::run::simulate;
use structbc::solver1d::{integrate_reduced_boundary, ReducedInit};

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/retarded_lamb.toml");
    let v = validate_scenario(load_scenario(path)?)?;
    let full = simulate(&v)?;
    let kernel = kernel_from_string_coupling(1.0, 2.0, 1.0)?;
    let red = integrate_reduced_boundary(1.0, 1.0, &kernel, ReducedInit { psi: 0.0, velocity: 1.0 }, v.t_end, v.dt)?;
    let psi = full.psi_b(End::B1).unwrap_or_default();
    let diff = full
        .times()
        .iter()
        .zip(&psi)
        .map(|(t, p)| (p - red.psi[(t / v.dt).round() as usize]).abs())
        .fold(0.0, f64::max);
    println!("kernel: {:?}", kernel.terms[0]);
    println!("max |full - reduced| = {diff:.3e}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
