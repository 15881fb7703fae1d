//! Massless spring boundary: first-order exponential relaxation of the end.

use structbc::model::{load_scenario, validate_scenario, End};
use structbc::run::simulate;
use structbc::solver1d::massless_spring_boundary_decay;

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/massless_spring.toml");
    let v = validate_scenario(load_scenario(path)?)?;
    let out = simulate(&v)?;
    let psi = out.psi_b(End::B1).unwrap_or_default();
    let mut worst: f64 = 0.0;
    for (t, p) in out.times().iter().zip(&psi) {
        let want = massless_spring_boundary_decay(1.0, 1.0, 1.0, psi[0], *t)?;
        worst = worst.max((p - want).abs() / psi[0]);
    }
    println!("psi_B(0) = {:.6}, psi_B(5) = {:.6}", psi[0], psi[psi.len() - 1]);
    println!("max relative deviation from exp(-t): {worst:.3e}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
