//! Mass on a spring rigidly attached to a semi-infinite string, compared with
//! the damped oscillator it reduces to.

use structbc::model::{load_scenario, validate_scenario, End};
use structbc::run::simulate;
use structbc::solver1d::lamb_analytic;

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/lamb.toml");
    let v = validate_scenario(load_scenario(path)?)?;
    let out = simulate(&v)?;
    let t = out.times();
    let psi = out.psi_b(End::B1).unwrap_or_default();
    let mut err: f64 = 0.0;
    for (ti, p) in t.iter().zip(&psi) {
        err = err.max((p - lamb_analytic(1.0, 1.0, 1.0, 1.0, (1.0, 0.0), *ti)?).abs());
    }
    println!("t        psi_B");
    for i in (0..t.len()).step_by(t.len() / 10) {
        println!("{:<8.3} {:+.6}", t[i], psi[i]);
    }
    println!("max |psi_B - exact| = {err:.3e}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
