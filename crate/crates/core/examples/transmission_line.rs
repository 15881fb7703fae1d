//! Transmission line feeding an LC load: the line acts as a resistor of
//! value sqrt(L/C) on the load circuit.

use structbc::model::{validate_scenario, End};
use structbc::run::simulate;
use structbc::solver1d::analytic::damped_oscillator;
use structbc::solver1d::{build_mtl, MtlLine};

fn run_example() -> structbc::Result<()> {
    let line = MtlLine::unit(20.0, 2000, 10.0);
    let v = validate_scenario(build_mtl(&line)?)?;
    let out = simulate(&v)?;
    let q = out.psi_b(End::B1).unwrap_or_default();
    let mut err: f64 = 0.0;
    for (t, x) in out.times().iter().zip(&q) {
        err = err.max((x - damped_oscillator(1.0, 1.0, 1.0, (1.0, 0.0), *t)).abs());
    }
    println!("load charge at t = 10: {:+.6}", q[q.len() - 1]);
    println!("max deviation from unit-damped oscillator: {err:.3e}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
