//! Energy bookkeeping on a string between two heavy spring-mounted masses.

use structbc::model::{load_scenario, validate_scenario};
use structbc::run::simulate;

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/closed_string.toml");
    let out = simulate(&validate_scenario(load_scenario(path)?)?)?;
    println!("t        H_D          H_B1         H_B2         total");
    for l in out.ledger.iter().step_by(out.ledger.len() / 8) {
        println!("{:<8.3} {:.6e} {:.6e} {:.6e} {:.6e}", l.time, l.h_d_total, l.h_b[0], l.h_b[1], l.total);
    }
    let r = &out.summary.conservation;
    println!("drift {:.3e}, rms defect {:.3e}", r.max_drift, r.rms_defect);
    println!("max balance residual {:?}", out.summary.max_balance_residual);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
