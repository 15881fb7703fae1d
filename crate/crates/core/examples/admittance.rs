//! Impulse-response admittance of the Lamb system and passivity of memory kernels.

use structbc::kernels::{kernel_from_string_coupling, KernelTerm, MemoryKernel};
use structbc::model::load_scenario;
use structbc::response::{
    check_positive_definite_ae, lamb_impedance, measure_admittance, write_response_csv, ComplexFrequencyGrid,
    ImpulseProbe,
};

fn run_example() -> structbc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/lamb.toml");
    let mut s = load_scenario(path)?;
    s.initial = Default::default();
    let grid = ComplexFrequencyGrid::standard();
    let y = measure_admittance(&s, &ImpulseProbe::default(), &grid)?;
    let worst = y
        .zeta
        .iter()
        .zip(&y.values)
        .map(|(z, v)| (v * lamb_impedance(1.0, 1.0, 1.0, *z) - 1.0).norm())
        .fold(0.0, f64::max);
    println!("max |Y Z - 1| over {} points: {worst:.3e}", grid.len());
    write_response_csv(&y.rows()[..3], std::io::stdout())?;

    let good = kernel_from_string_coupling(1.0, 2.0, 1.0)?;
    let bad = MemoryKernel { terms: vec![KernelTerm::decaying(-2.0, 2.0)], instantaneous: 0.0 };
    for (name, k) in [("string coupling", good), ("flipped sign", bad)] {
        let v = check_positive_definite_ae(&k);
        println!("{name}: passed {} (min Re {:.3e} at {:?})", v.passed, v.min_re_transform, v.witness_zeta);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
