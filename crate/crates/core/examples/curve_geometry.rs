//! Metric, Christoffel symbol and divergence on an ellipse.

use std::f64::consts::PI;

use structbc::geometry::{christoffel_all, covariant_divergence, divergence_theorem_check, induced_metric, sample_curve};

fn run_example() -> structbc::Result<()> {
    let pts = sample_curve(256, 2.0 * PI, |u| [2.0 * u.cos(), u.sin()]);
    let m = induced_metric(&pts, 2.0 * PI)?;
    let gamma = christoffel_all(&m.g, m.du, m.scheme);
    println!("perimeter {:.12}", m.length());
    println!("g(0) = {:.6}, g(pi/2) = {:.6}", m.g[0], m.g[64]);
    println!("max |Gamma| = {:.6}", gamma.iter().fold(0.0_f64, |a, g| a.max(g.abs())));
    let v: Vec<f64> = m.u.iter().map(|u| (3.0 * u).sin()).collect();
    let div = covariant_divergence(&v, &m);
    println!("div v at u = 0: {:.6}", div[0]);
    println!("divergence theorem residual {:.3e}", divergence_theorem_check(&v, &m));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
