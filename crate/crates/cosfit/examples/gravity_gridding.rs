//! Desk-scale gridding experiment in the style of potential-field surveys:
//! scattered noisy measurements of a smooth anomaly field are approximated
//! by a 2D cosine polynomial and rasterized, with a periodic least squares
//! fit at equal degrees of freedom as the comparison.
//!
//! Run with: cargo run --release --example gravity_gridding
//!
//! Writes anomaly.pgm (reference) and gridded.pgm (fit) to the working
//! directory.

use cosfit::approx::fit_2d;
use cosfit::baseline::fit_periodic;
use cosfit::grid::relative_l2_error;
use cosfit::io::write_pgm;
use cosfit::solver::SolverConfig;
use cosfit::synth::{synth_experiment, ExperimentSpec};
use std::path::Path;

fn main() {
    // 496 scattered measurements, 5% noise, three Gaussian anomalies.
    let spec = ExperimentSpec::default_2d(496, 0.05, 12, 150);
    let experiment = synth_experiment(&spec).unwrap();
    println!(
        "{} samples, noise 5%, grid {}x{}",
        experiment.samples.len(),
        spec.grid_l + 1,
        spec.grid_l + 1
    );

    // 11 coefficients per axis: polynomial degree 10, 121 coefficients total.
    let cfg = SolverConfig::default();
    let (poly, report) = fit_2d(&experiment.samples, 10, 10, &cfg).unwrap();
    println!("CG iterations: {}", report.iterations);

    let fitted = poly.eval_grid(150).unwrap();
    let e_cos = relative_l2_error(&fitted, &experiment.reference).unwrap();
    println!("cosine fit     e(f_a) = {e_cos:.4}");

    // Periodic baseline at equal degrees of freedom: 2*5+1 = 11 per axis.
    let per = fit_periodic(&experiment.samples, 5, 5).unwrap();
    let e_per =
        relative_l2_error(&per.eval_grid(150).unwrap(), &experiment.reference).unwrap();
    println!("periodic fit   e(f_a) = {e_per:.4}");

    write_pgm(Path::new("anomaly.pgm"), &experiment.reference).unwrap();
    write_pgm(Path::new("gridded.pgm"), &fitted).unwrap();
    println!("wrote anomaly.pgm and gridded.pgm");
}
