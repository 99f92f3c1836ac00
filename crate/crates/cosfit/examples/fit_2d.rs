//! Two-dimensional fit: scattered samples on the unit square, block
//! Toeplitz+Hankel normal equations, fast evaluation on a tensor grid.
//!
//! Run with: cargo run --example fit_2d

use cosfit::approx::{fit_2d, residual, SampleSet};
use cosfit::grid::relative_l2_error;
use cosfit::grid::{GridField, GridSpec};
use cosfit::solver::SolverConfig;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let f = |x: f64, y: f64| (PI * x).cos() * (0.5 + y) + 0.3 * (2.0 * PI * y).cos();

    let r = 400;
    let locations: Vec<[f64; 2]> = (0..r)
        .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    let values: Vec<f64> = locations.iter().map(|p| f(p[0], p[1])).collect();
    let samples = SampleSet::from_raw_2d(locations, values, None, false).unwrap();

    let (poly, report) = fit_2d(&samples, 6, 6, &SolverConfig::default()).unwrap();
    println!("7x7 coefficients, CG iterations: {}", report.iterations);
    let (res, norm) = residual(&samples, &poly).unwrap();
    println!("relative weighted residual: {:.3e}", (res / norm).sqrt());

    // Evaluate on a 101x101 grid and compare to the true field.
    let l = 100;
    let fitted = poly.eval_grid(l).unwrap();
    let reference = GridField::new(
        GridSpec::new(2, l).unwrap(),
        (0..=l)
            .flat_map(|i| {
                (0..=l).map(move |j| f(i as f64 / l as f64, j as f64 / l as f64))
            })
            .collect(),
    )
    .unwrap();
    let e = relative_l2_error(&fitted, &reference).unwrap();
    println!("grid error e(f_a) = {e:.4e}");
}
