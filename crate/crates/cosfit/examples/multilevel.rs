//! Degree selection by discrepancy: increase the degree level by level
//! until the weighted residual drops below epsilon times the data norm.
//! Each level reuses the assembled generating sequence and warm-starts CG
//! from the previous coefficients.
//!
//! Run with: cargo run --example multilevel

use cosfit::approx::{multilevel_fit, midpoint_weights, MultilevelConfig, SampleSet};
use cosfit::nudct::PointSet1D;
use cosfit::solver::SolverConfig;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut xs: Vec<f64> = (0..300).map(|_| rng.gen_range(0.0..1.0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();

    // Band-limited signal plus 3% noise: the scheme should stop once the
    // residual is dominated by noise, not chase it with more degrees.
    let f = |x: f64| 1.0 + (2.0 * PI * x).cos() - 0.6 * (5.0 * PI * x).cos();
    let noise = 0.03;
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| f(x) + noise * rng.gen_range(-1.0..1.0))
        .collect();

    let pts = PointSet1D::new(xs).unwrap();
    let weights = midpoint_weights(&pts);
    let samples = SampleSet::one_d(pts, values, weights).unwrap();

    // epsilon encodes the data accuracy: squared noise fraction.
    let ml = MultilevelConfig::new(noise * noise, 40);
    let (poly, trace) = multilevel_fit(&samples, &ml, &SolverConfig::default()).unwrap();

    println!("level  degree  iters  residual      threshold     accepted");
    for lv in &trace.levels {
        println!(
            "{:>5}  {:>6}  {:>5}  {:<12.4e}  {:<12.4e}  {}",
            trace.levels.iter().position(|l| l.degree == lv.degree).unwrap(),
            lv.degree,
            lv.iterations,
            lv.weighted_residual,
            lv.threshold,
            lv.accepted
        );
    }
    println!(
        "\nselected degree {} with {} coefficients",
        trace.levels.last().unwrap().degree,
        poly.coeffs_1d().unwrap().len()
    );
}
