//! Fit a 1D cosine polynomial to noisy scattered samples and inspect the
//! solver report: iterations, residual history, and the a-priori condition
//! bound derived from the largest sampling gap.
//!
//! Run with: cargo run --example fit_1d

use cosfit::approx::{fit_1d, midpoint_weights, residual, FitPath, SampleSet};
use cosfit::nudct::PointSet1D;
use cosfit::solver::SolverConfig;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let r = 200;
    let mut xs: Vec<f64> = (0..r).map(|_| rng.gen_range(0.0..1.0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();

    // A smooth, non-periodic target with 2% noise.
    let f = |x: f64| (1.5 * PI * x).sin() + 0.5 * x;
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| f(x) + 0.02 * rng.gen_range(-1.0..1.0))
        .collect();

    let pts = PointSet1D::new(xs).unwrap();
    let weights = midpoint_weights(&pts);
    let samples = SampleSet::one_d(pts, values, weights).unwrap();

    let cfg = SolverConfig::default();
    let (poly, report) = fit_1d(&samples, 12, &cfg, FitPath::NormalEquations).unwrap();

    println!("degree 12 fit over {} samples", samples.len());
    println!("CG iterations      {}", report.iterations);
    println!("converged          {}", report.converged);
    if let Some(kappa) = report.kappa_bound {
        println!("condition bound    {kappa:.3}");
    }
    let (res, norm) = residual(&samples, &poly).unwrap();
    println!("weighted residual  {:.4e} (relative {:.4e})", res, res / norm);

    println!("\n k   coefficient");
    for (k, c) in poly.coeffs_1d().unwrap().iter().enumerate() {
        println!("{k:>2}   {c:+.6}");
    }

    // The direct least squares route (LSQR on the design matrix) agrees.
    let (direct, _) = fit_1d(&samples, 12, &cfg, FitPath::DirectLs).unwrap();
    let gap = poly
        .coeffs_1d()
        .unwrap()
        .iter()
        .zip(direct.coeffs_1d().unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!("\nnormal-equations vs direct-ls coefficient gap: {gap:.2e}");
}
