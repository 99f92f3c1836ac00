//! Why cosine polynomials instead of a periodic basis: for data that does
//! not match at the domain ends (f(0) != f(1)), periodic least squares
//! suffers slowly decaying coefficients and boundary ringing, while the
//! cosine fit, which only assumes Neumann-type reflection, converges fast.
//!
//! Run with: cargo run --example boundary_comparison

use cosfit::approx::{fit_1d, midpoint_weights, FitPath, SampleSet};
use cosfit::baseline::fit_periodic;
use cosfit::grid::{relative_l2_error, GridField, GridSpec};
use cosfit::nudct::PointSet1D;
use cosfit::solver::SolverConfig;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut xs: Vec<f64> = (0..300).map(|_| rng.gen_range(0.0..1.0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();

    let l = 256;
    let cfg = SolverConfig {
        tol: 1e-10,
        ..Default::default()
    };

    println!("{:<8} {:>14} {:>16}", "f(x)", "cosine M=15", "periodic K=15");
    for (name, f) in [
        ("x", Box::new(|x: f64| x) as Box<dyn Fn(f64) -> f64>),
        ("x^2", Box::new(|x: f64| x * x)),
        ("e^x", Box::new(|x: f64| x.exp())),
    ] {
        let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let pts = PointSet1D::new(xs.clone()).unwrap();
        let weights = midpoint_weights(&pts);
        let samples = SampleSet::one_d(pts, values, weights).unwrap();

        let reference = GridField::new(
            GridSpec::new(1, l).unwrap(),
            (0..=l).map(|i| f(i as f64 / l as f64)).collect(),
        )
        .unwrap();

        let (poly, _) = fit_1d(&samples, 15, &cfg, FitPath::NormalEquations).unwrap();
        let cos_err = relative_l2_error(&poly.eval_grid(l).unwrap(), &reference).unwrap();

        // The periodic fit even gets almost twice the coefficients
        // (31 real degrees of freedom vs 16) and still loses.
        let per = fit_periodic(&samples, 15, 0).unwrap();
        let per_err = relative_l2_error(&per.eval_grid(l).unwrap(), &reference).unwrap();

        println!("{name:<8} {cos_err:>14.4e} {per_err:>16.4e}");
    }
}
