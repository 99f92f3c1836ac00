//! The scaled Toeplitz+Hankel operator behind the normal equations:
//! exact agreement with the dense matrix, and O(M log M) scaling of the
//! implicit multiply.
//!
//! Run with: cargo run --release --example fast_matvec

use cosfit::th::ThOperator;
use nalgebra::DVector;
use std::time::Instant;

fn main() {
    // Small case: compare the fast multiply against the materialized matrix.
    let m = 6usize;
    let gen: Vec<f64> = (0..2 * m + 2).map(|k| 1.0 / (1.0 + k as f64)).collect();
    let op = ThOperator::from_gen(gen, m).unwrap();
    let x: Vec<f64> = (0..=m).map(|k| (k as f64 * 0.9).cos()).collect();
    let fast = op.matvec(&x).unwrap();
    let dense = op.dense() * DVector::from_column_slice(&x);
    println!("fast   {fast:?}");
    println!("dense  {:?}", dense.as_slice());
    let err = fast
        .iter()
        .zip(dense.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!("max deviation = {err:.2e}\n");

    // Scaling: each multiply is three DCTs of the padded length.
    println!("{:>8}  {:>12}", "M", "matvec time");
    for p in 10..=14 {
        let m = 1usize << p;
        let gen: Vec<f64> = (0..2 * m + 2).map(|k| (k as f64 * 0.37).sin()).collect();
        let op = ThOperator::from_gen(gen, m).unwrap();
        let x: Vec<f64> = (0..=m).map(|k| (k as f64 * 0.11).cos()).collect();
        op.matvec(&x).unwrap(); // warm the FFT plan cache
        let mut best = f64::INFINITY;
        for _ in 0..10 {
            let t = Instant::now();
            std::hint::black_box(op.matvec(&x).unwrap());
            best = best.min(t.elapsed().as_secs_f64());
        }
        println!("{m:>8}  {:>10.1} us", best * 1e6);
    }
}
