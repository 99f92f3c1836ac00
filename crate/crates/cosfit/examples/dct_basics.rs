//! The DCT-I building block: self-inverse transform, transpose identity,
//! and the 2D separable version.
//!
//! Run with: cargo run --example dct_basics

use cosfit::dct;
use nalgebra::DMatrix;

fn main() {
    // C C = I: applying the transform twice returns the signal.
    let x = vec![0.3, -1.2, 0.8, 0.5, -0.1];
    let y = dct::dct1_apply(&x).unwrap();
    let back = dct::dct1_apply(&y).unwrap();
    println!("signal      {x:?}");
    println!("transform   {y:?}");
    println!("roundtrip   {back:?}");
    let err = x
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    println!("max |x - CCx| = {err:.2e}\n");

    // The matrix is not symmetric; C' differs from C but is equally fast.
    let yt = dct::dct1_transpose_apply(&x).unwrap();
    println!("transpose   {yt:?}");

    // Dense reference for small sizes.
    let c = dct::dct1_matrix(5);
    println!("\nC_5 =\n{c:.4}");

    // 2D: C_m along columns, C_n along rows.
    let img = DMatrix::from_fn(4, 6, |i, j| ((i + 2 * j) as f64 * 0.7).sin());
    let spec = dct::dct2d_apply(&img).unwrap();
    let back2 = dct::dct2d_apply(&spec).unwrap();
    println!("2D roundtrip max error = {:.2e}", (&img - &back2).amax());
}
