//! Scattered data approximation with cosine polynomials.
//!
//! Given finitely many samples of a smooth function at arbitrary locations in
//! `[0,1]` (or `[0,1]^2`), this crate computes the weighted least squares fit
//! in the space of cosine polynomials `c_0/sqrt(2) + sum_k c_k cos(pi k x)`.
//! Using cosines instead of complex exponentials amounts to a symmetric
//! (Neumann) extension of the data across the interval endpoints, which avoids
//! the boundary artifacts a periodic extension introduces.
//!
//! The normal equations of this least squares problem have a scaled
//! Toeplitz+Hankel structure (block Toeplitz+Hankel in 2D). The [`th`] module
//! exploits it for an `O(M log M)` matrix-vector product built on the type-I
//! DCT from [`dct`], so the whole fit runs through matrix-free conjugate
//! gradients in [`solver`]. The [`approx`] module ties everything together and
//! also provides a multilevel scheme that picks the polynomial degree
//! automatically via a discrepancy test.
//!
//! See the `examples/` directory for runnable walkthroughs of each capability,
//! and the `cosfit` binary for the command-line interface.

pub mod approx;
pub mod baseline;
pub mod cli;
pub mod dct;
mod error;
pub mod grid;
pub mod io;
pub mod nudct;
pub mod solver;
pub mod synth;
pub mod th;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;
