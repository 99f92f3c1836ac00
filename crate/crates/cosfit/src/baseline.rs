//! Dense periodic least squares baseline: the real trigonometric basis
//! {1, cos(2πkx), sin(2πkx)} (tensor products in 2D), solved by SVD at
//! desk scale. Used for comparison against the cosine fits.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::TAU;

use crate::approx::{SamplePoints, SampleSet};
use crate::grid::{GridField, GridSpec};
use crate::{Error, Result};

/// Number of real basis functions for periodic degree `k`.
pub fn dof_1d(degree: usize) -> usize {
    2 * degree + 1
}

// Real periodic basis ordered 1, cos 2πt, sin 2πt, cos 4πt, sin 4πt, ...
fn basis(idx: usize, t: f64) -> f64 {
    if idx == 0 {
        return 1.0;
    }
    let k = (idx + 1) / 2;
    let arg = TAU * k as f64 * t;
    if idx % 2 == 1 {
        arg.cos()
    } else {
        arg.sin()
    }
}

/// A fitted periodic trigonometric polynomial.
#[derive(Debug, Clone)]
pub struct PeriodicFit {
    dim: usize,
    degree: (usize, usize),
    /// Flat coefficients; 2D is x-basis-fastest.
    coeffs: Vec<f64>,
    pub rank_deficient: bool,
}

impl PeriodicFit {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degrees(&self) -> (usize, usize) {
        self.degree
    }

    pub fn coeff_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval_point(&self, x: f64, y: f64) -> f64 {
        let nx = dof_1d(self.degree.0);
        match self.dim {
            1 => (0..nx).map(|i| self.coeffs[i] * basis(i, x)).sum(),
            _ => {
                let ny = dof_1d(self.degree.1);
                let mut acc = 0.0;
                for j in 0..ny {
                    let by = basis(j, y);
                    for i in 0..nx {
                        acc += self.coeffs[j * nx + i] * basis(i, x) * by;
                    }
                }
                acc
            }
        }
    }

    pub fn eval_grid(&self, l: usize) -> Result<GridField> {
        let spec = GridSpec::new(self.dim, l)?;
        let n = l + 1;
        let mut values = Vec::with_capacity(spec.node_count());
        if self.dim == 1 {
            for i in 0..n {
                values.push(self.eval_point(i as f64 / l as f64, 0.0));
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    values.push(self.eval_point(i as f64 / l as f64, j as f64 / l as f64));
                }
            }
        }
        GridField::new(spec, values)
    }
}

fn solve_ls(v: DMatrix<f64>, rhs: DVector<f64>) -> (Vec<f64>, bool) {
    let ncols = v.ncols();
    let svd = v.svd(true, true);
    let max_sv = svd.singular_values.max();
    let eps = max_sv * 1e-12 * ncols as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let sol = svd.solve(&rhs, eps).expect("svd computed with u and v");
    (sol.as_slice().to_vec(), rank < ncols)
}

/// Weighted periodic least squares fit with `2*degree+1` real coefficients
/// per axis.
pub fn fit_periodic(samples: &SampleSet, degree_x: usize, degree_y: usize) -> Result<PeriodicFit> {
    let r = samples.len();
    let sqrt_w: Vec<f64> = samples.weights.iter().map(|w| w.sqrt()).collect();
    let rhs = DVector::from_iterator(
        r,
        samples.values.iter().zip(&sqrt_w).map(|(s, w)| s * w),
    );
    match &samples.points {
        SamplePoints::One(pts) => {
            let ncols = dof_1d(degree_x);
            if ncols > r {
                return Err(Error::DegreeTooLarge {
                    degree: degree_x,
                    samples: r,
                });
            }
            let v = DMatrix::from_fn(r, ncols, |j, i| sqrt_w[j] * basis(i, pts.as_slice()[j]));
            let (coeffs, rank_deficient) = solve_ls(v, rhs);
            Ok(PeriodicFit {
                dim: 1,
                degree: (degree_x, 0),
                coeffs,
                rank_deficient,
            })
        }
        SamplePoints::Two(pts) => {
            let nx = dof_1d(degree_x);
            let ny = dof_1d(degree_y);
            if nx * ny > r {
                return Err(Error::DegreeTooLarge {
                    degree: degree_x.max(degree_y),
                    samples: r,
                });
            }
            let v = DMatrix::from_fn(r, nx * ny, |row, col| {
                let p = pts.as_slice()[row];
                sqrt_w[row] * basis(col % nx, p[0]) * basis(col / nx, p[1])
            });
            let (coeffs, rank_deficient) = solve_ls(v, rhs);
            Ok(PeriodicFit {
                dim: 2,
                degree: (degree_x, degree_y),
                coeffs,
                rank_deficient,
            })
        }
    }
}
