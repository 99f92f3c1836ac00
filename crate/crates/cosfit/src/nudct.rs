//! Nonuniform cosine sums and polynomial evaluation.
//!
//! Two kinds of sums appear when fitting cosine polynomials to scattered
//! data: adjoint-style sums `g_k = sum_j v_j cos(pi k x_j)` over arbitrary
//! points (to assemble the normal equations and right hand side), and the
//! evaluation of a fitted polynomial at arbitrary points or on a uniform
//! grid. Sums over scattered points are computed by exact direct summation;
//! uniform grids are routed through the fast DCT-I.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::{dct, Error, Result, SQRT_2};

/// Strictly increasing sampling locations in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PointSet1D {
    points: Vec<f64>,
}

impl PointSet1D {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPoints("point set is empty".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("points"));
        }
        if points.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidPoints("points must lie in [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPoints(
                "points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }
}

/// Pairwise distinct sampling locations in the unit square.
#[derive(Debug, Clone)]
pub struct PointSet2D {
    points: Vec<[f64; 2]>,
}

impl PointSet2D {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPoints("point set is empty".into()));
        }
        for p in &points {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::NonFinite("points"));
            }
            if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
                return Err(Error::InvalidPoints(
                    "points must lie in the unit square".into(),
                ));
            }
        }
        let mut sorted: Vec<&[f64; 2]> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPoints(
                "points must be pairwise distinct".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.points
    }
}

fn check_values(v: &[f64], r: usize) -> Result<()> {
    if v.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("coefficient/value vector"));
    }
    Ok(())
}

/// `g_k = sum_j v_j cos(pi k x_j)` for `k = 0..=k_max`, by direct summation.
pub fn cosine_sums(pts: &PointSet1D, v: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_values(v, pts.len())?;
    let mut out = vec![0.0; k_max + 1];
    for (&x, &vj) in pts.as_slice().iter().zip(v) {
        for (k, g) in out.iter_mut().enumerate() {
            *g += vj * (PI * k as f64 * x).cos();
        }
    }
    Ok(out)
}

/// `g_{k,l} = sum_j v_j cos(pi k x_j) cos(pi l y_j)`, returned as a
/// `(kx_max+1) x (ky_max+1)` array with the x-index along rows.
pub fn cosine_sums_2d(
    pts: &PointSet2D,
    v: &[f64],
    kx_max: usize,
    ky_max: usize,
) -> Result<DMatrix<f64>> {
    check_values(v, pts.len())?;
    let mut out = DMatrix::zeros(kx_max + 1, ky_max + 1);
    let mut cx = vec![0.0; kx_max + 1];
    let mut cy = vec![0.0; ky_max + 1];
    for (&[x, y], &vj) in pts.as_slice().iter().zip(v) {
        for (k, c) in cx.iter_mut().enumerate() {
            *c = (PI * k as f64 * x).cos();
        }
        for (l, c) in cy.iter_mut().enumerate() {
            *c = (PI * l as f64 * y).cos();
        }
        for k in 0..=kx_max {
            for l in 0..=ky_max {
                out[(k, l)] += vj * cx[k] * cy[l];
            }
        }
    }
    Ok(out)
}

/// Result of evaluating a polynomial at explicit points. Points outside
/// `[0, 1]` are evaluated by the same globally defined formula but counted
/// here so callers can surface the fact.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub values: Vec<f64>,
    pub outside_domain: usize,
}

/// Evaluates `p(t) = c_0/sqrt(2) + sum_k c_k cos(pi k t)` at the given points.
pub fn eval_poly(coeffs: &[f64], points: &[f64]) -> Result<Evaluation> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient vector".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    let mut outside = 0usize;
    let values = points
        .iter()
        .map(|&t| {
            if !(0.0..=1.0).contains(&t) {
                outside += 1;
            }
            eval_poly_at(coeffs, t)
        })
        .collect();
    Ok(Evaluation {
        values,
        outside_domain: outside,
    })
}

pub(crate) fn eval_poly_at(coeffs: &[f64], t: f64) -> f64 {
    let mut s = coeffs[0] / SQRT_2;
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        s += c * (PI * k as f64 * t).cos();
    }
    s
}

/// Folds frequency `k` into `0..=l` under the even, `2l`-periodic symmetry of
/// `cos(pi k t)` sampled at `t = j/l`.
fn fold(k: usize, l: usize) -> usize {
    let m = k % (2 * l);
    if m > l {
        2 * l - m
    } else {
        m
    }
}

/// Evaluates the polynomial on the uniform grid `t_j = j/l, j = 0..=l` in
/// `O(l log l)` via the DCT-I.
pub fn eval_poly_grid(coeffs: &[f64], l: usize) -> Result<Vec<f64>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient vector".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("grid resolution must be >= 1".into()));
    }
    let mut q = vec![0.0; l + 1];
    q[0] = coeffs[0] / SQRT_2;
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        q[fold(k, l)] += c;
    }
    // sum_k q_k cos(pi k j / l) = sqrt(2l) * (C' u)_j with interior entries
    // of u halved.
    for entry in q[1..l].iter_mut() {
        *entry *= 0.5;
    }
    let mut out = dct::dct1_transpose_apply(&q)?;
    let scale = ((2 * l) as f64).sqrt();
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

/// Bivariate evaluation at explicit points; `coeffs` is `(mx+1) x (my+1)`
/// with the x-degree along rows and the `1/sqrt(2)` scaling on `c_{0,0}`.
pub fn eval_poly_2d(coeffs: &DMatrix<f64>, points: &[[f64; 2]]) -> Result<Evaluation> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient array".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    let (nx, ny) = coeffs.shape();
    let mut outside = 0usize;
    let mut values = Vec::with_capacity(points.len());
    let mut cx = vec![0.0; nx];
    let mut cy = vec![0.0; ny];
    for &[x, y] in points {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            outside += 1;
        }
        for (k, c) in cx.iter_mut().enumerate() {
            *c = (PI * k as f64 * x).cos();
        }
        for (l, c) in cy.iter_mut().enumerate() {
            *c = (PI * l as f64 * y).cos();
        }
        let mut s = 0.0;
        for k in 0..nx {
            for l in 0..ny {
                let c = if k == 0 && l == 0 {
                    coeffs[(0, 0)] / SQRT_2
                } else {
                    coeffs[(k, l)]
                };
                s += c * cx[k] * cy[l];
            }
        }
        values.push(s);
    }
    Ok(Evaluation {
        values,
        outside_domain: outside,
    })
}

/// Tensor-grid evaluation at `(i/lx, j/ly)`, `O(lx ly log(lx ly))` via the 2D
/// DCT-I. Returns an `(lx+1) x (ly+1)` array indexed by the grid position.
pub fn eval_poly_2d_grid(coeffs: &DMatrix<f64>, lx: usize, ly: usize) -> Result<DMatrix<f64>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient array".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    if lx == 0 || ly == 0 {
        return Err(Error::InvalidArgument("grid resolution must be >= 1".into()));
    }
    let (nx, ny) = coeffs.shape();
    let mut q = DMatrix::zeros(lx + 1, ly + 1);
    for k in 0..nx {
        for l in 0..ny {
            let c = if k == 0 && l == 0 {
                coeffs[(0, 0)] / SQRT_2
            } else {
                coeffs[(k, l)]
            };
            q[(fold(k, lx), fold(l, ly))] += c;
        }
    }
    for i in 0..=lx {
        for j in 0..=ly {
            let mut f = 1.0;
            if i > 0 && i < lx {
                f *= 0.5;
            }
            if j > 0 && j < ly {
                f *= 0.5;
            }
            q[(i, j)] *= f;
        }
    }
    let mut out = dct::dct2d_transpose_apply(&q)?;
    let scale = ((2 * lx) as f64 * (2 * ly) as f64).sqrt();
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}
