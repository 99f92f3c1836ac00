//! Implicit scaled Toeplitz+Hankel operators for the cosine least squares
//! normal equations.
//!
//! In 1D the normal matrix is `A = D (T + H) D` with `T_{k,l} = a_{|k-l|}`,
//! `H_{k,l} = a_{k+l}`, `D = diag(1/sqrt(2), 1, ..., 1)` and generating
//! sequence `a_k = (1/2) sum_j w_j cos(pi k x_j)`. `A` itself is not
//! diagonalized by the DCT-I, but `T + H` embeds into an augmented
//! Toeplitz+Hankel matrix that is, so `A x` costs three DCT-I's of the
//! (zero-padded) augmented size. The 2D normal matrix is block
//! Toeplitz+Hankel with Toeplitz+Hankel blocks and admits the same trick
//! through the 2D DCT-I.
//!
//! Operators store only their generating sequences; dense materialization is
//! meant for tests and small-scale verification.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::nudct::{self, PointSet1D, PointSet2D};
use crate::{Error, Result, SQRT_2};

/// Largest order `dense()` will materialize.
const DENSE_LIMIT: usize = 4096;

/// Smallest `2^p + 1` that is `>= min` (and at least 2), the transform
/// friendly augmented size.
pub fn padded_size(min: usize) -> usize {
    let mut p = 2usize; // 2^0 + 1
    while p < min.max(2) {
        p = 2 * p - 1;
    }
    p
}

fn check_assembly_inputs(r: usize, weights: &[f64], values: &[f64]) -> Result<()> {
    if weights.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            got: weights.len(),
        });
    }
    if values.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            got: values.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite()) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weights/values"));
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::NonPositiveWeight);
    }
    Ok(())
}

/// `(T + H) x` for the order-`x.len()` principal submatrix generated by
/// `gen[0..=2(x.len()-1)]`, via the augmented embedding of size `pad`.
///
/// This is the unscaled core shared by the 1D operator and the blockwise 2D
/// fallback; `pad` must be at least `2*x.len() - 1`.
fn th_matvec_aug(gen: &[f64], x: &[f64], pad: usize) -> Vec<f64> {
    let m1 = x.len();
    debug_assert!(gen.len() >= 2 * m1 - 1);
    debug_assert!(pad >= (2 * m1 - 1).max(2));
    let mut b_col = vec![0.0; pad];
    for (dst, src) in b_col.iter_mut().zip(&gen[..2 * m1 - 1]) {
        *dst = 2.0 * src;
    }
    let mut x_aug = vec![0.0; pad];
    x_aug[..m1].copy_from_slice(x);
    x_aug[0] *= 2.0;
    x_aug[pad - 1] *= 2.0;

    let cb = crate::dct::dct1_transpose_unchecked(&b_col);
    let cx = crate::dct::dct1_transpose_unchecked(&x_aug);
    let prod: Vec<f64> = cb.iter().zip(&cx).map(|(a, b)| a * b).collect();
    let mut y = crate::dct::dct1_transpose_unchecked(&prod);
    let scale = ((pad - 1) as f64 / 2.0).sqrt();
    y.truncate(m1);
    for v in &mut y {
        *v *= scale;
    }
    y
}

/// Scaled Toeplitz+Hankel operator `A = D (T + H) D` of order `M + 1`.
#[derive(Debug, Clone)]
pub struct ThOperator {
    gen: Vec<f64>,
    degree: usize,
    padded_len: usize,
}

impl ThOperator {
    /// Builds the operator from its generating sequence `a_0..a_{2M+1}`.
    pub fn from_gen(gen: Vec<f64>, degree: usize) -> Result<Self> {
        if gen.len() != 2 * degree + 2 {
            return Err(Error::LengthMismatch {
                expected: 2 * degree + 2,
                got: gen.len(),
            });
        }
        if gen.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("generating sequence"));
        }
        let padded_len = padded_size(2 * degree + 1);
        Ok(Self {
            gen,
            degree,
            padded_len,
        })
    }

    /// Overrides the augmented transform length (testing hook; results must
    /// not depend on it).
    pub fn with_padded_len(mut self, padded_len: usize) -> Result<Self> {
        if padded_len < (2 * self.degree + 1).max(2) {
            return Err(Error::InvalidArgument(format!(
                "padded length {} below minimum {}",
                padded_len,
                2 * self.degree + 1
            )));
        }
        self.padded_len = padded_len;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.degree + 1
    }

    pub fn gen(&self) -> &[f64] {
        &self.gen
    }

    /// `A x` in `O(M log M)`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order() {
            return Err(Error::LengthMismatch {
                expected: self.order(),
                got: x.len(),
            });
        }
        let mut dx = x.to_vec();
        dx[0] /= SQRT_2;
        let mut y = th_matvec_aug(&self.gen, &dx, self.padded_len);
        y[0] /= SQRT_2;
        Ok(y)
    }

    /// Dense `D (T + H) D`, the oracle for the fast path. `O(M^2)`.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.order();
        assert!(n <= DENSE_LIMIT, "dense materialization refused above order {DENSE_LIMIT}");
        DMatrix::from_fn(n, n, |k, l| {
            let dk = if k == 0 { 1.0 / SQRT_2 } else { 1.0 };
            let dl = if l == 0 { 1.0 / SQRT_2 } else { 1.0 };
            dk * dl * (self.gen[k.abs_diff(l)] + self.gen[k + l])
        })
    }
}

/// Assembles the 1D normal operator and right hand side `b = V' s_w` for
/// degree `M` from scattered samples.
pub fn assemble_1d(
    pts: &PointSet1D,
    weights: &[f64],
    values: &[f64],
    degree: usize,
) -> Result<(ThOperator, Vec<f64>)> {
    check_assembly_inputs(pts.len(), weights, values)?;
    let mut gen = nudct::cosine_sums(pts, weights, 2 * degree + 1)?;
    for g in &mut gen {
        *g *= 0.5;
    }
    let ws: Vec<f64> = weights.iter().zip(values).map(|(w, s)| w * s).collect();
    let mut b = nudct::cosine_sums(pts, &ws, degree)?;
    b[0] /= SQRT_2;
    let op = ThOperator::from_gen(gen, degree)?;
    Ok((op, b))
}

/// Scaled block Toeplitz+Hankel operator for the 2D problem.
///
/// Coefficients are stacked x-degree fastest: global index `l (Mx+1) + k`
/// for the basis function `cos(pi k x) cos(pi l y)`. Blocks are indexed by
/// the y-degree pair `(l, l')`; each block is Toeplitz+Hankel in the
/// x-degrees. The generating array is
/// `g_{p,q} = (1/4) sum_j w_j cos(pi p x_j) cos(pi q y_j)`.
#[derive(Debug, Clone)]
pub struct BlockThOperator {
    gen: DMatrix<f64>,
    degree_x: usize,
    degree_y: usize,
    pad_x: usize,
    pad_y: usize,
}

/// One-shot validation of the derived 2D fast-multiply constant against the
/// dense materialization; on failure every operator falls back to the
/// blockwise 1D scheme.
pub fn fast_2d_validated() -> bool {
    static OK: OnceLock<bool> = OnceLock::new();
    *OK.get_or_init(|| {
        let (mx, my) = (2usize, 3usize);
        let gen = DMatrix::from_fn(2 * mx + 2, 2 * my + 2, |k, l| {
            // Deterministic, full-rank-ish test pattern.
            (0.3 + (k as f64 * 0.71 + l as f64 * 0.37).sin()) * 0.5
        });
        let op = BlockThOperator {
            gen,
            degree_x: mx,
            degree_y: my,
            pad_x: padded_size(2 * mx + 1),
            pad_y: padded_size(2 * my + 1),
        };
        let n = (mx + 1) * (my + 1);
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let fast = op.matvec_fast(&x);
        let dense = op.dense() * nalgebra::DVector::from_column_slice(&x);
        let scale = dense.amax().max(1.0);
        fast.iter()
            .zip(dense.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-10 * scale)
    })
}

impl BlockThOperator {
    pub fn from_gen(gen: DMatrix<f64>, degree_x: usize, degree_y: usize) -> Result<Self> {
        if gen.nrows() != 2 * degree_x + 2 || gen.ncols() != 2 * degree_y + 2 {
            return Err(Error::LengthMismatch {
                expected: (2 * degree_x + 2) * (2 * degree_y + 2),
                got: gen.nrows() * gen.ncols(),
            });
        }
        if gen.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("generating array"));
        }
        Ok(Self {
            gen,
            degree_x,
            degree_y,
            pad_x: padded_size(2 * degree_x + 1),
            pad_y: padded_size(2 * degree_y + 1),
        })
    }

    pub fn with_padding(mut self, pad_x: usize, pad_y: usize) -> Result<Self> {
        if pad_x < (2 * self.degree_x + 1).max(2) || pad_y < (2 * self.degree_y + 1).max(2) {
            return Err(Error::InvalidArgument("padding below minimum".into()));
        }
        self.pad_x = pad_x;
        self.pad_y = pad_y;
        Ok(self)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_x, self.degree_y)
    }

    pub fn order(&self) -> usize {
        (self.degree_x + 1) * (self.degree_y + 1)
    }

    /// `A x` in `O(Mx My log(Mx My))` (blockwise fallback if the startup
    /// self-check of the derived 2D constant ever fails).
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order() {
            return Err(Error::LengthMismatch {
                expected: self.order(),
                got: x.len(),
            });
        }
        if fast_2d_validated() {
            Ok(self.matvec_fast(x))
        } else {
            Ok(self.matvec_blockwise(x))
        }
    }

    fn matvec_fast(&self, x: &[f64]) -> Vec<f64> {
        let (mx1, my1) = (self.degree_x + 1, self.degree_y + 1);
        let (m, n) = (self.pad_x, self.pad_y);

        let mut x_aug = DMatrix::zeros(m, n);
        for l in 0..my1 {
            for k in 0..mx1 {
                x_aug[(k, l)] = x[l * mx1 + k];
            }
        }
        x_aug[(0, 0)] /= SQRT_2;
        // D1 (x) D1 edge scaling.
        for l in 0..n {
            x_aug[(0, l)] *= 2.0;
            x_aug[(m - 1, l)] *= 2.0;
        }
        for k in 0..m {
            x_aug[(k, 0)] *= 2.0;
            x_aug[(k, n - 1)] *= 2.0;
        }

        let mut b_arr = DMatrix::zeros(m, n);
        for q in 0..=(2 * self.degree_y).min(n - 1) {
            for p in 0..=(2 * self.degree_x).min(m - 1) {
                b_arr[(p, q)] = 4.0 * self.gen[(p, q)];
            }
        }

        let cb = crate::dct::dct2d_transpose_unchecked(&b_arr);
        let cx = crate::dct::dct2d_transpose_unchecked(&x_aug);
        let prod = cb.component_mul(&cx);
        let y_aug = crate::dct::dct2d_transpose_unchecked(&prod);
        let scale = (((m - 1) * (n - 1)) as f64).sqrt() / 2.0;

        let mut y = vec![0.0; self.order()];
        for l in 0..my1 {
            for k in 0..mx1 {
                y[l * mx1 + k] = y_aug[(k, l)] * scale;
            }
        }
        y[0] /= SQRT_2;
        y
    }

    fn matvec_blockwise(&self, x: &[f64]) -> Vec<f64> {
        let (mx1, my1) = (self.degree_x + 1, self.degree_y + 1);
        let mut dx = x.to_vec();
        dx[0] /= SQRT_2;
        let mut y = vec![0.0; self.order()];
        let mut block_gen = vec![0.0; 2 * self.degree_x + 1];
        for l_out in 0..my1 {
            for l_in in 0..my1 {
                for (p, g) in block_gen.iter_mut().enumerate() {
                    *g = self.gen[(p, l_out + l_in)] + self.gen[(p, l_out.abs_diff(l_in))];
                }
                let xb = &dx[l_in * mx1..(l_in + 1) * mx1];
                let yb = th_matvec_aug(&block_gen, xb, self.pad_x);
                for (k, v) in yb.into_iter().enumerate() {
                    y[l_out * mx1 + k] += v;
                }
            }
        }
        y[0] /= SQRT_2;
        y
    }

    /// Dense materialization, the test oracle. `O((Mx My)^2)`.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.order();
        assert!(n <= DENSE_LIMIT, "dense materialization refused above order {DENSE_LIMIT}");
        let mx1 = self.degree_x + 1;
        DMatrix::from_fn(n, n, |gi, gj| {
            let (k, l) = (gi % mx1, gi / mx1);
            let (kp, lp) = (gj % mx1, gj / mx1);
            let di = if gi == 0 { 1.0 / SQRT_2 } else { 1.0 };
            let dj = if gj == 0 { 1.0 / SQRT_2 } else { 1.0 };
            let g = &self.gen;
            di * dj
                * (g[(k + kp, l + lp)]
                    + g[(k.abs_diff(kp), l + lp)]
                    + g[(k + kp, l.abs_diff(lp))]
                    + g[(k.abs_diff(kp), l.abs_diff(lp))])
        })
    }
}

/// Assembles the 2D block operator and right hand side for degrees
/// `(Mx, My)`.
pub fn assemble_2d(
    pts: &PointSet2D,
    weights: &[f64],
    values: &[f64],
    degree_x: usize,
    degree_y: usize,
) -> Result<(BlockThOperator, Vec<f64>)> {
    check_assembly_inputs(pts.len(), weights, values)?;
    let mut gen = nudct::cosine_sums_2d(pts, weights, 2 * degree_x + 1, 2 * degree_y + 1)?;
    for g in gen.iter_mut() {
        *g *= 0.25;
    }
    let ws: Vec<f64> = weights.iter().zip(values).map(|(w, s)| w * s).collect();
    let bm = nudct::cosine_sums_2d(pts, &ws, degree_x, degree_y)?;
    let (mx1, my1) = (degree_x + 1, degree_y + 1);
    let mut b = vec![0.0; mx1 * my1];
    for l in 0..my1 {
        for k in 0..mx1 {
            b[l * mx1 + k] = bm[(k, l)];
        }
    }
    b[0] /= SQRT_2;
    let op = BlockThOperator::from_gen(gen, degree_x, degree_y)?;
    Ok((op, b))
}
