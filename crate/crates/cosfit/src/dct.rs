//! Type-I discrete cosine transforms in one and two dimensions.
//!
//! The transform matrix used throughout the crate is
//!
//! ```text
//! [C_n]_{k,l} = e_k * cos(pi k l / (n-1)) / sqrt(2n-2),
//! ```
//!
//! with `e_k = 1` for `k = 0` and `k = n-1` and `e_k = 2` otherwise. This
//! (non-unitary) normalization satisfies `C C = I` and, with the edge scaling
//! `D1 = diag(2, 1, ..., 1, 2)`, the transpose identity `C = D1^-1 C' D1`.
//! Both properties are what make the fast Toeplitz+Hankel multiply in
//! [`crate::th`] a three-transform affair.
//!
//! Transforms are computed exactly (to roundoff) by an even-symmetric
//! extension of length `2n-2` followed by an FFT; arbitrary lengths are
//! supported.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// FFT plans are cached per length; `rustfft` plans are immutable and cheap
/// to share across threads.
fn fft_plan(len: usize) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry(len)
        .or_insert_with(|| FftPlanner::new().plan_fft_forward(len))
        .clone()
}

fn check_signal(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::SignalTooShort(x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("DCT input"));
    }
    Ok(())
}

/// Applies `C' x` (the transpose of the DCT-I matrix).
///
/// `(C' x)_k = (x_0 + (-1)^k x_{n-1} + 2 sum_{0<l<n-1} x_l cos(pi k l/(n-1)))
/// / sqrt(2n-2)`, which is the DFT of the even extension
/// `[x_0, ..., x_{n-1}, x_{n-2}, ..., x_1]` scaled by `1/sqrt(2n-2)`.
pub fn dct1_transpose_apply(x: &[f64]) -> Result<Vec<f64>> {
    check_signal(x)?;
    Ok(dct1_transpose_unchecked(x))
}

pub(crate) fn dct1_transpose_unchecked(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let len = 2 * n - 2;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(len);
    buf.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
    buf.extend(x[1..n - 1].iter().rev().map(|&v| Complex::new(v, 0.0)));
    fft_plan(len).process(&mut buf);
    let scale = 1.0 / (len as f64).sqrt();
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// Applies the DCT-I matrix `C_n` to a signal of length `n >= 2`.
///
/// Computed as `D1^-1 C' D1 x` on top of [`dct1_transpose_apply`];
/// `O(n log n)` for any length.
pub fn dct1_apply(x: &[f64]) -> Result<Vec<f64>> {
    check_signal(x)?;
    Ok(dct1_unchecked(x))
}

pub(crate) fn dct1_unchecked(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut scaled = x.to_vec();
    scaled[0] *= 2.0;
    scaled[n - 1] *= 2.0;
    let mut out = dct1_transpose_unchecked(&scaled);
    out[0] *= 0.5;
    out[n - 1] *= 0.5;
    out
}

fn check_signal_2d(x: &DMatrix<f64>) -> Result<()> {
    if x.nrows() < 2 || x.ncols() < 2 {
        return Err(Error::SignalTooShort(x.nrows().min(x.ncols())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("DCT input"));
    }
    Ok(())
}

fn apply_separable(x: &DMatrix<f64>, f: fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let (m, n) = x.shape();
    let mut out = DMatrix::zeros(m, n);
    // Columns (length m), then rows (length n).
    let mut col = vec![0.0; m];
    for j in 0..n {
        for i in 0..m {
            col[i] = x[(i, j)];
        }
        let t = f(&col);
        for i in 0..m {
            out[(i, j)] = t[i];
        }
    }
    let mut row = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            row[j] = out[(i, j)];
        }
        let t = f(&row);
        for j in 0..n {
            out[(i, j)] = t[j];
        }
    }
    out
}

/// Two-dimensional DCT-I of an `m x n` signal: `C_m` along every column,
/// `C_n` along every row. Equals `(C_n (x) C_m)` acting on the stacked signal.
pub fn dct2d_apply(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_signal_2d(x)?;
    Ok(apply_separable(x, dct1_unchecked))
}

/// Separable transpose transform `C_m'` / `C_n'` along columns and rows.
pub fn dct2d_transpose_apply(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_signal_2d(x)?;
    Ok(dct2d_transpose_unchecked(x))
}

pub(crate) fn dct2d_transpose_unchecked(x: &DMatrix<f64>) -> DMatrix<f64> {
    apply_separable(x, dct1_transpose_unchecked)
}

/// Dense DCT-I matrix, used by tests and small-scale verification.
pub fn dct1_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 2);
    let norm = 1.0 / ((2 * n - 2) as f64).sqrt();
    DMatrix::from_fn(n, n, |k, l| {
        let e = if k == 0 || k == n - 1 { 1.0 } else { 2.0 };
        e * norm * (std::f64::consts::PI * (k * l) as f64 / (n - 1) as f64).cos()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(x: &[f64]) -> f64 {
        x.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    #[test]
    fn n2_by_hand() {
        // C_2 = [[1,1],[1,-1]]/sqrt(2)
        let y = dct1_apply(&[1.0, 0.0]).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((y[0] - s).abs() < 1e-15);
        assert!((y[1] - s).abs() < 1e-15);
        // C_2 is symmetric, so the transpose agrees.
        let yt = dct1_transpose_apply(&[1.0, 0.0]).unwrap();
        assert!((yt[0] - s).abs() < 1e-15 && (yt[1] - s).abs() < 1e-15);
    }

    #[test]
    fn n3_by_hand() {
        let y = dct1_apply(&[1.0, 1.0, 1.0]).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-14);
        assert!(y[1].abs() < 1e-14);
        assert!((y[2] - 0.5).abs() < 1e-14);
        // C_3' e_0 = row 0 of C_3 = [1/2, 1/2, 1/2],
        // C_3' e_1 = row 1 of C_3 = [1, 0, -1].
        let c0 = dct1_transpose_apply(&[1.0, 0.0, 0.0]).unwrap();
        for v in &c0 {
            assert!((v - 0.5).abs() < 1e-14);
        }
        let c1 = dct1_transpose_apply(&[0.0, 1.0, 0.0]).unwrap();
        assert!((c1[0] - 1.0).abs() < 1e-14);
        assert!(c1[1].abs() < 1e-14);
        assert!((c1[2] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn involution_various_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 5, 17, 257, 1025] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = dct1_apply(&dct1_apply(&x).unwrap()).unwrap();
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            assert!(max_abs(&diff) <= 1e-12 * max_abs(&x), "n = {n}");
        }
    }

    #[test]
    fn fast_path_matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=33 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = dct1_matrix(n);
            let dense = &c * nalgebra::DVector::from_column_slice(&x);
            let fast = dct1_apply(&x).unwrap();
            let denset = c.transpose() * nalgebra::DVector::from_column_slice(&x);
            let fastt = dct1_transpose_apply(&x).unwrap();
            for k in 0..n {
                assert!((dense[k] - fast[k]).abs() <= 1e-12 * max_abs(&x));
                assert!((denset[k] - fastt[k]).abs() <= 1e-12 * max_abs(&x));
            }
        }
    }

    #[test]
    fn transpose_identity_entrywise() {
        // C' = D1 C D1^-1, checked densely for n up to 33.
        for n in [2usize, 5, 9, 33] {
            let c = dct1_matrix(n);
            let d1 = DMatrix::from_fn(n, n, |i, j| {
                if i != j {
                    0.0
                } else if i == 0 || i == n - 1 {
                    2.0
                } else {
                    1.0
                }
            });
            let lhs = c.transpose();
            let rhs = &d1 * &c * d1.clone().try_inverse().unwrap();
            assert!((lhs - rhs).abs().max() <= 1e-14, "n = {n}");
        }
    }

    #[test]
    fn dct2d_matches_direct_sum() {
        // Direct evaluation of the separable definition, including the
        // edge factors, on a random 5x7 input.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (m, n) = (5usize, 7usize);
        let x = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let fast = dct2d_apply(&x).unwrap();
        let norm = 1.0 / (((2 * m - 2) * (2 * n - 2)) as f64).sqrt();
        for i in 0..m {
            for j in 0..n {
                let ei = if i == 0 || i == m - 1 { 1.0 } else { 2.0 };
                let ej = if j == 0 || j == n - 1 { 1.0 } else { 2.0 };
                let mut s = 0.0;
                for k in 0..m {
                    for l in 0..n {
                        s += x[(k, l)]
                            * (std::f64::consts::PI * (i * k) as f64 / (m - 1) as f64).cos()
                            * (std::f64::consts::PI * (j * l) as f64 / (n - 1) as f64).cos();
                    }
                }
                let direct = ei * ej * norm * s;
                assert!((direct - fast[(i, j)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn dct2d_all_ones_2x2() {
        let x = DMatrix::from_element(2, 2, 1.0);
        let y = dct2d_apply(&x).unwrap();
        assert!((y[(0, 0)] - 2.0).abs() < 1e-14);
        assert!(y[(0, 1)].abs() < 1e-14);
        assert!(y[(1, 0)].abs() < 1e-14);
        assert!(y[(1, 1)].abs() < 1e-14);
    }

    #[test]
    fn dct2d_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = DMatrix::from_fn(9, 17, |_, _| rng.gen_range(-1.0..1.0));
        let y = dct2d_apply(&dct2d_apply(&x).unwrap()).unwrap();
        assert!((&x - y).abs().max() <= 1e-12);
    }

    #[test]
    fn dct2d_order_of_axes_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(6, 8, |_, _| rng.gen_range(-1.0..1.0));
        // Row-then-column via transposition.
        let a = dct2d_apply(&x).unwrap();
        let b = dct2d_apply(&x.transpose()).unwrap().transpose();
        assert!((a - b).abs().max() <= 1e-12);
    }

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(matches!(dct1_apply(&[1.0]), Err(Error::SignalTooShort(1))));
        assert!(matches!(
            dct1_apply(&[1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    proptest! {
        #[test]
        fn involution_property(x in proptest::collection::vec(-100.0f64..100.0, 2..64)) {
            let y = dct1_apply(&dct1_apply(&x).unwrap()).unwrap();
            let scale = max_abs(&x).max(1.0);
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-11 * scale);
            }
        }
    }
}
