//! Matrix-free iterative solvers and the a priori conditioning estimates.

use serde::Serialize;

use crate::nudct::PointSet1D;
use crate::{Error, Result};

/// Configuration for the iterative solvers.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relative residual tolerance.
    pub tol: f64,
    /// Iteration cap; `None` means four times the system order.
    pub max_iter: Option<usize>,
    /// Optional warm start.
    pub x0: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            x0: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    fn iter_cap(&self, order: usize) -> usize {
        self.max_iter.unwrap_or(4 * order.max(1))
    }
}

/// Outcome of an iterative solve. Residual history entries are relative to
/// `||b||` and may oscillate; only the predicted error curve is monotone.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Set when the operator revealed itself indefinite / rank-deficient.
    pub breakdown: bool,
    pub kappa_bound: Option<f64>,
    pub predicted_error_curve: Option<Vec<f64>>,
}

impl SolveReport {
    fn new() -> Self {
        Self {
            iterations: 0,
            residual_history: Vec::new(),
            converged: false,
            breakdown: false,
            kappa_bound: None,
            predicted_error_curve: None,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Plain conjugate gradients; never errors, reports breakdown instead.
/// Used directly by the 2D fit where a rank-deficient system should still
/// return the last (least-norm style) iterate.
pub(crate) fn cg_iterate<F>(
    apply: F,
    b: &[f64],
    cfg: &SolverConfig,
) -> (Vec<f64>, SolveReport)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut report = SolveReport::new();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        report.converged = true;
        return (vec![0.0; n], report);
    }

    let mut x = cfg.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    report.residual_history.push(rs.sqrt() / b_norm);

    let cap = cfg.iter_cap(n);
    for _ in 0..cap {
        if rs.sqrt() <= cfg.tol * b_norm {
            report.converged = true;
            return (x, report);
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            report.breakdown = true;
            return (x, report);
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        report.iterations += 1;
        report.residual_history.push(rs_new.sqrt() / b_norm);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    report.converged = rs.sqrt() <= cfg.tol * b_norm;
    (x, report)
}

/// Conjugate gradient solve of `A c = b` for a symmetric positive definite
/// operator given only through its application. One operator call per
/// iteration.
pub fn cg_solve<F>(apply: F, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right hand side"));
    }
    let (x, report) = cg_iterate(apply, b, cfg);
    if report.breakdown {
        let diag = report
            .residual_history
            .last()
            .copied()
            .unwrap_or(f64::NAN);
        return Err(Error::IndefiniteOperator(-diag));
    }
    Ok((x, report))
}

/// Maximal gap between consecutive sampling points, including the reflected
/// ghost points `x_0 = -x_1` and `x_{r+1} = 2 - x_r`.
pub fn max_gap(pts: &PointSet1D) -> f64 {
    let xs = pts.as_slice();
    let r = xs.len();
    let mut delta = 2.0 * xs[0]; // x_1 - (-x_1)
    delta = delta.max(2.0 - xs[r - 1] - xs[r - 1]);
    for w in xs.windows(2) {
        delta = delta.max(w[1] - w[0]);
    }
    delta
}

/// A priori condition bound `((1 + dM)/(1 - dM))^2`, valid only while
/// `delta * M < 1`.
pub fn condition_bound(delta: f64, degree: usize) -> Option<f64> {
    let dm = delta * degree as f64;
    if dm >= 1.0 {
        None
    } else {
        let q = (1.0 + dm) / (1.0 - dm);
        Some(q * q)
    }
}

/// Standard CG error envelope `2 k ((sqrt(k)-1)/(sqrt(k)+1))^n e0`.
pub fn cg_error_predictor(kappa: f64, e0: f64, n: usize) -> f64 {
    let rk = kappa.sqrt();
    2.0 * kappa * ((rk - 1.0) / (rk + 1.0)).powi(n as i32) * e0
}

/// LSQR (Paige & Saunders) for `min ||V c - s_w||` with operator-only access
/// to `V` and `V'`. The callbacks are checked for adjoint consistency on a
/// deterministic random pair before iterating.
pub fn lsqr_solve<F, G>(
    apply_v: F,
    apply_vt: G,
    s_w: &[f64],
    ncols: usize,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    if s_w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right hand side"));
    }
    let nrows = s_w.len();

    // <Vx, y> == <x, V'y> on a fixed pseudo-random pair.
    {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let x: Vec<f64> = (0..ncols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..nrows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = dot(&apply_v(&x), &y);
        let rhs = dot(&x, &apply_vt(&y));
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        if (lhs - rhs).abs() > 1e-8 * scale {
            return Err(Error::AdjointMismatch((lhs - rhs).abs()));
        }
    }

    let mut report = SolveReport::new();
    let mut x = cfg.x0.clone().unwrap_or_else(|| vec![0.0; ncols]);

    // Solve for the correction on top of the warm start.
    let mut u: Vec<f64> = {
        let vx = apply_v(&x);
        s_w.iter().zip(&vx).map(|(b, a)| b - a).collect()
    };
    let b_norm = norm(s_w);
    if b_norm == 0.0 {
        report.converged = true;
        return Ok((vec![0.0; ncols], report));
    }
    let mut beta = norm(&u);
    if beta == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    for v in &mut u {
        *v /= beta;
    }
    let mut v = apply_vt(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    for w in &mut v {
        *w /= alpha;
    }
    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let mut a_norm_sq = 0.0f64;
    report.residual_history.push(phi_bar / b_norm);

    let cap = cfg.iter_cap(ncols);
    for _ in 0..cap {
        // Bidiagonalization step.
        let vv = apply_v(&v);
        for i in 0..nrows {
            u[i] = vv[i] - alpha * u[i];
        }
        beta = norm(&u);
        if beta > 0.0 {
            for val in &mut u {
                *val /= beta;
            }
        }
        let vt = apply_vt(&u);
        for i in 0..ncols {
            v[i] = vt[i] - beta * v[i];
        }
        alpha = norm(&v);
        if alpha > 0.0 {
            for val in &mut v {
                *val /= alpha;
            }
        }
        a_norm_sq += alpha * alpha + beta * beta;

        // Plane rotation.
        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar *= s;

        for i in 0..ncols {
            x[i] += (phi / rho) * w[i];
            w[i] = v[i] - (theta / rho) * w[i];
        }
        report.iterations += 1;
        report.residual_history.push(phi_bar / b_norm);

        // Consistent-system and least-squares stopping rules.
        let atr = phi_bar * alpha * c.abs();
        if phi_bar <= cfg.tol * b_norm
            || atr <= cfg.tol * a_norm_sq.sqrt().max(1e-300) * phi_bar
        {
            report.converged = true;
            break;
        }
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_converges_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.0];
        let (x, rep) = cg_solve(|v| v.to_vec(), &b, &SolverConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn half_identity_doubles() {
        let b = vec![0.5, 1.5];
        let (x, rep) = cg_solve(
            |v| v.iter().map(|a| 0.5 * a).collect(),
            &b,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.iterations, 1);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_spd_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let n = 20usize;
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(200),
            x0: None,
        };
        let (x, rep) = cg_solve(
            |v| (&a * DVector::from_column_slice(v)).iter().copied().collect(),
            &b,
            &cfg,
        )
        .unwrap();
        assert!(rep.converged);
        let want = a
            .clone()
            .cholesky()
            .unwrap()
            .solve(&DVector::from_column_slice(&b));
        for i in 0..n {
            assert!((x[i] - want[i]).abs() <= 1e-8 * want.amax().max(1.0));
        }
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let (x, rep) = cg_solve(|v| v.to_vec(), &[0.0, 0.0], &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn warm_start_with_exact_solution() {
        let b = vec![2.0, -1.0, 0.5];
        let cfg = SolverConfig {
            x0: Some(b.clone()),
            ..Default::default()
        };
        let (_, rep) = cg_solve(|v| v.to_vec(), &b, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
    }

    #[test]
    fn indefinite_operator_is_an_error() {
        let res = cg_solve(
            |v| v.iter().map(|a| -a).collect(),
            &[1.0, 1.0],
            &SolverConfig::default(),
        );
        assert!(matches!(res, Err(Error::IndefiniteOperator(_))));
    }

    #[test]
    fn max_gap_hand_values() {
        let p = PointSet1D::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert!((max_gap(&p) - 0.5).abs() < 1e-15);
        let p = PointSet1D::new(vec![0.25, 0.75]).unwrap();
        assert!((max_gap(&p) - 0.5).abs() < 1e-15);
        let p = PointSet1D::new(vec![0.5]).unwrap();
        assert!((max_gap(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn condition_bound_values() {
        assert!((condition_bound(0.01, 50).unwrap() - 9.0).abs() < 1e-12);
        assert!(condition_bound(0.5, 2).is_none());
        assert!(condition_bound(0.05, 20).is_none());
        // delta -> 0 limit.
        assert!((condition_bound(1e-12, 1).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn predictor_values() {
        assert_eq!(cg_error_predictor(1.0, 3.0, 2), 0.0);
        assert!((cg_error_predictor(4.0, 1.5, 0) - 12.0).abs() < 1e-13);
        assert!((cg_error_predictor(9.0, 1.0, 2) - 4.5).abs() < 1e-13);
    }

    fn dense_ops(a: DMatrix<f64>) -> (impl Fn(&[f64]) -> Vec<f64>, impl Fn(&[f64]) -> Vec<f64>) {
        let at = a.transpose();
        (
            move |x: &[f64]| (&a * DVector::from_column_slice(x)).iter().copied().collect(),
            move |y: &[f64]| (&at * DVector::from_column_slice(y)).iter().copied().collect(),
        )
    }

    #[test]
    fn lsqr_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let (r, n) = (12usize, 12usize);
        let a = DMatrix::from_fn(r, n, |_, _| rng.gen_range(-1.0..1.0));
        let xtrue: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (&a * DVector::from_column_slice(&xtrue)).iter().copied().collect();
        let (av, avt) = dense_ops(a.clone());
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(400),
            x0: None,
        };
        let (x, _) = lsqr_solve(av, avt, &b, n, &cfg).unwrap();
        let res = (&a * DVector::from_column_slice(&x)) - DVector::from_column_slice(&b);
        assert!(res.norm() <= 1e-8 * DVector::from_column_slice(&b).norm());
    }

    #[test]
    fn lsqr_zero_rhs() {
        let a = DMatrix::<f64>::identity(4, 3);
        let (av, avt) = dense_ops(a);
        let (x, rep) = lsqr_solve(av, avt, &[0.0; 4], 3, &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lsqr_overdetermined_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let (r, n) = (60usize, 11usize);
        let a = DMatrix::from_fn(r, n, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (av, avt) = dense_ops(a.clone());
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(500),
            x0: None,
        };
        let (x, _) = lsqr_solve(av, avt, &b, n, &cfg).unwrap();
        let ata = a.transpose() * &a;
        let atb = a.transpose() * DVector::from_column_slice(&b);
        let want = ata.cholesky().unwrap().solve(&atb);
        for i in 0..n {
            assert!((x[i] - want[i]).abs() <= 1e-7 * want.amax().max(1.0));
        }
    }

    #[test]
    fn lsqr_rejects_inconsistent_adjoint() {
        let res = lsqr_solve(
            |x: &[f64]| x.to_vec(),
            |y: &[f64]| y.iter().map(|v| 2.0 * v).collect(),
            &[1.0, 2.0],
            2,
            &SolverConfig::default(),
        );
        assert!(matches!(res, Err(Error::AdjointMismatch(_))));
    }
}
