//! End-to-end fitting pipelines: sample ingestion, weight construction,
//! fixed-degree least squares fits in 1D and 2D, and the multilevel scheme
//! that selects the degree through a discrepancy test.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::grid::{GridField, GridSpec};
use crate::nudct::{self, PointSet1D, PointSet2D};
use crate::solver::{self, SolverConfig, SolveReport};
use crate::th;
use crate::{Error, Result, SQRT_2};

/// Midpoint quadrature weights `w_j = (x_{j+1} - x_{j-1})/2` with reflected
/// ghost points `x_0 = -x_1`, `x_{r+1} = 2 - x_r`. With `x_1 = 0` and
/// `x_r = 1` the weights telescope to a total mass of one.
pub fn midpoint_weights(pts: &PointSet1D) -> Vec<f64> {
    let xs = pts.as_slice();
    let r = xs.len();
    (0..r)
        .map(|j| {
            let prev = if j == 0 { -xs[0] } else { xs[j - 1] };
            let next = if j == r - 1 { 2.0 - xs[r - 1] } else { xs[j + 1] };
            (next - prev) / 2.0
        })
        .collect()
}

/// Affine map between original and normalized `[0,1]^d` coordinates:
/// `normalized = (t - offset) / scale` per axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DomainMap {
    pub offset: [f64; 2],
    pub scale: [f64; 2],
}

impl DomainMap {
    pub fn identity() -> Self {
        Self {
            offset: [0.0, 0.0],
            scale: [1.0, 1.0],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.offset == [0.0, 0.0] && self.scale == [1.0, 1.0]
    }

    pub fn to_original(&self, axis: usize, t: f64) -> f64 {
        self.offset[axis] + self.scale[axis] * t
    }

    pub fn to_normalized(&self, axis: usize, t: f64) -> f64 {
        (t - self.offset[axis]) / self.scale[axis]
    }
}

fn axis_map(min: f64, max: f64) -> Result<(f64, f64)> {
    if (0.0..=1.0).contains(&min) && (0.0..=1.0).contains(&max) {
        return Ok((0.0, 1.0));
    }
    if max > min {
        Ok((min, max - min))
    } else {
        Err(Error::InvalidPoints(
            "cannot normalize a single out-of-range location".into(),
        ))
    }
}

/// How ingestion assigns weights when none are supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightPolicy {
    /// Midpoint quadrature weights (1D only).
    Midpoint,
    /// Uniform `1/r`.
    Uniform,
}

/// Sampling locations of a data set.
#[derive(Debug, Clone)]
pub enum SamplePoints {
    One(PointSet1D),
    Two(PointSet2D),
}

impl SamplePoints {
    pub fn len(&self) -> usize {
        match self {
            SamplePoints::One(p) => p.len(),
            SamplePoints::Two(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            SamplePoints::One(_) => 1,
            SamplePoints::Two(_) => 2,
        }
    }
}

/// Scattered samples with per-sample positive weights, normalized to the
/// unit domain. The affine map back to original coordinates is retained.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: SamplePoints,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: DomainMap,
}

fn check_set(len: usize, values: &[f64], weights: &[f64]) -> Result<()> {
    if values.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: values.len(),
        });
    }
    if weights.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: weights.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("values/weights"));
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::NonPositiveWeight);
    }
    Ok(())
}

impl SampleSet {
    pub fn one_d(pts: PointSet1D, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_set(pts.len(), &values, &weights)?;
        Ok(Self {
            points: SamplePoints::One(pts),
            values,
            weights,
            domain: DomainMap::identity(),
        })
    }

    pub fn two_d(pts: PointSet2D, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_set(pts.len(), &values, &weights)?;
        Ok(Self {
            points: SamplePoints::Two(pts),
            values,
            weights,
            domain: DomainMap::identity(),
        })
    }

    /// Ingests raw 1D data: sorts, resolves duplicates (rejected unless
    /// `merge` averages values and combines weights additively), normalizes
    /// out-of-range coordinates and fills in default weights.
    pub fn from_raw_1d(
        xs: Vec<f64>,
        values: Vec<f64>,
        weights: Option<Vec<f64>>,
        merge: bool,
        policy: WeightPolicy,
    ) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: values.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::InvalidPoints("no samples".into()));
        }
        if xs.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        let w_in = match &weights {
            Some(w) => {
                check_set(xs.len(), &values, w)?;
                Some(w.clone())
            }
            None => None,
        };

        let mut rows: Vec<(f64, f64, f64)> = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| (x, values[j], w_in.as_ref().map_or(1.0, |w| w[j])))
            .collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
        for row in rows {
            match merged.last_mut() {
                Some(last) if last.0 == row.0 => {
                    if !merge {
                        return Err(Error::DuplicatePoint(row.0));
                    }
                    let wsum = last.2 + row.2;
                    last.1 = (last.1 * last.2 + row.1 * row.2) / wsum;
                    last.2 = wsum;
                }
                _ => merged.push(row),
            }
        }

        let (offset, scale) = axis_map(merged[0].0, merged.last().unwrap().0)?;
        let pts = PointSet1D::new(merged.iter().map(|r| (r.0 - offset) / scale).collect())?;
        let values: Vec<f64> = merged.iter().map(|r| r.1).collect();
        let weights = match (weights.is_some(), policy) {
            (true, _) => merged.iter().map(|r| r.2).collect(),
            (false, WeightPolicy::Midpoint) => midpoint_weights(&pts),
            (false, WeightPolicy::Uniform) => vec![1.0 / pts.len() as f64; pts.len()],
        };
        let mut set = Self::one_d(pts, values, weights)?;
        set.domain = DomainMap {
            offset: [offset, 0.0],
            scale: [scale, 1.0],
        };
        Ok(set)
    }

    /// 2D analog of [`SampleSet::from_raw_1d`]; default weights are uniform.
    pub fn from_raw_2d(
        pts: Vec<[f64; 2]>,
        values: Vec<f64>,
        weights: Option<Vec<f64>>,
        merge: bool,
    ) -> Result<Self> {
        if pts.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: pts.len(),
                got: values.len(),
            });
        }
        if pts.is_empty() {
            return Err(Error::InvalidPoints("no samples".into()));
        }
        if pts.iter().flatten().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        let w_in = match &weights {
            Some(w) => {
                check_set(pts.len(), &values, w)?;
                Some(w.clone())
            }
            None => None,
        };

        let mut rows: Vec<([f64; 2], f64, f64)> = pts
            .iter()
            .enumerate()
            .map(|(j, &p)| (p, values[j], w_in.as_ref().map_or(1.0, |w| w[j])))
            .collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<([f64; 2], f64, f64)> = Vec::with_capacity(rows.len());
        for row in rows {
            match merged.last_mut() {
                Some(last) if last.0 == row.0 => {
                    if !merge {
                        return Err(Error::DuplicatePoint(row.0[0]));
                    }
                    let wsum = last.2 + row.2;
                    last.1 = (last.1 * last.2 + row.1 * row.2) / wsum;
                    last.2 = wsum;
                }
                _ => merged.push(row),
            }
        }

        let (x_min, x_max) = merged
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, r| {
                (a.0.min(r.0[0]), a.1.max(r.0[0]))
            });
        let (y_min, y_max) = merged
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, r| {
                (a.0.min(r.0[1]), a.1.max(r.0[1]))
            });
        let (ox, sx) = axis_map(x_min, x_max)?;
        let (oy, sy) = axis_map(y_min, y_max)?;
        let set_pts = PointSet2D::new(
            merged
                .iter()
                .map(|r| [(r.0[0] - ox) / sx, (r.0[1] - oy) / sy])
                .collect(),
        )?;
        let r = set_pts.len();
        let values: Vec<f64> = merged.iter().map(|r| r.1).collect();
        let weights = match weights.is_some() {
            true => merged.iter().map(|r| r.2).collect(),
            false => vec![1.0 / r as f64; r],
        };
        let mut set = Self::two_d(set_pts, values, weights)?;
        set.domain = DomainMap {
            offset: [ox, oy],
            scale: [sx, sy],
        };
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A fitted cosine polynomial: coefficient vector (1D) or array (2D, x-degree
/// along rows), with the `1/sqrt(2)` convention on the leading coefficient.
#[derive(Debug, Clone)]
pub enum CosinePoly {
    One(Vec<f64>),
    Two(DMatrix<f64>),
}

impl CosinePoly {
    pub fn dim(&self) -> usize {
        match self {
            CosinePoly::One(_) => 1,
            CosinePoly::Two(_) => 2,
        }
    }

    pub fn coeffs_1d(&self) -> Option<&[f64]> {
        match self {
            CosinePoly::One(c) => Some(c),
            CosinePoly::Two(_) => None,
        }
    }

    pub fn coeffs_2d(&self) -> Option<&DMatrix<f64>> {
        match self {
            CosinePoly::Two(c) => Some(c),
            CosinePoly::One(_) => None,
        }
    }

    /// Values at the sampling locations (normalized coordinates).
    pub fn eval_at(&self, pts: &SamplePoints) -> Result<Vec<f64>> {
        match (self, pts) {
            (CosinePoly::One(c), SamplePoints::One(p)) => {
                Ok(nudct::eval_poly(c, p.as_slice())?.values)
            }
            (CosinePoly::Two(c), SamplePoints::Two(p)) => {
                Ok(nudct::eval_poly_2d(c, p.as_slice())?.values)
            }
            _ => Err(Error::InvalidArgument(
                "polynomial and point set dimensions differ".into(),
            )),
        }
    }

    /// Fast evaluation on the uniform grid `j/l` (tensor grid in 2D).
    pub fn eval_grid(&self, l: usize) -> Result<GridField> {
        match self {
            CosinePoly::One(c) => Ok(GridField {
                spec: GridSpec { dim: 1, l },
                values: nudct::eval_poly_grid(c, l)?,
            }),
            CosinePoly::Two(c) => {
                let m = nudct::eval_poly_2d_grid(c, l, l)?;
                let mut values = Vec::with_capacity((l + 1) * (l + 1));
                for i in 0..=l {
                    for j in 0..=l {
                        values.push(m[(i, j)]);
                    }
                }
                Ok(GridField {
                    spec: GridSpec { dim: 2, l },
                    values,
                })
            }
        }
    }
}

/// Which route computes the least squares minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitPath {
    /// Normal equations `A c = b` via the fast operator and CG.
    NormalEquations,
    /// LSQR on `V c = s_w` without forming the normal equations.
    DirectLs,
}

fn require_1d(samples: &SampleSet) -> Result<&PointSet1D> {
    match &samples.points {
        SamplePoints::One(p) => Ok(p),
        SamplePoints::Two(_) => Err(Error::InvalidArgument("expected 1D samples".into())),
    }
}

fn require_2d(samples: &SampleSet) -> Result<&PointSet2D> {
    match &samples.points {
        SamplePoints::Two(p) => Ok(p),
        SamplePoints::One(_) => Err(Error::InvalidArgument("expected 2D samples".into())),
    }
}

fn attach_conditioning(report: &mut SolveReport, pts: &PointSet1D, degree: usize, x0: Option<&[f64]>, c: &[f64]) {
    let delta = solver::max_gap(pts);
    if let Some(kappa) = solver::condition_bound(delta, degree.max(1)) {
        report.kappa_bound = Some(kappa);
        // Envelope of the CG error; e0 approximated by the distance of the
        // start from the computed solution.
        let e0 = c
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s = x0.map_or(0.0, |x| x[i]);
                (v - s) * (v - s)
            })
            .sum::<f64>()
            .sqrt();
        report.predicted_error_curve = Some(
            (0..=report.iterations)
                .map(|n| solver::cg_error_predictor(kappa, e0, n))
                .collect(),
        );
    }
}

/// Weighted least squares fit of a 1D cosine polynomial of fixed degree.
pub fn fit_1d(
    samples: &SampleSet,
    degree: usize,
    cfg: &SolverConfig,
    path: FitPath,
) -> Result<(CosinePoly, SolveReport)> {
    let pts = require_1d(samples)?;
    let r = pts.len();
    if degree >= r {
        return Err(Error::DegreeTooLarge {
            degree,
            samples: r,
        });
    }
    match path {
        FitPath::NormalEquations => {
            let (op, b) = th::assemble_1d(pts, &samples.weights, &samples.values, degree)?;
            let (c, mut report) = solver::cg_solve(
                |x| op.matvec(x).expect("operator shape fixed at assembly"),
                &b,
                cfg,
            )?;
            attach_conditioning(&mut report, pts, degree, cfg.x0.as_deref(), &c);
            Ok((CosinePoly::One(c), report))
        }
        FitPath::DirectLs => {
            let sqrt_w: Vec<f64> = samples.weights.iter().map(|w| w.sqrt()).collect();
            let s_w: Vec<f64> = samples
                .values
                .iter()
                .zip(&sqrt_w)
                .map(|(s, w)| s * w)
                .collect();
            let pts_v = pts.clone();
            let sw_v = sqrt_w.clone();
            let apply_v = move |c: &[f64]| -> Vec<f64> {
                let e = nudct::eval_poly(c, pts_v.as_slice()).expect("finite coefficients");
                e.values.iter().zip(&sw_v).map(|(v, w)| v * w).collect()
            };
            let pts_t = pts.clone();
            let apply_vt = move |y: &[f64]| -> Vec<f64> {
                let v: Vec<f64> = y.iter().zip(&sqrt_w).map(|(y, w)| y * w).collect();
                let mut g = nudct::cosine_sums(&pts_t, &v, degree).expect("length checked");
                g[0] /= SQRT_2;
                g
            };
            let (c, mut report) = solver::lsqr_solve(apply_v, apply_vt, &s_w, degree + 1, cfg)?;
            attach_conditioning(&mut report, pts, degree, cfg.x0.as_deref(), &c);
            Ok((CosinePoly::One(c), report))
        }
    }
}

/// Weighted least squares fit of a 2D cosine polynomial of fixed degrees.
///
/// Invertibility is not guaranteed in 2D; if CG detects rank deficiency the
/// fit still returns the last iterate, with `breakdown` set in the report.
pub fn fit_2d(
    samples: &SampleSet,
    degree_x: usize,
    degree_y: usize,
    cfg: &SolverConfig,
) -> Result<(CosinePoly, SolveReport)> {
    let pts = require_2d(samples)?;
    let r = pts.len();
    let ncoef = (degree_x + 1) * (degree_y + 1);
    if ncoef > r {
        return Err(Error::DegreeTooLarge {
            degree: degree_x.max(degree_y),
            samples: r,
        });
    }
    cfg.validate()?;
    let (op, b) = th::assemble_2d(pts, &samples.weights, &samples.values, degree_x, degree_y)?;
    let (c, report) = solver::cg_iterate(
        |x| op.matvec(x).expect("operator shape fixed at assembly"),
        &b,
        cfg,
    );
    let coeffs = DMatrix::from_fn(degree_x + 1, degree_y + 1, |k, l| c[l * (degree_x + 1) + k]);
    Ok((CosinePoly::Two(coeffs), report))
}

/// Weighted squared residual and weighted data norm,
/// `(sum_j w_j |p(x_j) - s_j|^2, sum_j w_j |s_j|^2)`.
pub fn residual(samples: &SampleSet, poly: &CosinePoly) -> Result<(f64, f64)> {
    let fitted = poly.eval_at(&samples.points)?;
    let mut res = 0.0;
    let mut norm = 0.0;
    for ((p, s), w) in fitted.iter().zip(&samples.values).zip(&samples.weights) {
        res += w * (p - s) * (p - s);
        norm += w * s * s;
    }
    Ok((res, norm))
}

/// Multilevel configuration. `epsilon` has no default: it encodes the data
/// accuracy and must be supplied (typically the squared noise fraction).
#[derive(Debug, Clone)]
pub struct MultilevelConfig {
    pub epsilon: f64,
    pub m0: usize,
    pub increment: usize,
    pub m_max: usize,
    /// Use the first-power residual sum instead of the squared form.
    pub literal_discrepancy: bool,
}

impl MultilevelConfig {
    pub fn new(epsilon: f64, m_max: usize) -> Self {
        Self {
            epsilon,
            m0: 1,
            increment: 1,
            m_max,
            literal_discrepancy: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub degree: usize,
    pub iterations: usize,
    pub weighted_residual: f64,
    pub threshold: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelTrace {
    pub levels: Vec<LevelRecord>,
    pub accepted: bool,
}

fn discrepancy_lhs(samples: &SampleSet, poly: &CosinePoly, literal: bool) -> Result<f64> {
    if literal {
        let fitted = poly.eval_at(&samples.points)?;
        Ok(fitted
            .iter()
            .zip(&samples.values)
            .zip(&samples.weights)
            .map(|((p, s), w)| w * (p - s).abs())
            .sum())
    } else {
        Ok(residual(samples, poly)?.0)
    }
}

/// Runs fits at increasing degrees until the discrepancy test accepts,
/// warm-starting each level with the previous coefficients extended by
/// zeros and reusing the incrementally assembled generating sequence.
pub fn multilevel_fit(
    samples: &SampleSet,
    ml: &MultilevelConfig,
    cfg: &SolverConfig,
) -> Result<(CosinePoly, LevelTrace)> {
    if !(ml.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if ml.increment == 0 {
        return Err(Error::InvalidArgument("increment must be positive".into()));
    }
    cfg.validate()?;
    let threshold = {
        let wnorm: f64 = samples
            .values
            .iter()
            .zip(&samples.weights)
            .map(|(s, w)| w * s * s)
            .sum();
        ml.epsilon * wnorm
    };
    match &samples.points {
        SamplePoints::One(pts) => multilevel_1d(samples, pts, ml, cfg, threshold),
        SamplePoints::Two(pts) => multilevel_2d(samples, pts, ml, cfg, threshold),
    }
}

fn level_degrees(ml: &MultilevelConfig, hard_cap: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = ml.m0;
    while m <= ml.m_max && m <= hard_cap {
        out.push(m);
        m += ml.increment;
    }
    out
}

fn multilevel_1d(
    samples: &SampleSet,
    pts: &PointSet1D,
    ml: &MultilevelConfig,
    cfg: &SolverConfig,
    threshold: f64,
) -> Result<(CosinePoly, LevelTrace)> {
    let r = pts.len();
    let degrees = level_degrees(ml, r.saturating_sub(1));
    if degrees.is_empty() {
        return Err(Error::InvalidArgument(
            "no admissible level degrees (m0 too large?)".into(),
        ));
    }
    let m_top = *degrees.last().unwrap();

    // One NDCT pass covers all levels: A_M is the leading principal
    // submatrix of A_{M+1} and b_M a prefix of b_{M+1}.
    let mut gen_full = nudct::cosine_sums(pts, &samples.weights, 2 * m_top + 1)?;
    for g in &mut gen_full {
        *g *= 0.5;
    }
    let ws: Vec<f64> = samples
        .weights
        .iter()
        .zip(&samples.values)
        .map(|(w, s)| w * s)
        .collect();
    let b_full = nudct::cosine_sums(pts, &ws, m_top)?;

    let mut trace = LevelTrace {
        levels: Vec::new(),
        accepted: false,
    };
    let mut coeffs: Vec<f64> = Vec::new();
    for &m in &degrees {
        let op = th::ThOperator::from_gen(gen_full[..2 * m + 2].to_vec(), m)?;
        let mut b = b_full[..=m].to_vec();
        b[0] /= SQRT_2;
        let mut warm = coeffs.clone();
        warm.resize(m + 1, 0.0);
        let level_cfg = SolverConfig {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            x0: if coeffs.is_empty() { None } else { Some(warm) },
        };
        let (c, report) = solver::cg_solve(
            |x| op.matvec(x).expect("operator shape fixed at assembly"),
            &b,
            &level_cfg,
        )?;
        coeffs = c;
        let poly = CosinePoly::One(coeffs.clone());
        let lhs = discrepancy_lhs(samples, &poly, ml.literal_discrepancy)?;
        let accepted = lhs <= threshold;
        trace.levels.push(LevelRecord {
            degree: m,
            iterations: report.iterations,
            weighted_residual: lhs,
            threshold,
            accepted,
        });
        if accepted {
            trace.accepted = true;
            return Ok((poly, trace));
        }
    }
    Ok((CosinePoly::One(coeffs), trace))
}

fn multilevel_2d(
    samples: &SampleSet,
    pts: &PointSet2D,
    ml: &MultilevelConfig,
    cfg: &SolverConfig,
    threshold: f64,
) -> Result<(CosinePoly, LevelTrace)> {
    let r = pts.len();
    // (m+1)^2 <= r is necessary for a determined system.
    let hard_cap = (1..).take_while(|m| (m + 1) * (m + 1) <= r).last().unwrap_or(0);
    let degrees = level_degrees(ml, hard_cap);
    if degrees.is_empty() {
        return Err(Error::InvalidArgument(
            "no admissible level degrees (m0 too large?)".into(),
        ));
    }
    let m_top = *degrees.last().unwrap();

    let mut gen_full =
        nudct::cosine_sums_2d(pts, &samples.weights, 2 * m_top + 1, 2 * m_top + 1)?;
    for g in gen_full.iter_mut() {
        *g *= 0.25;
    }
    let ws: Vec<f64> = samples
        .weights
        .iter()
        .zip(&samples.values)
        .map(|(w, s)| w * s)
        .collect();
    let b_full = nudct::cosine_sums_2d(pts, &ws, m_top, m_top)?;

    let mut trace = LevelTrace {
        levels: Vec::new(),
        accepted: false,
    };
    let mut coeffs = DMatrix::<f64>::zeros(0, 0);
    for &m in &degrees {
        let op = th::BlockThOperator::from_gen(
            gen_full.view((0, 0), (2 * m + 2, 2 * m + 2)).into_owned(),
            m,
            m,
        )?;
        let m1 = m + 1;
        let mut b = vec![0.0; m1 * m1];
        for l in 0..m1 {
            for k in 0..m1 {
                b[l * m1 + k] = b_full[(k, l)];
            }
        }
        b[0] /= SQRT_2;
        let x0 = if coeffs.is_empty() {
            None
        } else {
            let mut warm = vec![0.0; m1 * m1];
            for l in 0..coeffs.ncols() {
                for k in 0..coeffs.nrows() {
                    warm[l * m1 + k] = coeffs[(k, l)];
                }
            }
            Some(warm)
        };
        let level_cfg = SolverConfig {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            x0,
        };
        let (c, report) = solver::cg_solve(
            |x| op.matvec(x).expect("operator shape fixed at assembly"),
            &b,
            &level_cfg,
        )?;
        coeffs = DMatrix::from_fn(m1, m1, |k, l| c[l * m1 + k]);
        let poly = CosinePoly::Two(coeffs.clone());
        let lhs = discrepancy_lhs(samples, &poly, ml.literal_discrepancy)?;
        let accepted = lhs <= threshold;
        trace.levels.push(LevelRecord {
            degree: m,
            iterations: report.iterations,
            weighted_residual: lhs,
            threshold,
            accepted,
        });
        if accepted {
            trace.accepted = true;
            return Ok((poly, trace));
        }
    }
    Ok((CosinePoly::Two(coeffs), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_points(rng: &mut impl Rng, r: usize) -> PointSet1D {
        let mut pts: Vec<f64> = (0..r).map(|_| rng.gen_range(0.0..1.0)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        PointSet1D::new(pts).unwrap()
    }

    #[test]
    fn midpoint_weight_hand_values() {
        let p = PointSet1D::new(vec![0.0, 0.5, 1.0]).unwrap();
        let w = midpoint_weights(&p);
        assert_eq!(w.len(), 3);
        assert!((w[0] - 0.25).abs() < 1e-15);
        assert!((w[1] - 0.5).abs() < 1e-15);
        assert!((w[2] - 0.25).abs() < 1e-15);

        let p = PointSet1D::new(vec![0.0, 1.0]).unwrap();
        let w = midpoint_weights(&p);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn midpoint_weights_telescope_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let mut pts: Vec<f64> = (0..30).map(|_| rng.gen_range(0.0..1.0)).collect();
        pts.push(0.0);
        pts.push(1.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let p = PointSet1D::new(pts).unwrap();
        let total: f64 = midpoint_weights(&p).iter().sum();
        assert!((total - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn ingestion_normalizes_and_sorts() {
        let set = SampleSet::from_raw_1d(
            vec![4.0, 2.0, 3.0],
            vec![40.0, 20.0, 30.0],
            None,
            false,
            WeightPolicy::Midpoint,
        )
        .unwrap();
        let pts = match &set.points {
            SamplePoints::One(p) => p.as_slice().to_vec(),
            _ => unreachable!(),
        };
        assert_eq!(pts, vec![0.0, 0.5, 1.0]);
        assert_eq!(set.values, vec![20.0, 30.0, 40.0]);
        assert!((set.domain.to_original(0, 0.5) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_rejected_or_merged() {
        let dup = SampleSet::from_raw_1d(
            vec![0.1, 0.1, 0.8],
            vec![1.0, 3.0, 5.0],
            None,
            false,
            WeightPolicy::Uniform,
        );
        assert!(matches!(dup, Err(Error::DuplicatePoint(_))));
        let merged = SampleSet::from_raw_1d(
            vec![0.1, 0.1, 0.8],
            vec![1.0, 3.0, 5.0],
            None,
            true,
            WeightPolicy::Uniform,
        )
        .unwrap();
        assert_eq!(merged.len(), 2);
        assert!((merged.values[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_data_recovers_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let pts = random_points(&mut rng, 20);
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vec![3.0; 20], w).unwrap();
        let (poly, rep) = fit_1d(&set, 4, &SolverConfig::default(), FitPath::NormalEquations).unwrap();
        assert!(rep.converged);
        let c = poly.coeffs_1d().unwrap();
        assert!((c[0] - 3.0 * SQRT_2).abs() <= 1e-8);
        for ck in &c[1..] {
            assert!(ck.abs() <= 1e-8);
        }
        let (res, _) = residual(&set, &poly).unwrap();
        assert!(res <= 1e-14);
    }

    #[test]
    fn recovers_pure_cosine_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let pts = random_points(&mut rng, 40);
        let vals: Vec<f64> = pts.as_slice().iter().map(|&x| (PI * x).cos()).collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vals, w).unwrap();
        let cfg = SolverConfig {
            tol: 1e-12,
            ..Default::default()
        };
        let (poly, _) = fit_1d(&set, 5, &cfg, FitPath::NormalEquations).unwrap();
        let c = poly.coeffs_1d().unwrap();
        assert!((c[1] - 1.0).abs() <= 1e-9);
        for (k, ck) in c.iter().enumerate() {
            if k != 1 {
                assert!(ck.abs() <= 1e-9, "c[{k}] = {ck}");
            }
        }
        let (res, _) = residual(&set, &poly).unwrap();
        assert!(res.sqrt() <= 1e-10);
    }

    #[test]
    fn matches_dense_qr_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let pts = random_points(&mut rng, 50);
        let r = pts.len();
        let vals: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts.clone(), vals.clone(), w.clone()).unwrap();
        let cfg = SolverConfig {
            tol: 1e-13,
            max_iter: Some(500),
            x0: None,
        };
        let (poly, _) = fit_1d(&set, 8, &cfg, FitPath::NormalEquations).unwrap();
        let c = poly.coeffs_1d().unwrap();

        let v = DMatrix::from_fn(r, 9, |j, k| {
            let sw = w[j].sqrt();
            if k == 0 {
                sw / SQRT_2
            } else {
                sw * (PI * k as f64 * pts.as_slice()[j]).cos()
            }
        });
        let sw: Vec<f64> = vals.iter().zip(&w).map(|(s, w)| s * w.sqrt()).collect();
        let qr = v.qr();
        let want = qr
            .r()
            .solve_upper_triangular(&(qr.q().transpose() * nalgebra::DVector::from_column_slice(&sw)))
            .unwrap();
        for k in 0..9 {
            assert!((c[k] - want[k]).abs() <= 1e-8);
        }
    }

    #[test]
    fn both_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let pts = random_points(&mut rng, 60);
        let r = pts.len();
        let vals: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vals, w).unwrap();
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(500),
            x0: None,
        };
        let (p1, _) = fit_1d(&set, 7, &cfg, FitPath::NormalEquations).unwrap();
        let (p2, _) = fit_1d(&set, 7, &cfg, FitPath::DirectLs).unwrap();
        for (a, b) in p1
            .coeffs_1d()
            .unwrap()
            .iter()
            .zip(p2.coeffs_1d().unwrap())
        {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn degree_must_stay_below_sample_count() {
        let pts = PointSet1D::new(vec![0.0, 0.5, 1.0]).unwrap();
        let set = SampleSet::one_d(pts, vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(matches!(
            fit_1d(&set, 3, &SolverConfig::default(), FitPath::NormalEquations),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn normal_equation_gradient_vanishes() {
        // ||V'(Vc - s_w)|| <= tol-scaled ||V's_w|| at the solution.
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let pts = random_points(&mut rng, 45);
        let r = pts.len();
        let vals: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts.clone(), vals, w).unwrap();
        let cfg = SolverConfig {
            tol: 1e-11,
            max_iter: Some(300),
            x0: None,
        };
        let (poly, _) = fit_1d(&set, 6, &cfg, FitPath::NormalEquations).unwrap();
        let (op, b) = th::assemble_1d(&pts, &set.weights, &set.values, 6).unwrap();
        let ac = op.matvec(poly.coeffs_1d().unwrap()).unwrap();
        let grad: f64 = ac
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let bnorm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(grad <= 1e-9 * bnorm.max(1.0));
    }

    #[test]
    fn constant_2d_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let set = SampleSet::from_raw_2d(pts, vec![2.5; 50], None, false).unwrap();
        let (poly, _) = fit_2d(&set, 2, 2, &SolverConfig::default()).unwrap();
        let c = poly.coeffs_2d().unwrap();
        assert!((c[(0, 0)] - 2.5 * SQRT_2).abs() <= 1e-7);
        for (idx, v) in c.iter().enumerate() {
            if idx != 0 {
                assert!(v.abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn recovers_2d_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let vals: Vec<f64> = pts
            .iter()
            .map(|p| (PI * p[0]).cos() * (2.0 * PI * p[1]).cos())
            .collect();
        let set = SampleSet::from_raw_2d(pts, vals, None, false).unwrap();
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(400),
            x0: None,
        };
        let (poly, rep) = fit_2d(&set, 3, 3, &cfg).unwrap();
        assert!(rep.converged);
        let c = poly.coeffs_2d().unwrap();
        assert!((c[(1, 2)] - 1.0).abs() <= 1e-8);
        for k in 0..4 {
            for l in 0..4 {
                if (k, l) != (1, 2) {
                    assert!(c[(k, l)].abs() <= 1e-8, "c[({k},{l})]");
                }
            }
        }
    }

    #[test]
    fn multilevel_constant_stops_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(68);
        let pts = random_points(&mut rng, 25);
        let w = midpoint_weights(&pts);
        let r = pts.len();
        let set = SampleSet::one_d(pts, vec![1.0; r], w).unwrap();
        let ml = MultilevelConfig::new(1e-6, 10);
        let (_, trace) = multilevel_fit(&set, &ml, &SolverConfig::default()).unwrap();
        assert!(trace.accepted);
        assert_eq!(trace.levels.len(), 1);
        assert_eq!(trace.levels[0].degree, 1);
    }

    #[test]
    fn multilevel_accepts_at_true_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(69);
        let pts = random_points(&mut rng, 60);
        let vals: Vec<f64> = pts
            .as_slice()
            .iter()
            .map(|&x| 0.5 + (PI * 2.0 * x).cos() * 0.3 + (PI * 5.0 * x).cos())
            .collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vals, w).unwrap();
        let ml = MultilevelConfig::new(1e-10, 12);
        let cfg = SolverConfig {
            tol: 1e-12,
            max_iter: Some(400),
            x0: None,
        };
        let (poly, trace) = multilevel_fit(&set, &ml, &cfg).unwrap();
        assert!(trace.accepted);
        assert_eq!(trace.levels.last().unwrap().degree, 5);
        assert!((poly.coeffs_1d().unwrap()[5] - 1.0).abs() <= 1e-6);
        // Residuals are nonincreasing across the nested levels.
        for pair in trace.levels.windows(2) {
            assert!(pair[1].weighted_residual <= pair[0].weighted_residual * (1.0 + 1e-9));
        }
    }

    #[test]
    fn multilevel_flags_unaccepted_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let pts = random_points(&mut rng, 30);
        let r = pts.len();
        let vals: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vals, w).unwrap();
        let ml = MultilevelConfig::new(1e-14, 3);
        let (_, trace) = multilevel_fit(&set, &ml, &SolverConfig::default()).unwrap();
        assert!(!trace.accepted);
        assert_eq!(trace.levels.last().unwrap().degree, 3);
    }

    #[test]
    fn residual_identities() {
        let pts = PointSet1D::new(vec![0.0, 0.4, 1.0]).unwrap();
        let w = midpoint_weights(&pts);
        let set = SampleSet::one_d(pts, vec![1.0, 2.0, 3.0], w.clone()).unwrap();
        // Zero polynomial: residual equals data norm.
        let zero = CosinePoly::One(vec![0.0, 0.0]);
        let (res, norm) = residual(&set, &zero).unwrap();
        assert!((res - norm).abs() <= 1e-14);
        let want: f64 = set
            .values
            .iter()
            .zip(&w)
            .map(|(s, w)| w * s * s)
            .sum();
        assert!((norm - want).abs() <= 1e-14);
    }

    #[test]
    fn parseval_identity_by_quadrature() {
        // ||p||_2^2 on [0,1] equals ||c||^2 / 2 for the scaled basis.
        let coeffs = vec![0.8, -0.5, 0.3, 0.2];
        let poly = CosinePoly::One(coeffs.clone());
        let n = 20000usize;
        let mut integral = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let v = nudct::eval_poly(&coeffs, &[t]).unwrap().values[0];
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            integral += w * v * v;
        }
        integral /= n as f64;
        let half_c: f64 = coeffs.iter().map(|c| c * c).sum::<f64>() / 2.0;
        assert!((integral - half_c).abs() <= 1e-6, "{integral} vs {half_c}");
        drop(poly);
    }

    #[test]
    fn unscaled_basis_doubles_conditioning_for_equispaced_samples() {
        let r = 32;
        let pts = PointSet1D::new((0..r).map(|j| j as f64 / (r - 1) as f64).collect()).unwrap();
        let w = midpoint_weights(&pts);
        let (op, _) = th::assemble_1d(&pts, &w, &vec![0.0; r], 10).unwrap();
        let a = op.dense();
        let n = 11;
        let d_inv = DMatrix::from_fn(n, n, |i, j| {
            if i != j {
                0.0
            } else if i == 0 {
                SQRT_2
            } else {
                1.0
            }
        });
        let a_tilde = &d_inv * &a * &d_inv;
        let eig_a = a.symmetric_eigenvalues();
        let eig_t = a_tilde.symmetric_eigenvalues();
        let cond_a = eig_a.max() / eig_a.min();
        let cond_t = eig_t.max() / eig_t.min();
        assert!((cond_t - 2.0 * cond_a).abs() <= 1e-10);
    }
}
