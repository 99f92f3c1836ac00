//! Synthetic experiment generator: a configurable anomaly field sampled at
//! random locations with exactly scaled Gaussian noise, plus the noiseless
//! reference tabulated on a regular grid.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::approx::{SampleSet, WeightPolicy};
use crate::grid::{GridField, GridSpec};
use crate::{Error, Result};

/// Shape of one anomaly contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKernel {
    /// Anisotropic Gaussian bump.
    Gaussian,
    /// Smoothed indicator plateau (product of sigmoid edges).
    Box,
}

/// One localized feature of the synthetic field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Anomaly {
    pub kernel: AnomalyKernel,
    pub center: [f64; 2],
    /// Per-axis extent: Gaussian sigma, or box half-width.
    pub extent: [f64; 2],
    pub amplitude: f64,
}

impl Anomaly {
    pub fn value(&self, dim: usize, x: f64, y: f64) -> f64 {
        let axes: &[(f64, f64, f64)] = &[
            (x, self.center[0], self.extent[0]),
            (y, self.center[1], self.extent[1]),
        ];
        let axes = &axes[..dim];
        match self.kernel {
            AnomalyKernel::Gaussian => {
                let q: f64 = axes
                    .iter()
                    .map(|(t, c, s)| {
                        let d = (t - c) / s;
                        d * d
                    })
                    .sum();
                self.amplitude * (-0.5 * q).exp()
            }
            AnomalyKernel::Box => {
                // Edge smoothing at a tenth of the half-width keeps the
                // plateau flat while avoiding a hard discontinuity.
                let prod: f64 = axes
                    .iter()
                    .map(|(t, c, h)| {
                        let s = h / 10.0;
                        let rise = 1.0 / (1.0 + (-(t - (c - h)) / s).exp());
                        let fall = 1.0 / (1.0 + ((t - (c + h)) / s).exp());
                        rise * fall
                    })
                    .product();
                self.amplitude * prod
            }
        }
    }
}

/// Full description of a reproducible synthetic run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dim: usize,
    pub samples: usize,
    pub noise_fraction: f64,
    pub seed: u64,
    pub grid_l: usize,
    pub anomalies: Vec<Anomaly>,
}

impl ExperimentSpec {
    /// Three Gaussian bumps of different sizes and signs on the unit square.
    pub fn default_2d(samples: usize, noise_fraction: f64, seed: u64, grid_l: usize) -> Self {
        Self {
            dim: 2,
            samples,
            noise_fraction,
            seed,
            grid_l,
            anomalies: vec![
                Anomaly {
                    kernel: AnomalyKernel::Gaussian,
                    center: [0.3, 0.35],
                    extent: [0.16, 0.20],
                    amplitude: 1.0,
                },
                Anomaly {
                    kernel: AnomalyKernel::Gaussian,
                    center: [0.7, 0.6],
                    extent: [0.14, 0.12],
                    amplitude: -0.7,
                },
                Anomaly {
                    kernel: AnomalyKernel::Gaussian,
                    center: [0.55, 0.85],
                    extent: [0.22, 0.18],
                    amplitude: 0.5,
                },
            ],
        }
    }

    pub fn field(&self, x: f64, y: f64) -> f64 {
        self.anomalies
            .iter()
            .map(|a| a.value(self.dim, x, y))
            .sum()
    }

    fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidArgument("dim must be 1 or 2".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 samples".into()));
        }
        if !(self.noise_fraction >= 0.0) || !self.noise_fraction.is_finite() {
            return Err(Error::InvalidArgument(
                "noise fraction must be finite and >= 0".into(),
            ));
        }
        if self.anomalies.is_empty() {
            return Err(Error::InvalidArgument("field needs an anomaly".into()));
        }
        Ok(())
    }
}

/// Output of a synthetic run: noisy samples, the clean sample values, and
/// the noiseless reference field on the grid.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub samples: SampleSet,
    pub clean_values: Vec<f64>,
    pub reference: GridField,
}

/// Draws the sample locations, adds noise with `||noise||` scaled to be
/// exactly `noise_fraction * ||clean||`, and tabulates the reference grid.
pub fn synth_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = spec.samples;

    let (locations, clean): (Vec<[f64; 2]>, Vec<f64>) = loop {
        let locs: Vec<[f64; 2]> = (0..r)
            .map(|_| {
                let x = rng.gen_range(0.0..1.0);
                let y = if spec.dim == 2 {
                    rng.gen_range(0.0..1.0)
                } else {
                    0.0
                };
                [x, y]
            })
            .collect();
        let mut sorted: Vec<[f64; 2]> = locs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
        if distinct {
            let clean = locs.iter().map(|p| spec.field(p[0], p[1])).collect();
            break (locs, clean);
        }
    };

    let mut values = clean.clone();
    if spec.noise_fraction > 0.0 {
        let noise: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
        let clean_norm = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
        let noise_norm = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
        if clean_norm == 0.0 {
            return Err(Error::InvalidArgument(
                "clean samples vanish; noise fraction undefined".into(),
            ));
        }
        let scale = spec.noise_fraction * clean_norm / noise_norm;
        for (v, e) in values.iter_mut().zip(&noise) {
            *v += scale * e;
        }
    }

    let samples = match spec.dim {
        1 => SampleSet::from_raw_1d(
            locations.iter().map(|p| p[0]).collect(),
            values,
            None,
            false,
            WeightPolicy::Midpoint,
        )?,
        _ => SampleSet::from_raw_2d(locations, values, None, false)?,
    };

    let grid = GridSpec::new(spec.dim, spec.grid_l)?;
    let n = spec.grid_l + 1;
    let mut ref_values = Vec::with_capacity(grid.node_count());
    if spec.dim == 1 {
        for i in 0..n {
            ref_values.push(spec.field(i as f64 / spec.grid_l as f64, 0.0));
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                ref_values.push(spec.field(
                    i as f64 / spec.grid_l as f64,
                    j as f64 / spec.grid_l as f64,
                ));
            }
        }
    }
    let reference = GridField::new(grid, ref_values)?;

    // from_raw sorts; recover the clean values in the same order.
    let clean_sorted = match &samples.points {
        crate::approx::SamplePoints::One(p) => p
            .as_slice()
            .iter()
            .map(|&x| spec.field(x, 0.0))
            .collect(),
        crate::approx::SamplePoints::Two(p) => p
            .as_slice()
            .iter()
            .map(|q| spec.field(q[0], q[1]))
            .collect(),
    };

    Ok(Experiment {
        samples,
        clean_values: clean_sorted,
        reference,
    })
}
