//! Command-line front end. Subcommands cover the full pipeline: synthetic
//! data generation, fitting, grid evaluation, the periodic baseline, and
//! error metrics. Machine-readable results go to stdout, diagnostics to
//! stderr. Exit codes: 0 success, 1 usage, 2 data error, 3 numerical.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use crate::approx::{
    self, CosinePoly, FitPath, MultilevelConfig, SamplePoints, SampleSet, WeightPolicy,
};
use crate::baseline;
use crate::grid::relative_l2_error;
use crate::io;
use crate::solver::SolverConfig;
use crate::synth::{synth_experiment, ExperimentSpec};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "cosfit",
    version,
    about = "Scattered data approximation with cosine polynomials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a cosine polynomial to scattered samples from a CSV file.
    Fit(FitArgs),
    /// Evaluate a fitted polynomial on a regular grid.
    Eval(EvalArgs),
    /// Generate a reproducible synthetic experiment.
    Synth(SynthArgs),
    /// Fit the dense periodic trigonometric baseline.
    Baseline(BaselineArgs),
    /// Relative l2 error between a fitted grid and a reference grid.
    Error(ErrorArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightsArg {
    Midpoint,
    Uniform,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Fixed,
    Multilevel,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverArg {
    /// CG on the fast Toeplitz+Hankel normal equations.
    Normal,
    /// LSQR on the design matrix.
    DirectLs,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input sample CSV: "x,value" (1D) or "x,y,value" (2D), optional
    /// trailing weight column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Degree (1D / both axes in 2D); in multilevel mode this is the cap.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long = "degree-x")]
    pub degree_x: Option<usize>,
    #[arg(long = "degree-y")]
    pub degree_y: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    pub mode: ModeArg,
    /// Discrepancy parameter for multilevel mode (relative squared residual).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// First-power discrepancy sum instead of the squared form.
    #[arg(long, default_value_t = false)]
    pub literal_discrepancy: bool,
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    /// Average duplicate sampling locations instead of rejecting them.
    #[arg(long, default_value_t = false)]
    pub merge_duplicates: bool,
    #[arg(long, value_enum, default_value_t = SolverArg::Normal)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Output coefficient CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Coefficient CSV produced by `fit`.
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Grid resolution L (L+1 nodes per axis).
    #[arg(long)]
    pub grid: usize,
    /// Output grid CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional ASCII PGM heatmap (2D only).
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 496)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 150)]
    pub grid: usize,
    /// Optional JSON file describing the anomaly field.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Output sample CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Output noiseless reference grid CSV.
    #[arg(long)]
    pub reference: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Periodic degree K (2K+1 real coefficients per axis).
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long = "degree-x")]
    pub degree_x: Option<usize>,
    #[arg(long = "degree-y")]
    pub degree_y: Option<usize>,
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    #[arg(long, default_value_t = false)]
    pub merge_duplicates: bool,
    #[arg(long)]
    pub grid: usize,
    /// Output grid CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ErrorArgs {
    /// Fitted grid CSV.
    #[arg(long)]
    pub fit: PathBuf,
    /// Reference grid CSV.
    #[arg(long)]
    pub reference: PathBuf,
}

fn weight_policy(arg: Option<WeightsArg>, dim: usize) -> WeightPolicy {
    match arg {
        Some(WeightsArg::Midpoint) => WeightPolicy::Midpoint,
        Some(WeightsArg::Uniform) => WeightPolicy::Uniform,
        None if dim == 1 => WeightPolicy::Midpoint,
        None => WeightPolicy::Uniform,
    }
}

fn resolve_degrees(
    degree: Option<usize>,
    dx: Option<usize>,
    dy: Option<usize>,
    dim: usize,
) -> Result<(usize, usize)> {
    match (degree, dx, dy) {
        (Some(m), None, None) => Ok((m, m)),
        (None, Some(x), Some(y)) if dim == 2 => Ok((x, y)),
        (None, Some(x), None) if dim == 1 => Ok((x, 0)),
        _ => Err(Error::InvalidArgument(
            "specify --degree, or --degree-x/--degree-y for dim 2".into(),
        )),
    }
}

fn load_samples(
    path: &PathBuf,
    dim: usize,
    merge: bool,
    weights: Option<WeightsArg>,
) -> Result<SampleSet> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument("dim must be 1 or 2".into()));
    }
    io::read_samples_csv(path, dim, merge, weight_policy(weights, dim))
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let samples = load_samples(&args.input, args.dim, args.merge_duplicates, args.weights)?;
    let (mx, my) = resolve_degrees(args.degree, args.degree_x, args.degree_y, args.dim)?;
    let cfg = SolverConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        x0: None,
    };
    match args.mode {
        ModeArg::Fixed => {
            let (poly, report) = match &samples.points {
                SamplePoints::One(_) => {
                    let path = match args.solver {
                        SolverArg::Normal => FitPath::NormalEquations,
                        SolverArg::DirectLs => FitPath::DirectLs,
                    };
                    approx::fit_1d(&samples, mx, &cfg, path)?
                }
                SamplePoints::Two(_) => approx::fit_2d(&samples, mx, my, &cfg)?,
            };
            io::write_coeffs_csv(&args.out, &poly, &samples.domain)?;
            let coeff_count = match &poly {
                CosinePoly::One(c) => c.len(),
                CosinePoly::Two(c) => c.len(),
            };
            println!(
                "{}",
                serde_json::json!({
                    "mode": "fixed",
                    "dim": args.dim,
                    "degree_x": mx,
                    "degree_y": if args.dim == 2 { Some(my) } else { None },
                    "coefficients": coeff_count,
                    "report": report,
                })
            );
        }
        ModeArg::Multilevel => {
            let epsilon = args.epsilon.ok_or_else(|| {
                Error::InvalidArgument("multilevel mode requires --epsilon".into())
            })?;
            let ml = MultilevelConfig {
                epsilon,
                literal_discrepancy: args.literal_discrepancy,
                ..MultilevelConfig::new(epsilon, mx)
            };
            let (poly, trace) = approx::multilevel_fit(&samples, &ml, &cfg)?;
            io::write_coeffs_csv(&args.out, &poly, &samples.domain)?;
            println!(
                "{}",
                serde_json::json!({
                    "mode": "multilevel",
                    "dim": args.dim,
                    "trace": trace,
                })
            );
        }
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let (poly, domain) = io::read_coeffs_csv(&args.coeffs)?;
    let field = poly.eval_grid(args.grid)?;
    io::write_grid_csv(&args.out, &field, &domain)?;
    if let Some(pgm) = &args.heatmap {
        io::write_pgm(pgm, &field)?;
    }
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let spec = match &args.field {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line(),
                msg: e.to_string(),
            })?;
            spec.dim = args.dim;
            spec.samples = args.samples;
            spec.noise_fraction = args.noise;
            spec.seed = args.seed;
            spec.grid_l = args.grid;
            spec
        }
        None => {
            let mut spec = ExperimentSpec::default_2d(args.samples, args.noise, args.seed, args.grid);
            spec.dim = args.dim;
            spec
        }
    };
    let experiment = synth_experiment(&spec)?;
    write_samples_csv(&args.out, &experiment.samples)?;
    io::write_grid_csv(
        &args.reference,
        &experiment.reference,
        &crate::approx::DomainMap::identity(),
    )?;
    Ok(())
}

fn write_samples_csv(path: &PathBuf, samples: &SampleSet) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match &samples.points {
        SamplePoints::One(pts) => {
            writeln!(out, "x,value")?;
            for (x, v) in pts.as_slice().iter().zip(&samples.values) {
                writeln!(out, "{x},{v}")?;
            }
        }
        SamplePoints::Two(pts) => {
            writeln!(out, "x,y,value")?;
            for (p, v) in pts.as_slice().iter().zip(&samples.values) {
                writeln!(out, "{},{},{v}", p[0], p[1])?;
            }
        }
    }
    Ok(())
}

fn run_baseline(args: &BaselineArgs) -> Result<()> {
    let samples = load_samples(&args.input, args.dim, args.merge_duplicates, args.weights)?;
    let (kx, ky) = resolve_degrees(args.degree, args.degree_x, args.degree_y, args.dim)?;
    let fit = baseline::fit_periodic(&samples, kx, if args.dim == 2 { ky } else { 0 })?;
    if fit.rank_deficient {
        eprintln!("warning: baseline design matrix is rank deficient");
    }
    let field = fit.eval_grid(args.grid)?;
    io::write_grid_csv(&args.out, &field, &samples.domain)?;
    println!(
        "{}",
        serde_json::json!({
            "baseline": "periodic",
            "coefficients": fit.coeff_count(),
            "rank_deficient": fit.rank_deficient,
        })
    );
    Ok(())
}

fn run_error(args: &ErrorArgs) -> Result<()> {
    let fit = io::read_grid_csv(&args.fit)?;
    let reference = io::read_grid_csv(&args.reference)?;
    let e = relative_l2_error(&fit, &reference)?;
    println!("{e}");
    Ok(())
}

/// Executes a parsed command.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Error(a) => run_error(a),
    }
}
