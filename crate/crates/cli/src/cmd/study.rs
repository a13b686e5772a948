//! Synthetic-matrix studies: bound tightness, the variance/sortedness
//! regression, and the size-dependence trend, each emitted as CSV.

use crate::output::{num, CsvSink};
use crate::{CliError, CmdResult};
use clap::{Args, Subcommand};
use std::path::PathBuf;
use topoweight::stats::{linear_regression, DistributionSpec};
use topoweight::synth::{pareto_sortedness_ensemble, size_dependence_study};

#[derive(Subcommand)]
pub enum SynthStudy {
    /// Tightness of the persistence bounds on the noisy-sorted ensemble.
    Bounds(EnsembleArgs),
    /// Regression of persistence on log-variance and sortedness.
    Variance(EnsembleArgs),
    /// Mean normalised persistence across matrix sizes.
    Size(SizeArgs),
}

#[derive(Args)]
pub struct EnsembleArgs {
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub rows: usize,
    #[arg(long, default_value_t = 50)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SizeArgs {
    /// Comma-separated square sizes, e.g. "10,20,50,100".
    #[arg(long, default_value = "10,20,50,100")]
    pub sizes: String,
    /// Entry distribution: uniform, beta:A:B, trunc_exponential:L,
    /// trunc_normal:S, or trunc_pareto:B.
    #[arg(long, default_value = "uniform")]
    pub dist: String,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(study: SynthStudy) -> CmdResult {
    match study {
        SynthStudy::Bounds(args) => run_bounds(args),
        SynthStudy::Variance(args) => run_variance(args),
        SynthStudy::Size(args) => run_size(args),
    }
}

fn ensemble_flags(subcommand: &str, args: &EnsembleArgs) -> Vec<(&'static str, String)> {
    vec![
        ("study", subcommand.to_string()),
        ("trials", args.trials.to_string()),
        ("rows", args.rows.to_string()),
        ("cols", args.cols.to_string()),
        ("seed", args.seed.to_string()),
    ]
}

fn run_bounds(args: EnsembleArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let rows = pareto_sortedness_ensemble(args.trials, args.rows, args.cols, args.seed)?;
    let mut sink = CsvSink::create(
        args.output.as_ref(),
        "synth-study",
        &ensemble_flags("bounds", &args),
    )?;
    sink.line("trial,rows,cols,b,s,sortedness,log_variance,np,lower,upper")?;
    let mut lower_err = 0.0;
    let mut upper_err = 0.0;
    for row in &rows {
        sink.row(&[
            row.trial.to_string(),
            row.rows.to_string(),
            row.cols.to_string(),
            num(row.b),
            format!("{:.6e}", row.s),
            num(row.sortedness),
            num(row.log_variance),
            num(row.np),
            num(row.lower),
            num(row.upper),
        ])?;
        lower_err += row.np - row.lower;
        upper_err += row.upper - row.np;
    }
    let n = rows.len() as f64;
    sink.line(&format!("# lower_mean_abs_error {}", num(lower_err / n)))?;
    sink.line(&format!("# upper_mean_abs_error {}", num(upper_err / n)))?;
    Ok(())
}

fn run_variance(args: EnsembleArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let rows = pareto_sortedness_ensemble(args.trials, args.rows, args.cols, args.seed)?;
    let mut sink = CsvSink::create(
        args.output.as_ref(),
        "synth-study",
        &ensemble_flags("variance", &args),
    )?;
    sink.line("trial,b,s,log_variance,sortedness,np")?;
    for row in &rows {
        sink.row(&[
            row.trial.to_string(),
            num(row.b),
            format!("{:.6e}", row.s),
            num(row.log_variance),
            num(row.sortedness),
            num(row.np),
        ])?;
    }
    let log_var: Vec<f64> = rows.iter().map(|r| r.log_variance).collect();
    let sorted: Vec<f64> = rows.iter().map(|r| r.sortedness).collect();
    let np: Vec<f64> = rows.iter().map(|r| r.np).collect();
    let (_, r2) = linear_regression(&[log_var, sorted], &np);
    sink.line(&format!("# r_squared {}", num(r2)))?;
    Ok(())
}

pub fn parse_dist(text: &str) -> Result<DistributionSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let param = |i: usize| -> Result<f64, CliError> {
        parts
            .get(i)
            .and_then(|p| p.parse::<f64>().ok())
            .filter(|&v| v > 0.0)
            .ok_or_else(|| {
                CliError::Usage(format!("--dist '{text}': expected positive parameter"))
            })
    };
    match parts[0] {
        "uniform" => Ok(DistributionSpec::Beta {
            alpha: 1.0,
            beta: 1.0,
        }),
        "beta" => Ok(DistributionSpec::Beta {
            alpha: param(1)?,
            beta: param(2)?,
        }),
        "trunc_exponential" => Ok(DistributionSpec::TruncExponential { lambda: param(1)? }),
        "trunc_normal" => Ok(DistributionSpec::TruncNormal { sigma: param(1)? }),
        "trunc_pareto" => Ok(DistributionSpec::TruncPareto { b: param(1)? }),
        other => Err(CliError::Usage(format!(
            "--dist: unknown distribution '{other}'"
        ))),
    }
}

fn run_size(args: SizeArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let sizes: Vec<(usize, usize)> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .map(|v| (v, v))
                .ok_or_else(|| CliError::Usage(format!("--sizes: bad entry '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    let dist = parse_dist(&args.dist)?;
    let table = size_dependence_study(&dist, &sizes, args.trials, args.seed)?;
    let mut sink = CsvSink::create(
        args.output.as_ref(),
        "synth-study",
        &[
            ("study", "size".to_string()),
            ("sizes", args.sizes.clone()),
            ("dist", args.dist.clone()),
            ("trials", args.trials.to_string()),
            ("seed", args.seed.to_string()),
        ],
    )?;
    sink.line("rows,cols,mean_normalised_np")?;
    for row in table {
        sink.row(&[
            row.rows.to_string(),
            row.cols.to_string(),
            num(row.mean_normalised_np),
        ])?;
    }
    Ok(())
}
