//! Training and early-stopping commands.

use crate::output::{num, CsvSink};
use crate::{CliError, CmdResult};
use clap::Args;
use std::path::PathBuf;
use topoweight::io::{load_dataset, save_network};
use topoweight::train::{
    accuracy, criterion_series, early_stopping_epoch, train_mlp, Criterion, MetricSeries,
    TrainConfig,
};
use topoweight::Activation;

#[derive(Args)]
pub struct TrainArgs {
    /// Training data CSV.
    pub data: PathBuf,
    /// Comma-separated hidden layer widths; empty for a linear model.
    #[arg(long, default_value = "32")]
    pub layers: String,
    #[arg(long, default_value = "relu")]
    pub activation: String,
    #[arg(long, default_value_t = 0.003)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Checkpoint each epoch only instead of every quarter epoch.
    #[arg(long)]
    pub epoch_checkpoints: bool,
    /// Optional validation CSV; adds a val_accuracy column.
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Directory for checkpoint files and metrics.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run_train(args: TrainArgs) -> CmdResult {
    let hidden: Vec<usize> = if args.layers.trim().is_empty() {
        Vec::new()
    } else {
        args.layers
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| CliError::Usage(format!("--layers: bad width '{s}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let activation = match args.activation.as_str() {
        "relu" => Activation::Relu,
        "tanh" => Activation::Tanh,
        other => {
            return Err(CliError::Usage(format!(
                "--activation must be relu or tanh, got '{other}'"
            )))
        }
    };
    if args.epochs == 0 || args.epochs > 40 {
        return Err(CliError::Usage("--epochs must be in 1..=40".into()));
    }
    if args.batch_size == 0 {
        return Err(CliError::Usage("--batch-size must be at least 1".into()));
    }
    if !(args.lr >= 0.0 && args.lr.is_finite()) {
        return Err(CliError::Usage("--lr must be a finite nonnegative number".into()));
    }

    let data = load_dataset(&args.data)?;
    let val_data = args.val.as_ref().map(|p| load_dataset(p)).transpose()?;
    let mut cfg = TrainConfig::new(hidden, activation, args.epochs, args.seed);
    cfg.learning_rate = args.lr;
    cfg.batch_size = args.batch_size;
    cfg.quarter_epoch_checkpoints = !args.epoch_checkpoints;

    let outcome = train_mlp(&data, &cfg)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", args.out_dir.display())))?;
    for (idx, cp) in outcome.checkpoints.iter().enumerate() {
        let path = args.out_dir.join(format!("checkpoint_{idx:04}.json"));
        save_network(&path, &cp.network)?;
    }

    let np = criterion_series(&outcome.checkpoints, Criterion::Np, None)?;
    let variance = criterion_series(&outcome.checkpoints, Criterion::Variance, None)?;
    let dgp = criterion_series(
        &outcome.checkpoints,
        Criterion::Dgp { standardise: true },
        None,
    )?;
    let val_acc = val_data
        .as_ref()
        .map(|v| criterion_series(&outcome.checkpoints, Criterion::ValAccuracy, Some(v)))
        .transpose()?;

    let metrics_path = args.out_dir.join("metrics.csv");
    let mut sink = CsvSink::create(
        Some(&metrics_path),
        "train",
        &[
            ("data", args.data.display().to_string()),
            ("layers", args.layers.clone()),
            ("activation", args.activation.clone()),
            ("lr", args.lr.to_string()),
            ("batch_size", args.batch_size.to_string()),
            ("epochs", args.epochs.to_string()),
            ("seed", args.seed.to_string()),
        ],
    )?;
    let mut header = String::from("step,loss,np,variance,dgp");
    if val_acc.is_some() {
        header.push_str(",val_accuracy");
    }
    sink.line(&header)?;
    for i in 0..outcome.checkpoints.len() {
        let mut fields = vec![
            num(outcome.checkpoints[i].epoch_progress),
            num(outcome.train_loss.points[i].1),
            num(np.points[i].1),
            num(variance.points[i].1),
            num(dgp.points[i].1),
        ];
        if let Some(series) = &val_acc {
            fields.push(num(series.points[i].1));
        }
        sink.row(&fields)?;
    }

    let final_net = &outcome.checkpoints.last().unwrap().network;
    println!("checkpoints {}", outcome.checkpoints.len());
    println!("train_accuracy {}", num(accuracy(final_net, &data)?));
    if let Some(v) = &val_data {
        println!("val_accuracy {}", num(accuracy(final_net, v)?));
    }
    Ok(())
}

#[derive(Args)]
pub struct EarlystopArgs {
    /// Metrics CSV produced by `train` (or any CSV with a step column).
    pub metrics: PathBuf,
    /// Column to watch: np, variance, dgp, val_accuracy, or loss.
    #[arg(long)]
    pub criterion: String,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub patience: usize,
    /// Treat smaller values as improvements.
    #[arg(long)]
    pub lower_is_better: bool,
}

pub fn run_earlystop(args: EarlystopArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.metrics)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.metrics.display())))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data("metrics file is empty".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let step_col = columns.iter().position(|&c| c == "step").ok_or_else(|| {
        CliError::Data("metrics file needs a 'step' column".into())
    })?;
    let value_col = columns
        .iter()
        .position(|&c| c == args.criterion)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "--criterion '{}' not found; columns are {}",
                args.criterion,
                columns.join(", ")
            ))
        })?;

    let mut series = MetricSeries::default();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |col: usize| -> Result<f64, CliError> {
            fields
                .get(col)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "{} line {}: bad value in column {}",
                        args.metrics.display(),
                        idx + 2,
                        col + 1
                    ))
                })
        };
        series.points.push((parse(step_col)?, parse(value_col)?));
    }

    let stop = early_stopping_epoch(
        &series,
        args.burn_in,
        args.patience,
        !args.lower_is_better,
    )?;
    println!("stop_index {stop}");
    println!("stop_step {}", num(series.points[stop].0));
    println!("stop_value {}", num(series.points[stop].1));
    Ok(())
}
