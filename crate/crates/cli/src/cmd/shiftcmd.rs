//! Covariate-shift detection over a corruption grid, emitting the
//! detection-ratio table as CSV.

use crate::output::{num, CsvSink};
use crate::{CliError, CmdResult};
use clap::Args;
use std::path::PathBuf;
use topoweight::io::{load_dataset, load_network};
use topoweight::shift::{
    run_detection_experiment, CorruptionKind, DatasetTable, ExperimentConfig, Method,
};

#[derive(Args)]
pub struct ShiftDetectArgs {
    /// Trained network (.json or .bin).
    pub network: PathBuf,
    /// Labeled dataset CSV with image features in [0, 1].
    pub data: PathBuf,
    /// Feature extraction method: softmax, tu, magdiff, or dgp.
    #[arg(long)]
    pub method: String,
    /// Corruption: gaussian_blur, gaussian_noise, uniform_noise, pixel_dropout.
    #[arg(long)]
    pub corruption: String,
    /// Comma-separated batch sizes.
    #[arg(long, default_value = "10,50,200")]
    pub n: String,
    /// Trials per grid cell.
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated intensity levels in 1..=6.
    #[arg(long, default_value = "1,2,3,4,5,6")]
    pub intensities: String,
    /// Comma-separated corrupted ratios in [0, 1]; 0 is clean-vs-clean.
    #[arg(long, default_value = "0.25,0.5,0.75,1.0")]
    pub ratios: String,
    /// Which dataset's corruption-parameter column to use.
    #[arg(long, default_value = "mnist")]
    pub table: String,
    /// Image shape as HxW; default assumes a square image.
    #[arg(long)]
    pub image_shape: Option<String>,
    /// Labeled samples used for class prototypes.
    #[arg(long, default_value_t = 1000)]
    pub prototypes: usize,
    /// Force layer standardisation on (DGP default) or off (TU default).
    #[arg(long, conflicts_with = "no_standardize")]
    pub standardize: bool,
    #[arg(long)]
    pub no_standardize: bool,
    /// Output CSV path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("{flag}: bad entry '{s}'")))
        })
        .collect()
}

pub fn run(args: ShiftDetectArgs) -> CmdResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let method: Method = args
        .method
        .parse()
        .map_err(|e: String| CliError::Usage(format!("--method: {e}")))?;
    let corruption: CorruptionKind = args
        .corruption
        .parse()
        .map_err(|e: String| CliError::Usage(format!("--corruption: {e}")))?;
    let table: DatasetTable = args
        .table
        .parse()
        .map_err(|e: String| CliError::Usage(format!("--table: {e}")))?;
    let sample_sizes: Vec<usize> = parse_list(&args.n, "--n")?;
    if sample_sizes.iter().any(|&n| n == 0) {
        return Err(CliError::Usage("--n entries must be at least 1".into()));
    }
    let intensity_levels: Vec<u8> = parse_list(&args.intensities, "--intensities")?;
    if intensity_levels.iter().any(|&l| !(1..=6).contains(&l)) {
        return Err(CliError::Usage("--intensities must be in 1..=6".into()));
    }
    let corrupted_ratios: Vec<f64> = parse_list(&args.ratios, "--ratios")?;
    if corrupted_ratios.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return Err(CliError::Usage("--ratios must be in [0, 1]".into()));
    }
    if args.prototypes == 0 {
        return Err(CliError::Usage("--prototypes must be at least 1".into()));
    }

    let net = load_network(&args.network)?;
    let data = load_dataset(&args.data)?;

    let image_shape = match &args.image_shape {
        Some(text) => {
            let parts: Vec<&str> = text.split('x').collect();
            let bad = || CliError::Usage(format!("--image-shape: expected HxW, got '{text}'"));
            if parts.len() != 2 {
                return Err(bad());
            }
            let h = parts[0].parse::<usize>().map_err(|_| bad())?;
            let w = parts[1].parse::<usize>().map_err(|_| bad())?;
            (h, w)
        }
        None => {
            let dim = data.feature_dim();
            let side = (dim as f64).sqrt().round() as usize;
            if side * side != dim {
                return Err(CliError::Usage(format!(
                    "feature dimension {dim} is not square; pass --image-shape HxW"
                )));
            }
            (side, side)
        }
    };

    let mut cfg = ExperimentConfig::new(method, corruption, image_shape, args.seed);
    cfg.table = table;
    cfg.intensity_levels = intensity_levels;
    cfg.corrupted_ratios = corrupted_ratios;
    cfg.sample_sizes = sample_sizes;
    cfg.trials = args.trials;
    cfg.prototype_count = args.prototypes;
    if args.standardize {
        cfg.standardise = true;
    } else if args.no_standardize {
        cfg.standardise = false;
    }

    let rows = run_detection_experiment(&net, &data, &cfg)?;

    let mut sink = CsvSink::create(
        args.output.as_ref(),
        "shift-detect",
        &[
            ("network", args.network.display().to_string()),
            ("data", args.data.display().to_string()),
            ("method", method.name().to_string()),
            ("corruption", corruption.name().to_string()),
            ("table", table.name().to_string()),
            ("intensities", args.intensities.clone()),
            ("ratios", args.ratios.clone()),
            ("n", args.n.clone()),
            ("trials", args.trials.to_string()),
            ("prototypes", args.prototypes.to_string()),
            ("standardize", cfg.standardise.to_string()),
            ("image_shape", format!("{}x{}", image_shape.0, image_shape.1)),
            ("uniform_noise_base", "sigma*U(-1,1)".to_string()),
            ("seed", args.seed.to_string()),
        ],
    )?;
    sink.line("method,corruption,intensity,delta,n,trials,detection_ratio")?;
    for row in rows {
        sink.row(&[
            row.method.name().to_string(),
            row.corruption.name().to_string(),
            row.intensity_level.to_string(),
            num(row.corrupted_ratio),
            row.n.to_string(),
            row.trials.to_string(),
            num(row.detection_ratio),
        ])?;
    }
    Ok(())
}
